//! Link functions between the unconstrained score-driven state and the
//! mixture parameters.

use nalgebra::DMatrix;

use super::DammError;
use crate::Real;

/// Logistic function rescaled onto `(lower, upper)`.
pub fn modified_logistic<T: Real>(lower: T, upper: T, x: T) -> Result<T, DammError> {
    if !(lower < upper) {
        return Err(DammError::Parameter(format!(
            "modified logistic needs lower < upper, got [{}, {}]",
            lower.f64(),
            upper.f64()
        )));
    }
    Ok(lower + (upper - lower) * sigmoid(x))
}

#[inline]
pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Derivative of the standard logistic, `exp(-x) / (1 + exp(-x))^2`.
#[inline]
fn sigmoid_slope<T: Real>(x: T) -> T {
    let s = sigmoid(x);
    s * sigmoid(-x)
}

/// Stick-breaking map from `R^{J-1}` onto the open unit simplex in `R^J`.
///
/// `w_j = b_j * logistic(x_j)` for `j < J` with `b_1 = 1` and
/// `b_j = b_{j-1} - w_{j-1}`; the last weight takes the remaining stick.
pub fn simplex_map<T: Real>(w_tilde: &[T]) -> Vec<T> {
    let mut weights = Vec::with_capacity(w_tilde.len() + 1);
    let mut stick = T::one();
    for &x in w_tilde {
        weights.push(stick * sigmoid(x));
        // remaining stick computed multiplicatively so it never underflows to a
        // negative difference
        stick *= sigmoid(-x);
    }
    weights.push(stick);
    weights
}

/// Remaining stick lengths `b_1, …, b_{J-1}`.
fn sticks<T: Real>(w_tilde: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(w_tilde.len());
    let mut stick = T::one();
    for &x in w_tilde {
        out.push(stick);
        stick *= sigmoid(-x);
    }
    out
}

/// Jacobian `∂w / ∂w̃` of [`simplex_map`], a `J × (J-1)` matrix.
///
/// Rows below the diagonal chain through the stick length: for `b < j < J`,
/// `∂w_j/∂w̃_b = -logistic(w̃_j) * Σ_{k<j} ∂w_k/∂w̃_b`; the last row is minus
/// the sum of the rows above so every column sums to zero.
pub fn simplex_jacobian<T: Real>(w_tilde: &[T]) -> DMatrix<T> {
    let jm1 = w_tilde.len();
    let j_count = jm1 + 1;
    let b = sticks(w_tilde);
    let mut jac = DMatrix::<T>::zeros(j_count, jm1);
    for col in 0..jm1 {
        let mut running = T::zero();
        for row in 0..jm1 {
            let entry = if row == col {
                b[row] * sigmoid_slope(w_tilde[row])
            } else if col < row {
                -running * sigmoid(w_tilde[row])
            } else {
                T::zero()
            };
            jac[(row, col)] = entry;
            running += entry;
        }
        jac[(jm1, col)] = -running;
    }
    jac
}
