use nalgebra::DVector;

use crate::Real;

/// Prior variance on every intercept.
pub const INTERCEPT_PRIOR_VARIANCE: f64 = 100.0;

/// Zero-mean Minnesota prior for `β = vec([c, B_1, …, B_p]')`.
///
/// Coefficients are stored equation by equation; within an equation the
/// intercept comes first followed by the `N` coefficients of each lag. Lag `l`
/// coefficients get variance `γ / l²`.
pub fn minnesota_prior<T: Real>(n: usize, p: usize, gamma: T) -> (DVector<T>, DVector<T>) {
    let k = 1 + n * p;
    let mut var = DVector::zeros(n * k);
    for eq in 0..n {
        var[eq * k] = T::c(INTERCEPT_PRIOR_VARIANCE);
        for lag in 1..=p {
            let l = T::from_count(lag);
            for j in 0..n {
                var[eq * k + 1 + (lag - 1) * n + j] = gamma / (l * l);
            }
        }
    }
    (DVector::zeros(n * k), var)
}
