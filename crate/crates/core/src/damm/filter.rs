//! Score-driven recursion for the dynamic Gaussian mixture.
//!
//! The unconstrained state is `(w̃, θ̃_1, …, θ̃_J)` with `w̃ ∈ R^{J-1}` mapped to
//! the simplex by stick breaking and `θ̃_j = (μ_j, ln σ_j)`. Each block follows
//! `x_{t+1} = κ + A ⊙ (Ξ 𝒥' ∇) + B ⊙ x_t` with diagonal `A`, `B`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::link::{simplex_jacobian, simplex_map};
use super::DammError;
use crate::Real;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Exponent `δ` of the inverse-information scaling applied to the component
/// blocks. The weight block is always unscaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreScaling {
    /// `δ = 0`
    Identity,
    /// `δ = 1/2`
    #[default]
    InverseSqrtFisher,
    /// `δ = 1`
    InverseFisher,
}

impl ScoreScaling {
    pub fn delta(self) -> f64 {
        match self {
            ScoreScaling::Identity => 0.0,
            ScoreScaling::InverseSqrtFisher => 0.5,
            ScoreScaling::InverseFisher => 1.0,
        }
    }
}

/// Recursion coefficients of one mixture component, in `(μ, ln σ)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentCoefficients<T> {
    pub kappa: [T; 2],
    pub a: [T; 2],
    pub b: [T; 2],
}

/// Full set of score-driven coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdCoefficients<T> {
    pub kappa_w: Vec<T>,
    pub a_w: Vec<T>,
    pub b_w: Vec<T>,
    pub components: Vec<ComponentCoefficients<T>>,
    pub scaling: ScoreScaling,
}

impl<T: Real> SdCoefficients<T> {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Checks dimensions, `A > 0` and `|B| < 1` on every diagonal entry.
    pub fn validate(&self) -> Result<(), DammError> {
        self.check_shape()?;
        let a_ok = self
            .a_w
            .iter()
            .chain(self.components.iter().flat_map(|c| c.a.iter()))
            .all(|&a| a > T::zero());
        let b_ok = self
            .b_w
            .iter()
            .chain(self.components.iter().flat_map(|c| c.b.iter()))
            .all(|&b| b.abs() < T::one());
        if !a_ok {
            return Err(DammError::Parameter(
                "every A entry must be positive".into(),
            ));
        }
        if !b_ok {
            return Err(DammError::Parameter(
                "every |B| entry must be below one".into(),
            ));
        }
        Ok(())
    }

    fn check_shape(&self) -> Result<(), DammError> {
        let j = self.components.len();
        if j == 0 {
            return Err(DammError::Parameter(
                "at least one component required".into(),
            ));
        }
        if self.kappa_w.len() != j - 1 || self.a_w.len() != j - 1 || self.b_w.len() != j - 1 {
            return Err(DammError::Parameter(format!(
                "weight block must have dimension {} for {j} components",
                j - 1
            )));
        }
        Ok(())
    }

    /// Unconditional mean `κ / (1 - B)` of the unconstrained recursion.
    pub fn stationary_state(&self) -> MixtureState<T> {
        let fix = |k: T, b: T| k / (T::one() - b);
        let w_tilde = self
            .kappa_w
            .iter()
            .zip(&self.b_w)
            .map(|(&k, &b)| fix(k, b))
            .collect();
        let theta_tilde = self
            .components
            .iter()
            .map(|c| [fix(c.kappa[0], c.b[0]), fix(c.kappa[1], c.b[1])])
            .collect();
        MixtureState::from_unconstrained(w_tilde, theta_tilde)
    }
}

/// Mixture parameters at one date together with their unconstrained form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureState<T> {
    pub weights: Vec<T>,
    pub means: Vec<T>,
    pub scales: Vec<T>,
    pub w_tilde: Vec<T>,
    pub theta_tilde: Vec<[T; 2]>,
}

impl<T: Real> MixtureState<T> {
    pub fn from_unconstrained(w_tilde: Vec<T>, theta_tilde: Vec<[T; 2]>) -> Self {
        assert_eq!(
            w_tilde.len() + 1,
            theta_tilde.len(),
            "weight and component blocks disagree on J"
        );
        let weights = simplex_map(&w_tilde);
        let means = theta_tilde.iter().map(|t| t[0]).collect();
        let scales = theta_tilde.iter().map(|t| t[1].exp()).collect();
        Self {
            weights,
            means,
            scales,
            w_tilde,
            theta_tilde,
        }
    }

    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    /// Log density of `y` under the mixture.
    pub fn log_density(&self, y: T) -> T {
        let logs = self.component_log_terms(y);
        log_sum_exp(&logs)
    }

    /// `ln w_j + ln φ(y | μ_j, σ_j²)` per component.
    fn component_log_terms(&self, y: T) -> Vec<T> {
        let c = T::c(HALF_LN_TWO_PI);
        let half = T::c(0.5);
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.theta_tilde)
            .map(|((&w, &mu), th)| {
                let z = (y - mu) / th[1].exp();
                w.ln() - c - th[1] - half * z * z
            })
            .collect()
    }
}

fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::c(f64::NEG_INFINITY), T::max);
    if !max.finite() {
        return max;
    }
    max + xs
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - max).exp())
        .ln()
}

/// Quantities produced while scoring one observation.
#[derive(Debug, Clone)]
pub struct ScoreStep<T: Real> {
    /// `ln p(y_t | θ_t)`
    pub log_density: T,
    /// `∂ ln p / ∂ w_j` treating the `J` weights as free coordinates.
    pub grad_weights: Vec<T>,
    /// `∂ ln p / ∂ (μ_j, σ_j)`.
    pub grad_components: Vec<[T; 2]>,
    /// `J × (J-1)` Jacobian of the simplex map.
    pub jacobian_w: DMatrix<T>,
    /// Diagonal of `∂(μ_j, σ_j) / ∂(μ_j, ln σ_j)`.
    pub jacobian_components: Vec<[T; 2]>,
    /// Diagonal of the Gaussian information in `(μ, σ)` coordinates.
    pub fisher_components: Vec<[T; 2]>,
    /// `𝒥^w' ∇_w`
    pub score_w: Vec<T>,
    /// `Ξ^j 𝒥^j' ∇_j`
    pub scaled_components: Vec<[T; 2]>,
}

/// Scores `y` under `state` and returns gradients, Jacobians and scaled scores.
pub fn score_step<T: Real>(
    y: T,
    state: &MixtureState<T>,
    scaling: ScoreScaling,
) -> Result<ScoreStep<T>, DammError> {
    let logs = state.component_log_terms(y);
    let log_density = log_sum_exp(&logs);
    if !log_density.finite() {
        return Err(DammError::Divergence {
            index: 0,
            reason: "mixture density is zero or non-finite".into(),
        });
    }
    let j_count = state.n_components();
    let mut grad_weights = Vec::with_capacity(j_count);
    let mut grad_components = Vec::with_capacity(j_count);
    let mut jacobian_components = Vec::with_capacity(j_count);
    let mut fisher_components = Vec::with_capacity(j_count);
    let mut scaled_components = Vec::with_capacity(j_count);
    let two = T::c(2.0);
    for j in 0..j_count {
        let resp = (logs[j] - log_density).exp();
        let w = state.weights[j];
        let sigma = state.scales[j];
        let z = (y - state.means[j]) / sigma;
        // φ_j / p = π_j / w_j, evaluated without dividing by a tiny weight
        let log_phi = logs[j] - w.ln();
        grad_weights.push((log_phi - log_density).exp());
        grad_components.push([resp * z / sigma, resp * (z * z - T::one()) / sigma]);
        jacobian_components.push([T::one(), sigma]);
        fisher_components.push([T::one() / (sigma * sigma), two / (sigma * sigma)]);
        // 𝒥'∇ = (π z / σ, π (z² - 1)); 𝒥'ℐ𝒥 = diag(1/σ², 2)
        let unscaled = [resp * z / sigma, resp * (z * z - T::one())];
        let scaled = match scaling {
            ScoreScaling::Identity => unscaled,
            ScoreScaling::InverseSqrtFisher => [unscaled[0] * sigma, unscaled[1] / two.sqrt()],
            ScoreScaling::InverseFisher => [unscaled[0] * sigma * sigma, unscaled[1] / two],
        };
        scaled_components.push(scaled);
    }
    let jacobian_w = simplex_jacobian(&state.w_tilde);
    let score_w = (0..j_count - 1)
        .map(|b| {
            (0..j_count).fold(T::zero(), |acc, j| {
                acc + jacobian_w[(j, b)] * grad_weights[j]
            })
        })
        .collect();
    let step = ScoreStep {
        log_density,
        grad_weights,
        grad_components,
        jacobian_w,
        jacobian_components,
        fisher_components,
        score_w,
        scaled_components,
    };
    let finite = step.score_w.iter().all(|v| v.finite())
        && step
            .scaled_components
            .iter()
            .all(|c| c[0].finite() && c[1].finite());
    if !finite {
        return Err(DammError::Divergence {
            index: 0,
            reason: "non-finite score".into(),
        });
    }
    Ok(step)
}

/// Advances the state by one observation.
pub fn damm_step<T: Real>(
    y: T,
    state: &MixtureState<T>,
    coeffs: &SdCoefficients<T>,
) -> Result<MixtureState<T>, DammError> {
    let step = score_step(y, state, coeffs.scaling)?;
    Ok(advance(state, &step, coeffs))
}

fn advance<T: Real>(
    state: &MixtureState<T>,
    step: &ScoreStep<T>,
    coeffs: &SdCoefficients<T>,
) -> MixtureState<T> {
    let w_tilde = (0..state.w_tilde.len())
        .map(|b| {
            coeffs.kappa_w[b] + coeffs.a_w[b] * step.score_w[b] + coeffs.b_w[b] * state.w_tilde[b]
        })
        .collect();
    let theta_tilde = coeffs
        .components
        .iter()
        .zip(&state.theta_tilde)
        .zip(&step.scaled_components)
        .map(|((c, th), s)| {
            [
                c.kappa[0] + c.a[0] * s[0] + c.b[0] * th[0],
                c.kappa[1] + c.a[1] * s[1] + c.b[1] * th[1],
            ]
        })
        .collect();
    MixtureState::from_unconstrained(w_tilde, theta_tilde)
}

/// Filtered path and log-likelihood.
#[derive(Debug, Clone)]
pub struct FilterOutput<T> {
    /// Predictive state for each observation (`states[t]` scores `y[t]`).
    pub states: Vec<MixtureState<T>>,
    pub log_likelihood: T,
}

/// Runs the recursion over `ys` starting from `initial`, or from the
/// stationary mean of the recursion when `initial` is `None`.
pub fn run_filter<T: Real>(
    ys: &[T],
    coeffs: &SdCoefficients<T>,
    initial: Option<MixtureState<T>>,
) -> Result<FilterOutput<T>, DammError> {
    let mut state = initial.unwrap_or_else(|| coeffs.stationary_state());
    let mut states = Vec::with_capacity(ys.len());
    let mut log_likelihood = T::zero();
    for (t, &y) in ys.iter().enumerate() {
        let step = score_step(y, &state, coeffs.scaling).map_err(|e| e.at(t))?;
        log_likelihood += step.log_density;
        let next = advance(&state, &step, coeffs);
        if !next.scales.iter().all(|s| s.finite() && *s > T::zero())
            || !next.weights.iter().all(|w| w.finite())
        {
            return Err(DammError::Divergence {
                index: t,
                reason: "state left the admissible region".into(),
            });
        }
        states.push(std::mem::replace(&mut state, next));
    }
    Ok(FilterOutput {
        states,
        log_likelihood,
    })
}

/// Log-likelihood only, without storing the path.
pub fn log_likelihood<T: Real>(ys: &[T], coeffs: &SdCoefficients<T>) -> Result<T, DammError> {
    let mut state = coeffs.stationary_state();
    let mut total = T::zero();
    for (t, &y) in ys.iter().enumerate() {
        let step = score_step(y, &state, coeffs.scaling).map_err(|e| e.at(t))?;
        total += step.log_density;
        state = advance(&state, &step, coeffs);
        if !state.scales.iter().all(|s| s.finite() && *s > T::zero()) {
            return Err(DammError::Divergence {
                index: t,
                reason: "state left the admissible region".into(),
            });
        }
    }
    Ok(total)
}
