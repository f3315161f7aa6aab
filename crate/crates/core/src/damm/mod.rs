//! Dynamic adaptive Gaussian mixtures with score-driven parameters.
//!
//! A return `y_t` is modelled as `Σ_j w_{j,t} N(μ_{j,t}, σ_{j,t}²)` where the
//! weights and component parameters follow score-driven recursions. The
//! fitted predictive mixtures give conditional variance, skewness and excess
//! kurtosis paths that feed the higher-moment connectedness layers.

mod filter;
mod fit;
mod io;
mod link;
mod moments;

pub use filter::{
    damm_step, log_likelihood, run_filter, score_step, ComponentCoefficients, FilterOutput,
    MixtureState, ScoreScaling, ScoreStep, SdCoefficients,
};
pub use fit::{
    damm_fit, extract_moment_panel, DammConfig, DammFit, FitDiagnostics, MomentPanel,
    MIN_FIT_LENGTH,
};
pub use io::{read_moments, write_moments, MomentTable};
pub use link::{modified_logistic, simplex_jacobian, simplex_map};
pub use moments::{mixture_moments, printed_mixture_moments, Moments};

#[derive(Debug, thiserror::Error)]
pub enum DammError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("filter diverged at observation {index}: {reason}")]
    Divergence { index: usize, reason: String },
    #[error("series too short: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("optimizer did not converge after {iterations} iterations (best log-likelihood {log_likelihood})")]
    NotConverged {
        log_likelihood: f64,
        iterations: usize,
        diagnostics: Box<FitDiagnostics>,
    },
    #[error("series {name}: {source}")]
    Series {
        name: String,
        #[source]
        source: Box<DammError>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl DammError {
    /// Attaches an observation index to divergence errors.
    pub(crate) fn at(self, index: usize) -> Self {
        match self {
            DammError::Divergence { reason, .. } => DammError::Divergence { index, reason },
            other => other,
        }
    }
}
