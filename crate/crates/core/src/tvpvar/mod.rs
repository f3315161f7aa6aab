//! Time-varying-parameter VAR filtered with forgetting factors, and the
//! generalized forecast-error variance decomposition at each date.

mod gfevd;
mod kalman;
mod lag;
mod prior;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gfevd::{gfevd, vma_expand, GfevdTable, VmaCoefficients};
pub use kalman::{
    fit_tvpvar, fit_tvpvar_with_prior, kalman_step, regressors, var_coefficients, FilterSnapshot,
    FilterState, TvpVarDiagnostics, TvpVarOutput, MAX_CONDITION,
};
pub use lag::select_lag;
pub use prior::{minnesota_prior, INTERCEPT_PRIOR_VARIANCE};

use crate::Real;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TvpVarError {
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error(
        "innovation covariance ill-conditioned at row {index} (condition number {condition:.3e})"
    )]
    Conditioning { index: usize, condition: f64 },
}

impl TvpVarError {
    pub(crate) fn at(self, index: usize) -> Self {
        match self {
            TvpVarError::Conditioning { condition, .. } => {
                TvpVarError::Conditioning { index, condition }
            }
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvpVarSpec {
    /// Number of variables.
    pub n: usize,
    pub lags: usize,
    /// Forgetting factor λ.
    pub lambda: f64,
    /// EWMA decay κ.
    pub kappa: f64,
    /// Minnesota shrinkage γ.
    pub gamma: f64,
    /// GFEVD horizon H.
    pub horizon: usize,
}

impl TvpVarSpec {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            lags: 1,
            lambda: 0.99,
            kappa: 0.99,
            gamma: 0.01,
            horizon: 12,
        }
    }

    pub fn validate(&self) -> Result<(), TvpVarError> {
        let bad = |m: &str| Err(TvpVarError::Spec(m.into()));
        if self.n == 0 {
            return bad("system needs at least one variable");
        }
        if self.lags == 0 {
            return bad("lag order must be at least 1");
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad("forgetting factor must lie in (0, 1]");
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("EWMA decay must lie in (0, 1)");
        }
        if !(self.gamma > 0.0) {
            return bad("shrinkage must be positive");
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        Ok(())
    }
}

impl<T: Real> TvpVarOutput<T> {
    /// GFEVD at every filtered date, computed in parallel.
    pub fn gfevd_path(&self) -> Result<Vec<GfevdTable<T>>, TvpVarError> {
        let (n, p, h) = (self.spec.n, self.spec.lags, self.spec.horizon);
        self.snapshots
            .par_iter()
            .map(|s| {
                let (_, b) = var_coefficients(&s.beta, n, p);
                gfevd(&vma_expand(&b, h), &s.sigma)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_defaults_and_validation() {
        let s = TvpVarSpec::new(9);
        assert!(s.validate().is_ok());
        assert_eq!(
            (s.lambda, s.kappa, s.gamma, s.horizon),
            (0.99, 0.99, 0.01, 12)
        );
        for bad in [
            TvpVarSpec {
                lambda: 0.0,
                ..s.clone()
            },
            TvpVarSpec {
                lambda: 1.01,
                ..s.clone()
            },
            TvpVarSpec {
                kappa: 1.0,
                ..s.clone()
            },
            TvpVarSpec {
                gamma: 0.0,
                ..s.clone()
            },
            TvpVarSpec {
                horizon: 0,
                ..s.clone()
            },
            TvpVarSpec {
                lags: 0,
                ..s.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        assert!(TvpVarSpec { lambda: 1.0, ..s }.validate().is_ok());
    }
}
