use nalgebra::DMatrix;

use super::TvpVarError;
use crate::linalg::checked_inverse;
use crate::Real;

/// BIC lag choice from constant-coefficient OLS fits on a common sample that
/// drops the first `p_max` rows for every candidate.
pub fn select_lag<T: Real>(data: &DMatrix<T>, p_max: usize) -> Result<usize, TvpVarError> {
    if p_max == 0 {
        return Err(TvpVarError::Spec("p_max must be at least 1".into()));
    }
    let (t_len, n) = data.shape();
    let needed = p_max + n * p_max + 2;
    if t_len < needed {
        return Err(TvpVarError::InsufficientData { needed, got: t_len });
    }
    if p_max == 1 {
        return Ok(1);
    }
    let y = DMatrix::from_fn(t_len - p_max, n, |r, j| data[(r + p_max, j)].f64());
    let t_eff = (t_len - p_max) as f64;
    let mut best = (f64::INFINITY, 1);
    for p in 1..=p_max {
        let k = 1 + n * p;
        let x = DMatrix::from_fn(t_len - p_max, k, |r, c| {
            if c == 0 {
                1.0
            } else {
                let lag = (c - 1) / n + 1;
                data[(r + p_max - lag, (c - 1) % n)].f64()
            }
        });
        let xtx_inv = checked_inverse(&(x.transpose() * &x))
            .map_err(|e| TvpVarError::Domain(format!("lag {p}: {e}")))?;
        let coef = xtx_inv * x.transpose() * &y;
        let resid = &y - &x * coef;
        let sigma = resid.transpose() * &resid / t_eff;
        let chol = nalgebra::Cholesky::new(sigma)
            .ok_or_else(|| TvpVarError::Domain(format!("lag {p}: singular residual covariance")))?;
        let ln_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        let bic = ln_det + (n * k) as f64 * t_eff.ln() / t_eff;
        if bic < best.0 {
            best = (bic, p);
        }
    }
    Ok(best.1)
}
