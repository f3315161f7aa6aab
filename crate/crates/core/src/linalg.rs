//! Small dense least-squares helpers shared by the regression-based stages.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LinalgError {
    #[error("regressor matrix is rank deficient (columns {columns:?} are collinear)")]
    RankDeficient { columns: Vec<usize> },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Ordinary least-squares fit.
#[derive(Debug, Clone)]
pub struct Ols {
    pub coef: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `(X'X)^{-1}`
    pub xtx_inv: DMatrix<f64>,
    pub ssr: f64,
    pub nobs: usize,
}

impl Ols {
    pub fn n_regressors(&self) -> usize {
        self.coef.len()
    }

    /// Classical standard errors with the `n - k` degrees-of-freedom variance.
    pub fn classical_se(&self) -> DVector<f64> {
        let s2 = self.ssr / (self.nobs - self.n_regressors()) as f64;
        DVector::from_iterator(
            self.coef.len(),
            (0..self.coef.len()).map(|i| (s2 * self.xtx_inv[(i, i)]).sqrt()),
        )
    }

    /// Gaussian log-likelihood at the ML variance estimate.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.nobs as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (self.ssr / n).ln() + 1.0)
    }
}

/// Relative pivot threshold below which a column counts as collinear.
const RANK_TOL: f64 = 1e-10;

/// Solves `min ‖y - Xb‖` through a pivot-checked Cholesky of `X'X`.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Ols, LinalgError> {
    if x.nrows() != y.len() {
        return Err(LinalgError::Dimension(format!(
            "{} regressor rows vs {} observations",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < x.ncols() {
        return Err(LinalgError::Dimension(format!(
            "{} observations for {} regressors",
            x.nrows(),
            x.ncols()
        )));
    }
    let xtx = x.transpose() * x;
    let xtx_inv = checked_inverse(&xtx)?;
    let coef = &xtx_inv * (x.transpose() * y);
    let residuals = y - x * &coef;
    let ssr = residuals.norm_squared();
    Ok(Ols {
        coef,
        residuals,
        xtx_inv,
        ssr,
        nobs: x.nrows(),
    })
}

/// Inverse of a symmetric positive semi-definite matrix, reporting the
/// columns whose Gram–Schmidt pivot collapses.
pub fn checked_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    let scale: Vec<f64> = (0..n).map(|i| a[(i, i)].abs().sqrt().max(1e-300)).collect();
    // Work on the correlation-scaled matrix so the pivot test is unit-free.
    let scaled = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (scale[i] * scale[j]));
    let bad = collinear_columns(&scaled);
    if !bad.is_empty() || a.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::RankDeficient { columns: bad });
    }
    let chol =
        nalgebra::Cholesky::new(scaled).ok_or(LinalgError::RankDeficient { columns: vec![] })?;
    let inv = chol.inverse();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        inv[(i, j)] / (scale[i] * scale[j])
    }))
}

fn collinear_columns(scaled: &DMatrix<f64>) -> Vec<usize> {
    let n = scaled.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut bad = Vec::new();
    for j in 0..n {
        let mut d = scaled[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > RANK_TOL) {
            bad.push(j);
            continue;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = scaled[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    bad
}
