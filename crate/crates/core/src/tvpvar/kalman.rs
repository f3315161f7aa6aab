use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{minnesota_prior, TvpVarError, TvpVarSpec};
use crate::Real;

/// Innovation covariances with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Condition numbers above this are reported as warnings.
const WARN_CONDITION: f64 = 1e8;

/// Filter quantities at one date.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState<T: Real> {
    /// `β_{t|t}`
    pub beta: DVector<T>,
    /// `P_{t|t}`
    pub p: DMatrix<T>,
    /// EWMA measurement covariance `Σ_t`.
    pub sigma: DMatrix<T>,
    /// Prediction residual `ỹ_t`.
    pub residual: DVector<T>,
    /// Innovation covariance `F_t`.
    pub f: DMatrix<T>,
    /// Kalman gain `K_t`.
    pub gain: DMatrix<T>,
}

impl<T: Real> FilterState<T> {
    pub fn initial(beta: DVector<T>, p: DMatrix<T>, sigma: DMatrix<T>) -> Self {
        let n = sigma.nrows();
        let m = beta.len();
        Self {
            beta,
            p,
            f: sigma.clone(),
            sigma,
            residual: DVector::zeros(n),
            gain: DMatrix::zeros(m, n),
        }
    }

    /// Lag-coefficient matrices and intercept implied by `β`.
    pub fn coefficients(&self, lags: usize) -> (DVector<T>, Vec<DMatrix<T>>) {
        var_coefficients(&self.beta, self.sigma.nrows(), lags)
    }
}

/// Unpacks `β = vec([c, B_1, …, B_p]')` into `c` and `B_1..B_p`.
pub fn var_coefficients<T: Real>(
    beta: &DVector<T>,
    n: usize,
    p: usize,
) -> (DVector<T>, Vec<DMatrix<T>>) {
    let k = 1 + n * p;
    let c = DVector::from_fn(n, |i, _| beta[i * k]);
    let b = (0..p)
        .map(|l| DMatrix::from_fn(n, n, |i, j| beta[i * k + 1 + l * n + j]))
        .collect();
    (c, b)
}

/// `[1, y'_{t−1}, …, y'_{t−p}]` for row `t` of a `T × N` panel.
pub fn regressors<T: Real>(data: &DMatrix<T>, t: usize, p: usize) -> DVector<T> {
    let n = data.ncols();
    let mut x = DVector::zeros(1 + n * p);
    x[0] = T::one();
    for l in 1..=p {
        for j in 0..n {
            x[1 + (l - 1) * n + j] = data[(t - l, j)];
        }
    }
    x
}

/// One forgetting-factor Kalman update with `Z_t = I_N ⊗ x'`.
pub fn kalman_step<T: Real>(
    y: &DVector<T>,
    x: &DVector<T>,
    prev: &FilterState<T>,
    spec: &TvpVarSpec,
) -> Result<FilterState<T>, TvpVarError> {
    let n = y.len();
    let k = x.len();
    let m = n * k;
    if prev.beta.len() != m || prev.p.nrows() != m || prev.sigma.nrows() != n {
        return Err(TvpVarError::Dimension(format!(
            "state of size {} for {n} equations with {k} regressors",
            prev.beta.len()
        )));
    }
    let lambda = T::c(spec.lambda);
    let kappa = T::c(spec.kappa);
    let p_pred = &prev.p / lambda;

    let mut residual = DVector::zeros(n);
    for i in 0..n {
        residual[i] = y[i] - prev.beta.rows(i * k, k).dot(x);
    }
    let sigma = &prev.sigma * kappa + (&residual * residual.transpose()) * (T::one() - kappa);

    // P Z' column by column: column i only touches the i-th coefficient block.
    let mut pz = DMatrix::zeros(m, n);
    for i in 0..n {
        let col = p_pred.columns(i * k, k) * x;
        pz.set_column(i, &col);
    }
    let mut f = sigma.clone();
    for i in 0..n {
        for j in 0..n {
            f[(i, j)] += pz.view((i * k, j), (k, 1)).dot(x);
        }
    }
    let f = (&f + f.transpose()) * T::c(0.5);
    let f_inv = guarded_inverse(&f)?;
    let gain = &pz * f_inv;
    let beta = &prev.beta + &gain * &residual;
    let p = &p_pred - &gain * pz.transpose();
    let p = (&p + p.transpose()) * T::c(0.5);
    Ok(FilterState {
        beta,
        p,
        sigma,
        residual,
        f,
        gain,
    })
}

fn condition_number<T: Real>(eig: &SymmetricEigen<T, nalgebra::Dyn>) -> f64 {
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.f64()), hi.max(v.f64()))
        });
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn guarded_inverse<T: Real>(f: &DMatrix<T>) -> Result<DMatrix<T>, TvpVarError> {
    if f.iter().any(|v| !v.finite()) {
        return Err(TvpVarError::Conditioning {
            index: 0,
            condition: f64::NAN,
        });
    }
    let eig = SymmetricEigen::new(f.clone());
    let condition = condition_number(&eig);
    if !(condition <= MAX_CONDITION) {
        return Err(TvpVarError::Conditioning {
            index: 0,
            condition,
        });
    }
    let inv_vals = eig.eigenvalues.map(|v| T::one() / v);
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv_vals) * v.transpose())
}

/// Filtered quantities retained for every date.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSnapshot<T: Real> {
    /// Row of the input panel this state belongs to.
    pub row: usize,
    pub beta: DVector<T>,
    /// Diagonal of `P_{t|t}`.
    pub beta_var: DVector<T>,
    pub sigma: DMatrix<T>,
    pub residual: DVector<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvpVarDiagnostics {
    pub lags: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub horizon: usize,
    pub max_condition: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TvpVarOutput<T: Real> {
    pub spec: TvpVarSpec,
    pub snapshots: Vec<FilterSnapshot<T>>,
    /// Full state at the final date.
    pub last: FilterState<T>,
    pub diagnostics: TvpVarDiagnostics,
}

/// Filters a `T × N` panel with the Minnesota prior.
pub fn fit_tvpvar<T: Real>(
    data: &DMatrix<T>,
    spec: &TvpVarSpec,
) -> Result<TvpVarOutput<T>, TvpVarError> {
    let (mean, var) = minnesota_prior(data.ncols(), spec.lags, T::c(spec.gamma));
    fit_tvpvar_with_prior(data, spec, mean, DMatrix::from_diagonal(&var))
}

/// Filters with an explicit prior `β_0 ~ N(mean, cov)`.
pub fn fit_tvpvar_with_prior<T: Real>(
    data: &DMatrix<T>,
    spec: &TvpVarSpec,
    mean: DVector<T>,
    cov: DMatrix<T>,
) -> Result<TvpVarOutput<T>, TvpVarError> {
    spec.validate()?;
    let (t_len, n) = data.shape();
    if n != spec.n {
        return Err(TvpVarError::Dimension(format!(
            "panel has {n} series, spec expects {}",
            spec.n
        )));
    }
    let needed = n * spec.lags + 11;
    if t_len < needed {
        return Err(TvpVarError::InsufficientData { needed, got: t_len });
    }
    if data.iter().any(|v| !v.finite()) {
        return Err(TvpVarError::Domain(
            "panel contains non-finite values".into(),
        ));
    }
    let sigma0 = initial_sigma(data);
    let mut state = FilterState::initial(mean, cov, sigma0);
    let mut snapshots = Vec::with_capacity(t_len - spec.lags);
    let mut max_condition: f64 = 0.0;
    let mut warnings = Vec::new();
    for t in spec.lags..t_len {
        let y = data.row(t).transpose();
        let x = regressors(data, t, spec.lags);
        state = kalman_step(&y, &x, &state, spec).map_err(|e| e.at(t))?;
        let cond = condition_number(&SymmetricEigen::new(state.f.clone()));
        max_condition = max_condition.max(cond);
        if cond > WARN_CONDITION {
            warnings.push(format!(
                "row {t}: innovation covariance condition {cond:.3e}"
            ));
        }
        snapshots.push(FilterSnapshot {
            row: t,
            beta: state.beta.clone(),
            beta_var: state.p.diagonal(),
            sigma: state.sigma.clone(),
            residual: state.residual.clone(),
        });
    }
    Ok(TvpVarOutput {
        spec: spec.clone(),
        snapshots,
        last: state,
        diagnostics: TvpVarDiagnostics {
            lags: spec.lags,
            lambda: spec.lambda,
            kappa: spec.kappa,
            gamma: spec.gamma,
            horizon: spec.horizon,
            max_condition,
            warnings,
        },
    })
}

/// Sample covariance of the demeaned first `min(60, T/4)` rows.
fn initial_sigma<T: Real>(data: &DMatrix<T>) -> DMatrix<T> {
    let m = 60.min(data.nrows() / 4).max(2);
    let block = data.rows(0, m);
    let mean = block.row_mean();
    let mut centered = block.into_owned();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    (centered.transpose() * &centered) / T::from_count(m - 1)
}
