use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MacroPanel, ShocksError, SurprisePanel};
use crate::linalg::{checked_inverse, LinalgError};

/// Number of surprise variables (rate, equity).
pub const N_SURPRISE: usize = 2;
/// Number of macro variables.
pub const N_MACRO: usize = 5;
const DIM: usize = N_SURPRISE + N_MACRO;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BvarConfig {
    pub lags: usize,
    pub draws: usize,
    pub angles: usize,
    pub seed: u64,
    /// Prior precision on every y-equation coefficient (prior mean zero).
    pub coefficient_precision: f64,
    /// Inverse-Wishart scale as a multiple of the residual sample covariance.
    pub scale_factor: f64,
}

impl Default for BvarConfig {
    fn default() -> Self {
        Self {
            lags: 12,
            draws: 1000,
            angles: 100,
            seed: 20240101,
            coefficient_precision: 1e-3,
            scale_factor: 0.1,
        }
    }
}

impl BvarConfig {
    pub fn validate(&self) -> Result<(), ShocksError> {
        if self.lags == 0 || self.draws == 0 || self.angles == 0 {
            return Err(ShocksError::Config(
                "lags, draws and angles must be positive".into(),
            ));
        }
        if !(self.coefficient_precision > 0.0) || !(self.scale_factor > 0.0) {
            return Err(ShocksError::Config(
                "prior precision and scale factor must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One reduced-form posterior draw of the restricted system. Variables are
/// ordered `(m_rate, m_equity, gs1, spx, cpi, ebp, indpro)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFormDraw {
    /// Intercepts; the surprise rows are zero.
    pub intercept: DVector<f64>,
    /// `B_1..B_p`, each `7 × 7`; the surprise rows are zero.
    pub lags: Vec<DMatrix<f64>>,
    pub sigma: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct BvarPosterior {
    pub draws: Vec<ReducedFormDraw>,
    /// Surprise residuals, equal to the surprises themselves over the
    /// effective sample.
    pub surprise_residuals: DMatrix<f64>,
    /// Index of the first month of the effective sample.
    pub first_row: usize,
    pub scale: DMatrix<f64>,
    pub dof: f64,
}

impl BvarPosterior {
    /// Posterior mean of `Σ`.
    pub fn sigma_mean(&self) -> DMatrix<f64> {
        &self.scale / (self.dof - DIM as f64 - 1.0)
    }
}

fn rank_error(e: LinalgError) -> ShocksError {
    ShocksError::Estimation(format!("regressor matrix: {e}"))
}

/// Independent RNG stream for draw `index` under `seed`.
pub(crate) fn stream(seed: u64, domain: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 40) | index as u64);
    rng
}

/// Draws `Σ ~ IW(scale, dof)` by the Bartlett decomposition.
fn inverse_wishart(
    scale: &DMatrix<f64>,
    dof: f64,
    rng: &mut ChaCha8Rng,
) -> Result<DMatrix<f64>, ShocksError> {
    let p = scale.nrows();
    let prec =
        checked_inverse(scale).map_err(|e| ShocksError::Numerical(format!("IW scale: {e}")))?;
    let l = nalgebra::Cholesky::new(prec)
        .ok_or_else(|| ShocksError::Numerical("IW scale not positive definite".into()))?
        .l();
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(dof - i as f64)
            .map_err(|e| ShocksError::Numerical(format!("IW degrees of freedom: {e}")))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l * a;
    let w = &la * la.transpose();
    let s =
        checked_inverse(&w).map_err(|e| ShocksError::Numerical(format!("Wishart draw: {e}")))?;
    Ok((&s + s.transpose()) * 0.5)
}

fn chol_lower(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>, ShocksError> {
    nalgebra::Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or_else(|| ShocksError::Numerical(format!("{what} is not positive definite")))
}

fn sample_covariance(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows() as f64;
    let mean = u.row_mean();
    let mut c = u.clone();
    for mut r in c.row_iter_mut() {
        r -= &mean;
    }
    c.transpose() * &c / (n - 1.0)
}

/// Posterior sampling for the block-restricted VAR in which the surprises
/// are white noise and the macro equations load on lags of everything.
pub fn fit_restricted_bvar(
    m: &SurprisePanel,
    y: &MacroPanel,
    config: &BvarConfig,
) -> Result<BvarPosterior, ShocksError> {
    config.validate()?;
    if m.months != y.months {
        return Err(ShocksError::Data("surprise and macro months differ".into()));
    }
    if y.values.ncols() != N_MACRO || m.values.ncols() != N_SURPRISE {
        return Err(ShocksError::Data(
            "expected 2 surprise and 5 macro columns".into(),
        ));
    }
    let t_len = m.months.len();
    let p = config.lags;
    let needed = DIM * p + 21 + p;
    if t_len < needed {
        return Err(ShocksError::InsufficientData { needed, got: t_len });
    }
    let z = DMatrix::from_fn(t_len, DIM, |t, j| {
        if j < N_SURPRISE {
            m.values[(t, j)]
        } else {
            y.values[(t, j - N_SURPRISE)]
        }
    });
    if z.iter().any(|v| !v.is_finite()) {
        return Err(ShocksError::Data(
            "non-finite values in the monthly panels".into(),
        ));
    }
    let t_eff = t_len - p;
    let k = 1 + DIM * p;
    let x = DMatrix::from_fn(t_eff, k, |r, c| {
        if c == 0 {
            1.0
        } else {
            let lag = (c - 1) / DIM + 1;
            z[(r + p - lag, (c - 1) % DIM)]
        }
    });
    let yy = DMatrix::from_fn(t_eff, N_MACRO, |r, j| z[(r + p, N_SURPRISE + j)]);
    let mm = DMatrix::from_fn(t_eff, N_SURPRISE, |r, j| z[(r + p, j)]);

    // Scale the design so the ridge precision is unit-free, then map back.
    let col_scale: Vec<f64> = (0..k)
        .map(|c| {
            (x.column(c).norm_squared() / t_eff as f64)
                .sqrt()
                .max(1e-12)
        })
        .collect();
    let xs = DMatrix::from_fn(t_eff, k, |r, c| x[(r, c)] / col_scale[c]);
    checked_inverse(&(xs.transpose() * &xs)).map_err(rank_error)?;
    let omega_inv = xs.transpose() * &xs + DMatrix::identity(k, k) * config.coefficient_precision;
    let omega_s = checked_inverse(&omega_inv).map_err(rank_error)?;
    let b_s = &omega_s * xs.transpose() * &yy;
    let resid_y = &yy - &xs * &b_s;
    let b_bar = DMatrix::from_fn(k, N_MACRO, |r, c| b_s[(r, c)] / col_scale[r]);
    let omega = DMatrix::from_fn(k, k, |r, c| omega_s[(r, c)] / (col_scale[r] * col_scale[c]));
    let omega_chol = chol_lower(&omega, "coefficient posterior covariance")?;

    let mut u = DMatrix::zeros(t_eff, DIM);
    u.columns_mut(0, N_SURPRISE).copy_from(&mm);
    u.columns_mut(N_SURPRISE, N_MACRO).copy_from(&resid_y);
    let cov = sample_covariance(&u);
    let prior_scale = match nalgebra::Cholesky::new(cov.clone()) {
        Some(_) => &cov * config.scale_factor,
        None => {
            log::warn!("residual covariance is singular; using its diagonal for the prior scale");
            DMatrix::from_diagonal(&cov.diagonal()) * config.scale_factor
        }
    };
    let scale = prior_scale + u.transpose() * &u;
    let dof = (DIM + 2 + t_eff) as f64;

    let s_mm = scale.view((0, 0), (N_SURPRISE, N_SURPRISE)).into_owned();
    let s_ym = scale
        .view((N_SURPRISE, 0), (N_MACRO, N_SURPRISE))
        .into_owned();
    let s_yy = scale
        .view((N_SURPRISE, N_SURPRISE), (N_MACRO, N_MACRO))
        .into_owned();
    let s_mm_inv = checked_inverse(&s_mm)
        .map_err(|e| ShocksError::Numerical(format!("surprise scale: {e}")))?;
    let s_yy_m = &s_yy - &s_ym * &s_mm_inv * s_ym.transpose();
    let gamma_mean = &s_ym * &s_mm_inv;
    let s_mm_inv_chol = chol_lower(&s_mm_inv, "inverse surprise scale")?;

    let draws = (0..config.draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, 1, i);
            // Partitioned inverse-Wishart: the surprise block depends only on
            // its own scale, so rescaling a surprise rescales Σ_mm exactly.
            let sigma_mm = inverse_wishart(&s_mm, dof - N_MACRO as f64, &mut rng)?;
            let sigma_y_m = inverse_wishart(&s_yy_m, dof, &mut rng)?;
            let zg = DMatrix::from_fn(N_SURPRISE, N_MACRO, |_, _| StandardNormal.sample(&mut rng));
            let gt = gamma_mean.transpose()
                + &s_mm_inv_chol
                    * zg
                    * chol_lower(&sigma_y_m, "conditional macro covariance")?.transpose();
            let gamma = gt.transpose();
            let sigma_ym = &gamma * &sigma_mm;
            let sigma_yy = &sigma_y_m + &gamma * &sigma_mm * gamma.transpose();
            let sigma_yy = (&sigma_yy + sigma_yy.transpose()) * 0.5;
            let mut sigma = DMatrix::zeros(DIM, DIM);
            sigma
                .view_mut((0, 0), (N_SURPRISE, N_SURPRISE))
                .copy_from(&sigma_mm);
            sigma
                .view_mut((N_SURPRISE, 0), (N_MACRO, N_SURPRISE))
                .copy_from(&sigma_ym);
            sigma
                .view_mut((0, N_SURPRISE), (N_SURPRISE, N_MACRO))
                .copy_from(&sigma_ym.transpose());
            sigma
                .view_mut((N_SURPRISE, N_SURPRISE), (N_MACRO, N_MACRO))
                .copy_from(&sigma_yy);

            let zb = DMatrix::from_fn(k, N_MACRO, |_, _| StandardNormal.sample(&mut rng));
            let b =
                &b_bar + &omega_chol * zb * chol_lower(&sigma_yy, "macro covariance")?.transpose();
            let mut intercept = DVector::zeros(DIM);
            for j in 0..N_MACRO {
                intercept[N_SURPRISE + j] = b[(0, j)];
            }
            let lags = (0..p)
                .map(|l| {
                    let mut bl = DMatrix::zeros(DIM, DIM);
                    for eq in 0..N_MACRO {
                        for v in 0..DIM {
                            bl[(N_SURPRISE + eq, v)] = b[(1 + l * DIM + v, eq)];
                        }
                    }
                    bl
                })
                .collect();
            Ok(ReducedFormDraw {
                intercept,
                lags,
                sigma,
            })
        })
        .collect::<Result<Vec<_>, ShocksError>>()?;
    Ok(BvarPosterior {
        draws,
        surprise_residuals: mm,
        first_row: p,
        scale,
        dof,
    })
}
