use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{LpError, RegimeDummies};
use crate::linalg::{ols, LinalgError};
use crate::timeseries::YearMonth;

/// Regressor names in column order; absent columns are skipped.
pub const REGRESSORS: [&str; 7] = [
    "const", "lag_dep", "mp_hike", "mp_unch", "mp_cut", "d_cpi", "d_ip",
];
/// Interaction columns, one per regime.
pub const REGIMES: [&str; 3] = ["hike", "unch", "cut"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    EndOfMonth,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LpSpec {
    pub h_max: usize,
    pub bands: Vec<f64>,
    pub aggregation: Aggregation,
    pub lagged_dependent: bool,
    pub controls: bool,
}

impl Default for LpSpec {
    fn default() -> Self {
        Self {
            h_max: 18,
            bands: vec![0.68, 0.90],
            aggregation: Aggregation::EndOfMonth,
            lagged_dependent: true,
            controls: true,
        }
    }
}

impl LpSpec {
    pub fn validate(&self) -> Result<(), LpError> {
        if self.bands.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(LpError::Config("band levels must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Aligned monthly inputs for one dependent index.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInput {
    pub months: Vec<YearMonth>,
    pub dependent: Vec<f64>,
    pub mp: Vec<f64>,
    pub dummies: RegimeDummies,
    /// `(ΔCPI, ΔIP)`
    pub controls: Option<(Vec<f64>, Vec<f64>)>,
}

impl LpInput {
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.months.len();
        let ok = self.dependent.len() == n
            && self.mp.len() == n
            && self.dummies.months == self.months
            && self
                .controls
                .as_ref()
                .is_none_or(|(a, b)| a.len() == n && b.len() == n);
        if !ok {
            return Err(LpError::Data(
                "local-projection inputs are not aligned".into(),
            ));
        }
        if self.months.windows(2).any(|w| w[1] != w[0].succ()) {
            return Err(LpError::Data("months must be consecutive".into()));
        }
        Ok(())
    }
}

/// Confidence band at one level for every regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub level: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Estimates at one horizon, indexed like [`REGRESSORS`]. Columns that were
/// not in the regression have `identified = false`, coefficient 0 and NaN
/// standard error and p-value.
#[derive(Debug, Clone, PartialEq)]
pub struct LpHorizon {
    pub h: usize,
    pub nobs: usize,
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub p: Vec<f64>,
    pub identified: Vec<bool>,
    pub bands: Vec<Band>,
    pub residuals: Vec<f64>,
    /// The HAC matrix was not positive and heteroskedasticity-robust errors
    /// were used instead.
    pub hac_fallback: bool,
}

impl LpHorizon {
    pub fn regime(&self, r: usize) -> usize {
        2 + r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub index: String,
    pub horizons: Vec<LpHorizon>,
}

/// Newey–West covariance with Bartlett weights and truncation `lag`.
/// Falls back to the heteroskedasticity-robust form when a variance is not
/// positive. Returns the standard errors and whether the fallback was used.
pub fn robust_se(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    xtx_inv: &DMatrix<f64>,
    lag: usize,
) -> (DVector<f64>, bool) {
    let (n, k) = x.shape();
    let scores = DMatrix::from_fn(n, k, |t, j| x[(t, j)] * residuals[t]);
    let hc = scores.transpose() * &scores;
    let mut meat = hc.clone();
    for l in 1..=lag.min(n.saturating_sub(1)) {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        let cross = scores.rows(l, n - l).transpose() * scores.rows(0, n - l);
        meat += (&cross + cross.transpose()) * w;
    }
    let se_of = |m: &DMatrix<f64>| {
        let v = xtx_inv * m * xtx_inv;
        DVector::from_fn(k, |j, _| v[(j, j)])
    };
    let var = se_of(&meat);
    if var.iter().all(|&v| v > 0.0 && v.is_finite()) {
        return (var.map(f64::sqrt), false);
    }
    log::warn!("Newey-West covariance not positive; using heteroskedasticity-robust errors");
    (se_of(&hc).map(|v| v.max(0.0).sqrt()), true)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Two-sided normal p-value.
pub fn normal_pvalue(t: f64) -> f64 {
    (2.0 * (1.0 - std_normal().cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Critical value of a two-sided band at `level`.
pub fn band_quantile(level: f64) -> f64 {
    std_normal().inverse_cdf(0.5 + level / 2.0)
}

/// OLS of `C_{t+h}` on the interacted shock design at horizon `h`.
pub fn lp_regress(input: &LpInput, h: usize, spec: &LpSpec) -> Result<LpHorizon, LpError> {
    input.validate()?;
    spec.validate()?;
    let t_len = input.months.len();
    let start = usize::from(spec.lagged_dependent);
    let active: Vec<bool> = vec![
        true,
        spec.lagged_dependent,
        true,
        true,
        true,
        spec.controls,
        spec.controls,
    ];
    if spec.controls && input.controls.is_none() {
        return Err(LpError::Data("controls requested but not supplied".into()));
    }
    let rows: Vec<usize> = (start..t_len.saturating_sub(h)).collect();
    let d = &input.dummies;
    let value = |col: usize, t: usize| -> f64 {
        match col {
            0 => 1.0,
            1 => input.dependent[t - 1],
            2 => input.mp[t] * d.hike[t],
            3 => input.mp[t] * d.unch[t],
            4 => input.mp[t] * d.cut[t],
            5 => input.controls.as_ref().map_or(0.0, |c| c.0[t]),
            _ => input.controls.as_ref().map_or(0.0, |c| c.1[t]),
        }
    };
    // Interactions that never fire are not identified and are dropped.
    let mut used: Vec<usize> = Vec::new();
    for col in 0..REGRESSORS.len() {
        if !active[col] {
            continue;
        }
        if (2..=4).contains(&col) && rows.iter().all(|&t| value(col, t) == 0.0) {
            continue;
        }
        used.push(col);
    }
    let needed = 10 + used.len();
    if rows.len() < needed {
        return Err(LpError::InsufficientData {
            h,
            needed,
            got: rows.len(),
        });
    }
    let x = DMatrix::from_fn(rows.len(), used.len(), |r, c| value(used[c], rows[r]));
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&t| input.dependent[t + h]));
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(LpError::Data(format!(
            "horizon {h}: non-finite values in the regression"
        )));
    }
    let fit = ols(&x, &y).map_err(|e| match e {
        LinalgError::RankDeficient { columns } => LpError::Collinear {
            h,
            columns: columns
                .iter()
                .map(|&c| REGRESSORS[used[c]].to_string())
                .collect(),
        },
        other => LpError::Data(other.to_string()),
    })?;
    let (se_used, hac_fallback) = robust_se(&x, &fit.residuals, &fit.xtx_inv, h);
    let k = REGRESSORS.len();
    let mut out = LpHorizon {
        h,
        nobs: rows.len(),
        coef: vec![0.0; k],
        se: vec![f64::NAN; k],
        p: vec![f64::NAN; k],
        identified: vec![false; k],
        bands: Vec::with_capacity(spec.bands.len()),
        residuals: fit.residuals.iter().copied().collect(),
        hac_fallback,
    };
    for (c, &col) in used.iter().enumerate() {
        out.coef[col] = fit.coef[c];
        out.se[col] = se_used[c];
        out.p[col] = normal_pvalue(fit.coef[c] / se_used[c]);
        out.identified[col] = true;
    }
    for &level in &spec.bands {
        let z = band_quantile(level);
        out.bands.push(Band {
            level,
            lo: (0..k).map(|j| out.coef[j] - z * out.se[j]).collect(),
            hi: (0..k).map(|j| out.coef[j] + z * out.se[j]).collect(),
        });
    }
    Ok(out)
}

/// Horizons `0..=h_max`, estimated in parallel.
pub fn lp_run(index: &str, input: &LpInput, spec: &LpSpec) -> Result<LpResult, LpError> {
    let horizons = (0..=spec.h_max)
        .into_par_iter()
        .map(|h| lp_regress(input, h, spec))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LpResult {
        index: index.to_string(),
        horizons,
    })
}

/// `sign(coef) · (1 − p)^7`; zero for unidentified coefficients.
pub fn heat_indicator(coef: f64, p: f64) -> f64 {
    if !p.is_finite() || coef == 0.0 {
        return 0.0;
    }
    coef.signum() * (1.0 - p.clamp(0.0, 1.0)).powi(7)
}

/// Cut-off on `|s|` used to mark significance.
pub const HEAT_CUTOFF: f64 = 0.48;

/// p-value at which `|s|` crosses [`HEAT_CUTOFF`].
pub fn heat_p_threshold() -> f64 {
    1.0 - HEAT_CUTOFF.powf(1.0 / 7.0)
}
