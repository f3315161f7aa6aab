//! Descriptive statistics, Jarque–Bera normality and augmented Dickey–Fuller
//! unit-root tests.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{ReturnPanel, TimeseriesError};
use crate::linalg::ols;

pub const MIN_SUMMARY_LENGTH: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub adf_stat: f64,
    pub adf_pvalue: f64,
    pub adf_lags: usize,
    pub jb_stat: f64,
    pub jb_pvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub series: Vec<SeriesSummary>,
}

/// Sample skewness `m3 / m2^{3/2}` and excess kurtosis `m4 / m2² - 3`.
pub fn sample_moments(xs: &[f64]) -> Result<(f64, f64), TimeseriesError> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if !(m2 > 0.0) {
        return Err(TimeseriesError::DegenerateVariance);
    }
    Ok((m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0))
}

/// `JB = n/6 · (S² + K²/4)`.
pub fn jarque_bera_from_moments(n: usize, skew: f64, excess_kurt: f64) -> f64 {
    n as f64 / 6.0 * (skew * skew + excess_kurt * excess_kurt / 4.0)
}

/// Jarque–Bera statistic and its asymptotic χ²(2) p-value.
pub fn jarque_bera(xs: &[f64]) -> Result<(f64, f64), TimeseriesError> {
    let (s, k) = sample_moments(xs)?;
    let jb = jarque_bera_from_moments(xs.len(), s, k);
    Ok((jb, (-jb / 2.0).exp()))
}

/// Default maximum ADF lag, `⌊12 (T/100)^{1/4}⌋`.
pub fn default_adf_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub stat: f64,
    pub pvalue: f64,
    pub lags: usize,
    pub nobs: usize,
}

/// Builds the Dickey–Fuller design with intercept for `lags` augmentation
/// terms, using observations from index `start` of the differenced series.
fn adf_design(y: &[f64], lags: usize, start: usize) -> (DMatrix<f64>, DVector<f64>) {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (start..dy.len()).collect();
    let x = DMatrix::from_fn(rows.len(), 2 + lags, |r, c| {
        let t = rows[r];
        match c {
            0 => y[t],
            1 => 1.0,
            k => dy[t - (k - 1)],
        }
    });
    let target = DVector::from_iterator(rows.len(), rows.iter().map(|&t| dy[t]));
    (x, target)
}

/// Augmented Dickey–Fuller test with intercept and AIC lag selection up to
/// `max_lag`. Lag selection uses a common sample; the chosen lag is refit on
/// all usable observations.
pub fn adf_test(y: &[f64], max_lag: usize) -> Result<AdfResult, TimeseriesError> {
    if y.len() < max_lag + 8 {
        return Err(TimeseriesError::InsufficientData {
            series: "adf".into(),
            needed: max_lag + 8,
            got: y.len(),
        });
    }
    let mut best = (f64::INFINITY, 0usize);
    for lags in 0..=max_lag {
        let (x, target) = adf_design(y, lags, max_lag);
        let fit = ols(&x, &target).map_err(|_| TimeseriesError::DegenerateVariance)?;
        let aic = -2.0 * fit.log_likelihood() + 2.0 * x.ncols() as f64;
        if aic < best.0 {
            best = (aic, lags);
        }
    }
    let lags = best.1;
    let (x, target) = adf_design(y, lags, lags);
    let fit = ols(&x, &target).map_err(|_| TimeseriesError::DegenerateVariance)?;
    let se = fit.classical_se();
    let stat = fit.coef[0] / se[0];
    Ok(AdfResult {
        stat,
        pvalue: mackinnon_pvalue(stat),
        lags,
        nobs: target.len(),
    })
}

/// MacKinnon (1994) approximate asymptotic p-value for the constant-only
/// Dickey–Fuller t statistic.
pub fn mackinnon_pvalue(stat: f64) -> f64 {
    const TAU_MAX: f64 = 2.74;
    const TAU_MIN: f64 = -18.83;
    const TAU_STAR: f64 = -1.61;
    const SMALL_P: [f64; 3] = [2.1659, 1.4412, 0.038269];
    const LARGE_P: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.010368];
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let coefs: &[f64] = if stat <= TAU_STAR { &SMALL_P } else { &LARGE_P };
    let z = coefs.iter().rev().fold(0.0, |acc, c| acc * stat + c);
    Normal::standard().cdf(z)
}

fn summarize(name: &str, xs: &[f64], adf_max_lag: usize) -> Result<SeriesSummary, TimeseriesError> {
    if xs.len() < MIN_SUMMARY_LENGTH {
        return Err(TimeseriesError::InsufficientData {
            series: name.to_string(),
            needed: MIN_SUMMARY_LENGTH,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let (skewness, kurtosis) = sample_moments(xs)?;
    let (jb_stat, jb_pvalue) = jarque_bera(xs)?;
    let adf = adf_test(xs, adf_max_lag)?;
    Ok(SeriesSummary {
        name: name.to_string(),
        mean,
        std: var.sqrt(),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        skewness,
        kurtosis,
        adf_stat: adf.stat,
        adf_pvalue: adf.pvalue,
        adf_lags: adf.lags,
        jb_stat,
        jb_pvalue,
    })
}

/// Table-style summary for every series; `adf_max_lag = None` uses
/// [`default_adf_max_lag`].
pub fn summary_stats(
    returns: &ReturnPanel,
    adf_max_lag: Option<usize>,
) -> Result<SummaryStats, TimeseriesError> {
    let max_lag = adf_max_lag.unwrap_or_else(|| default_adf_max_lag(returns.len()));
    let series = (0..returns.n_series())
        .into_par_iter()
        .map(|j| {
            let xs: Vec<f64> = returns.values.column(j).iter().copied().collect();
            summarize(&returns.names[j], &xs, max_lag).map_err(|e| e.for_series(&returns.names[j]))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SummaryStats { series })
}
