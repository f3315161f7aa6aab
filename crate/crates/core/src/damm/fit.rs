//! Maximum-likelihood estimation of the score-driven mixture and extraction
//! of time-varying moments.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filter::{
    log_likelihood, run_filter, ComponentCoefficients, MixtureState, ScoreScaling, SdCoefficients,
};
use super::moments::{mixture_moments, printed_mixture_moments, Moments};
use super::DammError;
use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::timeseries::ReturnPanel;
use crate::Real;

pub const MIN_FIT_LENGTH: usize = 250;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DammConfig {
    /// Number of mixture components `J` (1–4).
    pub components: usize,
    pub scaling: ScoreScaling,
    /// Number of seeded starting points.
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    /// Emit the literal printed moment expressions instead of central moments.
    pub printed_moments: bool,
}

impl Default for DammConfig {
    fn default() -> Self {
        Self {
            components: 2,
            scaling: ScoreScaling::InverseSqrtFisher,
            starts: 5,
            seed: 20240101,
            max_iterations: 6000,
            rel_tolerance: 1e-8,
            printed_moments: false,
        }
    }
}

impl DammConfig {
    pub fn validate(&self) -> Result<(), DammError> {
        if !(1..=4).contains(&self.components) {
            return Err(DammError::Parameter(format!(
                "number of components must be in 1..=4, got {}",
                self.components
            )));
        }
        if self.starts == 0 {
            return Err(DammError::Parameter(
                "at least one starting point required".into(),
            ));
        }
        Ok(())
    }
}

/// Result of one maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct DammFit<T> {
    pub coefficients: SdCoefficients<T>,
    pub states: Vec<MixtureState<T>>,
    pub log_likelihood: T,
    /// Likelihood of the best starting point before optimisation.
    pub start_log_likelihood: T,
    pub converged: bool,
    pub iterations: usize,
    pub seed: u64,
    /// Component indices sorted by the stationary mean of `μ_j`.
    pub component_order: Vec<usize>,
}

/// JSON-friendly summary of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub series: String,
    pub components: usize,
    pub coefficients: SdCoefficients<f64>,
    pub component_order: Vec<usize>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub seed: u64,
}

impl<T: Real> DammFit<T> {
    pub fn diagnostics(&self, series: &str) -> FitDiagnostics {
        let c = &self.coefficients;
        let conv = |v: &[T]| v.iter().map(|x| x.f64()).collect::<Vec<_>>();
        let arr = |a: [T; 2]| [a[0].f64(), a[1].f64()];
        FitDiagnostics {
            series: series.to_string(),
            components: c.n_components(),
            coefficients: SdCoefficients {
                kappa_w: conv(&c.kappa_w),
                a_w: conv(&c.a_w),
                b_w: conv(&c.b_w),
                components: self
                    .component_order
                    .iter()
                    .map(|&j| {
                        let cc = &c.components[j];
                        ComponentCoefficients {
                            kappa: arr(cc.kappa),
                            a: arr(cc.a),
                            b: arr(cc.b),
                        }
                    })
                    .collect(),
                scaling: c.scaling,
            },
            component_order: self.component_order.clone(),
            log_likelihood: self.log_likelihood.f64(),
            converged: self.converged,
            iterations: self.iterations,
            seed: self.seed,
        }
    }

    /// Moments of the predictive mixture at every date.
    pub fn moments(&self, printed: bool) -> Result<Vec<Moments<T>>, DammError> {
        self.states
            .iter()
            .enumerate()
            .map(|(t, s)| {
                let m = if printed {
                    printed_mixture_moments(&s.weights, &s.means, &s.scales)
                } else {
                    mixture_moments(&s.weights, &s.means, &s.scales)
                };
                m.map_err(|e| e.at(t))
            })
            .collect()
    }
}

/// Unconstrained packing: `[κ_w, ln A_w, atanh B_w]` followed by
/// `[κ, ln A, atanh B]` (each of length two) per component.
fn unpack<T: Real>(x: &[T], j: usize, scaling: ScoreScaling) -> SdCoefficients<T> {
    let m = j - 1;
    let kappa_w = x[..m].to_vec();
    let a_w = x[m..2 * m].iter().map(|v| v.exp()).collect();
    let b_w = x[2 * m..3 * m].iter().map(|v| v.tanh()).collect();
    let components = (0..j)
        .map(|c| {
            let o = 3 * m + 6 * c;
            ComponentCoefficients {
                kappa: [x[o], x[o + 1]],
                a: [x[o + 2].exp(), x[o + 3].exp()],
                b: [x[o + 4].tanh(), x[o + 5].tanh()],
            }
        })
        .collect();
    SdCoefficients {
        kappa_w,
        a_w,
        b_w,
        components,
        scaling,
    }
}

fn base_start<T: Real>(ys: &[T], j: usize) -> Vec<T> {
    let n = T::from_count(ys.len());
    let mean = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let var = ys
        .iter()
        .fold(T::zero(), |a, &y| a + (y - mean) * (y - mean))
        / n;
    let sd = var.sqrt().max(T::c(1e-8));
    let m = j - 1;
    let b0 = T::c(0.9);
    let atanh_b = T::c(0.9f64.atanh());
    let mut x = Vec::with_capacity(3 * m + 6 * j);
    // equal weights: stick fractions 1/(J-k)
    for k in 0..m {
        let frac = 1.0 / (j - k) as f64;
        x.push((T::one() - b0) * T::c((frac / (1.0 - frac)).ln()));
    }
    x.extend(std::iter::repeat_n(T::c(0.05f64.ln()), m));
    x.extend(std::iter::repeat_n(atanh_b, m));
    for c in 0..j {
        let pos = if j == 1 {
            0.5
        } else {
            c as f64 / (j - 1) as f64
        };
        let mu = mean + sd * T::c(0.5 * (pos - 0.5));
        let scale = if j == 1 {
            sd
        } else {
            sd * T::c(0.6 + 0.9 * pos)
        };
        x.push((T::one() - b0) * mu);
        x.push((T::one() - b0) * scale.ln());
        x.push(T::c(0.02f64.ln()));
        x.push(T::c(0.05f64.ln()));
        x.push(atanh_b);
        x.push(atanh_b);
    }
    x
}

/// Fits the mixture to one series by maximum likelihood with multi-start
/// Nelder–Mead on the reparameterised coefficients.
pub fn damm_fit<T: Real>(ys: &[T], config: &DammConfig) -> Result<DammFit<T>, DammError> {
    config.validate()?;
    if ys.len() < MIN_FIT_LENGTH {
        return Err(DammError::InsufficientData {
            needed: MIN_FIT_LENGTH,
            got: ys.len(),
        });
    }
    if ys.iter().any(|y| !y.finite()) {
        return Err(DammError::Domain(
            "series contains non-finite values".into(),
        ));
    }
    let j = config.components;
    let scaling = config.scaling;
    let objective = |x: &[T]| match log_likelihood(ys, &unpack(x, j, scaling)) {
        Ok(v) => -v,
        Err(_) => T::c(f64::INFINITY),
    };
    let base = base_start(ys, j);
    let mut starts = vec![base.clone()];
    let noise = Normal::new(0.0, 0.2).expect("valid normal");
    for k in 1..config.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(k as u64));
        starts.push(
            base.iter()
                .map(|&v| v + T::c(noise.sample(&mut rng)))
                .collect(),
        );
    }
    let start_values: Vec<T> = starts.iter().map(|s| objective(s)).collect();
    let start_best = start_values
        .iter()
        .copied()
        .fold(T::c(f64::INFINITY), T::min);
    if !start_best.finite() {
        return Err(DammError::Domain(
            "likelihood is not finite at any starting point".into(),
        ));
    }
    let nm = NelderMeadConfig {
        max_iterations: config.max_iterations,
        rel_tolerance: config.rel_tolerance,
        ..NelderMeadConfig::default()
    };
    let mut best: Option<crate::optim::Minimum<T>> = None;
    let mut iterations = 0;
    for start in &starts {
        let run = nelder_mead(objective, start, &nm);
        iterations += run.iterations;
        let better = best.as_ref().is_none_or(|b| run.value < b.value);
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let coefficients = unpack(&best.x, j, scaling);
    let path = run_filter(ys, &coefficients, None)?;
    let mut order: Vec<usize> = (0..j).collect();
    let stationary = coefficients.stationary_state();
    order.sort_by(|&a, &b| {
        stationary.means[a]
            .partial_cmp(&stationary.means[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let fit = DammFit {
        coefficients,
        states: path.states,
        log_likelihood: path.log_likelihood,
        start_log_likelihood: -start_best,
        converged: best.converged,
        iterations,
        seed: config.seed,
        component_order: order,
    };
    if !fit.converged {
        return Err(DammError::NotConverged {
            log_likelihood: fit.log_likelihood.f64(),
            iterations,
            diagnostics: Box::new(fit.diagnostics("")),
        });
    }
    Ok(fit)
}

/// Per-series time-varying variance, skewness and excess kurtosis.
#[derive(Debug, Clone)]
pub struct MomentPanel<T: Real> {
    pub dates: Vec<chrono::NaiveDate>,
    pub names: Vec<String>,
    /// Conditional variance, `T × N`.
    pub vol: DMatrix<T>,
    pub skew: DMatrix<T>,
    pub kurt: DMatrix<T>,
    pub diagnostics: Vec<FitDiagnostics>,
}

impl<T: Real> MomentPanel<T> {
    /// `ln(Vol^{1/2})`, the log-volatility scale used for the volatility layer.
    pub fn log_vol(&self) -> DMatrix<T> {
        self.vol.map(|v| T::c(0.5) * v.ln())
    }
}

/// Fits every series of `returns` (in parallel) and evaluates the moments
/// of each predictive mixture.
pub fn extract_moment_panel<T: Real>(
    returns: &ReturnPanel,
    config: &DammConfig,
) -> Result<MomentPanel<T>, DammError> {
    config.validate()?;
    let n = returns.names.len();
    let t_len = returns.dates.len();
    let fits: Vec<Result<(Vec<Moments<T>>, FitDiagnostics), DammError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let name = &returns.names[i];
            let ys: Vec<T> = returns.values.column(i).iter().map(|&v| T::c(v)).collect();
            let wrap = |e: DammError| DammError::Series {
                name: name.clone(),
                source: Box::new(e),
            };
            let fit = damm_fit(&ys, config).map_err(wrap)?;
            let moments = fit.moments(config.printed_moments).map_err(wrap)?;
            Ok((moments, fit.diagnostics(name)))
        })
        .collect();
    let mut vol = DMatrix::zeros(t_len, n);
    let mut skew = DMatrix::zeros(t_len, n);
    let mut kurt = DMatrix::zeros(t_len, n);
    let mut diagnostics = Vec::with_capacity(n);
    for (i, res) in fits.into_iter().enumerate() {
        let (moments, diag) = res?;
        for (t, m) in moments.iter().enumerate() {
            vol[(t, i)] = m.vol;
            skew[(t, i)] = m.skew;
            kurt[(t, i)] = m.kurt;
        }
        diagnostics.push(diag);
    }
    Ok(MomentPanel {
        dates: returns.dates.clone(),
        names: returns.names.clone(),
        vol,
        skew,
        kurt,
        diagnostics,
    })
}
