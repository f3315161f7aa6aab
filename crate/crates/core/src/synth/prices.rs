use chrono::{Datelike, Duration, NaiveDate, Weekday};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{rng, SynthError};
use crate::timeseries::{Decision, EventCalendar, PolicyEvent, PricePanel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriceSynthConfig {
    pub seed: u64,
    pub bonds: usize,
    pub equities: usize,
    /// Trading days in the price panel.
    pub days: usize,
    pub start: NaiveDate,
    /// Own-lag coefficient.
    pub own_lag: f64,
    /// Lag coefficient between members of the same block.
    pub within_lag: f64,
    /// Baseline lag coefficient between blocks.
    pub cross_lag: f64,
    /// Extra cross-block lag coefficient inside event windows.
    pub event_coupling: f64,
    pub within_corr: f64,
    pub cross_corr: f64,
    pub events: usize,
    pub event_window: usize,
    /// Daily return scale in percent, per block.
    pub bond_scale: f64,
    pub equity_scale: f64,
    /// Persistence and innovation scale of the block log-variance.
    pub vol_persistence: f64,
    pub vol_innovation: f64,
    /// Daily probability of a block-wide jump.
    pub jump_probability: f64,
}

impl Default for PriceSynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            bonds: 5,
            equities: 4,
            days: 2000,
            start: NaiveDate::from_ymd_opt(2015, 1, 2).expect("valid date"),
            own_lag: 0.05,
            within_lag: 0.04,
            cross_lag: 0.0,
            event_coupling: 0.04,
            within_corr: 0.6,
            cross_corr: 0.05,
            events: 10,
            event_window: 20,
            bond_scale: 0.3,
            equity_scale: 1.0,
            vol_persistence: 0.98,
            vol_innovation: 0.15,
            jump_probability: 0.01,
        }
    }
}

/// Ground truth recorded next to a generated price panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTruth {
    pub config: PriceSynthConfig,
    pub names: Vec<String>,
    pub bonds: Vec<String>,
    pub equities: Vec<String>,
    /// Row-major lag matrix outside event windows.
    pub lag_matrix: Vec<Vec<f64>>,
    pub event_lag_matrix: Vec<Vec<f64>>,
    pub correlation: Vec<Vec<f64>>,
    pub spectral_radius: f64,
    pub event_dates: Vec<NaiveDate>,
}

#[derive(Debug, Clone)]
pub struct SyntheticPrices {
    pub panel: PricePanel,
    pub events: EventCalendar,
    pub truth: PriceTruth,
}

impl PriceSynthConfig {
    pub fn n(&self) -> usize {
        self.bonds + self.equities
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.bonds < 2 || self.equities < 2 {
            return Err(SynthError::Config(
                "each block needs at least two series".into(),
            ));
        }
        if self.days < 50 {
            return Err(SynthError::Config("need at least 50 days".into()));
        }
        if !(0.0..1.0).contains(&self.vol_persistence.abs()) {
            return Err(SynthError::Config(
                "volatility persistence must lie in (-1, 1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.jump_probability) {
            return Err(SynthError::Config(
                "jump probability must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    fn is_bond(&self, i: usize) -> bool {
        i < self.bonds
    }

    fn lag_matrix(&self, coupling: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| {
            if i == j {
                self.own_lag
            } else if self.is_bond(i) == self.is_bond(j) {
                self.within_lag
            } else {
                self.cross_lag + coupling
            }
        })
    }

    fn correlation(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| {
            if i == j {
                1.0
            } else if self.is_bond(i) == self.is_bond(j) {
                self.within_corr
            } else {
                self.cross_corr
            }
        })
    }
}

fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Block-structured VAR(1) returns with block-common stochastic volatility
/// and jumps; cross-block lag coupling rises inside windows that open at
/// evenly spaced event dates. Prices start at 100.
pub fn gen_price_panel(config: &PriceSynthConfig) -> Result<SyntheticPrices, SynthError> {
    config.validate()?;
    let n = config.n();
    let base = config.lag_matrix(0.0);
    let event = config.lag_matrix(config.event_coupling);
    let radius = spectral_radius(&base).max(spectral_radius(&event));
    if radius >= 1.0 {
        return Err(SynthError::Unstable { radius });
    }
    let corr = config.correlation();
    let chol = corr
        .clone()
        .cholesky()
        .ok_or_else(|| SynthError::Config("correlation matrix is not positive definite".into()))?
        .l();

    let dates = business_days(config.start, config.days);
    let spacing = config.days / (config.events + 1);
    let event_days: Vec<usize> = (1..=config.events).map(|k| k * spacing).collect();
    let in_window = |t: usize| {
        event_days
            .iter()
            .any(|&e| t >= e && t < e + config.event_window)
    };

    let mut rng = rng(config.seed, 1);
    let scale = DVector::from_fn(n, |i, _| {
        if config.is_bond(i) {
            config.bond_scale
        } else {
            config.equity_scale
        }
    });
    let jump_mean = |i: usize| if config.is_bond(i) { 1.0 } else { -2.0 };
    let stationary_sd = config.vol_innovation / (1.0 - config.vol_persistence.powi(2)).sqrt();
    let mut logvar = [0.0f64; 2];
    for h in &mut logvar {
        *h = stationary_sd * {
            let z: f64 = StandardNormal.sample(&mut rng);
            z
        };
    }
    let mut prices = DMatrix::zeros(config.days, n);
    let mut level = DVector::from_element(n, 100.0f64.ln());
    let mut prev = DVector::zeros(n);
    for t in 0..config.days {
        for h in &mut logvar {
            let e: f64 = StandardNormal.sample(&mut rng);
            *h = config.vol_persistence * *h + config.vol_innovation * e;
        }
        let jumps = [
            rng.random::<f64>() < config.jump_probability,
            rng.random::<f64>() < config.jump_probability,
        ];
        let z = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let e = &chol * z;
        let a = if in_window(t) { &event } else { &base };
        let mut r = a * &prev;
        for i in 0..n {
            let b = usize::from(!config.is_bond(i));
            let sd = scale[i] * (0.5 * (logvar[b] - 0.5 * stationary_sd.powi(2))).exp();
            // Drift offsets the expected jump so prices have no trend.
            r[i] += sd * e[i] - config.jump_probability * scale[i] * 3.0 * jump_mean(i);
            if jumps[b] {
                let size: f64 = StandardNormal.sample(&mut rng);
                r[i] += scale[i] * (3.0 * jump_mean(i) + size);
            }
        }
        level += &r / 100.0;
        for i in 0..n {
            prices[(t, i)] = level[i].exp();
        }
        prev = r;
    }

    let names: Vec<String> = (0..n)
        .map(|i| {
            if config.is_bond(i) {
                format!("BOND{}", i + 1)
            } else {
                format!("EQTY{}", i - config.bonds + 1)
            }
        })
        .collect();
    let event_dates: Vec<NaiveDate> = event_days.iter().map(|&d| dates[d]).collect();
    let events = EventCalendar::new(
        event_dates
            .iter()
            .enumerate()
            .map(|(k, &date)| PolicyEvent {
                date,
                decision: if k % 2 == 0 {
                    Decision::Hike
                } else {
                    Decision::Cut
                },
            })
            .collect(),
    )?;
    let truth = PriceTruth {
        config: config.clone(),
        bonds: names[..config.bonds].to_vec(),
        equities: names[config.bonds..].to_vec(),
        names: names.clone(),
        lag_matrix: rows(&base),
        event_lag_matrix: rows(&event),
        correlation: rows(&corr),
        spectral_radius: radius,
        event_dates,
    };
    Ok(SyntheticPrices {
        panel: PricePanel::new(dates, names, prices)?,
        events,
        truth,
    })
}
