use chrono::NaiveDate;
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{rng, SynthError};
use crate::shocks::{aggregate_surprises, MacroPanel, SurpriseEvent, SurprisePanel};
use crate::timeseries::{Decision, EventCalendar, PolicyEvent, YearMonth};

/// Calendar months (1-based) with a scheduled meeting.
const MEETING_MONTHS: [u32; 8] = [1, 3, 4, 6, 7, 9, 10, 12];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShockSynthConfig {
    pub seed: u64,
    pub months: usize,
    pub start: YearMonth,
    pub mp_std: f64,
    pub info_std: f64,
    /// Impact of a unit MP shock on (rate, stock); signs (+, −).
    pub mp_impact: [f64; 2],
    /// Impact of a unit information shock on (rate, stock); signs (+, +).
    pub info_impact: [f64; 2],
    /// Measurement noise on each surprise.
    pub noise_std: f64,
    /// Surprise size beyond which a meeting is a hike or a cut.
    pub decision_threshold: f64,
}

impl Default for ShockSynthConfig {
    fn default() -> Self {
        Self {
            seed: 11,
            months: 400,
            start: YearMonth::new(1989, 9).expect("valid month"),
            mp_std: 1.0,
            info_std: 1.0,
            mp_impact: [0.05, -0.5],
            info_impact: [0.05, 0.5],
            noise_std: 0.002,
            decision_threshold: 0.03,
        }
    }
}

impl ShockSynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.months < 150 {
            return Err(SynthError::Config("need at least 150 months".into()));
        }
        if self.mp_std <= 0.0 || self.info_std < 0.0 || self.noise_std < 0.0 {
            return Err(SynthError::Config(
                "shock scales must be nonnegative, MP positive".into(),
            ));
        }
        let [r, s] = self.mp_impact;
        let [ri, si] = self.info_impact;
        if !(r > 0.0 && s < 0.0 && ri > 0.0 && si > 0.0) {
            return Err(SynthError::Config(
                "impacts must follow MP (rate+, stock-) and information (rate+, stock+)".into(),
            ));
        }
        Ok(())
    }
}

/// Monthly truth: each shock's contribution to the rate surprise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockTruth {
    pub config: ShockSynthConfig,
    pub months: Vec<YearMonth>,
    pub s_mp: Vec<f64>,
    pub s_if: Vec<f64>,
    pub meeting_dates: Vec<NaiveDate>,
}

#[derive(Debug, Clone)]
pub struct SyntheticShocks {
    pub surprises: Vec<SurpriseEvent>,
    pub panel: SurprisePanel,
    pub macro_panel: MacroPanel,
    pub events: EventCalendar,
    pub truth: ShockTruth,
}

/// Monthly data with one meeting in each scheduled month. Structural MP and
/// information shocks move the rate and stock surprises with the configured
/// impact signs and feed a five-variable macro block (rate, stock level,
/// CPI, spread, industrial production).
pub fn gen_shock_dataset(config: &ShockSynthConfig) -> Result<SyntheticShocks, SynthError> {
    config.validate()?;
    let t_len = config.months;
    let months = config.start.range(t_len);
    let mut rng = rng(config.seed, 2);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut surprises = Vec::new();
    let mut decisions = Vec::new();
    let mut s_mp = vec![0.0; t_len];
    let mut s_if = vec![0.0; t_len];
    let mut eps = vec![(0.0, 0.0); t_len];
    for (t, m) in months.iter().enumerate() {
        if !MEETING_MONTHS.contains(&m.month) {
            continue;
        }
        let (e_mp, e_if) = (config.mp_std * normal(), config.info_std * normal());
        eps[t] = (e_mp, e_if);
        s_mp[t] = config.mp_impact[0] * e_mp;
        s_if[t] = config.info_impact[0] * e_if;
        let fff = s_mp[t] + s_if[t] + config.noise_std * normal();
        let spx =
            config.mp_impact[1] * e_mp + config.info_impact[1] * e_if + config.noise_std * normal();
        let date = NaiveDate::from_ymd_opt(m.year, m.month, 15).expect("valid date");
        surprises.push(SurpriseEvent { date, fff, spx });
        let decision = if fff > config.decision_threshold {
            Decision::Hike
        } else if fff < -config.decision_threshold {
            Decision::Cut
        } else {
            Decision::Unchanged
        };
        decisions.push(PolicyEvent { date, decision });
    }

    // Macro block: rate and spread are stationary AR(1); stock, CPI and IP
    // are log levels (×100) with drift. Levels are stored for the last three.
    let mut x = [4.0, 600.0, 460.0, 1.0, 440.0];
    let mut values = DMatrix::zeros(t_len, 5);
    for t in 0..t_len {
        let (e_mp, e_if) = eps[t];
        let u: [f64; 5] = std::array::from_fn(|_| normal());
        x[0] = 0.2
            + 0.95 * x[0]
            + 0.5 * e_mp * config.mp_impact[0]
            + 0.3 * e_if * config.info_impact[0]
            + 0.1 * u[0];
        x[1] += 0.5 + config.mp_impact[1] * e_mp + config.info_impact[1] * e_if + 3.0 * u[1];
        x[2] += 0.2 - 0.05 * e_mp + 0.03 * e_if + 0.2 * u[2];
        x[3] = 0.05 + 0.95 * x[3] + 0.05 * e_mp - 0.03 * e_if + 0.05 * u[3];
        x[4] += 0.15 - 0.2 * e_mp + 0.1 * e_if + 0.6 * u[4];
        values[(t, 0)] = x[0];
        values[(t, 1)] = (x[1] / 100.0).exp();
        values[(t, 2)] = (x[2] / 100.0).exp();
        values[(t, 3)] = x[3];
        values[(t, 4)] = (x[4] / 100.0).exp();
    }
    let panel = aggregate_surprises(&surprises, &months)?;
    let truth = ShockTruth {
        config: config.clone(),
        months: months.clone(),
        s_mp,
        s_if,
        meeting_dates: surprises.iter().map(|e| e.date).collect(),
    };
    Ok(SyntheticShocks {
        surprises,
        panel,
        macro_panel: MacroPanel { months, values },
        events: EventCalendar::new(decisions)?,
        truth,
    })
}
