//! Local-projection responses of connectedness indices to policy shocks,
//! interacted with rate-regime dummies.

mod dummies;
mod io;
mod regress;

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::shocks::{MacroPanel, ShockSeries};
use crate::timeseries::YearMonth;

pub use dummies::{build_dummies, RegimeDummies};
pub use io::{write_heat, write_lp};
pub use regress::{
    band_quantile, heat_indicator, heat_p_threshold, lp_regress, lp_run, normal_pvalue, robust_se,
    Aggregation, Band, LpHorizon, LpInput, LpResult, LpSpec, HEAT_CUTOFF, REGIMES, REGRESSORS,
};

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("horizon {h}: need at least {needed} observations, got {got}")]
    InsufficientData { h: usize, needed: usize, got: usize },
    #[error("horizon {h}: collinear regressors {columns:?}")]
    Collinear { h: usize, columns: Vec<String> },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One heat-map cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatCell {
    pub node: String,
    pub h: usize,
    pub regime: &'static str,
    pub s: f64,
}

/// Heat cells for every horizon and regime of a result.
pub fn heat_cells(result: &LpResult) -> Vec<HeatCell> {
    let mut out = Vec::new();
    for hz in &result.horizons {
        for (r, name) in REGIMES.iter().enumerate() {
            let j = hz.regime(r);
            out.push(HeatCell {
                node: result.index.clone(),
                h: hz.h,
                regime: name,
                s: heat_indicator(hz.coef[j], hz.p[j]),
            });
        }
    }
    out
}

/// Collapses a daily series to months, keeping the last observation or the
/// mean of each month.
pub fn monthly_aggregate(
    dates: &[NaiveDate],
    values: &[f64],
    method: Aggregation,
) -> Result<(Vec<YearMonth>, Vec<f64>), LpError> {
    if dates.len() != values.len() {
        return Err(LpError::Data("dates and values differ in length".into()));
    }
    if dates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LpError::Data("dates must be strictly increasing".into()));
    }
    let mut groups: BTreeMap<YearMonth, (f64, f64, usize)> = BTreeMap::new();
    for (d, &v) in dates.iter().zip(values) {
        let g = groups.entry(YearMonth::of(*d)).or_insert((0.0, 0.0, 0));
        g.0 = v;
        g.1 += v;
        g.2 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(m, (last, sum, n))| {
            let v = match method {
                Aggregation::EndOfMonth => last,
                Aggregation::Mean => sum / n as f64,
            };
            (m, v)
        })
        .unzip())
}

/// `100 · Δln x`, with NaN in the first month.
pub fn log_growth(x: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NAN; x.len()];
    for t in 1..x.len() {
        out[t] = 100.0 * (x[t].ln() - x[t - 1].ln());
    }
    out
}

/// Aligns a monthly index with shocks, dummies and macro controls on the
/// longest run of consecutive months they share. The first common month is
/// dropped when controls are used because its growth rates are undefined.
pub fn align_inputs(
    months: &[YearMonth],
    index: &[f64],
    shocks: &ShockSeries,
    dummies: &RegimeDummies,
    macro_panel: Option<&MacroPanel>,
) -> Result<LpInput, LpError> {
    if dummies.months != shocks.months {
        return Err(LpError::Data(
            "dummies and shocks cover different months".into(),
        ));
    }
    let idx: BTreeMap<YearMonth, usize> = months.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let sh: BTreeMap<YearMonth, usize> = shocks
        .months
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, i))
        .collect();
    let growth = macro_panel.map(|mp| {
        let col = |j: usize| mp.values.column(j).iter().copied().collect::<Vec<_>>();
        let cpi = log_growth(&col(2));
        let ip = log_growth(&col(4));
        let map: BTreeMap<YearMonth, (f64, f64)> = mp
            .months
            .iter()
            .enumerate()
            .map(|(t, m)| (*m, (cpi[t], ip[t])))
            .collect();
        map
    });
    let usable = |m: &YearMonth| {
        idx.contains_key(m)
            && sh.contains_key(m)
            && growth.as_ref().is_none_or(|g| {
                g.get(m)
                    .is_some_and(|(a, b)| a.is_finite() && b.is_finite())
            })
    };
    // Longest consecutive run of usable months.
    let mut best: Vec<YearMonth> = Vec::new();
    let mut run: Vec<YearMonth> = Vec::new();
    for m in months.iter().filter(|m| usable(m)) {
        if run.last().is_some_and(|p| p.succ() != *m) {
            if run.len() > best.len() {
                best = std::mem::take(&mut run);
            }
            run.clear();
        }
        run.push(*m);
    }
    if run.len() > best.len() {
        best = run;
    }
    if best.is_empty() {
        return Err(LpError::Data(
            "index, shocks and controls share no months".into(),
        ));
    }
    let pick = |v: &[f64]| best.iter().map(|m| v[sh[m]]).collect::<Vec<_>>();
    Ok(LpInput {
        months: best.clone(),
        dependent: best.iter().map(|m| index[idx[m]]).collect(),
        mp: pick(&shocks.mp),
        dummies: RegimeDummies {
            months: best.clone(),
            hike: pick(&dummies.hike),
            unch: pick(&dummies.unch),
            cut: pick(&dummies.cut),
        },
        controls: growth.map(|g| best.iter().map(|m| g[m]).unzip()),
    })
}
