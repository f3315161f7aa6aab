use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::LpError;
use crate::shocks::ShockSeries;
use crate::timeseries::{Decision, EventCalendar, YearMonth};

/// Monthly rate-regime indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeDummies {
    pub months: Vec<YearMonth>,
    pub hike: Vec<f64>,
    pub unch: Vec<f64>,
    pub cut: Vec<f64>,
}

/// Base dummies from each month's announcement, then the adjacency rule:
/// when the meeting just before or after a hike (cut) leaves rates unchanged
/// but its month's policy shock is positive (negative), that month's hike
/// (cut) dummy is also set.
pub fn build_dummies(
    events: &EventCalendar,
    shocks: &ShockSeries,
) -> Result<RegimeDummies, LpError> {
    let months = shocks.months.clone();
    let t_len = months.len();
    let index: BTreeMap<YearMonth, usize> =
        months.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut decided: Vec<Option<(Decision, NaiveDate)>> = vec![None; t_len];
    for e in events.events() {
        let Some(&t) = index.get(&YearMonth::of(e.date)) else {
            continue;
        };
        match decided[t] {
            Some((d, first)) if d != e.decision => {
                return Err(LpError::Data(format!(
                    "conflicting decisions in {}: {} on {first} and {} on {}",
                    months[t],
                    d.as_str(),
                    e.decision.as_str(),
                    e.date
                )));
            }
            _ => decided[t] = Some((e.decision, e.date)),
        }
    }
    let mut out = RegimeDummies {
        months,
        hike: vec![0.0; t_len],
        unch: vec![0.0; t_len],
        cut: vec![0.0; t_len],
    };
    for (t, d) in decided.iter().enumerate() {
        match d {
            Some((Decision::Hike, _)) => out.hike[t] = 1.0,
            Some((Decision::Cut, _)) => out.cut[t] = 1.0,
            Some((Decision::Unchanged, _)) => out.unch[t] = 1.0,
            None => {}
        }
    }
    let meetings: Vec<(usize, Decision)> = events
        .events()
        .iter()
        .filter_map(|e| index.get(&YearMonth::of(e.date)).map(|&t| (t, e.decision)))
        .collect();
    for (k, &(_, decision)) in meetings.iter().enumerate() {
        let sign = match decision {
            Decision::Hike => 1.0,
            Decision::Cut => -1.0,
            Decision::Unchanged => continue,
        };
        let neighbours = [
            k.checked_sub(1),
            Some(k + 1).filter(|&j| j < meetings.len()),
        ];
        for j in neighbours.into_iter().flatten() {
            let (t, d) = meetings[j];
            if d == Decision::Unchanged && shocks.mp[t] * sign > 0.0 {
                if sign > 0.0 {
                    out.hike[t] = 1.0;
                } else {
                    out.cut[t] = 1.0;
                }
            }
        }
    }
    Ok(out)
}
