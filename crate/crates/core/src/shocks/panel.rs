use std::collections::BTreeSet;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use super::ShocksError;
use crate::timeseries::YearMonth;

/// Per-meeting high-frequency surprise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurpriseEvent {
    pub date: NaiveDate,
    /// Fed-funds-future surprise.
    pub fff: f64,
    /// Equity-index surprise.
    pub spx: f64,
}

/// Monthly surprises `m_t = (rate, equity)`, `T × 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurprisePanel {
    pub months: Vec<YearMonth>,
    pub values: DMatrix<f64>,
}

pub const MACRO_COLUMNS: [&str; 5] = ["gs1", "spx", "cpi", "ebp", "indpro"];

/// Monthly macro block `y_t`, `T × 5` in [`MACRO_COLUMNS`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroPanel {
    pub months: Vec<YearMonth>,
    pub values: DMatrix<f64>,
}

impl SurprisePanel {
    pub fn rate(&self) -> Vec<f64> {
        self.values.column(0).iter().copied().collect()
    }
}

/// Sums meeting surprises by calendar month over `months`; months without a
/// meeting are zero. Meetings outside `months` are skipped.
pub fn aggregate_surprises(
    events: &[SurpriseEvent],
    months: &[YearMonth],
) -> Result<SurprisePanel, ShocksError> {
    if months.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ShocksError::Data(
            "months must be strictly increasing".into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for e in events {
        if !seen.insert(e.date) {
            return Err(ShocksError::Data(format!(
                "duplicate meeting record on {}",
                e.date
            )));
        }
        if !e.fff.is_finite() || !e.spx.is_finite() {
            return Err(ShocksError::Data(format!(
                "non-finite surprise on {}",
                e.date
            )));
        }
    }
    let mut sorted: Vec<&SurpriseEvent> = events.iter().collect();
    sorted.sort_by_key(|e| e.date);
    let mut values = DMatrix::zeros(months.len(), 2);
    let mut skipped = 0;
    for e in sorted {
        match months.binary_search(&YearMonth::of(e.date)) {
            Ok(t) => {
                values[(t, 0)] += e.fff;
                values[(t, 1)] += e.spx;
            }
            Err(_) => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} meetings fall outside the monthly sample and were skipped");
    }
    Ok(SurprisePanel {
        months: months.to_vec(),
        values,
    })
}
