use std::collections::BTreeSet;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::TimeseriesError;

/// One series as observed on its own trading calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub name: String,
    pub observations: Vec<(NaiveDate, f64)>,
}

/// Closing prices on a common calendar, `T × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

/// Percent log returns, `(T-1) × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

impl PricePanel {
    pub fn new(
        dates: Vec<NaiveDate>,
        names: Vec<String>,
        values: DMatrix<f64>,
    ) -> Result<Self, TimeseriesError> {
        if values.nrows() != dates.len() || values.ncols() != names.len() {
            return Err(TimeseriesError::Shape(format!(
                "{}x{} values for {} dates and {} names",
                values.nrows(),
                values.ncols(),
                dates.len(),
                names.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TimeseriesError::Calendar(
                "dates must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            dates,
            names,
            values,
        })
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }
}

impl ReturnPanel {
    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Restricts all series to the dates every one of them trades on.
pub fn align_calendars(series: &[RawSeries]) -> Result<PricePanel, TimeseriesError> {
    if series.is_empty() {
        return Err(TimeseriesError::Alignment("no series supplied".into()));
    }
    for s in series {
        if s.observations.len() < 2 {
            return Err(TimeseriesError::InsufficientData {
                series: s.name.clone(),
                needed: 2,
                got: s.observations.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for (d, _) in &s.observations {
            if !seen.insert(*d) {
                return Err(TimeseriesError::Calendar(format!(
                    "series {} has duplicate date {d}",
                    s.name
                )));
            }
        }
    }
    let mut common: BTreeSet<NaiveDate> = series[0].observations.iter().map(|o| o.0).collect();
    for s in &series[1..] {
        let dates: BTreeSet<NaiveDate> = s.observations.iter().map(|o| o.0).collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        return Err(TimeseriesError::Alignment(
            "series share no common dates".into(),
        ));
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let mut values = DMatrix::zeros(dates.len(), series.len());
    for (j, s) in series.iter().enumerate() {
        let mut obs = s.observations.clone();
        obs.sort_by_key(|o| o.0);
        let mut it = obs.iter().peekable();
        for (t, d) in dates.iter().enumerate() {
            while let Some((od, _)) = it.peek() {
                if od < d {
                    it.next();
                } else {
                    break;
                }
            }
            let (_, v) = it.next().expect("date present in every series");
            values[(t, j)] = *v;
        }
    }
    PricePanel::new(
        dates,
        series.iter().map(|s| s.name.clone()).collect(),
        values,
    )
}

/// `r_t = 100 · ln(P_t / P_{t-1})` per series.
pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel, TimeseriesError> {
    if let Some(((t, j), v)) = panel
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| ((k % panel.values.nrows(), k / panel.values.nrows()), v))
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(TimeseriesError::Domain(format!(
            "nonpositive price {v} for {} on {}",
            panel.names[j], panel.dates[t]
        )));
    }
    let rows = panel.values.nrows();
    if rows < 2 {
        return Err(TimeseriesError::InsufficientData {
            series: "panel".into(),
            needed: 2,
            got: rows,
        });
    }
    let values = DMatrix::from_fn(rows - 1, panel.values.ncols(), |t, j| {
        100.0 * (panel.values[(t + 1, j)] / panel.values[(t, j)]).ln()
    });
    Ok(ReturnPanel {
        dates: panel.dates[1..].to_vec(),
        names: panel.names.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Hike,
    Cut,
    Unchanged,
}

impl std::str::FromStr for Decision {
    type Err = TimeseriesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "hike" => Ok(Decision::Hike),
            "cut" => Ok(Decision::Cut),
            "unchanged" => Ok(Decision::Unchanged),
            other => Err(TimeseriesError::Parse(format!(
                "unknown decision {other:?}"
            ))),
        }
    }
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Hike => "hike",
            Decision::Cut => "cut",
            Decision::Unchanged => "unchanged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyEvent {
    pub date: NaiveDate,
    pub decision: Decision,
}

/// Rate announcements with unique, increasing dates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventCalendar {
    events: Vec<PolicyEvent>,
}

impl EventCalendar {
    pub fn new(events: Vec<PolicyEvent>) -> Result<Self, TimeseriesError> {
        if events.windows(2).any(|w| w[0].date >= w[1].date) {
            return Err(TimeseriesError::Calendar(
                "event dates must be unique and increasing".into(),
            ));
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[PolicyEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}
