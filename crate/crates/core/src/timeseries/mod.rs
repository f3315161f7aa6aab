//! Price panels, returns, calendars and descriptive statistics.

mod io;
mod month;
mod panel;
mod stats;

pub(crate) use io::parse_date;
pub use io::{read_events, read_prices, write_events, write_prices, write_summary};
pub use month::YearMonth;
pub use panel::{
    align_calendars, log_returns, Decision, EventCalendar, PolicyEvent, PricePanel, RawSeries,
    ReturnPanel,
};
pub use stats::{
    adf_test, default_adf_max_lag, jarque_bera, jarque_bera_from_moments, mackinnon_pvalue,
    sample_moments, summary_stats, AdfResult, SeriesSummary, SummaryStats, MIN_SUMMARY_LENGTH,
};

#[derive(Debug, thiserror::Error)]
pub enum TimeseriesError {
    #[error("calendar alignment failed: {0}")]
    Alignment(String),
    #[error("invalid calendar: {0}")]
    Calendar(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate variance")]
    DegenerateVariance,
    #[error("series {series}: need at least {needed} observations, got {got}")]
    InsufficientData {
        series: String,
        needed: usize,
        got: usize,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("series {0}: {1}")]
    Series(String, Box<TimeseriesError>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TimeseriesError {
    fn for_series(self, name: &str) -> Self {
        match self {
            e @ TimeseriesError::InsufficientData { .. } => e,
            e => TimeseriesError::Series(name.to_string(), Box::new(e)),
        }
    }
}
