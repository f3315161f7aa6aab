use std::fmt;
use std::path::Path;

use mmconnect::connectedness::ConnectednessError;
use mmconnect::damm::DammError;
use mmconnect::localproj::LpError;
use mmconnect::network::NetworkError;
use mmconnect::shocks::ShocksError;
use mmconnect::timeseries::TimeseriesError;
use mmconnect::tvpvar::TvpVarError;

/// Failure class, mapped one-to-one onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub stage: Option<&'static str>,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            stage: None,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Data, message)
    }

    pub fn missing_input(path: &Path) -> Self {
        Self::data(format!("missing input file {}", path.display()))
    }

    /// Tags the error with the stage it came from, keeping an inner tag.
    pub fn in_stage(mut self, stage: &'static str) -> Self {
        self.stage.get_or_insert(stage);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn prefixed(mut self, context: &str) -> Self {
        self.message = format!("{context}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(stage) => write!(f, "{stage} stage failed: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(e.to_string())
    }
}

fn timeseries_kind(e: &TimeseriesError) -> ErrorKind {
    match e {
        TimeseriesError::DegenerateVariance => ErrorKind::Numerical,
        TimeseriesError::Series(_, inner) => timeseries_kind(inner),
        _ => ErrorKind::Data,
    }
}

impl From<TimeseriesError> for CliError {
    fn from(e: TimeseriesError) -> Self {
        Self::new(timeseries_kind(&e), e.to_string())
    }
}

fn damm_kind(e: &DammError) -> ErrorKind {
    match e {
        DammError::Parameter(_) => ErrorKind::Config,
        DammError::Divergence { .. } | DammError::NotConverged { .. } => ErrorKind::Numerical,
        DammError::Series { source, .. } => damm_kind(source),
        _ => ErrorKind::Data,
    }
}

impl From<DammError> for CliError {
    fn from(e: DammError) -> Self {
        Self::new(damm_kind(&e), e.to_string())
    }
}

impl From<TvpVarError> for CliError {
    fn from(e: TvpVarError) -> Self {
        let kind = match e {
            TvpVarError::Spec(_) => ErrorKind::Config,
            TvpVarError::Conditioning { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<ConnectednessError> for CliError {
    fn from(e: ConnectednessError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        let kind = match e {
            NetworkError::DegenerateDensity => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<ShocksError> for CliError {
    fn from(e: ShocksError) -> Self {
        let kind = match e {
            ShocksError::Config(_) => ErrorKind::Config,
            ShocksError::Estimation(_)
            | ShocksError::Numerical(_)
            | ShocksError::Identification(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        let kind = match e {
            LpError::Config(_) => ErrorKind::Config,
            LpError::Collinear { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        };
        Self::new(kind, e.to_string())
    }
}
