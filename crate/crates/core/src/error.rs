//! Crate-wide error type.

use std::path::PathBuf;

/// Everything that can go wrong inside the toolkit.
///
/// Variant names double as the machine-readable error name printed by the
/// command-line front end (see [`Error::name`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no input samples")]
    EmptyInput,
    #[error("invalid sample at position {index}: {value}")]
    InvalidSample { index: usize, value: f64 },
    #[error("incompatible sampling periods: {0}")]
    IncompatiblePeriod(String),
    #[error("series do not overlap")]
    NoOverlap,
    #[error("no data: {0}")]
    NoData(String),
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("no sample above the on-threshold of {0} W")]
    NoOnState(f64),
    #[error("{combinations} state combinations exceed the cap of {cap}")]
    TooManyCombinations { combinations: u128, cap: u64 },
    #[error("truth series has zero energy")]
    ZeroEnergy,
    #[error("no ground truth for appliance `{0}`")]
    MissingTruth(String),
    #[error("correlation undefined: feed `{0}` is constant over the overlap")]
    UndefinedCorrelation(String),
    #[error("invalid building spec: {0}")]
    InvalidSpec(String),
    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid appliance model: {0}")]
    InvalidModel(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable variant name, used in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EmptyInput",
            Error::InvalidSample { .. } => "InvalidSample",
            Error::IncompatiblePeriod(_) => "IncompatiblePeriod",
            Error::NoOverlap => "NoOverlap",
            Error::NoData(_) => "NoData",
            Error::TooShort { .. } => "TooShort",
            Error::NoOnState(_) => "NoOnState",
            Error::TooManyCombinations { .. } => "TooManyCombinations",
            Error::ZeroEnergy => "ZeroEnergy",
            Error::MissingTruth(_) => "MissingTruth",
            Error::UndefinedCorrelation(_) => "UndefinedCorrelation",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidHierarchy(_) => "InvalidHierarchy",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidModel(_) => "InvalidModel",
            Error::UnknownNode(_) => "UnknownNode",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
