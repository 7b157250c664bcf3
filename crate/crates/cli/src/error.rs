//! Error-to-exit-code mapping.
//!
//! 2: config/schema violations, 3: regime errors surfaced from the modules,
//! 4: resource budgets, 1: everything else (IO, internal).

use perpetua::dist::DistError;
use perpetua::markov::MarkovError;
use perpetua::metric::MetricError;
use perpetua::montecarlo::SimError;
use perpetua::perpetuity::PerpetuityError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Schema(String),
    #[error("{0}")]
    Regime(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<PerpetuityError> for CliError {
    fn from(e: PerpetuityError) -> Self {
        match &e {
            PerpetuityError::Regime(_) => CliError::Regime(e.to_string()),
            PerpetuityError::Budget(_) => CliError::Budget(e.to_string()),
            PerpetuityError::Metric(m) => match m {
                MetricError::Domain(_) => CliError::Regime(e.to_string()),
                MetricError::Budget(_) => CliError::Budget(e.to_string()),
                MetricError::Unsupported(_) => CliError::Schema(e.to_string()),
            },
            PerpetuityError::InvalidInstance(_)
            | PerpetuityError::Dist(_)
            | PerpetuityError::UnsupportedExact(_) => CliError::Schema(e.to_string()),
            PerpetuityError::Internal(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match &e {
            MetricError::Domain(_) => CliError::Regime(e.to_string()),
            MetricError::Budget(_) => CliError::Budget(e.to_string()),
            MetricError::Unsupported(_) => CliError::Schema(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<MarkovError> for CliError {
    fn from(e: MarkovError) -> Self {
        match &e {
            MarkovError::Regime(_) => CliError::Regime(e.to_string()),
            MarkovError::Budget(_) => CliError::Budget(e.to_string()),
            MarkovError::EnvelopeNotEnumerable(_) => CliError::Schema(e.to_string()),
            MarkovError::InvalidSpec(_) | MarkovError::NotIrreducible | MarkovError::Dist(_) => {
                CliError::Schema(e.to_string())
            }
            MarkovError::Instance(inner) => match inner {
                PerpetuityError::Regime(_) => CliError::Regime(e.to_string()),
                PerpetuityError::Budget(_) => CliError::Budget(e.to_string()),
                _ => CliError::Schema(e.to_string()),
            },
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        CliError::Schema(e.to_string())
    }
}
