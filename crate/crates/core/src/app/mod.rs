//! Command-line application: configuration, CSV ingestion, report emission
//! and subcommand orchestration.

pub mod config;
pub mod ingest;
pub mod report;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

use crate::econ::EconError;
use crate::funnel::FunnelError;
use crate::market::MarketError;
use crate::microsim::SimError;
use crate::scenario::ScenarioError;
use crate::valuation::ValuationError;

pub use config::RunConfig;
pub use ingest::IngestError;
pub use report::RunReport;
pub use run::{run, Subcommand};

/// Exit status for validation failures.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for solver failures.
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("config {key}: {message}")]
    Config { key: String, message: String },
    #[error("config line {line}: unknown key {key:?} (see --help for the list of keys)")]
    UnknownKey { key: String, line: usize },
    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Funnel(#[from] FunnelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("writing {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        AppError::Config { key: key.to_string(), message: message.into() }
    }

    fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            AppError::Market(MarketError::NoCrossing { .. } | MarketError::NotConverged { .. })
                | AppError::Scenario(ScenarioError::Market(
                    MarketError::NoCrossing { .. } | MarketError::NotConverged { .. }
                ))
        )
    }

    /// Machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            AppError::FileNotFound(_) => "FILE_NOT_FOUND",
            AppError::Ingest(e) => e.code(),
            AppError::Config { .. } | AppError::ConfigSyntax { .. } => "CONFIG_ERROR",
            AppError::UnknownKey { .. } => "UNKNOWN_CONFIG_KEY",
            AppError::Market(MarketError::NoCrossing { .. }) => "NO_CROSSING",
            AppError::Market(MarketError::NotConverged { .. }) => "NOT_CONVERGED",
            _ if self.is_solver_failure() => "SOLVER_FAILURE",
            AppError::Valuation(ValuationError::CurrencyMismatch { .. }) => "CURRENCY_MISMATCH",
            AppError::Econ(_)
            | AppError::Market(_)
            | AppError::Valuation(_)
            | AppError::Funnel(_)
            | AppError::Sim(_)
            | AppError::Scenario(_) => "VALIDATION_ERROR",
            AppError::Output { .. } => "OUTPUT_ERROR",
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_solver_failure() {
            EXIT_SOLVER
        } else {
            EXIT_VALIDATION
        }
    }
}

impl From<ingest::IngestOpenError> for AppError {
    fn from(e: ingest::IngestOpenError) -> Self {
        match e {
            ingest::IngestOpenError::NotFound(p) => AppError::FileNotFound(p),
            ingest::IngestOpenError::Ingest(e) => AppError::Ingest(e),
        }
    }
}
