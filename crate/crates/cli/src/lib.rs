//! Batch front-end for the spinning-source heat-kernel library: geometry
//! checks, the verification ledger, kernel grids and zeta densities.

pub mod config;
pub mod geometry;
pub mod kernel;
pub mod output;
pub mod report;
pub mod verify;
pub mod zeta;

use std::fmt;

use config::{RunConfig, Subcommand};

/// Process exit contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Failed,
    Invalid,
    NonConverged,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Failed => 1,
            Status::Invalid => 2,
            Status::NonConverged => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn new(status: Status, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::new(Status::Invalid, e.0)
    }
}

/// Domain errors are invalid input; the remaining library errors are
/// numerical failures.
impl From<spinning_zeta::Error> for CliError {
    fn from(e: spinning_zeta::Error) -> Self {
        use spinning_zeta::Error as E;
        let status = match e {
            E::Domain(_) | E::InvalidSet(_) | E::Pole(_) => Status::Invalid,
            E::Coincidence(_) | E::Overflow(_) | E::RankDeficient => Status::NonConverged,
        };
        CliError::new(status, e.to_string())
    }
}

/// Result of one subcommand: the artifact body, its exit status and
/// diagnostics destined for stderr.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub status: Status,
    pub notes: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Subcommand::Geometry => geometry::run(cfg),
        Subcommand::Verify => verify::run(cfg),
        Subcommand::Kernel => kernel::run(cfg),
        Subcommand::Zeta => zeta::run(cfg),
        Subcommand::Report => report::run(cfg),
    }
}
