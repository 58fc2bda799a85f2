//! Library half of the workbench binary: config resolution, CSV and
//! manifest emission, and the subcommand implementations. The binary in
//! `main.rs` only parses flags and maps errors to exit codes; everything
//! else lives here so integration tests can drive runs in-process.

pub mod config;
pub mod report;
pub mod run;

use std::path::PathBuf;

/// Failures are bucketed by who has to act on them: the user fixing their
/// invocation, the maintainer chasing a numerical bug, or the environment.
/// The bucket is the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Integrity(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Integrity(_) => 2,
            Error::Io(_) => 3,
        }
    }
}

impl From<xychain::Error> for Error {
    fn from(e: xychain::Error) -> Self {
        match e {
            xychain::Error::InvalidArgument(_) => Error::Config(e.to_string()),
            xychain::Error::Integrity(_) => Error::Integrity(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(context: &str, path: &std::path::Path, e: std::io::Error) -> Error {
    Error::Io(format!("{context} {}: {e}", path.display()))
}

/// Global flags. Each one overrides the matching config-file field.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub grid: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// One subcommand with its own flags, all optional so the config file can
/// fill them in.
#[derive(Clone, Debug)]
pub enum Command {
    GroundSweep { h_lo: Option<f64>, h_hi: Option<f64>, h_step: Option<f64> },
    ExcitedScan { h: Option<f64>, nb: Option<usize> },
    MaxCSweep { nb: Option<usize>, h_lo: Option<f64>, h_hi: Option<f64>, h_step: Option<f64> },
    Does { bins: Option<usize> },
    Dis { bins: Option<usize> },
    OracleCheck { n: Option<usize>, h: Option<f64>, nb_list: Option<Vec<usize>>, tol: Option<f64> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GroundSweep { .. } => "ground-sweep",
            Command::ExcitedScan { .. } => "excited-scan",
            Command::MaxCSweep { .. } => "max-c-sweep",
            Command::Does { .. } => "does",
            Command::Dis { .. } => "dis",
            Command::OracleCheck { .. } => "oracle-check",
        }
    }
}

/// A fully described invocation: optional config file, global overrides,
/// one subcommand.
#[derive(Clone, Debug)]
pub struct Request {
    pub config_path: Option<PathBuf>,
    pub overrides: Overrides,
    pub command: Command,
}
