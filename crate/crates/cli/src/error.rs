use std::io;
use std::path::PathBuf;

use dp_spectral::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// A mathematical verification did not hold.
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 1 = failed check, 2 = usage or config, 3 = runtime guard.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Sim(SimError::BlowUpDetected { .. } | SimError::CubeRootDomain { .. }) => 3,
            CliError::Sim(_) => 2,
        }
    }
}
