use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] casc_core::Error),
    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl CliError {
    /// 0 success, 2 usage/config, 3 data ingest, 4 numerical failure.
    pub fn exit_code(&self) -> u8 {
        use casc_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Replay(_) => 4,
            CliError::Core(e) => match e {
                E::Config(_) | E::InvalidInput(_) => 2,
                E::Ingest { .. } | E::Io(_) | E::Csv(_) | E::Json(_) | E::DimensionMismatch { .. } | E::Range { .. } => 3,
                E::Numerical(_) | E::DegenerateNode { .. } | E::Infeasible { .. } => 4,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
