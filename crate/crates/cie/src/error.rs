use std::path::PathBuf;

/// Errors surfaced by the command-line tool, each tied to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Data(String),

    #[error("unknown instance {index}: the dataset has {count} instances")]
    UnknownInstance { index: usize, count: usize },

    #[error("constraint infeasible: {0}")]
    Infeasible(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } | CliError::Data(_) => 2,
            CliError::UnknownInstance { .. } => 3,
            CliError::Infeasible(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<cie_core::Error> for CliError {
    fn from(e: cie_core::Error) -> Self {
        use cie_core::Error as E;
        match e {
            E::NoFeasibleSingleton { .. } => CliError::Infeasible(e.to_string()),
            E::InvalidMiningConfig(_) | E::InvalidObjectiveConfig(_) | E::InvalidBinning { .. } | E::InvalidSchema(_) => {
                CliError::Config(e.to_string())
            }
            E::UnknownClass(_) | E::InvalidSelection(_) | E::UndefinedConfidence => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
