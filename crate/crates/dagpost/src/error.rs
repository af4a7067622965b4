use std::path::PathBuf;

/// Errors surfaced by the command-line layer, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dagpost_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Data(String),
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_DATA: i32 = 4;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use dagpost_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Data(_) => EXIT_DATA,
            CliError::Core(e) => match e {
                E::Guard { .. } => EXIT_GUARD,
                E::InvalidConfig(_) | E::Syntax { .. } | E::InvalidFeature(_) | E::Domain(_) | E::NotInPredecessors => {
                    EXIT_USAGE
                }
                _ => EXIT_DATA,
            },
        }
    }
}
