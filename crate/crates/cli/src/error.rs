use std::path::Path;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    /// Process exit status: 1 for numerical or statistical failure, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    /// Attaches the name of the input that caused a library error.
    pub fn core(context: &str, err: bfvar::Error) -> Self {
        let msg = format!("{context}: {err}");
        match err {
            bfvar::Error::TooManyFailures { .. } | bfvar::Error::NonFinite(_) => CliError::Numerical(msg),
            _ => CliError::Input(msg),
        }
    }
}

pub(crate) trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for bfvar::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|e| CliError::core(what, e))
    }
}
