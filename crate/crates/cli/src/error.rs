use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(vrabi::Error),

    #[error("{failed} of {total} sweep cells failed (see surface_errors.json)")]
    PartialSweep { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<vrabi::Error> for CliError {
    fn from(e: vrabi::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::PartialSweep { .. } => 4,
            CliError::Io(_) => 1,
        }
    }
}
