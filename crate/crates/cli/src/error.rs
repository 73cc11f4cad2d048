use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Singular(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Singular(_) | CliError::Numerical(_) => 2,
        }
    }
}

impl From<qnl_core::Error> for CliError {
    fn from(e: qnl_core::Error) -> Self {
        use qnl_core::Error as E;
        match e {
            E::Singular { .. } => CliError::Singular(e.to_string()),
            E::Quadrature { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
