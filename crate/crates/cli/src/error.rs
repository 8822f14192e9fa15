use std::fmt;

/// Exit status 2 for usage errors, 1 for numeric failures.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numeric(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<edgelab::Error> for CliError {
    fn from(e: edgelab::Error) -> Self {
        use edgelab::Error as E;
        match e {
            E::AspectRatio(_) | E::Dimensions(_) | E::Parameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other.into()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
