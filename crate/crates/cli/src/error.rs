use fep_core::FepError;

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    NotFrozen(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::NotFrozen(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::NotFrozen(m) => write!(f, "not frozen: {m}"),
        }
    }
}

impl From<FepError> for CliError {
    fn from(e: FepError) -> Self {
        match e {
            FepError::NotFrozen { .. } => CliError::NotFrozen(e.to_string()),
            FepError::DeltaOutOfRange(_) | FepError::BruteForceTooLong(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
