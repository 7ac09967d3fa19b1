//! Error classes and their exit codes.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Numeric(String),
    /// Exit code 1.
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn config(field: &str, msg: impl fmt::Display) -> Self {
        Failure::Config(format!("{field}: {msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric validity error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<displearn::Error> for Failure {
    fn from(e: displearn::Error) -> Self {
        use displearn::Error as E;
        match e {
            E::Io(_) => Failure::Io(e.to_string()),
            E::Internal(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<Failure>() {
            Ok(f) => f,
            Err(e) => match e.downcast::<displearn::Error>() {
                Ok(d) => d.into(),
                Err(e) => Failure::Io(format!("{e:#}")),
            },
        }
    }
}
