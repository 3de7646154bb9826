use serde_json::json;
use thiserror::Error;

/// Failure classes; each maps to an exit code and an error kind on stderr.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed JSON, unknown keys, wrong types.
    #[error("{0}")]
    Parse(String),
    /// Well-formed configuration that violates a constraint.
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Runtime(_) => "runtime",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

impl From<spdc_core::Error> for CliError {
    fn from(e: spdc_core::Error) -> Self {
        use spdc_core::Error as E;
        match e {
            E::InvalidInput(m) => CliError::Config(m),
            E::Io(e) => CliError::Io(e.to_string()),
            E::Csv(e) => CliError::Io(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
