//! Library side of the experiment driver (the `smolyak-ps` binary is a thin
//! wrapper). Split out so the configuration schema, the external-process
//! protocol adapter, and the runners are testable directly.

pub mod builtins;
pub mod config;
pub mod external;
pub mod output;
pub mod runner;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        CliError::Model(msg.into())
    }

    /// Process exit code class: 2 configuration, 3 model.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Model(m) => write!(f, "model error: {m}"),
        }
    }
}

impl From<smolyak_ps::CoreError> for CliError {
    fn from(e: smolyak_ps::CoreError) -> Self {
        match e {
            smolyak_ps::CoreError::ModelEvaluation { .. } => CliError::Model(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
