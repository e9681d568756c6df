//! Errors with module/operation provenance and their exit codes.

use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{module}::{operation}: {source}")]
    Core { module: &'static str, operation: &'static str, source: virtphot::Error },
    #[error("{what} `{path}`: {message}")]
    Io { what: &'static str, path: String, message: String },
    #[error("plot error: {0}")]
    Plot(String),
    #[error("every sweep point is infeasible")]
    AllInfeasible,
}

#[derive(Serialize)]
struct Report<'a> {
    error: &'a str,
    module: Option<&'a str>,
    operation: Option<&'a str>,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn parse(m: impl Into<String>) -> Self {
        CliError::Parse(m.into())
    }

    pub fn validation(m: impl Into<String>) -> Self {
        CliError::Validation(m.into())
    }

    pub fn core(module: &'static str, operation: &'static str, source: virtphot::Error) -> Self {
        CliError::Core { module, operation, source }
    }

    pub fn io(what: &'static str, path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { what, path: path.display().to_string(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Core { source, .. } => source.kind(),
            CliError::Io { .. } => "io",
            CliError::Plot(_) => "plot",
            CliError::AllInfeasible => "infeasible",
        }
    }

    pub fn exit_code(&self) -> i32 {
        use virtphot::Error as E;
        match self {
            CliError::Parse(_) | CliError::Validation(_) | CliError::Plot(_) => 2,
            CliError::AllInfeasible => 4,
            CliError::Io { .. } => 5,
            CliError::Core { source, .. } => match source {
                E::Config(_) | E::Domain(_) | E::Truncation(_) | E::Resource(_) => 2,
                E::Convergence { .. } | E::Integrator(_) => 3,
                E::Infeasible(_) | E::ProtocolImpossible(_) => 4,
                E::LabelConflict(_) | E::Lookup(_) => 5,
            },
        }
    }

    /// One-line JSON report for stderr.
    pub fn to_json(&self) -> String {
        let (module, operation) = match self {
            CliError::Core { module, operation, .. } => (Some(*module), Some(*operation)),
            _ => (None, None),
        };
        serde_json::to_string(&Report { error: self.kind(), module, operation, exit_code: self.exit_code(), message: self.to_string() })
            .expect("report serializes")
    }
}

/// Attaches provenance to core results.
pub trait Context<T> {
    fn at(self, module: &'static str, operation: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for virtphot::Result<T> {
    fn at(self, module: &'static str, operation: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::core(module, operation, e))
    }
}
