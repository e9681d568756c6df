use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters that do not correspond to a physical circuit
    /// (non positive-definite inductance matrix, U11 <= U22, ...).
    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("basis not converged: estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Convergence { estimate: f64, tolerance: f64 },

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("label conflict: {0}")]
    LabelConflict(String),

    #[error("unknown or unassigned label `{0}`")]
    Lookup(String),

    #[error("protocol impossible: {0}")]
    ProtocolImpossible(String),

    #[error("integrator failure: {0}")]
    Integrator(String),
}

impl Error {
    /// Short machine-readable kind, used in CSV status columns and run reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Infeasible(_) => "infeasible",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Convergence { .. } => "convergence",
            Error::Truncation(_) => "truncation",
            Error::Resource(_) => "resource",
            Error::LabelConflict(_) => "label_conflict",
            Error::Lookup(_) => "lookup",
            Error::ProtocolImpossible(_) => "protocol_impossible",
            Error::Integrator(_) => "integrator",
        }
    }
}
