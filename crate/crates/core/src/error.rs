use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("pair does not share a simultaneous ordered SVD (off-diagonal residue {residue:.3e} > {threshold:.3e})")]
    SimultaneousSvdViolation { residue: f64, threshold: f64 },

    #[error("multiplier condition violated: {0}")]
    ConditionViolation(String),

    #[error("degenerate classification: {0}")]
    DegenerateClassification(String),

    #[error("route disagreement in {what}: {detail}")]
    RouteDisagreement { what: String, detail: String },
}

impl Error {
    /// Short machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Input(_) => "INPUT_ERROR",
            Error::Parameter(_) => "PARAMETER_ERROR",
            Error::Decomposition(_) => "DECOMPOSITION_FAILURE",
            Error::SimultaneousSvdViolation { .. } => "SIMULTANEOUS_SVD_VIOLATION",
            Error::ConditionViolation(_) => "CONDITION_VIOLATION",
            Error::DegenerateClassification(_) => "DEGENERATE_CLASSIFICATION",
            Error::RouteDisagreement { .. } => "ROUTE_DISAGREEMENT",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
