use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its valid range (angles, areas, sigma, orders).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An LED and a PD coincide, so the link geometry is undefined.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// No modulation-order combination satisfies the requested constraint.
    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),

    /// Scenario file could not be read or parsed.
    #[error("scenario config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
