use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The data cannot have come from the model with the stated spread.
    #[error(
        "infeasible sample for k = {k}: y_max/(1+k) = {theta_ml} exceeds y_min/(1-k) = {theta_mu}"
    )]
    Infeasible {
        k: f64,
        theta_ml: f64,
        theta_mu: f64,
    },

    #[error("sample has {got} values but the design expects n = {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown estimator `{name}`; available: {available}")]
    UnknownEstimator { name: String, available: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}
