use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid radius law: {0}")]
    InvalidLaw(String),

    #[error("moment condition fails: the radius law has an infinite moment of order {d}")]
    MomentCondition { d: usize },

    #[error("greedy integrability condition fails in dimension {d}")]
    GreedyCondition { d: usize },

    #[error("radius law is not normalized (total mass {mass})")]
    Unnormalized { mass: f64 },

    #[error("moment of order {order} is infinite")]
    InfiniteMoment { order: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sample is complete up to radius {available}, but radius {needed} is required")]
    IncompleteSample { needed: f64, available: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("point set has {found} points, exact search supports at most {max}")]
    TooManyPoints { found: usize, max: usize },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
