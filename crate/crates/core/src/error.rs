use alloc::string::String;
use alloc::vec::Vec;

use crate::model::ValidationError;

/// Errors raised by the library surface.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("alpha must be in (0,1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("family size k must be at least 1")]
    ZeroFamilySize,
    #[error("p_value must be in (0,1], got {0}")]
    PValueOutOfRange(f64),
    #[error("probability must be in (0,1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("value must be finite, got {0}")]
    NonFinite(f64),
    #[error("p-value list must not be empty")]
    EmptyFamily,
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("hypothesis {0} has neither p_value nor p_band")]
    MissingPValue(String),
    #[error("unknown family {0}")]
    UnknownFamily(String),
    #[error("plan failed validation with {} error(s)", .0.len())]
    InvalidPlan(Vec<ValidationError>),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

pub(crate) fn check_k(k: u32) -> Result<u32> {
    if k == 0 {
        Err(Error::ZeroFamilySize)
    } else {
        Ok(k)
    }
}

pub(crate) fn check_p(p: f64) -> Result<f64> {
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(Error::PValueOutOfRange(p))
    }
}
