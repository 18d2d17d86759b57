use thiserror::Error;

/// Errors raised by parameter validation throughout the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidCount {
        name: &'static str,
        value: usize,
        expected: &'static str,
    },
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("value {0} is not an element of the bag")]
    NotInBag(f64),
    #[error("rule {rule} expects {expected}, got {got} e-values")]
    RuleArity {
        rule: &'static str,
        expected: &'static str,
        got: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected: "a value in (0, 1)",
        })
    }
}

/// `u` draws live in (0, 1]; `u = 1` recovers the deterministic rule.
pub(crate) fn check_u(u: f64) -> Result<f64> {
    if u > 0.0 && u <= 1.0 {
        Ok(u)
    } else {
        Err(Error::InvalidParameter {
            name: "u",
            value: u,
            expected: "a value in (0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected: "a finite positive value",
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    // +inf is a legitimate e-value (e.g. an overflowed likelihood ratio).
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected: "a nonnegative value",
        })
    }
}
