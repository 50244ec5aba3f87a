use alloc::string::String;
use core::fmt;

/// Errors raised by the selection library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    Parameter {
        /// Parameter name, e.g. `delta`.
        name: &'static str,
        /// Offending value.
        value: f64,
        /// Admissible range, human readable.
        expected: &'static str,
    },
    /// Too few samples for the requested statistic.
    InsufficientSamples {
        /// Samples needed.
        needed: usize,
        /// Samples available.
        got: usize,
    },
    /// A cell lies outside `[0, 1]` but the bound method assumes bounded values.
    Domain {
        /// Codec id of the offending cell.
        codec: String,
        /// Criterion id of the offending cell.
        criterion: String,
        /// Sample index of the offending cell.
        sample: usize,
        /// Offending value.
        value: f64,
    },
    /// Malformed matrix or inconsistent identifiers.
    InvalidMatrix(String),
    /// Objective or constraints do not match the data.
    Config(String),
    /// Interval algebra produced an empty set.
    InconsistentIntervals {
        /// Lower end of the would-be interval.
        lo: f64,
        /// Upper end of the would-be interval.
        hi: f64,
    },
}

/// Shorthand result type.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter {
                name,
                value,
                expected,
            } => write!(f, "parameter `{name}` = {value} is invalid, expected {expected}"),
            Error::InsufficientSamples { needed, got } => {
                write!(f, "insufficient samples: need at least {needed}, got {got}")
            }
            Error::Domain {
                codec,
                criterion,
                sample,
                value,
            } => write!(
                f,
                "value {value} for codec `{codec}`, criterion `{criterion}`, sample #{sample} \
                 is outside [0, 1], which the chosen bound method requires"
            ),
            Error::InvalidMatrix(msg) => write!(f, "invalid criterion matrix: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::InconsistentIntervals { lo, hi } => {
                write!(f, "inconsistent intervals: derived range [{lo}, {hi}] is empty")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    check_open_unit("delta", delta)
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            expected: "a value in the open interval (0, 1)",
        })
    }
}

pub(crate) fn check_count(name: &'static str, value: usize) -> Result<()> {
    if value >= 1 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value: value as f64,
            expected: "a count of at least 1",
        })
    }
}
