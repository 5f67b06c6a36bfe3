use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter fell outside its physical or mathematical domain.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("distance {distance} km is not an integer multiple of the amplifier spacing {spacing} km")]
    NonIntegerStages { distance: f64, spacing: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("conclusive probability underflowed ({p_ok:e})")]
    Underflow { p_ok: f64 },

    #[error("no positive key rate anywhere in the search domain (best raw value {best_raw:e})")]
    NoPositiveRate { best_raw: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("decoder did not match the syndrome after {iterations} iterations")]
    DecodingFailure { iterations: usize },

    #[error("error correction failed on chunk {chunk}")]
    ChunkFailure { chunk: usize },

    #[error("error correction failed on {failed} of {total} chunks")]
    ReconciliationAborted { failed: usize, total: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "(0, 1]",
        })
    }
}

pub(crate) fn check_gain(name: &'static str, value: f64) -> Result<f64> {
    if value >= 1.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: ">= 1",
        })
    }
}

pub(crate) fn check_fraction(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1)",
        })
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}
