use thiserror::Error;

/// Errors produced by the medial-salience pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot decode image: {0}")]
    Format(String),
    #[error("image is {width}x{height}; at least 3x3 is required")]
    Dimension { width: usize, height: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("region {0} does not exist")]
    InvalidRegion(u32),
    #[error("gradient sample at ({x:.3}, {y:.3}) is outside the region")]
    Sample { x: f64, y: f64 },
    #[error("unknown channel token `{0}`")]
    UnknownChannel(String),
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
