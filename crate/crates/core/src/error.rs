use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shape disagreement or an image below the 3×3 stencil minimum.
    Dimension(&'static str),
    /// A parameter outside its admissible range.
    Parameter(&'static str),
    /// A sample outside [0, 1] or non-finite where an intensity was required.
    Value(&'static str),
    /// The explicit scheme produced a non-finite value at `iteration`.
    Divergence { iteration: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Value(msg) => write!(f, "value error: {msg}"),
            Error::Divergence { iteration } => {
                write!(f, "evolution diverged at iteration {iteration}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
