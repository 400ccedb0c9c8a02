use alloc::string::String;
use core::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value violated an operation precondition.
    InvalidInput(String),
    /// The agent pose is outside free space.
    InvalidPose(String),
    /// The episode already terminated (STOP issued or budget exhausted).
    EpisodeTerminated,
    /// World generation could not satisfy the requested parameters.
    Generation(String),
    /// A configuration value is out of range or inconsistent.
    Config(String),
    /// Two directions coincide and no frame can be constructed.
    DegenerateGeometry,
    /// No JSON object could be found in a model reply.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::InvalidPose(m) => write!(f, "invalid pose: {m}"),
            Error::EpisodeTerminated => write!(f, "episode already terminated"),
            Error::Generation(m) => write!(f, "world generation failed: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::DegenerateGeometry => write!(f, "degenerate geometry"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
