use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frequency 0 is outside the domain of {0}")]
    ZeroFrequency(&'static str),

    #[error("cutoff must be at least {min}, got {got}")]
    InvalidCutoff { got: usize, min: usize },

    #[error("grid of {gridpoints} points aliases cutoff {cutoff}; need at least {required}")]
    GridTooSmall {
        gridpoints: usize,
        cutoff: usize,
        required: usize,
    },

    #[error("cutoff {cutoff} exceeds the direct-convolution bound {bound}")]
    CutoffTooLarge { cutoff: usize, bound: usize },

    #[error("non-finite amplitude in {0}")]
    NonFinite(&'static str),

    #[error("mode count mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
