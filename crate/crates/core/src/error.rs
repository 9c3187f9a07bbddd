use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{axis} has even length {len}; critical sampling needs an odd count")]
    EvenDimension { axis: &'static str, len: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("bias {beta} does not keep the input positive (lower bound of input is {min_input})")]
    NonSpikingInput { beta: f64, min_input: f64 },

    #[error("observation window [{start}, {end}] is empty")]
    WindowEmpty { start: f64, end: f64 },

    #[error("degenerate interval [{t0}, {t1}]")]
    DegenerateInterval { t0: f64, t1: f64 },

    #[error("no measurements to solve")]
    InsufficientData,

    #[error("reference tensor is identically zero")]
    DivisionByZero,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sensor {sensor}: {source}")]
    Sensor {
        sensor: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_sensor(self, sensor: usize) -> Self {
        Error::Sensor {
            sensor,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 2 for bad input or configuration, 3 for
    /// failures of the numerics themselves.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Sensor { source, .. } => source.exit_code(),
            Error::NonSpikingInput { .. }
            | Error::DegenerateInterval { .. }
            | Error::InsufficientData
            | Error::DivisionByZero
            | Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
