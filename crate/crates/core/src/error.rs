use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Jets of different input dimensionality were combined.
    DimensionMismatch { left: usize, right: usize },
    /// Seed axis not below the jet dimension.
    AxisOutOfRange { axis: usize, dim: usize },
    /// Unsupported input dimensionality (only 1 and 2 are valid).
    InvalidDimension(usize),
    /// A loss or gradient produced NaN/Inf.
    NonFinite { what: String },
    /// A point fell outside a knot vector or problem domain.
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    InvalidArchitecture(String),
    InvalidArgument(String),
    UnknownProblem(String),
    /// The problem has no closed-form solution.
    NoClosedForm(String),
    /// An integrator produced a non-finite state.
    SolverBlowUp { step: usize, detail: String },
    ShapeMismatch { expected: usize, actual: usize },
    Io(String),
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { left, right } => {
                write!(f, "jet dimension mismatch: {left} vs {right}")
            }
            Error::AxisOutOfRange { axis, dim } => {
                write!(f, "seed axis {axis} out of range for dimension {dim}")
            }
            Error::InvalidDimension(d) => write!(f, "unsupported input dimension {d}"),
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::OutOfDomain { value, lo, hi } => {
                write!(f, "value {value} outside [{lo}, {hi}]")
            }
            Error::InvalidArchitecture(msg) => write!(f, "invalid architecture: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::UnknownProblem(id) => write!(f, "unknown problem id '{id}'"),
            Error::NoClosedForm(id) => write!(f, "problem '{id}' has no closed-form solution"),
            Error::SolverBlowUp { step, detail } => {
                write!(f, "solver produced a non-finite state at step {step}: {detail}")
            }
            Error::ShapeMismatch { expected, actual } => {
                write!(f, "shape mismatch: expected {expected}, got {actual}")
            }
            Error::Io(msg) => write!(f, "io error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
