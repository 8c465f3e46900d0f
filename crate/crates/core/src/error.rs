use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("incompatible jet contexts")]
    IncompatibleContexts,
    #[error("invalid axis {axis} for dimension {dim}")]
    InvalidAxis { axis: usize, dim: usize },
    #[error("jet not invertible / not positive at base point{0}")]
    NotInvertible(String),
    #[error("map not locally invertible")]
    MapNotInvertible,
    #[error("map does not fix the base point")]
    MapMovesBasePoint,
    #[error("order underflow: {0}")]
    OrderUnderflow(String),
    #[error("metric not positive definite at base point")]
    NotPositiveDefinite,
    #[error("metric not symmetric")]
    NotSymmetric,
    #[error("not a defining function: {0}")]
    NotADefiningFunction(String),
    #[error("Cotton tensor undefined below d=4")]
    CottonUndefined,
    #[error("Weyl conventions require d ≥ 4")]
    WeylDimension,
    #[error("fourth fundamental form formula excluded for d=5")]
    FourthFormExcluded,
    #[error("dimension {0} too small: {1}")]
    DimensionTooSmall(usize, String),
    #[error("degenerate conormal: |ds| vanishes at the base point")]
    DegenerateConormal,
    #[error("conformal factor not positive at base point")]
    NonPositiveConformalFactor,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid field `{field}`: {message}")]
    InvalidField { field: String, message: String },
}

impl Error {
    /// Parse and validation failures, as opposed to failures during a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Syntax { .. } | Error::InvalidField { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
