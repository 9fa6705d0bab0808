use thiserror::Error;

/// Failures of the LP/MILP kernel.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("integer variable {0} must have finite bounds")]
    UnboundedInteger(usize),
    #[error("simplex iteration limit ({0}) exhausted")]
    IterationLimit(usize),
    #[error("branch-and-bound node limit ({0}) exceeded")]
    NodeLimit(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("{points} points in dimension {dim} exceed the limits ({max_points} points, dimension {max_dim})")]
    TooLarge { points: usize, dim: usize, max_points: usize, max_dim: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("edge parameter {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("this method requires A(.) and B(.) to be independent of the uncertainty")]
    RequiresDeterministicAB,
    #[error("uncertainty set has affine dimension {0}, expected 1")]
    NotOneDimensional(usize),
    #[error("k = {0} is not supported by this method")]
    UnsupportedK(usize),
    #[error("scenario {index} lies outside the uncertainty set")]
    ScenarioOutsideOmega { index: usize },
    #[error("big-M value {0} remained binding after repeated doubling")]
    BigMTooSmall(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum VerifyError {
    #[error("{combinations} row combinations exceed the budget of {budget}")]
    CombinatorialBudgetExceeded { combinations: u128, budget: u128 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

impl FormatError {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Field { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RenderError {
    #[error("rendering needs a two-dimensional uncertainty set, got ambient dimension {ambient} and affine dimension {affine}")]
    NotTwoDimensional { ambient: usize, affine: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}
