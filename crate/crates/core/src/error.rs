use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is outside 1..=3")]
    Dimension(usize),
    #[error("half width must be positive and finite")]
    HalfWidth,
    #[error("need at least 2 cells per axis, got {0}")]
    Cells(usize),
    #[error("non-finite value at point {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("overflow evaluating {what} at point {point:?}")]
    Overflow { what: &'static str, point: Vec<f64> },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value count {got} does not match lattice size {expected}")]
    Length { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("every ball in the family is empty")]
    EmptyFamily,
    #[error("insufficient radius coverage: {0}")]
    Coverage(String),
    #[error("tail undeclared: cannot extend {0} beyond the tabulated range")]
    TailUndeclared(&'static str),
    #[error("weight norm vanishes on ball at {center:?} with radius {radius}")]
    ZeroNorm { center: Vec<f64>, radius: f64 },
    #[error("operator output is only defined at a subset of the lattice")]
    PartialField,
}

pub type Result<T> = std::result::Result<T, Error>;
