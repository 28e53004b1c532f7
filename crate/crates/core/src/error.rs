use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pixel index ({row}, {col}) outside 1..={height} x 1..={width}")]
    PixelOutOfRange {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("grid dimensions must be positive, got {height}x{width}")]
    InvalidDimensions { height: usize, width: usize },

    #[error("pixel buffer has {found} values, expected {expected}")]
    PixelCount { expected: usize, found: usize },

    #[error("a model needs at least one component")]
    NoComponents,

    #[error("parameter vector length {0} is not a positive multiple of 6")]
    ParamLength(usize),

    #[error("component {index}: {reason}")]
    InvalidComponent { index: usize, reason: &'static str },

    #[error("Cholesky diagonal must be finite and strictly positive (l11={l11}, l22={l22})")]
    InvalidCholesky { l11: f64, l22: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("target set is empty")]
    EmptyTargets,

    #[error("target {index} is {found_h}x{found_w}, expected {expected_h}x{expected_w}")]
    DimensionMismatch {
        index: usize,
        expected_h: usize,
        expected_w: usize,
        found_h: usize,
        found_w: usize,
    },

    #[error("target {index} has pixel {pixel} outside [0, 1]")]
    TargetRange { index: usize, pixel: usize },

    #[error("invalid fit configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("scale factor must be finite and positive, got {0}")]
    InvalidScale(f64),

    #[error("non-finite transform argument")]
    NonFinite,

    #[error("k = {k} outside 1..={m}")]
    TopKOutOfRange { k: usize, m: usize },

    #[error("finite-difference step must be finite and positive, got {0}")]
    InvalidStep(f64),
}
