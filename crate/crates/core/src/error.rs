use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands live in spaces of different dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A vector that must be normalized has zero (or non-finite) norm.
    ZeroVector,
    /// A vector claimed to be a unit vector is not.
    NotNormalized { norm: f64 },
    /// A parameter is outside its documented range.
    InvalidParameter(&'static str),
    /// Raw image data violates its invariants.
    InvalidImage(&'static str),
    /// An operation needs at least one element.
    Empty,
    /// Gram-Schmidt residual of input `index` fell below the tolerance.
    LinearDependence { index: usize, residual: f64 },
    /// A set claimed to be orthonormal is not.
    NotOrthonormal { i: usize, j: usize, residual: f64 },
    /// A matrix claimed to be unitary is not.
    NotUnitary { residual: f64 },
    /// The rotation does not send stored state `index` to basis vector `index`.
    RotationMismatch { index: usize, residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ZeroVector => write!(f, "zero vector after centering or perturbation"),
            Error::NotNormalized { norm } => write!(f, "vector is not normalized (norm {norm})"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::InvalidImage(what) => write!(f, "invalid image: {what}"),
            Error::Empty => write!(f, "empty input"),
            Error::LinearDependence { index, residual } => write!(
                f,
                "linear dependence: image {index} lies in the span of the preceding images (residual {residual:e})"
            ),
            Error::NotOrthonormal { i, j, residual } => write!(
                f,
                "states {i} and {j} are not orthonormal (residual {residual:e})"
            ),
            Error::NotUnitary { residual } => {
                write!(f, "matrix is not unitary (residual {residual:e})")
            }
            Error::RotationMismatch { index, residual } => write!(
                f,
                "rotation does not map stored state {index} onto basis vector {index} (residual {residual:e})"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
