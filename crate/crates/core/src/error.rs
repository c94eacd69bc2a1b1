use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point does not belong to the domain of the kernel it is evaluated with.
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },
    /// A point set or signal was empty where at least one element is required.
    Empty(&'static str),
    /// Two objects that must agree in size do not.
    DimensionMismatch { expected: usize, found: usize },
    /// Index outside `0..len`.
    IndexOutOfRange { index: usize, len: usize },
    /// Matrix asymmetry above the accepted relative tolerance.
    NotSymmetric { max_asymmetry: f64 },
    /// An eigenvalue below `-clamp_floor` where a PSD matrix is required.
    NotPositiveSemidefinite { min_eigenvalue: f64, floor: f64 },
    /// Iterative eigensolver exceeded its iteration budget.
    NoConvergence { iterations: usize },
    /// Input larger than a reference routine supports.
    TooLarge { size: usize, max: usize },
    /// `g_{j+1}(λ) - g_j(λ)` is negative beyond the clamping threshold.
    MonotonicityViolation {
        scale: usize,
        lambda: f64,
        radicand: f64,
    },
    /// Scale filters do not form a partition of unity.
    PartitionViolation { index: usize, sum: f64 },
    /// Every eigenvalue fell below the drop threshold.
    EmptySpectrum,
    /// An operation requiring a spectrally localized family was given another.
    NotLocalized,
    /// Invalid parameter value.
    InvalidParameter(String),
    /// Isolated vertex where every degree must be positive.
    IsolatedVertex(usize),
    /// Too few points for a rate fit.
    InsufficientData { needed: usize, found: usize },
    /// Numerical quadrature would alias the band-limited integrand.
    Aliasing { nodes: usize, required: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DomainMismatch { expected, found } => {
                write!(f, "domain mismatch: kernel expects {expected} points, got {found}")
            }
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (relative asymmetry {max_asymmetry:e})")
            }
            Error::NotPositiveSemidefinite { min_eigenvalue, floor } => write!(
                f,
                "matrix is not positive semi-definite: eigenvalue {min_eigenvalue:e} below -{floor:e}"
            ),
            Error::NoConvergence { iterations } => {
                write!(f, "eigensolver did not converge after {iterations} iterations")
            }
            Error::TooLarge { size, max } => write!(f, "size {size} exceeds maximum {max}"),
            Error::MonotonicityViolation { scale, lambda, radicand } => write!(
                f,
                "spectral functions not monotone at scale {scale}, lambda {lambda:e} (difference {radicand:e})"
            ),
            Error::PartitionViolation { index, sum } => write!(
                f,
                "filters violate the partition of unity at eigenvalue {index} (sum {sum})"
            ),
            Error::EmptySpectrum => write!(f, "all eigenvalues are below the drop threshold"),
            Error::NotLocalized => write!(f, "filter family is not spectrally localized"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::IsolatedVertex(v) => write!(f, "vertex {v} is isolated"),
            Error::InsufficientData { needed, found } => {
                write!(f, "need at least {needed} data points, found {found}")
            }
            Error::Aliasing { nodes, required } => write!(
                f,
                "quadrature with {nodes} nodes aliases; at least {required} are required"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
