use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |A - A*| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("Hermitian eigensolver did not converge for a {dim}x{dim} matrix after {sweeps} sweeps")]
    EigenNoConvergence { dim: usize, sweeps: usize },

    #[error("matrix is numerically singular (pivot {pivot} has modulus {modulus:e})")]
    Singular { pivot: usize, modulus: f64 },

    #[error("function value at eigenvalue {eigenvalue} is not finite")]
    NonFiniteFunctionValue { eigenvalue: f64 },

    #[error("point {point} is {distance:e} from the contour, below the required clearance {required:e}")]
    ContourClearance {
        point: Complex64,
        distance: f64,
        required: f64,
    },

    #[error("eigenvalue {eigenvalue} lies outside the contour")]
    OutsideContour { eigenvalue: f64 },

    #[error("z = {z} is within {distance:e} of the eigenvalue {eigenvalue}")]
    NearEigenvalue {
        z: Complex64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("step function has nonzero left tail {value}; the integral from -inf diverges")]
    NonzeroTail { value: f64 },

    #[error("coupling parameter s = {s} lies outside the family domain ({lo}, {hi})")]
    OutsideDomain { s: f64, lo: f64, hi: f64 },

    #[error("adaptive quadrature failed to converge near s = {location} (panel estimate {estimate:e})")]
    QuadratureNoConvergence { location: f64, estimate: f64 },

    #[error("family is not concave at s = {s}: max eigenvalue of V''(s) is {max_eigenvalue:e}")]
    NotConcave { s: f64, max_eigenvalue: f64 },

    #[error("interior pole {interior} lies to the right of exterior pole {exterior}")]
    LeftSegmentViolated { interior: f64, exterior: f64 },

    #[error("quadrature returned a non-negligible imaginary part {value:e}")]
    ImaginaryResidual { value: f64 },

    #[error("hypothesis `{name}` violated: {detail}")]
    Hypothesis { name: &'static str, detail: String },

    #[error("function `{descriptor}` does not provide {what}")]
    MissingCapability {
        descriptor: String,
        what: &'static str,
    },

    #[error("derivative of `{descriptor}` disagrees with finite differences at x = {x} ({supplied} vs {estimated})")]
    InconsistentDerivative {
        descriptor: String,
        x: f64,
        supplied: f64,
        estimated: f64,
    },

    #[error("weight function increases between {x0} and {x1}")]
    NotNonincreasing { x0: f64, x1: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
