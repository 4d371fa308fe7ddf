use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular input: z = {z} is a lattice point")]
    SingularInput { z: Complex64 },

    #[error("invalid modulus: Im tau = {im} must be positive")]
    InvalidModulus { im: f64 },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invariant violation at `{path}`: {message}")]
    InvalidConfig { path: String, message: String },

    #[error("vortices {i} and {j} coincide")]
    CoincidentVortices { i: usize, j: usize },

    #[error("configuration is not balanced (sup norm {sup_norm:e}, tolerance {tol:e})")]
    NotBalanced { sup_norm: f64, tol: f64 },

    #[error("zero motion: {0}")]
    ZeroMotion(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("inconsistent class: {0}")]
    InconsistentClass(String),

    #[error("no convergence after {iterations} iterations (sup norm {sup_norm:e})")]
    NoConvergence { iterations: usize, sup_norm: f64 },

    #[error("singular normal equations (singular values {singular_values:?})")]
    SingularSystem { singular_values: Vec<f64> },

    #[error("group element {index} is not a symmetry of the configuration")]
    NotASymmetry { index: usize },

    #[error("vortices {i} and {j} collided at t = {time}")]
    Collision { time: f64, i: usize, j: usize },

    #[error("path passes within 1e-9 of vortex {index}")]
    PathThroughVortex { index: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("no real root of the ratio equation in [{lo}, {hi}]")]
    NoRealRoot { lo: f64, hi: f64 },

    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("polynomial has a multiple root (separation {separation:e})")]
    MultipleRoot { separation: f64 },

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("sweep failed at parameter {parameter}: {source}")]
    Sweep {
        parameter: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable machine-readable identifier, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularInput { .. } => "singular-input",
            Error::InvalidModulus { .. } => "invalid-modulus",
            Error::Schema { .. } => "schema",
            Error::InvalidConfig { .. } => "invariant-violation",
            Error::CoincidentVortices { .. } => "coincident-vortices",
            Error::NotBalanced { .. } => "not-balanced",
            Error::ZeroMotion(_) => "zero-motion",
            Error::UnsupportedGeometry(_) => "unsupported-geometry",
            Error::InconsistentClass(_) => "inconsistent-class",
            Error::NoConvergence { .. } => "no-convergence",
            Error::SingularSystem { .. } => "singular-normal-equations",
            Error::NotASymmetry { .. } => "not-a-symmetry",
            Error::Collision { .. } => "collision",
            Error::PathThroughVortex { .. } => "path-through-vortex",
            Error::OutOfRange(_) => "out-of-range",
            Error::NoRealRoot { .. } => "no-real-root",
            Error::ParameterCount { .. } => "parameter-count",
            Error::MultipleRoot { .. } => "multiple-root",
            Error::InvalidSettings(_) => "invalid-settings",
            Error::Sweep { .. } => "sweep",
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            path: path.into(),
            message: message.into(),
        }
    }
}
