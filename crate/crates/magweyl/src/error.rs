use thiserror::Error;

/// Failures raised by the lattice calculus.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("n must be odd (got {0}); symmetric lattices keep the symplectic transform an exact involution")]
    EvenGrid(usize),
    #[error("n must be at least 3 (got {0})")]
    GridTooSmall(usize),
    #[error("unsupported dimension d = {0}; only d = 1 and d = 2 are implemented")]
    UnsupportedDimension(usize),
    #[error("box length must be positive and finite (got {0})")]
    BadLength(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("point is off the phase-space lattice (tolerance {tol:e})")]
    OffGrid { tol: f64 },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("index {index} out of range 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("magnetic field is not antisymmetric at probe point")]
    NotAntisymmetric,
    #[error("{0}")]
    FieldClass(String),
    #[error("operator route needs a vector potential; only a magnetic field was supplied")]
    MissingPotential,
    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("cost refused: {route} would need about {estimate:e} complex operations (limit {limit:e})")]
    CostRefused { route: String, estimate: f64, limit: f64 },
    #[error("dense super-operator form unavailable for state dimension {0} (cap 32)")]
    DenseCap(usize),
    #[error("route {0} requires eps = 1 on the lattice")]
    RequiresUnitEps(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
