use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{n_sites} sites exceeds the capacity of {max} sites")]
    CapacityExceeded { n_sites: usize, max: usize },

    #[error("invalid sector: N = {n_sites}, k = {n_magnons}")]
    InvalidSector { n_sites: usize, n_magnons: usize },

    #[error("a ring needs at least 3 sites, got {0}")]
    RingTooSmall(usize),

    #[error("operation requires ring geometry")]
    RequiresRing,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sector dimension {dim} is over the dense threshold {threshold}")]
    OverThreshold { dim: usize, threshold: usize },

    #[error("eigenvectors are required for this operation")]
    MissingEigenvectors,

    #[error("Lanczos did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("residual {residual:e} for eigenvalue {energy} exceeds {tolerance:e}")]
    ResidualTooLarge { energy: f64, residual: f64, tolerance: f64 },

    #[error("spin label ambiguous at 2H = {energy}: S^2 = {rayleigh} is not within tolerance of any s(s+1)")]
    AmbiguousSpin { energy: f64, rayleigh: f64 },

    #[error("momentum label ambiguous at 2H = {energy}: phase angle {angle}")]
    AmbiguousMomentum { energy: f64, angle: f64 },

    #[error("diagram {0} produced by a generator is not in the enumerated basis")]
    DiagramNotInBasis(String),

    #[error("Bethe roots {0} and {1} collide")]
    RootCollision(usize, usize),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian in Newton iteration")]
    SingularJacobian,

    #[error("energy requires an integer ring length, got N = {0}")]
    NonIntegerLength(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
