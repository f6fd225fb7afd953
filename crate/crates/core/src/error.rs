use thiserror::Error;

/// Errors produced by the framepack library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape mismatch: {left_d}x{left_n} vs {right_d}x{right_n}")]
    ShapeMismatch {
        left_d: usize,
        left_n: usize,
        right_d: usize,
        right_n: usize,
    },

    #[error("ambient dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("operation needs at least {needed} vectors, got {got}")]
    TooFewVectors { needed: usize, got: usize },

    #[error("cannot normalize a (near-)zero vector (norm {0:e})")]
    ZeroNorm(f64),

    #[error("vectors {i} and {j} span coincident lines; gradient is singular there")]
    DegeneratePair { i: usize, j: usize },

    #[error("initial configuration has non-finite energy")]
    NonFiniteEnergy,

    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),

    #[error("coherence separation bound needs s > d-1 and d >= 3, got d={d}, s={s}")]
    SeparationBoundDomain { d: usize, s: f64 },

    #[error("Monte Carlo estimate needs at least one trial")]
    NoTrials,

    #[error("all {0} restarts failed")]
    AllRestartsFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}:{col}: cannot parse '{token}' as a number")]
    ParseToken {
        path: String,
        line: usize,
        col: usize,
        token: String,
    },

    #[error("{path}: expected {expected} values ({n} vectors x {d} coordinates), found {found}")]
    ValueCount {
        path: String,
        d: usize,
        n: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: vector {index} has norm {norm} (deviation above 1e-3); refusing to renormalize")]
    NormDeviation {
        path: String,
        index: usize,
        norm: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
