use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("unsupported dimension {0} (expected 2 or 4)")]
    InvalidDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("ket is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("non-physical state: {0}")]
    NonPhysical(String),
    #[error("probability {name} = {value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("reducible chain: P→ = P← = 0 has no unique stationary distribution")]
    ReducibleChain,
    #[error("block length {len} outside [1, {max}]")]
    BlockLength { len: usize, max: usize },
    #[error("sequence length must be at least 1")]
    EmptySequence,
    #[error("CU synthesis failed: residual {0:e}")]
    Synthesis(f64),
    #[error("selected a zero-norm measurement branch")]
    ZeroNormBranch,
    #[error("gate/ordering mismatch: {0}")]
    GateMismatch(String),
    #[error("target fidelity {0} is not achievable (must lie in [0.25, 1])")]
    UnachievableFidelity(f64),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
