use alloc::string::String;

/// Errors raised by model construction and the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("spin must be a positive half-integer, got {0}")]
    InvalidSpin(f64),
    #[error("invalid chain parameter: {0}")]
    InvalidParams(String),
    #[error("the transfer protocol requires an odd bus length N, got N = {0}")]
    EvenBusLength(usize),
    #[error("qudit dimension {levels} does not fit in a spin ladder of {ladder} levels")]
    LevelsExceedLadder { levels: usize, ladder: usize },
    #[error("no occupation tuples: {sites} sites with cap {cap} cannot hold {magnons} magnons")]
    EmptySector { sites: usize, cap: usize, magnons: usize },
    #[error("term acts on site {site} but the chain has {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },
    #[error("matrix is not Hermitian: residual {residual:e}")]
    NotHermitian { residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized: norm^2 = {0}")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("temperature must be non-negative, got {0}")]
    NegativeTemperature(f64),
    #[error("bus Hilbert space of dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("sector with {0} magnons is not available in this propagator")]
    MissingSector(usize),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
