use alloc::string::String;
use core::fmt;

/// Errors surfaced by measure construction, seminorm engines, solvers and
/// simulators. Operations refuse rather than silently approximate; the
/// `UnsupportedExact` variant names the fallback when one exists.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyTuple,
    MixedPointKinds,
    DimensionMismatch { expected: usize, got: usize },
    InvalidWeights(String),
    InvalidDistribution(String),
    ClassKindMismatch(String),
    UnsupportedExact(String),
    SupportTooLarge { limit: usize, got: usize },
    NonIndicatorClass,
    UnsamplableModel,
    InvalidParams(String),
    InvalidArgument(String),
    ZeroProbabilityPair { position: usize },
    Infeasible(String),
    NonConvergence { gap: f64 },
    UnsupportedProjectionPair,
    CodebookOverflow { n_rate_bits: f64, limit: f64 },
    Numerical(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyTuple => write!(f, "empty tuple"),
            Error::MixedPointKinds => write!(f, "points mix finite symbols and vectors"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidWeights(s) => write!(f, "invalid weights: {s}"),
            Error::InvalidDistribution(s) => write!(f, "invalid distribution: {s}"),
            Error::ClassKindMismatch(s) => write!(f, "class incompatible with point kind: {s}"),
            Error::UnsupportedExact(s) => write!(f, "no exact engine: {s}"),
            Error::SupportTooLarge { limit, got } => {
                write!(f, "combined support {got} exceeds limit {limit}")
            }
            Error::NonIndicatorClass => write!(f, "class is not an indicator class"),
            Error::UnsamplableModel => write!(f, "model kind is not samplable"),
            Error::InvalidParams(s) => write!(f, "invalid member parameters: {s}"),
            Error::InvalidArgument(s) => write!(f, "invalid argument: {s}"),
            Error::ZeroProbabilityPair { position } => {
                write!(f, "zero-probability pair at position {position}: information density is -inf")
            }
            Error::Infeasible(s) => write!(f, "infeasible problem: {s}"),
            Error::NonConvergence { gap } => {
                write!(f, "solver did not reach gap tolerance (gap {gap:.3e})")
            }
            Error::UnsupportedProjectionPair => {
                write!(f, "cannot verify the projection-inclusion hypothesis for this class pair")
            }
            Error::CodebookOverflow { n_rate_bits, limit } => {
                write!(f, "explicit codebook would need 2^{n_rate_bits:.1} entries (limit 2^{limit:.0})")
            }
            Error::Numerical(s) => write!(f, "numerical failure: {s}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
