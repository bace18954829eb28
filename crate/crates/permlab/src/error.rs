use std::path::PathBuf;

/// Error type shared by all subsystems.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntry,

    #[error("permutation map is not a bijection")]
    NotABijection,

    #[error("cycle type must contain at least one part")]
    EmptyCycleType,

    #[error("cannot normalize the zero matrix")]
    ZeroMatrix,

    #[error("moment order {got} exceeds the supported maximum of {max} entries")]
    UnsupportedMomentOrder { got: usize, max: usize },

    #[error("pairing size must be even, got {0}")]
    OddPairingSize(usize),

    #[error("pairing size mismatch: {0} vs {1}")]
    PairingSizeMismatch(usize, usize),

    #[error("Weingarten inversion requires n >= 2r, got n = {n}, r = {r}")]
    BelowInvertibilityRegime { n: usize, r: usize },

    #[error("moment spec has rows of length {rows} but cols of length {cols}")]
    SpecLengthMismatch { rows: usize, cols: usize },

    #[error("negative variance {0}")]
    NegativeVariance(f64),

    #[error("Poisson-Gaussian shift must satisfy s^2 <= 1, got s = {0}")]
    ShiftOutOfRange(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("need at least {need} replicates, got {got}")]
    TooFewReplicates { need: usize, got: usize },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("coefficient family invalid at n = {n}: {reason}")]
    InvalidCoefficient { n: usize, reason: String },

    #[error("malformed CSV at {path}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
