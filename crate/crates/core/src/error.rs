use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("key set is empty")]
    EmptyKeySet,
    #[error("key set holds {k} keys but the universe has only {n}")]
    KeySetTooLarge { k: usize, n: u64 },
    #[error("key {key} outside universe [1, {universe}]")]
    KeyOutOfRange { key: u64, universe: u64 },
    #[error("duplicate key {0}")]
    DuplicateKey(u64),
    #[error("hash function index must be >= 1, got {0}")]
    InvalidIndex(u64),
    #[error("hash range must be >= 1, got {0}")]
    InvalidRange(u32),
    #[error("hash range {range} does not match key set size {k}")]
    RangeMismatch { range: u32, k: usize },
    #[error("vector entry {value} outside [1, {k}]")]
    MalformedVector { value: u32, k: usize },
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("integer {0} not representable by this code")]
    Unsupported(u64),
    #[error("malformed description: {0}")]
    Decode(String),
    #[error("probe budget of {cap} hash functions exceeded")]
    ProbeBudgetExceeded { cap: u64 },
    #[error("enumeration limited to k <= {max}, got {k}")]
    EnumerationTooLarge { k: usize, max: usize },
    #[error("trial failed for key set {keyset_id} (keys {keys:?}) with seed {seed:?}: {source}")]
    TrialFailed { keyset_id: u64, keys: Vec<u64>, seed: crate::randomness::SharedSeed, source: Box<Error> },
    #[error("round-trip mismatch: decoded restriction differs from the encoder's choice")]
    RoundTrip,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
