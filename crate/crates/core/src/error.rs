use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("word index {index} is beyond the family (max level {max_level}, max index {})", 2 * max_level + 1)]
    IndexOutOfRange { index: usize, max_level: usize },

    #[error("position {position} is out of bounds for w_{index} of length {length}")]
    PositionOutOfBounds {
        index: usize,
        position: BigUint,
        length: BigUint,
    },

    #[error("materializing w_{index} needs {required} letters, cap is {cap}")]
    MaterializationCap {
        index: usize,
        required: BigUint,
        cap: u64,
    },

    #[error("scan of {required} letters exceeds scan cap {cap}")]
    ScanCap { required: BigUint, cap: u64 },

    #[error("token stream stopped after {emitted} tokens (cap {cap}); resume at offset {resume_offset}")]
    PartialStream {
        emitted: u64,
        cap: u64,
        resume_offset: BigUint,
    },

    #[error("empty word")]
    EmptyWord,

    #[error("no witness: {0}")]
    NotFound(String),

    #[error("post-condition violated: {0}")]
    PostCondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("window radius mismatch: {0} vs {1}")]
    RadiusMismatch(usize, usize),

    #[error("pattern enumeration of {cells} ball cells exceeds cap of {cap} cells")]
    EnumerationCap { cells: usize, cap: usize },

    #[error("layout infeasible: {}", .0.join("; "))]
    Layout(Vec<String>),
}
