use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("string {index} contains a zero byte at offset {offset}")]
    ZeroByte { index: usize, offset: usize },

    #[error("string of length {0} exceeds the 32-bit length limit")]
    StringTooLong(usize),

    #[error("malformed encoding: {0}")]
    Decode(String),

    #[error("lcp {lcp} of string {index} exceeds predecessor length {prev_len}")]
    LcpOverflow { index: usize, lcp: u32, prev_len: usize },

    #[error("invalid sorted run: {0}")]
    InvalidRun(String),

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("corpus file: {0}")]
    Corpus(String),

    #[error("destination PE {dst} out of range for {p} PEs")]
    DestinationOutOfRange { dst: usize, p: usize },

    #[error("empty PE group")]
    EmptyGroup,

    #[error("grid dimensions {dims:?} do not multiply to {p}")]
    DimsMismatch { dims: Vec<usize>, p: usize },

    #[error("level schedule {schedule:?} does not multiply to {p}")]
    BadSchedule { schedule: Vec<usize>, p: usize },

    #[error("group has {samples} samples, fewer than its {r} buckets")]
    TooFewSamples { samples: usize, r: usize },

    #[error("values must be strictly ascending (index {0})")]
    Unsorted(usize),

    #[error("value {value} outside universe {universe}")]
    OutOfUniverse { value: u64, universe: u64 },

    #[error("hash position {pos} not below filter size {m}")]
    PositionOutOfRange { pos: u64, m: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
