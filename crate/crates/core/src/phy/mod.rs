//! Spatial-modulation physical layer: activation-pattern codebooks, transmit
//! signal construction, harvested-power evaluation, pattern detection, and
//! mutual-information estimation.

mod codebook;
mod detect;
mod mi;
mod signal;

pub use codebook::{
    binomial_exact, bits_to_index, bits_to_pattern, build_codebook, codebook_for_rate,
    index_to_bits, pattern_to_bits, remap_codebook, se_bound_combinatorial, ActivationPattern,
    PatternCodebook,
};
pub use detect::{ml_detect, MlDecision};
pub use mi::{mi_monte_carlo, MiEstimate};
pub use signal::{
    an_mask, cancel_si, cophase_weights, harvested_power, rx_mean, rx_sample, tx_signal,
    ReceivedPower, SignalConfig, TxVector,
};

use thiserror::Error;

/// Largest codebook the enumeration-based operations (ML detection, MI
/// estimation, pattern listing) accept.
pub const CODEBOOK_ENUM_LIMIT: u64 = 1 << 16;

#[derive(Debug, Error, PartialEq)]
pub enum PhyError {
    #[error("active-antenna count {k} out of range for {n_tx} antennas")]
    KOutOfRange { n_tx: usize, k: usize },
    #[error("antenna counts above 64 are unsupported (got {0})")]
    TooManyAntennas(usize),
    #[error("codeword index space wider than 63 bits")]
    CodebookTooWide,
    #[error("bit block length {got} does not match bits-per-use {expected}")]
    WrongBitLength { expected: u32, got: usize },
    #[error("codeword {codeword} outside codebook of size {size}")]
    CodewordOutOfRange { codeword: u64, size: u64 },
    #[error("pattern is not a codeword of this codebook")]
    PatternNotInCodebook,
    #[error("pattern indices must be distinct (index {0} repeated)")]
    DuplicateIndex(usize),
    #[error("pattern must activate at least one antenna")]
    EmptyPattern,
    #[error("antenna index {index} out of range for {n_tx} antennas")]
    IndexOutOfRange { index: usize, n_tx: usize },
    #[error("pattern-update period must be at least one frame")]
    InvalidPeriod,
    #[error("requested rate {requested} bits/use exceeds the maximum {max}")]
    RateUnachievable { requested: u32, max: u32 },
    #[error("codebook size {size} exceeds the enumeration guard {limit}; use se_bound_combinatorial for the rate bound")]
    CodebookTooLarge { size: u64, limit: u64 },
    #[error("channel entry {0} is zero; cophasing undefined")]
    ZeroChannelEntry(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("noise power must be positive")]
    NonPositiveNoise,
    #[error("need at least one draw")]
    NoDraws,
}
