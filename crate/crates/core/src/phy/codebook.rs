//! Activation patterns, codeword indexing, and keyed remapping.
//!
//! A codebook over `C(n_tx, k)` patterns keeps the first
//! `2^floor(log2 C(n_tx, k))` combinations in lexicographic order. Patterns
//! are never materialized: codewords map to combinations by lexicographic
//! unranking, so a 60-bit codebook is as cheap as a 6-bit one. A keyed
//! epoch-based permutation of the codeword space hides the bit mapping from
//! receivers without the key.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{PhyError, CODEBOOK_ENUM_LIMIT};
use crate::rng::{splitmix64, stream};
use crate::scalar::{real, Scalar};

/// Ordered set of active transmit antennas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern {
    active: Vec<usize>,
}

impl ActivationPattern {
    /// Build from antenna indices; sorts and rejects duplicates.
    pub fn new(mut active: Vec<usize>) -> Result<Self, PhyError> {
        if active.is_empty() {
            return Err(PhyError::EmptyPattern);
        }
        active.sort_unstable();
        for w in active.windows(2) {
            if w[0] == w[1] {
                return Err(PhyError::DuplicateIndex(w[0]));
            }
        }
        Ok(Self { active })
    }

    pub fn k(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn contains(&self, index: usize) -> bool {
        self.active.binary_search(&index).is_ok()
    }
}

/// Exact binomial coefficient.
pub fn binomial_exact(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - k + i + 1) / BigUint::from(i + 1);
    }
    acc
}

/// `log2 C(n_tx, k)` as a real number, from the exact big integer.
pub fn se_bound_combinatorial<T: Scalar>(n_tx: usize, k: usize) -> Result<T, PhyError> {
    if k < 1 || k > n_tx {
        return Err(PhyError::KOutOfRange { n_tx, k });
    }
    Ok(real(log2_biguint(&binomial_exact(n_tx as u64, k as u64))))
}

/// log2 of a positive big integer, exact to f64 precision.
fn log2_biguint(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 53 {
        return value.to_f64().expect("small biguint").log2();
    }
    let shift = bits - 53;
    let top = (value >> shift).to_f64().expect("53-bit mantissa");
    top.log2() + shift as f64
}

const MATERIALIZE_BITS: u32 = 16;
const REMAP_TAG: u64 = 0x7265_6d61_7000; // "remap"

/// Codeword-index permutation. Tables are materialized for small codebooks;
/// wide codebooks use a keyed Feistel bijection evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
enum PermKind {
    Identity,
    Table {
        fwd: Arc<Vec<u32>>,
        inv: Arc<Vec<u32>>,
    },
    Feistel {
        key: u64,
        epoch: u64,
    },
}

fn mask(bits: u32) -> u64 {
    if bits == 0 {
        0
    } else {
        u64::MAX >> (64 - bits)
    }
}

fn feistel_round(input: u64, round: u64, key: u64, epoch: u64) -> u64 {
    splitmix64(input ^ splitmix64(key ^ splitmix64(epoch ^ round)))
}

fn feistel_apply(x: u64, bits: u32, key: u64, epoch: u64, inverse: bool) -> u64 {
    let lo_bits = bits / 2;
    let hi_bits = bits - lo_bits;
    let mut lo = x & mask(lo_bits);
    let mut hi = x >> lo_bits;
    let rounds: [u64; 4] = if inverse { [3, 2, 1, 0] } else { [0, 1, 2, 3] };
    for round in rounds {
        if round % 2 == 0 {
            hi ^= feistel_round(lo, round, key, epoch) & mask(hi_bits);
        } else {
            lo ^= feistel_round(hi, round, key, epoch) & mask(lo_bits);
        }
    }
    (hi << lo_bits) | lo
}

impl PermKind {
    fn keyed(bits: u32, key: u64, epoch: u64) -> Self {
        if bits <= MATERIALIZE_BITS {
            let size = 1usize << bits;
            let mut fwd: Vec<u32> = (0..size as u32).collect();
            let mut rng = stream(key, &[REMAP_TAG, epoch]);
            // Fisher-Yates over the codeword space.
            for i in (1..size).rev() {
                let j = rand::Rng::random_range(&mut rng, 0..=i);
                fwd.swap(i, j);
            }
            let mut inv = vec![0u32; size];
            for (i, &v) in fwd.iter().enumerate() {
                inv[v as usize] = i as u32;
            }
            PermKind::Table {
                fwd: Arc::new(fwd),
                inv: Arc::new(inv),
            }
        } else {
            PermKind::Feistel { key, epoch }
        }
    }

    fn forward(&self, index: u64, bits: u32) -> u64 {
        match self {
            PermKind::Identity => index,
            PermKind::Table { fwd, .. } => fwd[index as usize] as u64,
            PermKind::Feistel { key, epoch } => feistel_apply(index, bits, *key, *epoch, false),
        }
    }

    fn inverse(&self, index: u64, bits: u32) -> u64 {
        match self {
            PermKind::Identity => index,
            PermKind::Table { inv, .. } => inv[index as usize] as u64,
            PermKind::Feistel { key, epoch } => feistel_apply(index, bits, *key, *epoch, true),
        }
    }
}

/// Indexed set of activation patterns carrying `bits_per_use` bits per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCodebook {
    n_tx: usize,
    k: usize,
    bits_per_use: u32,
    /// Pascal table, `choose[m * (k + 1) + j] = C(m, j)`, for unranking.
    choose: Arc<Vec<u64>>,
    perm: PermKind,
}

/// Codebook over the first `2^floor(log2 C(n_tx, k))` lexicographic
/// k-combinations, with the identity codeword mapping.
pub fn build_codebook(n_tx: usize, k: usize) -> Result<PatternCodebook, PhyError> {
    if n_tx > 64 {
        return Err(PhyError::TooManyAntennas(n_tx));
    }
    if k < 1 || k > n_tx {
        return Err(PhyError::KOutOfRange { n_tx, k });
    }
    // Pascal triangle in u64; exact for n_tx <= 64.
    let cols = k + 1;
    let mut choose = vec![0u64; (n_tx + 1) * cols];
    for m in 0..=n_tx {
        choose[m * cols] = 1;
        for j in 1..=k.min(m) {
            let above = choose[(m - 1) * cols + j];
            let left = choose[(m - 1) * cols + j - 1];
            choose[m * cols + j] = above + left;
        }
    }
    let total = choose[n_tx * cols + k];
    let bits_per_use = 63 - total.leading_zeros();
    if bits_per_use >= 64 {
        return Err(PhyError::CodebookTooWide);
    }
    Ok(PatternCodebook {
        n_tx,
        k,
        bits_per_use,
        choose: Arc::new(choose),
        perm: PermKind::Identity,
    })
}

/// Smallest-k codebook reaching `requested_bits` bits per use.
pub fn codebook_for_rate(n_tx: usize, requested_bits: u32) -> Result<PatternCodebook, PhyError> {
    let mut max_bits = 0;
    for k in 1..=(n_tx / 2).max(1) {
        let cb = build_codebook(n_tx, k)?;
        if cb.bits_per_use >= requested_bits {
            return Ok(cb);
        }
        max_bits = max_bits.max(cb.bits_per_use);
    }
    Err(PhyError::RateUnachievable {
        requested: requested_bits,
        max: max_bits,
    })
}

impl PatternCodebook {
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bits_per_use(&self) -> u32 {
        self.bits_per_use
    }

    /// Number of codewords, `2^bits_per_use`.
    pub fn size(&self) -> u64 {
        1u64 << self.bits_per_use
    }

    fn choose_at(&self, m: usize, j: usize) -> u64 {
        if j > self.k || j > m {
            return 0;
        }
        self.choose[m * (self.k + 1) + j]
    }

    /// Pattern for a codeword, through the current permutation.
    pub fn pattern(&self, codeword: u64) -> Result<ActivationPattern, PhyError> {
        if codeword >= self.size() {
            return Err(PhyError::CodewordOutOfRange {
                codeword,
                size: self.size(),
            });
        }
        let lex = self.perm.forward(codeword, self.bits_per_use);
        Ok(self.unrank(lex))
    }

    /// Codeword of a pattern; errors when the pattern is not a codeword
    /// (wrong cardinality, out-of-range index, or truncated away).
    pub fn codeword_of(&self, pattern: &ActivationPattern) -> Result<u64, PhyError> {
        if pattern.k() != self.k {
            return Err(PhyError::PatternNotInCodebook);
        }
        for &i in pattern.active() {
            if i >= self.n_tx {
                return Err(PhyError::IndexOutOfRange {
                    index: i,
                    n_tx: self.n_tx,
                });
            }
        }
        let lex = self.rank(pattern.active());
        if lex >= self.size() {
            return Err(PhyError::PatternNotInCodebook);
        }
        Ok(self.perm.inverse(lex, self.bits_per_use))
    }

    /// Lexicographic unranking of the `rank`-th k-combination of `n_tx`.
    fn unrank(&self, mut rank: u64) -> ActivationPattern {
        let mut active = Vec::with_capacity(self.k);
        let mut candidate = 0usize;
        let mut remaining = self.k;
        while remaining > 0 {
            let with_candidate = self.choose_at(self.n_tx - 1 - candidate, remaining - 1);
            if rank < with_candidate {
                active.push(candidate);
                remaining -= 1;
            } else {
                rank -= with_candidate;
            }
            candidate += 1;
        }
        ActivationPattern { active }
    }

    fn rank(&self, active: &[usize]) -> u64 {
        let mut rank = 0u64;
        let mut next = 0usize;
        for (i, &c) in active.iter().enumerate() {
            for skipped in next..c {
                rank = rank.saturating_add(self.choose_at(self.n_tx - 1 - skipped, self.k - 1 - i));
            }
            next = c + 1;
        }
        rank
    }

    /// All patterns in codeword order; guarded by [`CODEBOOK_ENUM_LIMIT`].
    pub fn enumerate(&self) -> Result<Vec<ActivationPattern>, PhyError> {
        if self.size() > CODEBOOK_ENUM_LIMIT {
            return Err(PhyError::CodebookTooLarge {
                size: self.size(),
                limit: CODEBOOK_ENUM_LIMIT,
            });
        }
        (0..self.size()).map(|c| self.pattern(c)).collect()
    }
}

/// Bit block (MSB first) to pattern, through the codebook's permutation.
pub fn bits_to_pattern(bits: &[bool], cb: &PatternCodebook) -> Result<ActivationPattern, PhyError> {
    if bits.len() != cb.bits_per_use() as usize {
        return Err(PhyError::WrongBitLength {
            expected: cb.bits_per_use(),
            got: bits.len(),
        });
    }
    cb.pattern(bits_to_index(bits))
}

/// Inverse of [`bits_to_pattern`].
pub fn pattern_to_bits(
    pattern: &ActivationPattern,
    cb: &PatternCodebook,
) -> Result<Vec<bool>, PhyError> {
    Ok(index_to_bits(cb.codeword_of(pattern)?, cb.bits_per_use()))
}

pub fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

pub fn index_to_bits(index: u64, len: u32) -> Vec<bool> {
    (0..len).rev().map(|i| (index >> i) & 1 == 1).collect()
}

/// Re-key the codeword permutation for the epoch containing `frame_index`.
///
/// `period = None` keeps the identity mapping. The permutation is a pure
/// function of `(key, floor(frame_index / period))`, so transmitter and
/// receiver stay synchronous without exchanging state, and it changes
/// exactly at frame indices that are multiples of the period.
pub fn remap_codebook(
    cb: &PatternCodebook,
    key: u64,
    frame_index: u64,
    period: Option<u64>,
) -> Result<PatternCodebook, PhyError> {
    let perm = match period {
        None => PermKind::Identity,
        Some(0) => return Err(PhyError::InvalidPeriod),
        Some(p) => PermKind::keyed(cb.bits_per_use, key, frame_index / p),
    };
    Ok(PatternCodebook {
        perm,
        choose: Arc::clone(&cb.choose),
        ..*cb
    })
}
