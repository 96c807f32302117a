//! Maximum-likelihood activation-pattern detection.

use num_complex::Complex;

use super::signal::{rx_mean, tx_signal, SignalConfig};
use super::{ActivationPattern, PatternCodebook, PhyError, CODEBOOK_ENUM_LIMIT};
use crate::scalar::Scalar;

/// Detection outcome: winning codeword, its pattern, and the metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MlDecision<T> {
    pub codeword: u64,
    pub pattern: ActivationPattern,
    pub metric: T,
}

/// Exhaustive ML detection over the codebook: the codeword minimizing
/// `|y - h^T x(p)|^2`, ties broken toward the lowest codeword index.
///
/// The receiver reconstructs each candidate from the shared signal
/// construction rule: the full phase-shifter vector and the power split.
pub fn ml_detect<T: Scalar>(
    y: Complex<T>,
    h: &[Complex<T>],
    cb: &PatternCodebook,
    phases: &[T],
    config: &SignalConfig<T>,
) -> Result<MlDecision<T>, PhyError> {
    if cb.size() > CODEBOOK_ENUM_LIMIT {
        return Err(PhyError::CodebookTooLarge {
            size: cb.size(),
            limit: CODEBOOK_ENUM_LIMIT,
        });
    }
    if phases.len() != h.len() {
        return Err(PhyError::DimensionMismatch {
            expected: h.len(),
            got: phases.len(),
        });
    }
    let mut best: Option<MlDecision<T>> = None;
    for codeword in 0..cb.size() {
        let pattern = cb.pattern(codeword)?;
        let x = tx_signal(&pattern, phases, config)?;
        let metric = (y - rx_mean(h, &x)?).norm_sqr();
        let better = match &best {
            None => true,
            Some(b) => metric < b.metric,
        };
        if better {
            best = Some(MlDecision {
                codeword,
                pattern,
                metric,
            });
        }
    }
    Ok(best.expect("codebook has at least one codeword"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::{build_codebook, cophase_weights};
    use crate::scalar::circular_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_noise_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cb = build_codebook(6, 2).unwrap();
        let cfg = SignalConfig::<f64>::default();
        let h: Vec<Complex<f64>> = (0..6).map(|_| circular_gaussian(&mut rng)).collect();
        let all = crate::phy::ActivationPattern::new((0..6).collect()).unwrap();
        let phases = cophase_weights(&h, &all, None).unwrap();
        for codeword in 0..cb.size() {
            let pattern = cb.pattern(codeword).unwrap();
            let x = tx_signal(&pattern, &phases, &cfg).unwrap();
            let y = rx_mean(&h, &x).unwrap();
            let decision = ml_detect(y, &h, &cb, &phases, &cfg).unwrap();
            assert_eq!(decision.codeword, codeword);
            assert_eq!(decision.pattern, pattern);
        }
    }

    #[test]
    fn identical_columns_tie_break_to_lowest_codeword() {
        let cb = build_codebook(4, 1).unwrap();
        let cfg = SignalConfig::<f64>::default();
        let h = vec![Complex::new(0.3, 0.1); 4];
        let phases = vec![-Complex::new(0.3, 0.1).arg(); 4];
        let x = tx_signal(&cb.pattern(3).unwrap(), &phases, &cfg).unwrap();
        let y = rx_mean(&h, &x).unwrap();
        let decision = ml_detect(y, &h, &cb, &phases, &cfg).unwrap();
        assert_eq!(decision.codeword, 0);
    }

    #[test]
    fn guard_rejects_wide_codebooks() {
        let cb = build_codebook(64, 32).unwrap();
        let cfg = SignalConfig::<f64>::default();
        let h = vec![Complex::new(1.0, 0.0); 64];
        let phases = vec![0.0; 64];
        assert!(matches!(
            ml_detect(Complex::new(0.0, 0.0), &h, &cb, &phases, &cfg),
            Err(PhyError::CodebookTooLarge { .. })
        ));
    }
}
