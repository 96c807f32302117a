//! Monte Carlo mutual information of the pattern index over AWGN.
//!
//! For equiprobable codewords with receive-side channel knowledge the
//! mutual information of the induced Gaussian mixture is
//!
//! ```text
//! I = log2 M - E[ log2 sum_q exp((|y - mu_p|^2 - |y - mu_q|^2) / sigma^2) ]
//! ```
//!
//! with `mu_p = h^T x(p)`, estimated by sampling codewords, noise, and
//! channel realizations.

use num_complex::Complex;
use rand::Rng;

use super::{PatternCodebook, PhyError, CODEBOOK_ENUM_LIMIT};
use crate::scalar::{circular_gaussian, real, Scalar};

/// Estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate<T> {
    pub bits: T,
    pub std_error: T,
    pub samples: u64,
}

/// Estimate `I(pattern; y | h)` in bits per channel use.
///
/// `draw_means` produces the `M` candidate receive means for one channel
/// realization (in codeword order); `n_noise_draws` observations are taken
/// per realization. The standard error is computed across realizations when
/// there are at least two, otherwise across noise draws.
pub fn mi_monte_carlo<T, R, F>(
    cb: &PatternCodebook,
    noise_power_w: T,
    n_channel_draws: usize,
    n_noise_draws: usize,
    rng: &mut R,
    mut draw_means: F,
) -> Result<MiEstimate<T>, PhyError>
where
    T: Scalar,
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Vec<Complex<T>>,
{
    let m = cb.size();
    if m > CODEBOOK_ENUM_LIMIT {
        return Err(PhyError::CodebookTooLarge {
            size: m,
            limit: CODEBOOK_ENUM_LIMIT,
        });
    }
    if n_channel_draws == 0 || n_noise_draws == 0 {
        return Err(PhyError::NoDraws);
    }
    if !(noise_power_w > T::zero()) {
        return Err(PhyError::NonPositiveNoise);
    }

    let log2_m = real::<T>(m as f64).log2();
    let noise_amp = noise_power_w.sqrt();
    let mut block_means: Vec<T> = Vec::with_capacity(n_channel_draws);
    let mut sample_values: Vec<T> = Vec::new();
    if n_channel_draws == 1 {
        sample_values.reserve(n_noise_draws);
    }

    let mut dist = vec![T::zero(); m as usize];
    for _ in 0..n_channel_draws {
        let means = draw_means(rng);
        if means.len() != m as usize {
            return Err(PhyError::DimensionMismatch {
                expected: m as usize,
                got: means.len(),
            });
        }
        let mut penalty_sum = T::zero();
        for _ in 0..n_noise_draws {
            let p = rng.random_range(0..m) as usize;
            let y = means[p] + circular_gaussian::<T, _>(rng) * noise_amp;
            for (d, mu) in dist.iter_mut().zip(means.iter()) {
                *d = (y - mu).norm_sqr();
            }
            let d_p = dist[p];
            // log2-sum-exp over exponents (d_p - d_q)/sigma^2; the q = p term
            // is zero, so the max is non-negative and the sum at least one.
            let mut max_e = T::zero();
            for &d_q in &dist {
                let e = (d_p - d_q) / noise_power_w;
                if e > max_e {
                    max_e = e;
                }
            }
            let mut sum = T::zero();
            for &d_q in &dist {
                sum += (((d_p - d_q) / noise_power_w) - max_e).exp();
            }
            let penalty = (max_e + sum.ln()) / T::LN_2();
            penalty_sum += penalty;
            if n_channel_draws == 1 {
                sample_values.push(log2_m - penalty);
            }
        }
        block_means.push(log2_m - penalty_sum / real(n_noise_draws as f64));
    }

    let samples = (n_channel_draws * n_noise_draws) as u64;
    let (mean, std_error) = if n_channel_draws >= 2 {
        mean_and_se(&block_means)
    } else {
        let (mean, se) = mean_and_se(&sample_values);
        (mean, se)
    };
    Ok(MiEstimate {
        bits: mean.max(T::zero()),
        std_error,
        samples,
    })
}

fn mean_and_se<T: Scalar>(values: &[T]) -> (T, T) {
    let n = real::<T>(values.len() as f64);
    let mean = values.iter().copied().sum::<T>() / n;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let var = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<T>()
        / (n - T::one());
    ((mean), (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::build_codebook;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_means_give_zero_bits() {
        let cb = build_codebook(4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = mi_monte_carlo(&cb, 0.1f64, 10, 200, &mut rng, |_| {
            vec![Complex::new(0.7, -0.2); 4]
        })
        .unwrap();
        assert_eq!(est.bits, 0.0);
    }

    #[test]
    fn vanishing_noise_reaches_log2_m() {
        let cb = build_codebook(4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let means: Vec<Complex<f64>> = (0..4)
            .map(|i| Complex::from_polar(1.0, i as f64 * 1.5))
            .collect();
        let est = mi_monte_carlo(&cb, 1e-9f64, 5, 200, &mut rng, |_| means.clone()).unwrap();
        assert!((est.bits - 2.0).abs() < 1e-6, "bits {}", est.bits);
    }

    #[test]
    fn guards() {
        let cb = build_codebook(64, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            mi_monte_carlo(&cb, 0.1f64, 1, 1, &mut rng, |_| vec![]),
            Err(PhyError::CodebookTooLarge { .. })
        ));
        let cb = build_codebook(4, 1).unwrap();
        assert!(matches!(
            mi_monte_carlo(&cb, 0.0f64, 1, 1, &mut rng, |_| vec![
                Complex::new(0.0, 0.0);
                4
            ]),
            Err(PhyError::NonPositiveNoise)
        ));
        assert!(matches!(
            mi_monte_carlo(&cb, 0.1f64, 0, 1, &mut rng, |_| vec![
                Complex::new(0.0, 0.0);
                4
            ]),
            Err(PhyError::NoDraws)
        ));
        assert!(matches!(
            mi_monte_carlo(&cb, 0.1f64, 1, 1, &mut rng, |_| vec![Complex::new(0.0, 0.0); 3]),
            Err(PhyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn estimate_is_deterministic_per_seed() {
        let cb = build_codebook(2, 1).unwrap();
        let means = vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)];
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            mi_monte_carlo(&cb, 1.0f64, 3, 100, &mut rng, |_| means.clone())
                .unwrap()
                .bits
        };
        assert_eq!(run(7), run(7));
    }
}
