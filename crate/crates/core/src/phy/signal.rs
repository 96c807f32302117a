//! Constant-envelope transmit signals, harvested power, and the
//! artificial-noise masking pair.

use num_complex::Complex;
use rand::Rng;

use super::{ActivationPattern, PhyError};
use crate::scalar::{circular_gaussian, real, Scalar};
use crate::units::{db_to_amplitude, dbm_to_watts, watts_to_dbm};

/// Transmit-side signal parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalConfig<T> {
    pub total_power_dbm: T,
    /// Phase-shifter resolution in bits; `None` is continuous.
    pub phase_resolution_bits: Option<u32>,
    /// Artificial-noise power; `-inf` disables AN.
    pub an_power_dbm: T,
    /// Self-interference cancellation residual, dB (non-positive).
    pub si_residual_db: T,
}

impl<T: Scalar> Default for SignalConfig<T> {
    fn default() -> Self {
        Self {
            total_power_dbm: real(10.0),
            phase_resolution_bits: None,
            an_power_dbm: T::neg_infinity(),
            si_residual_db: real(-110.0),
        }
    }
}

impl<T: Scalar> SignalConfig<T> {
    pub fn validate(&self) -> Result<(), PhyError> {
        if !self.total_power_dbm.is_finite() {
            return Err(PhyError::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(())
    }

    pub fn total_power_watts(&self) -> T {
        dbm_to_watts(self.total_power_dbm)
    }
}

/// Transmit vector: zero off-pattern, constant envelope on-pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct TxVector<T> {
    pub x: Vec<Complex<T>>,
}

impl<T: Scalar> TxVector<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Total radiated power `||x||^2` in watts.
    pub fn norm_sqr(&self) -> T {
        self.x.iter().map(|e| e.norm_sqr()).sum()
    }
}

/// Phase-shifter settings that cophase the active antennas toward the
/// harvester: `phi_i = -arg(h_i)` on the pattern, zero elsewhere.
///
/// Returns a full-length phase vector so the same shifter bank can serve any
/// pattern drawn from the array. Quantizes to `2^bits` levels when a finite
/// resolution is set.
pub fn cophase_weights<T: Scalar>(
    h: &[Complex<T>],
    pattern: &ActivationPattern,
    phase_resolution_bits: Option<u32>,
) -> Result<Vec<T>, PhyError> {
    let mut phases = vec![T::zero(); h.len()];
    for &i in pattern.active() {
        let entry = h.get(i).ok_or(PhyError::IndexOutOfRange {
            index: i,
            n_tx: h.len(),
        })?;
        if entry.norm_sqr() == T::zero() {
            return Err(PhyError::ZeroChannelEntry(i));
        }
        let mut phi = -entry.arg();
        if let Some(bits) = phase_resolution_bits {
            let step = real::<T>(2.0) * T::PI() / real((1u64 << bits) as f64);
            phi = (phi / step).round() * step;
        }
        phases[i] = phi;
    }
    Ok(phases)
}

/// Constant-envelope signal: `sqrt(P/k) exp(j phi_i)` on the pattern.
pub fn tx_signal<T: Scalar>(
    pattern: &ActivationPattern,
    phases: &[T],
    config: &SignalConfig<T>,
) -> Result<TxVector<T>, PhyError> {
    let n = phases.len();
    let amp = (config.total_power_watts() / real(pattern.k() as f64)).sqrt();
    let mut x = vec![Complex::new(T::zero(), T::zero()); n];
    for &i in pattern.active() {
        if i >= n {
            return Err(PhyError::IndexOutOfRange { index: i, n_tx: n });
        }
        x[i] = Complex::new(phases[i].cos(), phases[i].sin()) * amp;
    }
    Ok(TxVector { x })
}

/// Received RF power in watts and dBm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedPower<T> {
    pub watts: T,
    pub dbm: T,
}

/// `|h^T x|^2` at a single-antenna receiver.
pub fn harvested_power<T: Scalar>(
    h: &[Complex<T>],
    x: &TxVector<T>,
) -> Result<ReceivedPower<T>, PhyError> {
    let watts = rx_mean(h, x)?.norm_sqr();
    Ok(ReceivedPower {
        watts,
        dbm: watts_to_dbm(watts),
    })
}

/// Noise-free receive sample `h^T x`.
pub fn rx_mean<T: Scalar>(h: &[Complex<T>], x: &TxVector<T>) -> Result<Complex<T>, PhyError> {
    if h.len() != x.len() {
        return Err(PhyError::DimensionMismatch {
            expected: h.len(),
            got: x.len(),
        });
    }
    Ok(h.iter()
        .zip(x.x.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (hi, xi)| {
            acc + hi * xi
        }))
}

/// One AWGN observation `y = h^T x + n` with `E[|n|^2] = noise_power_w`.
pub fn rx_sample<T: Scalar, R: Rng + ?Sized>(
    h: &[Complex<T>],
    x: &TxVector<T>,
    noise_power_w: T,
    rng: &mut R,
) -> Result<Complex<T>, PhyError> {
    let mean = rx_mean(h, x)?;
    if noise_power_w == T::zero() {
        return Ok(mean);
    }
    Ok(mean + circular_gaussian(rng) * noise_power_w.sqrt())
}

/// Add the artificial-noise waveform at `an_power_dbm` to an observation;
/// `-inf` leaves it untouched.
pub fn an_mask<T: Scalar>(y: Complex<T>, an_sample: Complex<T>, an_power_dbm: T) -> Complex<T> {
    if an_power_dbm == T::neg_infinity() {
        return y;
    }
    y + an_sample * dbm_to_watts(an_power_dbm).sqrt()
}

/// Subtract the known artificial-noise waveform, leaving the cancellation
/// residual: the AN term keeps `an_power_dbm + si_residual_db` of power.
pub fn cancel_si<T: Scalar>(
    y_masked: Complex<T>,
    an_sample: Complex<T>,
    config: &SignalConfig<T>,
) -> Complex<T> {
    if config.an_power_dbm == T::neg_infinity() {
        return y_masked;
    }
    let known = an_sample * dbm_to_watts(config.an_power_dbm).sqrt();
    let residual_amp = if config.si_residual_db == T::neg_infinity() {
        T::zero()
    } else {
        db_to_amplitude(config.si_residual_db)
    };
    y_masked - known * (T::one() - residual_amp)
}
