//! Per-link channel generation.
//!
//! A link realization combines the 3GPP-style distance path loss, log-normal
//! shadowing, a single array gain, and small-scale fading: Rician toward a
//! boresight steering direction under line of sight, correlated Rayleigh
//! otherwise. Transmit correlation follows the one-parameter Kronecker model
//! `R_ij = rho^|i-j|` applied through its Cholesky square root.

use num_complex::Complex;
use rand::Rng;
use thiserror::Error;

use crate::geometry::{is_blocked, ObstacleField, Point3};
use crate::scalar::{circular_gaussian, real, Scalar};
use crate::units::{db_to_amplitude, db_to_linear};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("path loss undefined for distance {0} m (need d > 0)")]
    NonPositiveDistance(f64),
    #[error("transmit correlation coefficient {0} outside [0, 1)")]
    CorrelationOutOfRange(f64),
    #[error("channel config invalid: {0}")]
    BadConfig(&'static str),
}

/// Transmitter/receiver placement for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry<T> {
    pub tx_pos: Point3<T>,
    pub rx_pos: Point3<T>,
    /// Departure angle of the LoS steering direction, radians.
    pub boresight_angle: T,
}

impl<T: Scalar> LinkGeometry<T> {
    pub fn new(tx_pos: Point3<T>, rx_pos: Point3<T>) -> Result<Self, ChannelError> {
        let geom = Self {
            tx_pos,
            rx_pos,
            boresight_angle: T::zero(),
        };
        if !(geom.distance() > T::zero()) {
            return Err(ChannelError::NonPositiveDistance(
                geom.distance().to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(geom)
    }

    pub fn with_boresight(mut self, angle: T) -> Self {
        self.boresight_angle = angle;
        self
    }

    pub fn distance(&self) -> T {
        self.tx_pos.distance(&self.rx_pos)
    }
}

/// Array and propagation parameters (defaults: 64-element half-wavelength
/// ULA at 2 GHz, 15 dBi array gain, 8 dB shadowing, 2 degree angular offset,
/// rho = 0.7, K = 10 dB, 15 kHz subcarrier).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig<T> {
    pub n_tx: usize,
    pub carrier_freq_hz: T,
    /// Element spacing in wavelengths.
    pub element_spacing: T,
    pub array_gain_dbi: T,
    pub shadow_sigma_db: T,
    pub angle_offset_sigma_deg: T,
    /// Kronecker correlation coefficient, `0 <= rho < 1`.
    pub corr_coeff: T,
    /// Rician K-factor in dB; `+inf` selects a pure LoS ray.
    pub rician_k_db: T,
    pub subcarrier_bw_hz: T,
    pub noise_figure_db: T,
}

impl<T: Scalar> Default for ChannelConfig<T> {
    fn default() -> Self {
        Self {
            n_tx: 64,
            carrier_freq_hz: real(2.0e9),
            element_spacing: real(0.5),
            array_gain_dbi: real(15.0),
            shadow_sigma_db: real(8.0),
            angle_offset_sigma_deg: real(2.0),
            corr_coeff: real(0.7),
            rician_k_db: real(10.0),
            subcarrier_bw_hz: real(15_000.0),
            noise_figure_db: T::zero(),
        }
    }
}

impl<T: Scalar> ChannelConfig<T> {
    /// Degenerate LoS configuration: no angular offset and an infinite
    /// K-factor, so every antenna sees the same coefficient at boresight.
    pub fn symmetric_los() -> Self {
        Self {
            angle_offset_sigma_deg: T::zero(),
            rician_k_db: T::infinity(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.n_tx < 1 {
            return Err(ChannelError::BadConfig("n_tx must be at least 1"));
        }
        if self.shadow_sigma_db < T::zero() {
            return Err(ChannelError::BadConfig("shadow_sigma_db must be >= 0"));
        }
        if self.angle_offset_sigma_deg < T::zero() {
            return Err(ChannelError::BadConfig("angle_offset_sigma_deg must be >= 0"));
        }
        if !(self.corr_coeff >= T::zero() && self.corr_coeff < T::one()) {
            return Err(ChannelError::CorrelationOutOfRange(
                self.corr_coeff.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if !(self.subcarrier_bw_hz > T::zero()) {
            return Err(ChannelError::BadConfig("subcarrier_bw_hz must be > 0"));
        }
        if !(self.carrier_freq_hz > T::zero()) {
            return Err(ChannelError::BadConfig("carrier_freq_hz must be > 0"));
        }
        if !(self.element_spacing > T::zero()) {
            return Err(ChannelError::BadConfig("element_spacing must be > 0"));
        }
        Ok(())
    }
}

/// One link realization. Amplitudes in `h` are linear and already include
/// path loss, shadowing and array gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub h: Vec<Complex<T>>,
    pub los: bool,
    pub path_loss_db: T,
    pub shadowing_db: T,
    pub angle_offset_rad: T,
}

/// Distance path loss `128.1 + 37.6 log10(d_km)` with `d` in meters.
pub fn path_loss_db<T: Scalar>(d: T) -> Result<T, ChannelError> {
    if !(d > T::zero()) {
        return Err(ChannelError::NonPositiveDistance(
            d.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(real::<T>(128.1) + real::<T>(37.6) * (d / real(1000.0)).log10())
}

/// Zero-mean Gaussian shadowing in dB.
pub fn sample_shadowing<T: Scalar, R: Rng + ?Sized>(config: &ChannelConfig<T>, rng: &mut R) -> T {
    if config.shadow_sigma_db == T::zero() {
        T::zero()
    } else {
        T::std_normal(rng) * config.shadow_sigma_db
    }
}

/// Thermal noise power over the subcarrier, `-174 dBm/Hz + 10 log10(bw) + NF`.
pub fn noise_power_dbm<T: Scalar>(config: &ChannelConfig<T>) -> T {
    real::<T>(-174.0) + real::<T>(10.0) * config.subcarrier_bw_hz.log10() + config.noise_figure_db
}

/// ULA steering vector: entry `i` is `exp(j 2 pi spacing i sin(theta))`.
pub fn steering_vector<T: Scalar>(n_tx: usize, spacing: T, theta: T) -> Vec<Complex<T>> {
    let step = real::<T>(2.0) * T::PI() * spacing * theta.sin();
    (0..n_tx)
        .map(|i| {
            let phase = step * real(i as f64);
            Complex::new(phase.cos(), phase.sin())
        })
        .collect()
}

/// Cholesky square root of the exponential correlation matrix
/// `R_ij = rho^|i-j|`; lower triangular, `L L^H = R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSqrt<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> CorrelationSqrt<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.l[i * self.n + j]
    }

    /// `L w` for a complex vector `w`.
    pub fn apply(&self, w: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(w.len(), self.n, "vector length must match matrix order");
        (0..self.n)
            .map(|i| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..=i {
                    acc += w[j] * self.entry(i, j);
                }
                acc
            })
            .collect()
    }
}

/// Build the Kronecker correlation square root for `n_tx` antennas.
pub fn correlation_sqrt<T: Scalar>(n_tx: usize, rho: T) -> Result<CorrelationSqrt<T>, ChannelError> {
    if !(rho >= T::zero() && rho < T::one()) {
        return Err(ChannelError::CorrelationOutOfRange(
            rho.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let n = n_tx;
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let r_ij = rho.powi((i - j) as i32);
            let mut s = r_ij;
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                l[i * n + j] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(CorrelationSqrt { n, l })
}

/// How the LoS state of a draw is decided.
#[derive(Debug, Clone, Copy)]
pub enum LosModel<'a, T> {
    /// Caller supplies the flag.
    Fixed(bool),
    /// Intersect the link segment with a sampled obstacle field.
    Field(&'a ObstacleField<T>),
    /// Bernoulli draw with the given LoS probability.
    Probability(T),
}

/// Reusable sampler holding the precomputed correlation square root.
#[derive(Debug, Clone)]
pub struct ChannelSampler<T> {
    config: ChannelConfig<T>,
    corr: CorrelationSqrt<T>,
}

impl<T: Scalar> ChannelSampler<T> {
    pub fn new(config: ChannelConfig<T>) -> Result<Self, ChannelError> {
        config.validate()?;
        let corr = correlation_sqrt(config.n_tx, config.corr_coeff)?;
        Ok(Self { config, corr })
    }

    pub fn config(&self) -> &ChannelConfig<T> {
        &self.config
    }

    /// Draw one realization. RNG consumption order is fixed: LoS resolution
    /// (when probabilistic), shadowing, angular offset (LoS only), then the
    /// i.i.d. fading vector (skipped for an infinite K-factor under LoS).
    pub fn draw<R: Rng + ?Sized>(
        &self,
        geom: &LinkGeometry<T>,
        los: LosModel<'_, T>,
        rng: &mut R,
    ) -> Result<ChannelRealization<T>, ChannelError> {
        let cfg = &self.config;
        let los = match los {
            LosModel::Fixed(flag) => flag,
            LosModel::Field(field) => !is_blocked(field, &geom.tx_pos, &geom.rx_pos),
            LosModel::Probability(p) => T::unit_uniform(rng) < p,
        };
        let pl_db = path_loss_db(geom.distance())?;
        let shadow_db = sample_shadowing(cfg, rng);
        let g = db_to_amplitude(-pl_db + cfg.array_gain_dbi + shadow_db);

        let n = cfg.n_tx;
        let h = if los {
            let offset = if cfg.angle_offset_sigma_deg == T::zero() {
                T::zero()
            } else {
                T::std_normal(rng) * cfg.angle_offset_sigma_deg * T::PI() / real(180.0)
            };
            let steer = steering_vector(n, cfg.element_spacing, geom.boresight_angle + offset);
            if cfg.rician_k_db == T::infinity() {
                return Ok(ChannelRealization {
                    h: steer.into_iter().map(|s| s * g).collect(),
                    los,
                    path_loss_db: pl_db,
                    shadowing_db: shadow_db,
                    angle_offset_rad: offset,
                });
            }
            let k = db_to_linear(cfg.rician_k_db);
            let los_amp = g * (k / (k + T::one())).sqrt();
            let diffuse_amp = g * (T::one() / (k + T::one())).sqrt();
            let w: Vec<Complex<T>> = (0..n).map(|_| circular_gaussian(rng)).collect();
            let diffuse = self.corr.apply(&w);
            steer
                .iter()
                .zip(diffuse.iter())
                .map(|(s, d)| s * los_amp + d * diffuse_amp)
                .collect()
        } else {
            let w: Vec<Complex<T>> = (0..n).map(|_| circular_gaussian(rng)).collect();
            self.corr.apply(&w).into_iter().map(|d| d * g).collect()
        };

        Ok(ChannelRealization {
            h,
            los,
            path_loss_db: pl_db,
            shadowing_db: shadow_db,
            angle_offset_rad: T::zero(),
        })
    }
}

/// One-shot draw; prefer [`ChannelSampler`] in loops, which reuses the
/// correlation factorization.
pub fn draw_channel<T: Scalar, R: Rng + ?Sized>(
    geom: &LinkGeometry<T>,
    los: LosModel<'_, T>,
    config: &ChannelConfig<T>,
    rng: &mut R,
) -> Result<ChannelRealization<T>, ChannelError> {
    ChannelSampler::new(config.clone())?.draw(geom, los, rng)
}
