//! Floating-point abstraction for the numeric core.
//!
//! Everything in [`crate::geometry`], [`crate::channel`] and [`crate::phy`] is
//! generic over [`Scalar`] so the models run in `f32` or `f64`. The protocol
//! simulator and the CLI pin `f64` through the aliases at the crate root.

use std::fmt::{Debug, Display};
use std::iter::{Product, Sum};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Product
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// One draw from the standard normal distribution.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw uniform on `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

impl Scalar for f64 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

/// Convert an `f64` constant into the scalar type.
///
/// Panics if the value is not representable; intended for literals in
/// formulas, never for data.
#[inline]
pub fn real<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("literal not representable in scalar type")
}

/// One draw of circularly-symmetric complex Gaussian noise with unit variance
/// (`E[|w|^2] = 1`).
#[inline]
pub fn circular_gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let half = real::<T>(0.5).sqrt();
    Complex::new(T::std_normal(rng) * half, T::std_normal(rng) * half)
}

/// Uniform draw on `[lo, hi)`; exact when `lo == hi`.
#[inline]
pub fn uniform_in<T: Scalar, R: Rng + ?Sized>(lo: T, hi: T, rng: &mut R) -> T {
    if lo == hi {
        return lo;
    }
    lo + (hi - lo) * T::unit_uniform(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circular_gaussian_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mean_sq: f64 = (0..n)
            .map(|_| circular_gaussian::<f64, _>(&mut rng).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean_sq - 1.0).abs() < 0.02, "E|w|^2 = {mean_sq}");
    }

    #[test]
    fn uniform_in_degenerate_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(uniform_in(0.3f64, 0.3, &mut rng), 0.3);
    }
}
