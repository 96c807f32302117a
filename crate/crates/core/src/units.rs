//! Decibel and power-unit conversions.

use crate::scalar::{real, Scalar};

/// dB ratio to linear power ratio: `10^(db/10)`.
#[inline]
pub fn db_to_linear<T: Scalar>(db: T) -> T {
    real::<T>(10.0).powf(db / real(10.0))
}

/// Linear power ratio to dB: `10 log10(lin)`. Zero maps to `-inf`.
#[inline]
pub fn linear_to_db<T: Scalar>(lin: T) -> T {
    real::<T>(10.0) * lin.log10()
}

/// dB ratio to linear amplitude ratio: `10^(db/20)`.
#[inline]
pub fn db_to_amplitude<T: Scalar>(db: T) -> T {
    real::<T>(10.0).powf(db / real(20.0))
}

/// dBm to watts.
#[inline]
pub fn dbm_to_watts<T: Scalar>(dbm: T) -> T {
    db_to_linear((dbm - real(30.0)).max(T::neg_infinity()))
}

/// Watts to dBm. Zero maps to `-inf`.
#[inline]
pub fn watts_to_dbm<T: Scalar>(watts: T) -> T {
    linear_to_db(watts) + real(30.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn round_numbers() {
        assert_relative_eq!(db_to_linear(10.0f64), 10.0);
        assert_relative_eq!(db_to_amplitude(20.0f64), 10.0);
        assert_relative_eq!(dbm_to_watts(30.0f64), 1.0);
        assert_relative_eq!(dbm_to_watts(0.0f64), 1e-3);
        assert_relative_eq!(watts_to_dbm(1e-3f64), 0.0);
    }

    #[test]
    fn zero_power_is_minus_inf_dbm() {
        assert_eq!(watts_to_dbm(0.0f64), f64::NEG_INFINITY);
        assert_eq!(dbm_to_watts(f64::NEG_INFINITY), 0.0);
    }
}
