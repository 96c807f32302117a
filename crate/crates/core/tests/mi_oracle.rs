//! Mutual-information estimator against a one-dimensional quadrature oracle.
//!
//! For two antipodal means in complex AWGN the mixture statistic depends on
//! a single Gaussian projection: with `a = |mu_0 - mu_1| / sigma`,
//!
//! ```text
//! I(a) = 1 - E_{v ~ N(0,1)}[ log2(1 + exp(sqrt(2) a v - a^2)) ]
//! ```
//!
//! which Simpson quadrature evaluates independently of the sampler.

use ihsim_core::phy::{build_codebook, mi_monte_carlo, rx_mean, se_bound_combinatorial, tx_signal};
use ihsim_core::scalar::circular_gaussian;
use ihsim_core::{Complex64, SignalConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `log2(1 + e^t)` without overflow.
fn log2_1p_exp(t: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    if t > 0.0 {
        t / ln2 + (-t).exp().ln_1p() / ln2
    } else {
        t.exp().ln_1p() / ln2
    }
}

/// Simpson quadrature of the two-point-mixture mutual information.
fn mi_two_point_quadrature(a: f64) -> f64 {
    let lo = -12.0;
    let hi = 12.0;
    let n = 4000; // even
    let h = (hi - lo) / n as f64;
    let integrand = |v: f64| -> f64 {
        let phi = (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt();
        phi * log2_1p_exp(std::f64::consts::SQRT_2 * a * v - a * a)
    };
    let mut acc = integrand(lo) + integrand(hi);
    for i in 1..n {
        let w = if i % 2 == 0 { 2.0 } else { 4.0 };
        acc += w * integrand(lo + i as f64 * h);
    }
    1.0 - acc * h / 3.0
}

#[test]
fn quadrature_oracle_sanity() {
    // No separation: zero bits. Huge separation: one bit.
    assert!(mi_two_point_quadrature(0.0).abs() < 1e-9);
    assert!((mi_two_point_quadrature(40.0) - 1.0).abs() < 1e-9);
    // Monotone in separation.
    assert!(mi_two_point_quadrature(1.0) < mi_two_point_quadrature(2.0));
}

#[test]
fn estimator_matches_quadrature_at_three_snrs() {
    // n_tx = 2, k = 1, fixed real channel h = [1, -1], unit transmit power.
    let cb = build_codebook(2, 1).unwrap();
    let config = SignalConfig {
        total_power_dbm: 30.0, // 1 W
        ..Default::default()
    };
    let h = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    let phases = [0.0, 0.0];
    let means: Vec<Complex64> = (0..cb.size())
        .map(|c| {
            let x = tx_signal(&cb.pattern(c).unwrap(), &phases, &config).unwrap();
            rx_mean(&h, &x).unwrap()
        })
        .collect();
    assert_eq!(means[0], Complex64::new(1.0, 0.0));
    assert_eq!(means[1], Complex64::new(-1.0, 0.0));

    for snr_db in [-10.0f64, 0.0, 10.0] {
        let noise_w = 10f64.powf(-snr_db / 10.0);
        let a = (means[0] - means[1]).norm() / noise_w.sqrt();
        let oracle = mi_two_point_quadrature(a);
        let mut rng = ChaCha8Rng::seed_from_u64(0x441 + snr_db as i64 as u64);
        let est = mi_monte_carlo(&cb, noise_w, 1, 40_000, &mut rng, |_| means.clone()).unwrap();
        assert!(
            (est.bits - oracle).abs() < 0.05,
            "snr {snr_db} dB: estimate {} vs quadrature {oracle}",
            est.bits
        );
    }
}

#[test]
fn estimate_respects_entropy_and_combinatorial_bounds() {
    let cb = build_codebook(4, 2).unwrap();
    let bound: f64 = se_bound_combinatorial(4, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for noise_w in [0.01f64, 0.3, 3.0] {
        let est = mi_monte_carlo(&cb, noise_w, 50, 100, &mut rng, |r| {
            (0..4).map(|_| circular_gaussian::<f64, _>(r)).collect()
        })
        .unwrap();
        let cap = (cb.size() as f64).log2().min(bound);
        assert!(est.bits >= 0.0);
        assert!(
            est.bits <= cap + 3.0 * est.std_error,
            "noise {noise_w}: {} bits exceeds cap {cap}",
            est.bits
        );
    }
}
