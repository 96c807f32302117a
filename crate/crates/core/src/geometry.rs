//! Poisson-process obstacle fields and line-of-sight blockage.
//!
//! Obstacles are cylinders with centers drawn from a homogeneous Poisson
//! point process over a bounded rectangle. The process density is derived
//! from an obstacle cover ratio (OCR), the fraction of ground area covered
//! by obstacle cross-sections. Blockage of a link is answered both
//! empirically (sample a field, intersect the segment) and in closed form
//! (void probability of the capsule swept along the segment).

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::scalar::{real, uniform_in, Scalar};

/// Default antenna height for terminals, below the minimum obstacle height
/// so the 2-D disk test decides blockage unless a config raises terminals.
pub const DEFAULT_TERMINAL_HEIGHT_M: f64 = 1.5;

/// Largest obstacle cover ratio the model accepts.
pub const MAX_OCR: f64 = 0.9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("obstacle cover ratio {0} outside [0, {MAX_OCR}]")]
    OcrOutOfRange(f64),
    #[error("obstacle radius bounds [{0}, {1}] invalid (need 0 < min <= max)")]
    BadRadiusBounds(f64, f64),
    #[error("obstacle height bounds [{0}, {1}] invalid (need 0 < min <= max)")]
    BadHeightBounds(f64, f64),
    #[error("sampling area {0} m x {1} m invalid (need positive dimensions)")]
    BadArea(f64, f64),
    #[error("empirical LoS estimate needs at least one trial")]
    NoTrials,
}

/// A point in 3-D space, meters, `z >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        debug_assert!(z >= T::zero(), "terminal height must be non-negative");
        Self { x, y, z }
    }

    /// Point on the ground plane at the default terminal height.
    pub fn terminal(x: T, y: T) -> Self {
        Self::new(x, y, real(DEFAULT_TERMINAL_HEIGHT_M))
    }

    pub fn distance(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Parameters of the obstacle process.
///
/// Radii and heights are uniform on their bounds; the sampling rectangle is
/// centered on the origin (the transmitter position).
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSpec<T> {
    pub ocr: T,
    pub radius_min: T,
    pub radius_max: T,
    pub height_min: T,
    pub height_max: T,
    pub area_width: T,
    pub area_depth: T,
}

impl<T: Scalar> Default for ObstacleSpec<T> {
    fn default() -> Self {
        Self {
            ocr: real(0.3),
            radius_min: real(0.3),
            radius_max: real(0.6),
            height_min: real(5.0),
            height_max: real(25.0),
            area_width: real(50.0),
            area_depth: real(50.0),
        }
    }
}

impl<T: Scalar> ObstacleSpec<T> {
    pub fn with_ocr(ocr: T) -> Self {
        Self {
            ocr,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let to = |v: T| v.to_f64().unwrap_or(f64::NAN);
        if !(self.ocr >= T::zero() && self.ocr <= real(MAX_OCR)) {
            return Err(GeometryError::OcrOutOfRange(to(self.ocr)));
        }
        if !(self.radius_min > T::zero() && self.radius_min <= self.radius_max) {
            return Err(GeometryError::BadRadiusBounds(
                to(self.radius_min),
                to(self.radius_max),
            ));
        }
        if !(self.height_min > T::zero() && self.height_min <= self.height_max) {
            return Err(GeometryError::BadHeightBounds(
                to(self.height_min),
                to(self.height_max),
            ));
        }
        if !(self.area_width > T::zero() && self.area_depth > T::zero()) {
            return Err(GeometryError::BadArea(to(self.area_width), to(self.area_depth)));
        }
        Ok(())
    }

    /// Mean obstacle radius `E[r]` for radius uniform on `[r_min, r_max]`.
    pub fn mean_radius(&self) -> T {
        (self.radius_min + self.radius_max) / real(2.0)
    }

    /// Second moment `E[r^2]`; `(r_max^3 - r_min^3) / (3 (r_max - r_min))`
    /// for a uniform radius, reducing to `r^2` when the bounds coincide.
    pub fn mean_radius_sq(&self) -> T {
        if self.radius_min == self.radius_max {
            self.radius_min * self.radius_min
        } else {
            let three = real::<T>(3.0);
            (self.radius_max.powi(3) - self.radius_min.powi(3))
                / (three * (self.radius_max - self.radius_min))
        }
    }

    pub fn area(&self) -> T {
        self.area_width * self.area_depth
    }
}

/// One sampled cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle<T> {
    pub center_x: T,
    pub center_y: T,
    pub radius: T,
    pub height: T,
}

/// A realization of the obstacle process.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleField<T> {
    pub obstacles: Vec<Obstacle<T>>,
    pub density: T,
}

impl<T> ObstacleField<T> {
    pub fn empty() -> Self
    where
        T: Scalar,
    {
        Self {
            obstacles: Vec::new(),
            density: T::zero(),
        }
    }
}

/// Obstacle density (per m^2) matching the cover ratio:
/// `lambda = ocr / (pi E[r^2])`.
pub fn density_from_ocr<T: Scalar>(spec: &ObstacleSpec<T>) -> Result<T, GeometryError> {
    spec.validate()?;
    if spec.ocr == T::zero() {
        return Ok(T::zero());
    }
    Ok(spec.ocr / (T::PI() * spec.mean_radius_sq()))
}

/// Sample one field: Poisson count, uniform centers, uniform radii/heights.
///
/// Draw order is fixed (count, then per obstacle x, y, radius, height) so a
/// seed pins the realization.
pub fn sample_field<T: Scalar, R: Rng + ?Sized>(
    spec: &ObstacleSpec<T>,
    rng: &mut R,
) -> Result<ObstacleField<T>, GeometryError> {
    let density = density_from_ocr(spec)?;
    let mean = (density * spec.area()).to_f64().expect("finite mean");
    if mean <= 0.0 {
        return Ok(ObstacleField {
            obstacles: Vec::new(),
            density,
        });
    }
    let count = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
    let half_w = spec.area_width / real(2.0);
    let half_d = spec.area_depth / real(2.0);
    let obstacles = (0..count)
        .map(|_| {
            let center_x = uniform_in(-half_w, half_w, rng);
            let center_y = uniform_in(-half_d, half_d, rng);
            let radius = uniform_in(spec.radius_min, spec.radius_max, rng);
            let height = uniform_in(spec.height_min, spec.height_max, rng);
            Obstacle {
                center_x,
                center_y,
                radius,
                height,
            }
        })
        .collect();
    Ok(ObstacleField { obstacles, density })
}

/// Distance from `(px, py)` to the segment `(ax, ay)-(bx, by)`, and the
/// parameter `t` of the closest point (clamped to the segment).
fn point_segment_distance<T: Scalar>(px: T, py: T, ax: T, ay: T, bx: T, by: T) -> (T, T) {
    let dx = bx - ax;
    let dy = by - ay;
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq == T::zero() {
        T::zero()
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len_sq)
            .max(T::zero())
            .min(T::one())
    };
    let cx = ax + t * dx;
    let cy = ay + t * dy;
    let ex = px - cx;
    let ey = py - cy;
    ((ex * ex + ey * ey).sqrt(), t)
}

/// True when any obstacle blocks the segment `a`-`b`.
///
/// An obstacle blocks when its disk intersects the 2-D projection of the
/// segment and its height exceeds the segment height interpolated at the
/// closest approach. Disks containing a terminal count as blocking.
pub fn is_blocked<T: Scalar>(field: &ObstacleField<T>, a: &Point3<T>, b: &Point3<T>) -> bool {
    for obs in &field.obstacles {
        let (dist, t) = point_segment_distance(obs.center_x, obs.center_y, a.x, a.y, b.x, b.y);
        if dist <= obs.radius {
            let seg_height = a.z + t * (b.z - a.z);
            if obs.height > seg_height {
                return true;
            }
        }
    }
    false
}

/// Closed-form LoS probability over distance `d`: the void probability of
/// the capsule a random-radius disk sweeps along the segment,
/// `exp(-lambda (2 E[r] d + pi E[r^2]))`, clamped to `[0, 1]`.
pub fn p_los_analytic<T: Scalar>(spec: &ObstacleSpec<T>, d: T) -> Result<T, GeometryError> {
    p_los_analytic_with(spec, d, true)
}

/// Same as [`p_los_analytic`] with the disk end-cap term (`pi E[r^2]`)
/// switchable; excluding it keeps only the swept-rectangle area `2 E[r] d`.
pub fn p_los_analytic_with<T: Scalar>(
    spec: &ObstacleSpec<T>,
    d: T,
    include_end_cap: bool,
) -> Result<T, GeometryError> {
    spec.validate()?;
    let density = density_from_ocr(spec)?;
    let mut region = real::<T>(2.0) * spec.mean_radius() * d.max(T::zero());
    if include_end_cap {
        region += T::PI() * spec.mean_radius_sq();
    }
    Ok((-density * region).exp().min(T::one()).max(T::zero()))
}

/// Empirical LoS probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosEstimate<T> {
    pub p_los: T,
    pub std_error: T,
    pub trials: u64,
}

/// Monte Carlo LoS probability: fraction of sampled fields in which a fixed,
/// centrally placed segment of length `d` at terminal height is unblocked.
pub fn p_los_empirical<T: Scalar, R: Rng + ?Sized>(
    spec: &ObstacleSpec<T>,
    d: T,
    trials: u64,
    rng: &mut R,
) -> Result<LosEstimate<T>, GeometryError> {
    spec.validate()?;
    if trials == 0 {
        return Err(GeometryError::NoTrials);
    }
    let half = d / real(2.0);
    let a = Point3::terminal(-half, T::zero());
    let b = Point3::terminal(half, T::zero());
    let mut clear = 0u64;
    for _ in 0..trials {
        let field = sample_field(spec, rng)?;
        if !is_blocked(&field, &a, &b) {
            clear += 1;
        }
    }
    let n = real::<T>(trials as f64);
    let p = real::<T>(clear as f64) / n;
    let std_error = (p * (T::one() - p) / n).sqrt();
    Ok(LosEstimate {
        p_los: p,
        std_error,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(ocr: f64) -> ObstacleSpec<f64> {
        ObstacleSpec::with_ocr(ocr)
    }

    #[test]
    fn density_zero_ocr() {
        assert_eq!(density_from_ocr(&spec(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn density_matches_uniform_second_moment() {
        // E[r^2] on [0.3, 0.6] by hand: (0.216 - 0.027) / 0.9 = 0.21.
        let s = spec(0.3);
        assert_relative_eq!(s.mean_radius_sq(), 0.21, max_relative = 1e-12);
        let lambda = density_from_ocr(&s).unwrap();
        assert_relative_eq!(lambda, 0.3 / (std::f64::consts::PI * 0.21), max_relative = 1e-12);
        assert_relative_eq!(lambda, 0.45475, max_relative = 1e-3);
        assert_relative_eq!(
            density_from_ocr(&spec(0.9)).unwrap(),
            3.0 * lambda,
            max_relative = 1e-12
        );
        assert_relative_eq!(density_from_ocr(&spec(0.9)).unwrap(), 1.36424, max_relative = 1e-3);
    }

    #[test]
    fn second_moment_against_monte_carlo() {
        let s = spec(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let r = uniform_in(s.radius_min, s.radius_max, &mut rng);
                r * r
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - s.mean_radius_sq()).abs() <= 3.0 * se,
            "MC E[r^2] = {mean} vs analytic {}",
            s.mean_radius_sq()
        );
    }

    #[test]
    fn degenerate_radius_second_moment() {
        let s = ObstacleSpec {
            radius_min: 0.5,
            radius_max: 0.5,
            ..spec(0.3)
        };
        assert_relative_eq!(s.mean_radius_sq(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert_eq!(
            density_from_ocr(&spec(0.95)),
            Err(GeometryError::OcrOutOfRange(0.95))
        );
        assert!(density_from_ocr(&spec(-0.1)).is_err());
        let bad_radius = ObstacleSpec {
            radius_min: 0.6,
            radius_max: 0.3,
            ..spec(0.3)
        };
        assert!(matches!(
            density_from_ocr(&bad_radius),
            Err(GeometryError::BadRadiusBounds(_, _))
        ));
        let bad_area = ObstacleSpec {
            area_width: 0.0,
            ..spec(0.3)
        };
        assert!(matches!(
            density_from_ocr(&bad_area),
            Err(GeometryError::BadArea(_, _))
        ));
    }

    #[test]
    fn sample_field_zero_ocr_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let field = sample_field(&spec(0.0), &mut rng).unwrap();
        assert!(field.obstacles.is_empty());
    }

    #[test]
    fn sample_field_is_deterministic() {
        let a = sample_field(&spec(0.3), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_field(&spec(0.3), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_field_count_matches_poisson_mean() {
        let s = spec(0.3);
        let lambda = density_from_ocr(&s).unwrap();
        let expected = lambda * s.area();
        let seeds = 2_000u64;
        let mut total = 0usize;
        let mut sq_total = 0.0f64;
        for seed in 0..seeds {
            let field = sample_field(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            total += field.obstacles.len();
            sq_total += (field.obstacles.len() as f64).powi(2);
        }
        let mean = total as f64 / seeds as f64;
        let var = sq_total / seeds as f64 - mean * mean;
        let se = (var / seeds as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "mean count {mean} vs expected {expected} (se {se})"
        );
        // Sanity against the hand value for a 50 m x 50 m area.
        assert_relative_eq!(expected, 1136.8, max_relative = 3e-3);
    }

    #[test]
    fn field_samples_respect_bounds() {
        let s = spec(0.5);
        let field = sample_field(&s, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
        assert!(!field.obstacles.is_empty());
        for o in &field.obstacles {
            assert!(o.center_x.abs() <= s.area_width / 2.0);
            assert!(o.center_y.abs() <= s.area_depth / 2.0);
            assert!(o.radius >= s.radius_min && o.radius <= s.radius_max);
            assert!(o.height >= s.height_min && o.height <= s.height_max);
        }
    }

    #[test]
    fn blockage_disk_on_midpoint() {
        let field = ObstacleField {
            obstacles: vec![Obstacle {
                center_x: 0.0,
                center_y: 0.0,
                radius: 0.5,
                height: 10.0,
            }],
            density: 0.0,
        };
        let a = Point3::terminal(-1.0, 0.0);
        let b = Point3::terminal(1.0, 0.0);
        assert!(is_blocked(&field, &a, &b));
    }

    #[test]
    fn blockage_empty_field_and_miss() {
        let a = Point3::terminal(-1.0, 0.0);
        let b = Point3::terminal(1.0, 0.0);
        assert!(!is_blocked(&ObstacleField::<f64>::empty(), &a, &b));
        // Perpendicular distance 0.61 m > radius 0.6 m.
        let field = ObstacleField {
            obstacles: vec![Obstacle {
                center_x: 0.0,
                center_y: 0.61,
                radius: 0.6,
                height: 10.0,
            }],
            density: 0.0,
        };
        assert!(!is_blocked(&field, &a, &b));
    }

    #[test]
    fn blockage_respects_height() {
        // Tall terminals clear a short obstacle.
        let field = ObstacleField {
            obstacles: vec![Obstacle {
                center_x: 0.0,
                center_y: 0.0,
                radius: 0.5,
                height: 3.0,
            }],
            density: 0.0,
        };
        let low_a = Point3::new(-1.0, 0.0, 1.5);
        let low_b = Point3::new(1.0, 0.0, 1.5);
        let high_a = Point3::new(-1.0, 0.0, 4.0);
        let high_b = Point3::new(1.0, 0.0, 4.0);
        assert!(is_blocked(&field, &low_a, &low_b));
        assert!(!is_blocked(&field, &high_a, &high_b));
    }

    #[test]
    fn p_los_hand_values() {
        let s = spec(0.3);
        assert_relative_eq!(p_los_analytic(&spec(0.0), 5.0).unwrap(), 1.0);
        assert_relative_eq!(p_los_analytic(&s, 1.0).unwrap(), 0.4920, max_relative = 1e-3);
        assert_relative_eq!(p_los_analytic(&s, 20.0).unwrap(), 2.06e-4, max_relative = 5e-3);
        // d = 0 degenerates to the disk end-cap: exp(-ocr).
        assert_relative_eq!(
            p_los_analytic(&s, 0.0).unwrap(),
            (-0.3f64).exp(),
            max_relative = 1e-12
        );
        // Without the end cap the d = 0 probability is 1.
        assert_relative_eq!(p_los_analytic_with(&s, 0.0, false).unwrap(), 1.0);
    }

    #[test]
    fn p_los_empirical_matches_analytic() {
        // Narrow sampling window: restricting the PPP to the capsule's
        // bounding box leaves the blockage law unchanged.
        for (ocr, d) in [(0.3, 1.0), (0.3, 0.0), (0.7, 2.0)] {
            let s = ObstacleSpec {
                area_width: d + 2.0,
                area_depth: 2.0,
                ..spec(ocr)
            };
            let analytic = p_los_analytic(&s, d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1234 + (ocr * 10.0) as u64);
            let est = p_los_empirical(&s, d, 30_000, &mut rng).unwrap();
            let tol = 3.0 * est.std_error.max(1e-4);
            assert!(
                (est.p_los - analytic).abs() <= tol,
                "ocr {ocr} d {d}: empirical {} vs analytic {analytic} (tol {tol})",
                est.p_los
            );
        }
    }

    #[test]
    fn p_los_empirical_exact_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let est = p_los_empirical(&spec(0.0), 10.0, 100, &mut rng).unwrap();
        assert_eq!(est.p_los, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(
            p_los_empirical(&spec(0.3), 1.0, 0, &mut rng),
            Err(GeometryError::NoTrials)
        );
    }

    proptest! {
        #[test]
        fn p_los_strictly_decreasing_in_d(ocr in 0.05f64..0.9, d in 0.0f64..30.0, step in 0.1f64..5.0) {
            let s = spec(ocr);
            let p0 = p_los_analytic(&s, d).unwrap();
            let p1 = p_los_analytic(&s, d + step).unwrap();
            prop_assert!(p1 < p0);
        }

        #[test]
        fn p_los_strictly_decreasing_in_ocr(ocr in 0.05f64..0.8, d in 0.1f64..30.0, step in 0.01f64..0.1) {
            let p0 = p_los_analytic(&spec(ocr), d).unwrap();
            let p1 = p_los_analytic(&spec(ocr + step), d).unwrap();
            prop_assert!(p1 < p0);
        }

        #[test]
        fn blockage_is_symmetric(
            seed in 0u64..500,
            ax in -5.0f64..5.0, ay in -5.0f64..5.0,
            bx in -5.0f64..5.0, by in -5.0f64..5.0,
        ) {
            prop_assume!((ax - bx).abs() > 1e-9 || (ay - by).abs() > 1e-9);
            let s = ObstacleSpec { area_width: 12.0, area_depth: 12.0, ..spec(0.5) };
            let field = sample_field(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let a = Point3::terminal(ax, ay);
            let b = Point3::terminal(bx, by);
            prop_assert_eq!(is_blocked(&field, &a, &b), is_blocked(&field, &b, &a));
        }
    }
}
