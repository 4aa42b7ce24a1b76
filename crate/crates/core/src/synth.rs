//! Synthetic OD-flow data with a known piecewise ground truth.
//!
//! Six features are uniform on [0, 1]. The flow target depends on three of
//! them through eight plateaus spanning the 100-32,000 range typical of
//! county-level daily flows, one of which is deliberately rare (under 1% of
//! rows) so that coarse variance thresholds discard its rule while fine
//! ones keep it. Multiplicative 10% Gaussian noise is applied on top.
//!
//! The generator is deterministic given `(n_rows, seed)` and is used by the
//! acceptance tests, the bundled demo dataset, and benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;

/// Feature names of the generated dataset, in column order. Only the first
/// three drive the target.
pub const FEATURE_NAMES: [&str; 6] = [
    "distance_miles",
    "pois_destination",
    "pois_origin",
    "natural_areas_destination",
    "major_roads_origin",
    "unemployment_rate_origin",
];

/// Name of the generated target column.
pub const TARGET_NAME: &str = "pop_flows";

/// Relative noise level applied to the plateau means.
pub const NOISE_LEVEL: f64 = 0.1;

/// Ground-truth plateau mean for a feature row (before noise). The eight
/// regions are defined by cuts on distance, destination POIs, and origin
/// POIs; the region `distance <= 0.46, pois_dest > 0.9, pois_origin > 0.8`
/// covers roughly 0.9% of uniform rows and carries the largest flows.
pub fn piecewise_mean(row: &[f64]) -> f64 {
    let distance = row[0];
    let pois_dest = row[1];
    let pois_origin = row[2];
    if distance <= 0.46 {
        if pois_dest > 0.9 {
            if pois_origin > 0.8 {
                31_867.81
            } else {
                9_709.81
            }
        } else if pois_dest > 0.32 {
            6_492.03
        } else {
            1_648.22
        }
    } else if distance <= 0.59 {
        if pois_dest > 0.55 {
            2_728.70
        } else {
            515.81
        }
    } else if pois_origin > 0.77 {
        544.09
    } else {
        106.32
    }
}

/// Samples a standard normal via the Box-Muller transform.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generates `n_rows` rows of the synthetic OD dataset.
pub fn generate(n_rows: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cols = FEATURE_NAMES.len();
    let mut features = Vec::with_capacity(n_rows * n_cols);
    let mut target = Vec::with_capacity(n_rows);
    let mut row = [0.0f64; 6];
    for _ in 0..n_rows {
        for cell in &mut row {
            *cell = rng.random_range(0.0..1.0);
        }
        features.extend_from_slice(&row);
        let mean = piecewise_mean(&row);
        let noisy = mean * (1.0 + NOISE_LEVEL * standard_normal(&mut rng));
        target.push(noisy.max(0.0));
    }
    Dataset::new(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        features,
        target,
        TARGET_NAME,
    )
    .expect("generated data always satisfies the dataset invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = generate(500, 7);
        let b = generate(500, 7);
        assert_eq!(a, b);
        let c = generate(500, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn shapes_and_invariants_hold() {
        let d = generate(1000, 1);
        assert_eq!(d.n_rows(), 1000);
        assert_eq!(d.n_cols(), 6);
        assert!(d.is_complete());
        assert!(d.target().iter().all(|&t| t >= 0.0));
        assert_eq!(d.target_name(), TARGET_NAME);
    }

    #[test]
    fn targets_track_the_piecewise_means() {
        let d = generate(4000, 3);
        // With 10% relative noise, each target is within 60% of its plateau
        // essentially always (6 sigma).
        for i in 0..d.n_rows() {
            let mean = piecewise_mean(d.row(i));
            let y = d.target()[i];
            assert!(
                (y - mean).abs() <= 0.6 * mean,
                "row {i}: target {y} far from plateau {mean}"
            );
        }
    }

    #[test]
    fn rare_region_has_small_share() {
        let d = generate(50_000, 5);
        let rare = (0..d.n_rows())
            .filter(|&i| {
                let r = d.row(i);
                r[0] <= 0.46 && r[1] > 0.9 && r[2] > 0.8
            })
            .count();
        let share = rare as f64 / d.n_rows() as f64;
        // Expected 0.46 * 0.1 * 0.2 = 0.92%.
        assert!(share > 0.004 && share < 0.02, "rare-region share {share}");
    }
}
