use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Minority size after oversampling over majority size; capped at 1.
    pub target_ratio: f64,
    pub rng_seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { k_neighbors: 5, target_ratio: 1.0, rng_seed: 0 }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidParameter("k_neighbors must be at least 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!("target_ratio {} must be positive", self.target_ratio)));
        }
        Ok(())
    }
}

/// Number of synthetic points needed to bring `minority` up to
/// `min(target_ratio, 1) * majority`.
pub fn smote_count(minority: usize, majority: usize, target_ratio: f64) -> usize {
    let target = (target_ratio.min(1.0) * majority as f64).round() as usize;
    target.saturating_sub(minority)
}

fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest other points, ties broken by index.
fn neighbours<T: Scalar>(points: &[Vec<T>], i: usize, k: usize) -> Vec<usize> {
    let mut order: Vec<(T, usize)> =
        (0..points.len()).filter(|&j| j != i).map(|j| (dist2(&points[i], &points[j]), j)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    order.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Synthetic minority samples interpolated towards random near neighbours.
/// Base points cycle through the minority in order, so every sample seeds
/// the same number of synthetics (give or take one).
pub fn smote<T: Scalar>(minority: &[Vec<T>], majority: usize, cfg: &SmoteConfig) -> Result<Vec<Vec<T>>> {
    cfg.validate()?;
    let count = smote_count(minority.len(), majority, cfg.target_ratio);
    if count == 0 {
        return Ok(Vec::new());
    }
    if minority.len() <= cfg.k_neighbors {
        return Err(Error::InsufficientSamples(format!(
            "{} minority samples for k = {}",
            minority.len(),
            cfg.k_neighbors
        )));
    }
    let dim = minority[0].len();
    if minority.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch("minority rows differ in length".into()));
    }
    let table: Vec<Vec<usize>> = (0..minority.len()).map(|i| neighbours(minority, i, cfg.k_neighbors)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    Ok((0..count)
        .map(|s| {
            let i = s % minority.len();
            let j = table[i][rng.gen_range(0..cfg.k_neighbors)];
            let u = T::lit(rng.gen::<f64>());
            minority[i].iter().zip(&minority[j]).map(|(&x, &n)| x + u * (n - x)).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{convex_hull, Point2};
    use proptest::prelude::*;

    #[test]
    fn two_points_give_a_point_on_the_segment() {
        let m: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![4.0, 2.0]];
        let cfg = SmoteConfig { k_neighbors: 1, target_ratio: 1.0, rng_seed: 3 };
        let s = smote(&m, 3, &cfg).unwrap();
        assert_eq!(s.len(), 1);
        let p = &s[0];
        assert!((p[1] - p[0] / 2.0).abs() < 1e-12 && (0.0..=4.0).contains(&p[0]));
    }

    #[test]
    fn parity_counts() {
        // 40 melanoma / 160 benign, 70:30 stratified -> 28 / 112 training samples
        assert_eq!(smote_count(28, 112, 1.0), 84);
        assert_eq!(smote_count(28, 112, 2.0), 84);
        assert_eq!(smote_count(28, 112, 0.5), 28);
        assert_eq!(smote_count(120, 112, 1.0), 0);
        let m: Vec<Vec<f64>> = (0..28).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let s = smote(&m, 112, &SmoteConfig::default()).unwrap();
        assert_eq!(m.len() + s.len(), 112);
    }

    #[test]
    fn too_few_minority_samples() {
        let m = vec![vec![0.0], vec![1.0]];
        assert!(matches!(smote(&m, 10, &SmoteConfig::default()), Err(Error::InsufficientSamples(_))));
        assert!(smote(&m, 2, &SmoteConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn seeded_output_is_bit_identical() {
        let m: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos()]).collect();
        let cfg = SmoteConfig { rng_seed: 99, ..SmoteConfig::default() };
        let a = smote(&m, 40, &cfg).unwrap();
        let b = smote(&m, 40, &cfg).unwrap();
        assert_eq!(a.len(), 28);
        assert!(a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = smote(&m, 40, &SmoteConfig { rng_seed: 100, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn synthetics_stay_in_the_minority_hull(
            raw in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 7..20),
            seed in any::<u64>(),
        ) {
            let m: Vec<Vec<f64>> = raw.iter().map(|&(x, y)| vec![x, y]).collect();
            let s = smote(&m, 3 * m.len(), &SmoteConfig { rng_seed: seed, ..SmoteConfig::default() }).unwrap();
            prop_assert_eq!(s.len(), 2 * m.len());
            let hull = convex_hull(&raw.iter().map(|&(x, y)| Point2::new(x, y)).collect::<Vec<_>>());
            prop_assume!(hull.len() >= 3);
            for p in &s {
                for i in 0..hull.len() {
                    let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                    let cross = (b.x - a.x) * (p[1] - a.y) - (b.y - a.y) * (p[0] - a.x);
                    prop_assert!(cross >= -1e-7, "{p:?} outside hull");
                }
            }
        }
    }
}
