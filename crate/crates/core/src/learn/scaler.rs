use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-feature z-score standardization with training statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler<T> {
    pub means: Vec<T>,
    /// Population standard deviations, all positive.
    pub stds: Vec<T>,
}

fn check_rows<T: Scalar>(rows: &[Vec<T>]) -> Result<usize> {
    let dim = rows.first().map(Vec::len).ok_or_else(|| Error::InsufficientSamples("no samples".into()))?;
    if let Some(r) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!("row of length {} in a {dim}-feature matrix", r.len())));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite feature value".into()));
    }
    Ok(dim)
}

pub fn fit_scaler<T: Scalar>(rows: &[Vec<T>]) -> Result<Scaler<T>> {
    let dim = check_rows(rows)?;
    if rows.len() < 2 {
        return Err(Error::InsufficientSamples(format!("{} sample(s); need at least 2", rows.len())));
    }
    let n = T::lit(rows.len() as f64);
    let mut means = vec![T::zero(); dim];
    let mut stds = vec![T::zero(); dim];
    for j in 0..dim {
        let mean = rows.iter().map(|r| r[j]).sum::<T>() / n;
        let var = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<T>() / n;
        let std = var.sqrt();
        // spread below rounding noise of the column is treated as constant
        if std <= T::epsilon() * (T::one() + mean.abs()) * T::lit(16.0) {
            return Err(Error::ZeroVariance { index: j });
        }
        means[j] = mean;
        stds[j] = std;
    }
    Ok(Scaler { means, stds })
}

impl<T: Scalar> Scaler<T> {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("{} features, scaler expects {}", x.len(), self.dim())));
        }
        Ok(x.iter().zip(self.means.iter().zip(&self.stds)).map(|(&v, (&m, &s))| (v - m) / s).collect())
    }

    pub fn apply_all(&self, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_column() {
        let s = fit_scaler(&[vec![2.0], vec![4.0]]).unwrap();
        assert_eq!((s.means[0], s.stds[0]), (3.0, 1.0));
        assert_eq!(s.apply(&[2.0]).unwrap(), vec![-1.0]);
        assert_eq!(s.apply(&[4.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn scaling_twice_is_not_identity() {
        let s = fit_scaler(&[vec![10.0], vec![30.0]]).unwrap();
        let once = s.apply(&[30.0]).unwrap();
        let twice = s.apply(&once).unwrap();
        assert_ne!(once, twice);
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_scaler::<f64>(&[]), Err(Error::InsufficientSamples(_))));
        assert!(matches!(fit_scaler(&[vec![1.0, 2.0]]), Err(Error::InsufficientSamples(_))));
        assert!(matches!(fit_scaler(&[vec![1.0, 5.0], vec![2.0, 5.0]]), Err(Error::ZeroVariance { index: 1 })));
        assert!(fit_scaler(&[vec![1.0], vec![2.0, 3.0]]).is_err());
        let s = fit_scaler(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(s.apply(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn random_matrix_is_standardized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> =
            (0..50).map(|_| (0..11).map(|j| rng.gen_range(-5.0..5.0) * (j + 1) as f64 + j as f64 * 3.0).collect()).collect();
        let s = fit_scaler(&rows).unwrap();
        let z = s.apply_all(&rows).unwrap();
        for j in 0..11 {
            let mean = z.iter().map(|r| r[j]).sum::<f64>() / 50.0;
            let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 50.0;
            assert!(mean.abs() < 1e-9);
            assert_abs_diff_eq!(var, 1.0, epsilon = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn standardized_columns(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40)) {
            if let Ok(s) = fit_scaler(&rows) {
                let z = s.apply_all(&rows).unwrap();
                let n = rows.len() as f64;
                for j in 0..3 {
                    let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
                    let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                    prop_assert!(mean.abs() < 1e-9);
                    prop_assert!((var - 1.0).abs() < 1e-6);
                }
            }
        }
    }
}
