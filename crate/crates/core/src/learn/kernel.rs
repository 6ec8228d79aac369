use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { gamma: f64, degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } | KernelSpec::Polynomial { gamma, .. } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::InvalidParameter(format!("kernel gamma {gamma} must be positive")))
            }
            KernelSpec::Polynomial { degree: 0, .. } => Err(Error::InvalidParameter("polynomial degree must be >= 1".into())),
            KernelSpec::Polynomial { coef0, .. } if !coef0.is_finite() => {
                Err(Error::InvalidParameter("polynomial coef0 must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Polynomial { .. } => "polynomial",
        }
    }

    /// Unchecked evaluation; callers guarantee equal lengths.
    pub(crate) fn eval<T: Scalar>(&self, u: &[T], v: &[T]) -> T {
        let dot = || u.iter().zip(v).map(|(&a, &b)| a * b).sum::<T>();
        match *self {
            KernelSpec::Linear => dot(),
            KernelSpec::Rbf { gamma } => {
                let d2: T = u.iter().zip(v).map(|(&a, &b)| (a - b) * (a - b)).sum();
                (-T::lit(gamma) * d2).exp()
            }
            KernelSpec::Polynomial { gamma, degree, coef0 } => {
                (T::lit(gamma) * dot() + T::lit(coef0)).powi(degree as i32)
            }
        }
    }
}

/// `1 / (n_features * variance of all entries)`; `1 / n_features` for
/// standardized data.
pub fn auto_gamma<T: Scalar>(rows: &[Vec<T>]) -> f64 {
    let n = rows.iter().map(Vec::len).sum::<usize>();
    let dim = rows.first().map_or(1, Vec::len).max(1);
    if n == 0 {
        return 1.0 / dim as f64;
    }
    let mean = rows.iter().flatten().map(|v| v.to_f64_lossy()).sum::<f64>() / n as f64;
    let var = rows.iter().flatten().map(|v| (v.to_f64_lossy() - mean).powi(2)).sum::<f64>() / n as f64;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0 / dim as f64
    }
}

pub fn kernel_eval<T: Scalar>(spec: &KernelSpec, u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!("kernel inputs of length {} and {}", u.len(), v.len())));
    }
    spec.validate()?;
    Ok(spec.eval(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let rbf = KernelSpec::Rbf { gamma: 0.5 };
        assert_abs_diff_eq!(kernel_eval(&rbf, &[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.36787944117144233, epsilon = 1e-15);
        assert_eq!(kernel_eval(&KernelSpec::Linear, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let poly = KernelSpec::Polynomial { gamma: 0.5, degree: 3, coef0: 1.0 };
        // (0.5 * 4 + 1)^3
        assert_abs_diff_eq!(kernel_eval(&poly, &[1.0, 1.0], &[2.0, 2.0]).unwrap(), 27.0, epsilon = 1e-12);
        assert!(kernel_eval(&rbf, &[1.0], &[1.0, 2.0]).is_err());
        assert!(kernel_eval(&KernelSpec::Rbf { gamma: 0.0 }, &[1.0], &[1.0]).is_err());
        assert!(KernelSpec::Polynomial { gamma: 1.0, degree: 0, coef0: 0.0 }.validate().is_err());
    }

    #[test]
    fn serde_shape() {
        let k: KernelSpec = serde_json::from_str(r#"{"kind":"polynomial","gamma":0.1,"degree":3,"coef0":0.0}"#).unwrap();
        assert_eq!(k, KernelSpec::Polynomial { gamma: 0.1, degree: 3, coef0: 0.0 });
        assert_eq!(serde_json::to_string(&KernelSpec::Linear).unwrap(), r#"{"kind":"linear"}"#);
    }

    #[test]
    fn auto_gamma_of_standardized_data() {
        let rows = vec![vec![1.0, -1.0, 1.0], vec![-1.0, 1.0, -1.0]];
        assert_abs_diff_eq!(auto_gamma(&rows), 1.0 / 3.0, epsilon = 1e-12);
    }

    /// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
    fn min_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i][j].powi(2)).sum();
            if off < 1e-22 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn jacobi_oracle_sanity() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert_abs_diff_eq!(min_eigenvalue(m), 1.0, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn rbf_self_similarity(u in prop::collection::vec(-10.0f64..10.0, 1..12), g in 0.01f64..5.0) {
            prop_assert_eq!(kernel_eval(&KernelSpec::Rbf { gamma: g }, &u, &u).unwrap(), 1.0);
        }

        #[test]
        fn rbf_gram_is_psd(pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 2..9), g in 0.05f64..3.0) {
            let k = KernelSpec::Rbf { gamma: g };
            let gram: Vec<Vec<f64>> = pts.iter().map(|a| pts.iter().map(|b| kernel_eval(&k, a, b).unwrap()).collect()).collect();
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    prop_assert_eq!(gram[i][j], gram[j][i]);
                }
            }
            prop_assert!(min_eigenvalue(gram) >= -1e-8);
        }
    }
}
