use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{KernelSpec, Label};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    /// Largest KKT violation accepted at termination.
    pub tol: f64,
    /// Iteration budget in units of the training-set size.
    pub max_passes: usize,
    /// Orders the working-set scan, which settles ties between equally
    /// violating pairs.
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, kernel: KernelSpec::Rbf { gamma: 1.0 / 11.0 }, tol: 1e-3, max_passes: 1000, seed: 0 }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C = {} must be positive", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidParameter("max_passes must be at least 1".into()));
        }
        self.kernel.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel<T> {
    pub support_vectors: Vec<Vec<T>>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coefs: Vec<T>,
    pub bias: T,
    pub kernel: KernelSpec,
    pub c_param: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Largest KKT violation at termination.
    pub kkt_gap: f64,
}

/// Full dual solution, before support vectors are extracted.
#[derive(Clone, Debug)]
pub struct DualSolution<T> {
    pub alpha: Vec<T>,
    pub bias: T,
    pub converged: bool,
    pub iterations: usize,
    pub kkt_gap: f64,
}

const SV_THRESHOLD: f64 = 1e-8;
const TAU: f64 = 1e-12;

/// `sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective<T: Scalar>(x: &[Vec<T>], y: &[Label], alpha: &[T], kernel: &KernelSpec) -> f64 {
    let n = x.len();
    let mut quad = 0.0;
    for i in 0..n {
        let ai = alpha[i].to_f64_lossy() * y[i].sign() as f64;
        if ai == 0.0 {
            continue;
        }
        for j in 0..n {
            let aj = alpha[j].to_f64_lossy() * y[j].sign() as f64;
            quad += ai * aj * kernel.eval(&x[i], &x[j]).to_f64_lossy();
        }
    }
    alpha.iter().map(|a| a.to_f64_lossy()).sum::<f64>() - 0.5 * quad
}

fn check_training_set<T: Scalar>(x: &[Vec<T>], y: &[Label]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} samples, {} labels", x.len(), y.len())));
    }
    let dim = x.first().map(Vec::len).ok_or_else(|| Error::InsufficientSamples("no training samples".into()))?;
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch("training rows differ in length".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite training value".into()));
    }
    if !(y.contains(&Label::Melanoma) && y.contains(&Label::Benign)) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// SMO on the soft-margin dual: each step optimizes the maximal violating
/// pair analytically under `0 <= alpha <= C`, `sum alpha_i y_i = 0`.
pub fn solve_dual<T: Scalar>(x: &[Vec<T>], y: &[Label], params: &SvmParams) -> Result<DualSolution<T>> {
    params.validate()?;
    check_training_set(x, y)?;
    let n = x.len();
    let c = T::lit(params.c);
    let ys: Vec<T> = y.iter().map(|l| T::lit(l.sign() as f64)).collect();
    let k: Vec<T> = (0..n * n).map(|p| params.kernel.eval(&x[p / n], &x[p % n])).collect();
    let kk = |i: usize, j: usize| k[i * n + j];

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));

    let mut alpha = vec![T::zero(); n];
    // gradient of the minimized form 1/2 a'Qa - e'a; -y_t * grad_t is the
    // margin residual y_t - sum_j alpha_j y_j K_tj
    let mut grad = vec![-T::one(); n];
    let in_up = |a: T, yt: T| (yt > T::zero() && a < c) || (yt < T::zero() && a > T::zero());
    let in_low = |a: T, yt: T| (yt > T::zero() && a > T::zero()) || (yt < T::zero() && a < c);

    let budget = params.max_passes.saturating_mul(n).max(1);
    let mut iterations = 0usize;
    let (mut converged, mut gap);
    loop {
        let (mut i, mut gmax) = (usize::MAX, T::neg_infinity());
        let (mut j, mut gmin) = (usize::MAX, T::infinity());
        for &t in &order {
            let v = -ys[t] * grad[t];
            if in_up(alpha[t], ys[t]) && v > gmax {
                (i, gmax) = (t, v);
            }
            if in_low(alpha[t], ys[t]) && v < gmin {
                (j, gmin) = (t, v);
            }
        }
        gap = (gmax - gmin).to_f64_lossy();
        converged = i == usize::MAX || j == usize::MAX || gap <= params.tol;
        if converged || iterations >= budget {
            break;
        }
        iterations += 1;

        // move along y_i d_i = -y_j d_j: alpha_i += y_i s, alpha_j -= y_j s
        let eta = (kk(i, i) + kk(j, j) - T::lit(2.0) * kk(i, j)).max(T::lit(TAU));
        let mut s = (gmax - gmin) / eta;
        let room_i = if ys[i] > T::zero() { c - alpha[i] } else { alpha[i] };
        let room_j = if ys[j] > T::zero() { alpha[j] } else { c - alpha[j] };
        s = s.min(room_i).min(room_j);
        let (di, dj) = (ys[i] * s, -ys[j] * s);

        #[cfg(debug_assertions)]
        let before = {
            let qij = ys[i] * ys[j] * kk(i, j);
            grad[i] * di + grad[j] * dj + T::lit(0.5) * (kk(i, i) * di * di + kk(j, j) * dj * dj) + qij * di * dj
        };
        #[cfg(debug_assertions)]
        debug_assert!(before.to_f64_lossy() <= 1e-9 * (1.0 + s.to_f64_lossy().abs()), "dual objective decreased");

        alpha[i] = (alpha[i] + di).max(T::zero()).min(c);
        alpha[j] = (alpha[j] + dj).max(T::zero()).min(c);
        for t in 0..n {
            grad[t] = grad[t] + ys[t] * (ys[i] * di * kk(i, t) + ys[j] * dj * kk(j, t));
        }
    }

    // bias: mean residual over free vectors, else the middle of the
    // feasible interval
    let eps = T::lit(SV_THRESHOLD);
    let free: Vec<T> =
        (0..n).filter(|&t| alpha[t] > eps && alpha[t] < c - eps).map(|t| -ys[t] * grad[t]).collect();
    let bias = if free.is_empty() {
        let up = (0..n).filter(|&t| in_up(alpha[t], ys[t])).map(|t| -ys[t] * grad[t]).fold(T::neg_infinity(), T::max);
        let low = (0..n).filter(|&t| in_low(alpha[t], ys[t])).map(|t| -ys[t] * grad[t]).fold(T::infinity(), T::min);
        match (up.is_finite(), low.is_finite()) {
            (true, true) => (up + low) * T::lit(0.5),
            (true, false) => up,
            (false, true) => low,
            (false, false) => T::zero(),
        }
    } else {
        free.iter().copied().sum::<T>() / T::lit(free.len() as f64)
    };
    Ok(DualSolution { alpha, bias, converged, iterations, kkt_gap: gap.max(0.0) })
}

pub fn svm_train<T: Scalar>(x: &[Vec<T>], y: &[Label], params: &SvmParams) -> Result<SvmModel<T>> {
    let sol = solve_dual(x, y, params)?;
    let eps = T::lit(SV_THRESHOLD);
    let keep: Vec<usize> = (0..x.len()).filter(|&i| sol.alpha[i] > eps).collect();
    Ok(SvmModel {
        support_vectors: keep.iter().map(|&i| x[i].clone()).collect(),
        dual_coefs: keep.iter().map(|&i| sol.alpha[i] * T::lit(y[i].sign() as f64)).collect(),
        bias: sol.bias,
        kernel: params.kernel,
        c_param: params.c,
        converged: sol.converged,
        iterations: sol.iterations,
        kkt_gap: sol.kkt_gap,
    })
}

impl<T: Scalar> SvmModel<T> {
    pub fn dim(&self) -> Option<usize> {
        self.support_vectors.first().map(Vec::len)
    }

    /// `sum coef_i K(sv_i, x) + b`; `x` must be scaled like the training set.
    pub fn decision(&self, x: &[T]) -> Result<T> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::DimensionMismatch(format!("{} features, model expects {d}", x.len())));
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, &a)| a * self.kernel.eval(sv, x))
            .sum::<T>()
            + self.bias)
    }

    pub fn predict(&self, x: &[T]) -> Result<Label> {
        self.decision(x).map(|f| Label::from_decision(f.to_f64_lossy()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn labels(s: &[i8]) -> Vec<Label> {
        s.iter().map(|&v| if v > 0 { Label::Melanoma } else { Label::Benign }).collect()
    }

    fn linear(c: f64) -> SvmParams {
        SvmParams { c, kernel: KernelSpec::Linear, tol: 1e-6, ..SvmParams::default() }
    }

    /// Dense projected-gradient ascent on the dual. The equality constraint
    /// is handled by projecting onto {y'a = 0} intersected with the box via
    /// bisection on the multiplier.
    fn qp_oracle(x: &[Vec<f64>], y: &[Label], c: f64, kernel: &KernelSpec) -> f64 {
        let n = x.len();
        let ys: Vec<f64> = y.iter().map(|l| l.sign() as f64).collect();
        let q: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| ys[i] * ys[j] * kernel.eval(&x[i], &x[j])).collect()).collect();
        let lmax = (0..n).map(|i| q[i].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max).max(1e-9);
        let step = 1.0 / lmax;
        let project = |v: &[f64]| -> Vec<f64> {
            let at = |mu: f64| -> (Vec<f64>, f64) {
                let a: Vec<f64> = v.iter().zip(&ys).map(|(&vi, &yi)| (vi - mu * yi).clamp(0.0, c)).collect();
                let s = a.iter().zip(&ys).map(|(ai, yi)| ai * yi).sum();
                (a, s)
            };
            let (mut lo, mut hi) = (-1e6, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if at(mid).1 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            at(0.5 * (lo + hi)).0
        };
        let mut a = vec![0.0; n];
        for _ in 0..200_000 {
            let g: Vec<f64> = (0..n).map(|i| 1.0 - q[i].iter().zip(&a).map(|(qij, aj)| qij * aj).sum::<f64>()).collect();
            let next = project(&a.iter().zip(&g).map(|(ai, gi)| ai + step * gi).collect::<Vec<_>>());
            let moved = next.iter().zip(&a).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            a = next;
            if moved < 1e-13 {
                break;
            }
        }
        dual_objective(x, y, &a, kernel)
    }

    #[test]
    fn symmetric_pair() {
        let x = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        let m = svm_train(&x, &labels(&[-1, 1]), &linear(1e3)).unwrap();
        assert!(m.converged);
        assert_abs_diff_eq!(m.bias, 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(m.decision(&[-1.0, 0.0]).unwrap(), -1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(m.decision(&[1.0, 0.0]).unwrap(), 1.0, epsilon = 1e-3);
        // w = (1, 0)
        assert_abs_diff_eq!(m.decision(&[3.0, 0.0]).unwrap(), 3.0, epsilon = 1e-3);
        assert_abs_diff_eq!(m.decision(&[0.0, 7.0]).unwrap(), 0.0, epsilon = 1e-3);
        assert_eq!(m.predict(&[0.0, 7.0]).unwrap(), Label::Melanoma);
    }

    #[test]
    fn xor_needs_a_nonlinear_kernel() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = labels(&[-1, -1, 1, 1]);
        let acc = |m: &SvmModel<f64>| {
            x.iter().zip(&y).filter(|(xi, yi)| m.predict(xi).unwrap() == **yi).count() as f64 / 4.0
        };
        let lin = svm_train(&x, &y, &linear(10.0)).unwrap();
        assert!(acc(&lin) <= 0.75);
        let rbf = svm_train(&x, &y, &SvmParams { c: 10.0, kernel: KernelSpec::Rbf { gamma: 1.0 }, ..SvmParams::default() }).unwrap();
        assert_eq!(acc(&rbf), 1.0);
    }

    #[test]
    fn single_class_and_bad_params() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(svm_train(&x, &labels(&[1, 1]), &linear(1.0)), Err(Error::SingleClass)));
        assert!(svm_train(&x, &labels(&[1, -1]), &linear(0.0)).is_err());
        assert!(svm_train(&x, &labels(&[1]), &linear(1.0)).is_err());
        let m = svm_train(&x, &labels(&[1, -1]), &linear(1.0)).unwrap();
        assert!(m.decision(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let y: Vec<Label> = x.iter().map(|p| if p[0] * p[1] > 0.0 { Label::Melanoma } else { Label::Benign }).collect();
        let p = SvmParams { c: 100.0, kernel: KernelSpec::Rbf { gamma: 2.0 }, tol: 1e-9, max_passes: 1, seed: 0 };
        let m = svm_train(&x, &y, &p).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 40);
        let ok = svm_train(&x, &y, &SvmParams { max_passes: 10_000, tol: 1e-6, ..p }).unwrap();
        assert!(ok.converged && ok.kkt_gap <= 1e-6);
    }

    #[test]
    fn free_vectors_sit_on_the_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let y: Vec<Label> =
            x.iter().map(|p| if p[0] + 0.5 * p[1] + rng.gen_range(-0.3..0.3) > 0.0 { Label::Melanoma } else { Label::Benign }).collect();
        let p = SvmParams { c: 2.0, kernel: KernelSpec::Rbf { gamma: 0.5 }, tol: 1e-4, ..SvmParams::default() };
        let sol = solve_dual(&x, &y, &p).unwrap();
        let m = svm_train(&x, &y, &p).unwrap();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 1e-6 && a < p.c - 1e-6 {
                let f = m.decision(&x[i]).unwrap();
                assert!((f - y[i].sign() as f64).abs() <= 2.0 * p.tol, "{f}");
            }
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<Vec<f64>> = (0..50).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<Label> = x.iter().map(|p| if p[0] - p[2] > 0.1 { Label::Melanoma } else { Label::Benign }).collect();
        let p = SvmParams { seed: 4, ..SvmParams::default() };
        let a = svm_train(&x, &y, &p).unwrap();
        let b = svm_train(&x, &y, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn permuted_training_order_rarely_changes_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let gen = |rng: &mut ChaCha8Rng, n: usize| -> (Vec<Vec<f64>>, Vec<Label>) {
            let x: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let y = x
                .iter()
                .map(|p| if p[0] * p[0] + p[1] - p[2] > 0.5 { Label::Melanoma } else { Label::Benign })
                .collect();
            (x, y)
        };
        let (x, y) = gen(&mut rng, 120);
        let (test, _) = gen(&mut rng, 400);
        let p = SvmParams { c: 1.0, kernel: KernelSpec::Rbf { gamma: 0.25 }, tol: 1e-3, ..SvmParams::default() };
        let base = svm_train(&x, &y, &p).unwrap();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.shuffle(&mut rng);
        let px: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
        let py: Vec<Label> = idx.iter().map(|&i| y[i]).collect();
        let perm = svm_train(&px, &py, &p).unwrap();
        let changed = test.iter().filter(|t| base.predict(t).unwrap() != perm.predict(t).unwrap()).count();
        assert!(changed as f64 <= 0.01 * test.len() as f64, "{changed} changed");
    }

    #[test]
    fn f32_training_works() {
        let x: Vec<Vec<f32>> = vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![-2.0, 1.0], vec![2.0, -1.0]];
        let m = svm_train(&x, &labels(&[-1, 1, -1, 1]), &SvmParams { kernel: KernelSpec::Linear, c: 10.0, ..SvmParams::default() }).unwrap();
        assert!(m.decision(&[3.0, 0.0]).unwrap() > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn matches_the_dense_qp_oracle(
            n in 4usize..=12,
            seed in any::<u64>(),
            c in prop::sample::select(vec![0.1, 1.0, 10.0]),
            kind in 0usize..3,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect()).collect();
            let mut y: Vec<Label> = (0..n).map(|_| if rng.gen_bool(0.5) { Label::Melanoma } else { Label::Benign }).collect();
            y[0] = Label::Melanoma;
            y[1] = Label::Benign;
            let kernel = match kind {
                0 => KernelSpec::Linear,
                1 => KernelSpec::Rbf { gamma: 0.7 },
                _ => KernelSpec::Polynomial { gamma: 0.5, degree: 3, coef0: 1.0 },
            };
            let p = SvmParams { c, kernel, tol: 1e-6, max_passes: 100_000, seed };
            let sol = solve_dual(&x, &y, &p).unwrap();
            prop_assert!(sol.converged);
            for &a in &sol.alpha {
                prop_assert!((0.0..=c).contains(&a));
            }
            let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, l)| a * l.sign() as f64).sum();
            prop_assert!(balance.abs() <= 1e-6);
            let ours = dual_objective(&x, &y, &sol.alpha, &kernel);
            let oracle = qp_oracle(&x, &y, c, &kernel);
            prop_assert!((ours - oracle).abs() <= 1e-3, "smo {ours} vs oracle {oracle}");
        }
    }
}
