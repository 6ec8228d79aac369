use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::Label;
use crate::segmentation::BinaryMask;

/// Melanoma is the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch(format!("{} labels, {} predictions", truth.len(), predicted.len())));
        }
        let mut c = Self::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t.is_positive(), p.is_positive()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Rates; `None` where the denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> Metrics {
    Metrics {
        sensitivity: ratio(c.tp, c.tp + c.fn_),
        specificity: ratio(c.tn, c.tn + c.fp),
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision: ratio(c.tp, c.tp + c.fp),
    }
}

/// `(fpr, tpr)` from (0, 0) to (1, 1), one step per distinct score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Sweeps the threshold down through the distinct scores; equal scores
/// move in one step, so ties contribute a diagonal segment.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!("{} scores, {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("scores must be finite".into()));
    }
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = vec![(0.0, 0.0)];
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        auc += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(RocCurve { points, auc: auc / (pos * neg) as f64 })
}

/// `2|a ∩ b| / (|a| + |b|)`; two empty masks agree perfectly.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let inter = a.bits().iter().zip(b.bits()).filter(|(p, q)| **p && **q).count();
    let sum = a.count() + b.count();
    Ok(if sum == 0 { 1.0 } else { 2.0 * inter as f64 / sum as f64 })
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Some(Self { mean, std: var.sqrt(), n: v.len() })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Mann-Whitney U / (n+ n-), ties counted half.
    pub(crate) fn mann_whitney_auc(scores: &[f64], labels: &[Label]) -> f64 {
        let (mut u, mut pairs) = (0.0, 0.0);
        for (i, li) in labels.iter().enumerate() {
            for (j, lj) in labels.iter().enumerate() {
                if li.is_positive() && !lj.is_positive() {
                    pairs += 1.0;
                    u += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
        }
        u / pairs
    }

    #[test]
    fn table_arithmetic() {
        let m = metrics(&ConfusionCounts { tp: 8, fn_: 2, tn: 18, fp: 2 });
        assert_eq!(m.sensitivity, Some(0.8));
        assert_eq!(m.specificity, Some(0.9));
        assert!((m.accuracy.unwrap() - 26.0 / 30.0).abs() < 1e-15);
        assert_eq!(m.precision, Some(0.8));
        let all = metrics(&ConfusionCounts { tp: 5, fn_: 0, tn: 7, fp: 0 });
        assert_eq!([all.sensitivity, all.specificity, all.accuracy, all.precision], [Some(1.0); 4]);
        let none = metrics(&ConfusionCounts { tp: 0, fn_: 0, tn: 3, fp: 1 });
        assert_eq!(none.sensitivity, None);
        assert_eq!(none.precision, Some(0.0));
    }

    #[test]
    fn counts_from_predictions() {
        use Label::*;
        let c = ConfusionCounts::from_predictions(&[Melanoma, Melanoma, Benign, Benign], &[Melanoma, Benign, Melanoma, Benign]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fn_: 1, fp: 1, tn: 1 });
        assert_eq!(c.total(), 4);
    }

    #[test]
    fn auc_extremes() {
        use Label::*;
        let labels = [Melanoma, Melanoma, Benign, Benign];
        let r = roc_auc(&[3.0, 2.0, 1.0, 0.0], &labels).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
        assert_eq!(roc_auc(&[0.0, 1.0, 2.0, 3.0], &labels).unwrap().auc, 0.0);
        assert_eq!(roc_auc(&[1.0; 4], &labels).unwrap().auc, 0.5);
        assert!(matches!(roc_auc(&[1.0, 2.0], &[Benign, Benign]), Err(Error::SingleClass)));
    }

    #[test]
    fn auc_under_the_null_is_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scores: Vec<f64> = (0..1000).map(|_| rng.gen()).collect();
        let labels: Vec<Label> = (0..1000).map(|_| if rng.gen_bool(0.3) { Label::Melanoma } else { Label::Benign }).collect();
        let auc = roc_auc(&scores, &labels).unwrap().auc;
        assert!((0.45..=0.55).contains(&auc), "{auc}");
    }

    #[test]
    fn dice_cases() {
        let sq = |x0: usize| BinaryMask::from_fn(40, 20, move |x, y| (x0..x0 + 10).contains(&x) && (5..15).contains(&y));
        assert_eq!(dice(&sq(5), &sq(5)).unwrap(), 1.0);
        assert_eq!(dice(&sq(5), &sq(25)).unwrap(), 0.0);
        assert_eq!(dice(&sq(5), &sq(10)).unwrap(), 0.5);
        assert_eq!(dice(&BinaryMask::new(4, 4), &BinaryMask::new(4, 4)).unwrap(), 1.0);
        assert!(dice(&BinaryMask::new(4, 4), &BinaryMask::new(4, 5)).is_err());
    }

    #[test]
    fn stat_is_population() {
        let s = Stat::of([1.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.std, s.n), (2.0, 1.0, 2));
        assert!(Stat::of([]).is_none());
    }

    proptest! {
        #[test]
        fn auc_matches_mann_whitney(
            raw in prop::collection::vec((0u8..12, any::<bool>()), 2..80)
        ) {
            let mut raw = raw;
            raw[0].1 = true;
            raw[1].1 = false;
            let scores: Vec<f64> = raw.iter().map(|(s, _)| *s as f64 * 0.25).collect();
            let labels: Vec<Label> = raw.iter().map(|(_, p)| if *p { Label::Melanoma } else { Label::Benign }).collect();
            let r = roc_auc(&scores, &labels).unwrap();
            prop_assert!((r.auc - mann_whitney_auc(&scores, &labels)).abs() <= 1e-9);
            prop_assert!(r.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
            prop_assert_eq!(*r.points.last().unwrap(), (1.0, 1.0));
        }
    }
}
