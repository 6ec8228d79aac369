use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{fit_scaler, smote, svm_train, Label, Scaler, SmoteConfig, SvmModel, SvmParams};
use crate::scalar::Scalar;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Scaler plus SVM over a chosen subset of feature columns; this is what a
/// model file holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classifier<T> {
    pub schema_version: u32,
    /// Columns of the full feature vector fed to the model, in order.
    pub feature_indices: Vec<usize>,
    pub feature_names: Vec<String>,
    pub scaler: Scaler<T>,
    pub svm: SvmModel<T>,
}

fn select<T: Scalar>(x: &[T], idx: &[usize]) -> Result<Vec<T>> {
    idx.iter()
        .map(|&i| {
            x.get(i)
                .copied()
                .ok_or_else(|| Error::DimensionMismatch(format!("feature {i} missing from a {}-vector", x.len())))
        })
        .collect()
}

impl<T: Scalar> Classifier<T> {
    /// Fits the scaler on `x`, optionally balances the scaled training set
    /// with SMOTE, then trains the SVM.
    pub fn fit(
        x: &[Vec<T>],
        y: &[Label],
        feature_indices: &[usize],
        feature_names: &[&str],
        params: &SvmParams,
        smote_cfg: Option<&SmoteConfig>,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!("{} samples, {} labels", x.len(), y.len())));
        }
        let picked: Vec<Vec<T>> = x.iter().map(|r| select(r, feature_indices)).collect::<Result<_>>()?;
        let scaler = fit_scaler(&picked)?;
        let mut xs = scaler.apply_all(&picked)?;
        let mut ys = y.to_vec();
        if let Some(cfg) = smote_cfg {
            let pos: Vec<Vec<T>> = xs.iter().zip(y).filter(|(_, l)| l.is_positive()).map(|(r, _)| r.clone()).collect();
            let neg = y.len() - pos.len();
            let (minority, label, majority) =
                if pos.len() <= neg { (pos, Label::Melanoma, neg) } else { (negatives(&xs, y), Label::Benign, y.len() - neg) };
            let extra = smote(&minority, majority, cfg)?;
            ys.extend(std::iter::repeat_n(label, extra.len()));
            xs.extend(extra);
        }
        let svm = svm_train(&xs, &ys, params)?;
        Ok(Self {
            schema_version: MODEL_SCHEMA_VERSION,
            feature_indices: feature_indices.to_vec(),
            feature_names: feature_indices
                .iter()
                .map(|&i| feature_names.get(i).map_or_else(|| format!("f{i}"), |s| s.to_string()))
                .collect(),
            scaler,
            svm,
        })
    }

    /// Decision value for a full (unscaled) feature vector.
    pub fn decision(&self, full: &[T]) -> Result<T> {
        let x = self.scaler.apply(&select(full, &self.feature_indices)?)?;
        self.svm.decision(&x)
    }

    pub fn predict(&self, full: &[T]) -> Result<Label> {
        self.decision(full).map(|f| Label::from_decision(f.to_f64_lossy()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Model(format!(
                "schema version {} (this build reads {MODEL_SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        let dim = m.feature_indices.len();
        if m.scaler.dim() != dim || m.svm.dim().is_some_and(|d| d != dim) || m.svm.dual_coefs.len() != m.svm.support_vectors.len()
        {
            return Err(Error::Model("inconsistent dimensions".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

fn negatives<T: Scalar>(xs: &[Vec<T>], y: &[Label]) -> Vec<Vec<T>> {
    xs.iter().zip(y).filter(|(_, l)| !l.is_positive()).map(|(r, _)| r.clone()).collect()
}
