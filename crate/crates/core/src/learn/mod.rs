//! Standardization, SMOTE oversampling and soft-margin SVM training.

mod classifier;
mod kernel;
mod label;
mod scaler;
mod smote;
mod svm;

pub use classifier::{Classifier, MODEL_SCHEMA_VERSION};
pub use kernel::{auto_gamma, kernel_eval, KernelSpec};
pub use label::Label;
pub use scaler::{fit_scaler, Scaler};
pub use smote::{smote, smote_count, SmoteConfig};
pub use svm::{dual_objective, solve_dual, svm_train, DualSolution, SvmModel, SvmParams};
