//! Dataset manifests, stratified splits, metrics, the repeated-split
//! experiment with ablation, and per-stage timing.

mod bench;
mod experiment;
mod manifest;
mod metrics;
mod ph2;
mod split;

pub use bench::{bench, BenchReport, ImageTiming, StageTimings};
pub use experiment::{
    evaluate_table, extract_all, feature_groups, informative_columns, run_experiment, train_on_table, AblationRow, AggregateRow,
    ExperimentReport, ExperimentTiming, FeatureTable, ImageFailure, ImageFeatures, SeedRow, TrainReport,
    REPORT_SCHEMA_VERSION,
};
pub use manifest::{load_manifest, load_mask, mask_from_image, write_manifest, DatasetManifest, ManifestEntry, ManifestRow};
pub use metrics::{dice, metrics, roc_auc, ConfusionCounts, Metrics, RocCurve, Stat};
pub use ph2::{ph2_manifest_rows, PH2_TABLE};
pub use split::{class_train_count, stratified_split, Split};
