use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AppConfig, KernelKind};
use crate::error::{Error, Result};
use crate::eval::manifest::DatasetManifest;
use crate::eval::metrics::{metrics, roc_auc, ConfusionCounts, Metrics, Stat};
use crate::eval::split::stratified_split;
use crate::features::{FEATURE_COUNT, FEATURE_NAMES};
use crate::learn::{smote_count, Classifier, Label};
use crate::pipeline::{analyze, PipelineConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Column ranges of the four feature groups, then all features.
pub fn feature_groups() -> Vec<(&'static str, Vec<usize>)> {
    vec![
        ("asymmetry", (0..8).collect()),
        ("border", vec![8]),
        ("color", vec![9]),
        ("diameter", vec![10]),
        ("all", (0..FEATURE_COUNT).collect()),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageFeatures {
    /// Row in the manifest, from 0.
    pub index: usize,
    pub image: String,
    pub label: Label,
    pub features: [f64; FEATURE_COUNT],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageFailure {
    pub index: usize,
    pub image: String,
    pub error: String,
}

/// Features of every image that made it through the pipeline, in
/// manifest order, plus the ones that did not.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub rows: Vec<ImageFeatures>,
    pub failures: Vec<ImageFailure>,
}

impl FeatureTable {
    pub fn x(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.features.to_vec()).collect()
    }

    pub fn y(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Path as written relative to the manifest, for stable reports.
pub(crate) fn display_path(manifest: &DatasetManifest, p: &Path) -> String {
    let base = manifest.path.parent().unwrap_or(Path::new(""));
    p.strip_prefix(base).unwrap_or(p).display().to_string()
}

/// Runs the pipeline on every image in parallel; results keep manifest order.
pub fn extract_all(manifest: &DatasetManifest, cfg: &PipelineConfig) -> FeatureTable {
    let results: Vec<_> = manifest
        .entries
        .par_iter()
        .map(|e| crate::imaging::load_image(&e.image).and_then(|img| analyze(&img, cfg)))
        .collect();
    let mut table = FeatureTable::default();
    for (index, (entry, r)) in manifest.entries.iter().zip(results).enumerate() {
        let image = display_path(manifest, &entry.image);
        match r {
            Ok(a) if a.report.features.is_finite() => {
                table.rows.push(ImageFeatures { index, image, label: entry.label, features: a.report.features.to_array() })
            }
            Ok(_) => table.failures.push(ImageFailure { index, image, error: "non-finite feature".into() }),
            Err(e) => table.failures.push(ImageFailure { index, image, error: e.to_string() }),
        }
    }
    table
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub kernel: KernelKind,
    pub c: f64,
    pub smote: bool,
    pub train_size: usize,
    /// Training rows after oversampling.
    pub train_size_balanced: usize,
    pub test_size: usize,
    /// Requested features left out because they are constant on the
    /// training set.
    pub dropped_features: Vec<String>,
    pub counts: Option<ConfusionCounts>,
    pub metrics: Option<Metrics>,
    pub auc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub kernel: KernelKind,
    pub c: f64,
    pub smote: bool,
    pub seeds_ok: usize,
    pub seeds_failed: usize,
    pub sensitivity: Option<Stat>,
    pub specificity: Option<Stat>,
    pub accuracy: Option<Stat>,
    pub precision: Option<Stat>,
    pub auc: Option<Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub group: String,
    pub features: Vec<String>,
    pub aggregate: AggregateRow,
    /// `(seed, message)` for every training or scoring failure.
    pub errors: Vec<(u64, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: AppConfig,
    pub n_images: usize,
    pub n_benign: usize,
    pub n_melanoma: usize,
    pub failures: Vec<ImageFailure>,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedRow>,
    pub aggregates: Vec<AggregateRow>,
    /// Best C per kernel and SMOTE setting, by mean AUC then accuracy.
    pub table: Vec<AggregateRow>,
    pub ablation: Vec<AblationRow>,
}

/// Wall-clock facts kept out of the report so the report stays reproducible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTiming {
    pub features_ms: f64,
    pub training_ms: f64,
}

/// Splits `columns` into those that vary over `rows` and those constant on
/// them. A constant column carries no information and cannot be scaled.
pub fn informative_columns(rows: &[&[f64; FEATURE_COUNT]], columns: &[usize]) -> (Vec<usize>, Vec<usize>) {
    columns.iter().partition(|&&k| {
        let first = rows.first().map(|r| r[k]);
        rows.iter().any(|r| Some(r[k]) != first)
    })
}

fn names(columns: &[usize]) -> Vec<String> {
    columns.iter().map(|&i| FEATURE_NAMES[i].to_string()).collect()
}

struct Task {
    kernel: KernelKind,
    c: f64,
    smote: bool,
    columns: Vec<usize>,
}

/// Trains on `train` and scores `test` for one configuration.
fn run_one(cfg: &AppConfig, table: &FeatureTable, train: &[usize], test: &[usize], seed: u64, task: &Task) -> SeedRow {
    let x: Vec<Vec<f64>> = train.iter().map(|&i| table.rows[i].features.to_vec()).collect();
    let y: Vec<Label> = train.iter().map(|&i| table.rows[i].label).collect();
    let pos = y.iter().filter(|l| l.is_positive()).count();
    let (minority, majority) = (pos.min(y.len() - pos), pos.max(y.len() - pos));
    let balanced = y.len() + if task.smote { smote_count(minority, majority, cfg.smote.target_ratio) } else { 0 };
    let mut row = SeedRow {
        seed,
        kernel: task.kernel,
        c: task.c,
        smote: task.smote,
        train_size: y.len(),
        train_size_balanced: balanced,
        test_size: test.len(),
        dropped_features: vec![],
        counts: None,
        metrics: None,
        auc: None,
        error: None,
    };
    let train_rows: Vec<&[f64; FEATURE_COUNT]> = train.iter().map(|&i| &table.rows[i].features).collect();
    let (columns, dropped) = informative_columns(&train_rows, &task.columns);
    row.dropped_features = names(&dropped);
    if columns.is_empty() {
        row.error = Some("every requested feature is constant on the training set".into());
        return row;
    }
    let params = cfg.svm.params_for(task.kernel, task.c, columns.len(), seed);
    let smote_cfg = cfg.smote.config(seed);
    let fitted = Classifier::fit(&x, &y, &columns, &FEATURE_NAMES, &params, task.smote.then_some(&smote_cfg));
    let scored = fitted.and_then(|model| {
        test.iter().map(|&i| model.decision(&table.rows[i].features)).collect::<Result<Vec<f64>>>()
    });
    match scored {
        Ok(scores) => {
            let truth: Vec<Label> = test.iter().map(|&i| table.rows[i].label).collect();
            let predicted: Vec<Label> = scores.iter().map(|&f| Label::from_decision(f)).collect();
            match ConfusionCounts::from_predictions(&truth, &predicted) {
                Ok(c) => {
                    row.metrics = Some(metrics(&c));
                    row.counts = Some(c);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row.auc = roc_auc(&scores, &truth).ok().map(|r| r.auc);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn aggregate(kernel: KernelKind, c: f64, smote: bool, rows: &[&SeedRow]) -> AggregateRow {
    let ok: Vec<&&SeedRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let pick = |f: fn(&Metrics) -> Option<f64>| Stat::of(ok.iter().filter_map(|r| r.metrics.as_ref().and_then(f)));
    AggregateRow {
        kernel,
        c,
        smote,
        seeds_ok: ok.len(),
        seeds_failed: rows.len() - ok.len(),
        sensitivity: pick(|m| m.sensitivity),
        specificity: pick(|m| m.specificity),
        accuracy: pick(|m| m.accuracy),
        precision: pick(|m| m.precision),
        auc: Stat::of(ok.iter().filter_map(|r| r.auc)),
    }
}

/// Selection key: mean AUC, then mean accuracy.
fn rank(a: &AggregateRow) -> (f64, f64) {
    let m = |s: Option<Stat>| s.map_or(f64::NEG_INFINITY, |s| s.mean);
    (m(a.auc), m(a.accuracy))
}

/// Splits the images that survived feature extraction `repeats` times and
/// trains every kernel, C and SMOTE combination on each split.
pub fn evaluate_table(cfg: &AppConfig, table: &FeatureTable) -> Result<ExperimentReport> {
    cfg.validate()?;
    let exp = &cfg.experiment;
    let labels = table.y();
    let seeds: Vec<u64> = (0..exp.repeats as u64).map(|i| exp.seed.wrapping_add(i)).collect();
    let splits = seeds.iter().map(|&s| stratified_split(&labels, exp.train_ratio, s)).collect::<Result<Vec<_>>>()?;
    let smote_modes: Vec<bool> = if exp.compare_smote { vec![true, false] } else { vec![cfg.smote.enabled] };

    let all: Vec<usize> = (0..FEATURE_COUNT).collect();
    let mut tasks = Vec::new();
    for &kernel in &exp.kernels {
        for &smote in &smote_modes {
            for &c in &exp.c_sweep {
                tasks.push(Task { kernel, c, smote, columns: all.clone() });
            }
        }
    }
    let per_seed: Vec<SeedRow> = seeds
        .par_iter()
        .zip(&splits)
        .flat_map_iter(|(&seed, split)| {
            tasks.iter().map(move |t| run_one(cfg, table, &split.train, &split.test, seed, t)).collect::<Vec<_>>()
        })
        .collect();

    let aggregates: Vec<AggregateRow> = tasks
        .iter()
        .map(|t| {
            let rows: Vec<&SeedRow> =
                per_seed.iter().filter(|r| r.kernel == t.kernel && r.c == t.c && r.smote == t.smote).collect();
            aggregate(t.kernel, t.c, t.smote, &rows)
        })
        .collect();

    // highest mean AUC, then accuracy; the first listed C wins exact ties
    let mut best: Vec<AggregateRow> = Vec::new();
    for &kernel in &exp.kernels {
        for &smote in &smote_modes {
            let pick = aggregates
                .iter()
                .filter(|a| a.kernel == kernel && a.smote == smote)
                .fold(None::<&AggregateRow>, |acc, a| match acc {
                    Some(b) if rank(b) >= rank(a) => Some(b),
                    _ => Some(a),
                });
            best.extend(pick.cloned());
        }
    }

    let mut ablation = Vec::new();
    if exp.ablation {
        let kernel = cfg.svm.kernel;
        let smote = cfg.smote.enabled;
        let c = best.iter().find(|a| a.kernel == kernel && a.smote == smote).map_or(cfg.svm.c, |a| a.c);
        for (name, columns) in feature_groups() {
            let task = Task { kernel, c, smote, columns: columns.clone() };
            let rows: Vec<SeedRow> = seeds
                .par_iter()
                .zip(&splits)
                .map(|(&seed, split)| run_one(cfg, table, &split.train, &split.test, seed, &task))
                .collect();
            let refs: Vec<&SeedRow> = rows.iter().collect();
            ablation.push(AblationRow {
                group: name.to_string(),
                features: names(&columns),
                aggregate: aggregate(kernel, c, smote, &refs),
                errors: rows.iter().filter_map(|r| r.error.clone().map(|e| (r.seed, e))).collect(),
            });
        }
    }

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        n_images: table.rows.len() + table.failures.len(),
        n_benign: labels.iter().filter(|l| !l.is_positive()).count(),
        n_melanoma: labels.iter().filter(|l| l.is_positive()).count(),
        failures: table.failures.clone(),
        seeds,
        per_seed,
        aggregates,
        table: best,
        ablation,
    })
}

/// Feature extraction for the whole manifest, then [`evaluate_table`].
pub fn run_experiment(manifest: &DatasetManifest, cfg: &AppConfig) -> Result<(ExperimentReport, ExperimentTiming)> {
    cfg.validate()?;
    let t = Instant::now();
    let table = extract_all(manifest, &cfg.pipeline());
    let features_ms = t.elapsed().as_secs_f64() * 1e3;
    if table.rows.is_empty() {
        return Err(Error::InsufficientSamples(format!("all {} images failed feature extraction", table.failures.len())));
    }
    let t = Instant::now();
    let report = evaluate_table(cfg, &table)?;
    Ok((report, ExperimentTiming { features_ms, training_ms: t.elapsed().as_secs_f64() * 1e3 }))
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    /// Flat CSV of the aggregate rows.
    pub fn aggregate_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidParameter(e.to_string());
        w.write_record([
            "kernel", "c", "smote", "seeds_ok", "sens_mean", "sens_std", "spec_mean", "spec_std", "acc_mean", "acc_std",
            "prec_mean", "prec_std", "auc_mean", "auc_std",
        ])
        .map_err(csv_err)?;
        let f = |s: Option<Stat>| s.map_or((String::new(), String::new()), |s| (s.mean.to_string(), s.std.to_string()));
        for a in &self.aggregates {
            let mut rec = vec![a.kernel.name().to_string(), a.c.to_string(), a.smote.to_string(), a.seeds_ok.to_string()];
            for s in [a.sensitivity, a.specificity, a.accuracy, a.precision, a.auc] {
                let (m, sd) = f(s);
                rec.extend([m, sd]);
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?)
            .map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    /// Human-readable summary: best-C rows per kernel with and without
    /// SMOTE, then the ablation rows.
    pub fn format_table(&self) -> String {
        let pct = |s: Option<Stat>| s.map_or("     n/a    ".to_string(), |s| format!("{:5.1} ± {:4.1}", 100.0 * s.mean, 100.0 * s.std));
        let auc = |s: Option<Stat>| s.map_or("    n/a     ".to_string(), |s| format!("{:.3} ± {:.3}", s.mean, s.std));
        let mut out = format!(
            "{} images ({} benign, {} melanoma), {} failed, {} splits\n\n",
            self.n_images,
            self.n_benign,
            self.n_melanoma,
            self.failures.len(),
            self.seeds.len()
        );
        out += &format!(
            "{:<8} {:<11} {:>5}  {:<13} {:<13} {:<13} {:<13} {:<13}\n",
            "SMOTE", "Kernel", "C", "Sensitivity", "Specificity", "Accuracy", "Precision", "AUC"
        );
        let mut rows: Vec<&AggregateRow> = self.table.iter().collect();
        rows.sort_by_key(|a| !a.smote);
        for a in rows {
            out += &format!(
                "{:<8} {:<11} {:>5}  {:<13} {:<13} {:<13} {:<13} {:<13}\n",
                if a.smote { "with" } else { "without" },
                a.kernel.name(),
                a.c,
                pct(a.sensitivity),
                pct(a.specificity),
                pct(a.accuracy),
                pct(a.precision),
                auc(a.auc)
            );
        }
        if !self.ablation.is_empty() {
            out += &format!("\n{:<11} {:<13} {:<13} {:<13} {:<13}\n", "Features", "Sensitivity", "Specificity", "Accuracy", "Precision");
            for r in &self.ablation {
                let a = &r.aggregate;
                out += &format!(
                    "{:<11} {:<13} {:<13} {:<13} {:<13}\n",
                    r.group,
                    pct(a.sensitivity),
                    pct(a.specificity),
                    pct(a.accuracy),
                    pct(a.precision)
                );
            }
        }
        out
    }
}

/// Training-set composition before and after oversampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub schema_version: u32,
    pub n_images: usize,
    pub failures: Vec<ImageFailure>,
    pub benign: usize,
    pub melanoma: usize,
    pub benign_after_smote: usize,
    pub melanoma_after_smote: usize,
    pub dropped_features: Vec<String>,
    pub kernel: KernelKind,
    pub c: f64,
    pub support_vectors: usize,
    pub converged: bool,
}

/// Fits the configured classifier on every row of `table`.
pub fn train_on_table(cfg: &AppConfig, table: &FeatureTable, seed: u64) -> Result<(Classifier<f64>, TrainReport)> {
    cfg.validate()?;
    let (x, y) = (table.x(), table.y());
    let melanoma = y.iter().filter(|l| l.is_positive()).count();
    let benign = y.len() - melanoma;
    if melanoma == 0 || benign == 0 {
        return Err(Error::SingleClass);
    }
    let extra = if cfg.smote.enabled { smote_count(melanoma.min(benign), melanoma.max(benign), cfg.smote.target_ratio) } else { 0 };
    let (benign_after, melanoma_after) = if melanoma <= benign { (benign, melanoma + extra) } else { (benign + extra, melanoma) };
    let rows: Vec<&[f64; FEATURE_COUNT]> = table.rows.iter().map(|r| &r.features).collect();
    let (columns, dropped) = informative_columns(&rows, &(0..FEATURE_COUNT).collect::<Vec<_>>());
    if columns.is_empty() {
        return Err(Error::ZeroVariance { index: 0 });
    }
    let params = cfg.svm.params(columns.len(), seed);
    let smote_cfg = cfg.smote.config(seed);
    let model = Classifier::fit(&x, &y, &columns, &FEATURE_NAMES, &params, cfg.smote.enabled.then_some(&smote_cfg))?;
    let report = TrainReport {
        schema_version: REPORT_SCHEMA_VERSION,
        n_images: table.rows.len() + table.failures.len(),
        failures: table.failures.clone(),
        benign,
        melanoma,
        benign_after_smote: benign_after,
        melanoma_after_smote: melanoma_after,
        dropped_features: names(&dropped),
        kernel: cfg.svm.kernel,
        c: cfg.svm.c,
        support_vectors: model.svm.support_vectors.len(),
        converged: model.svm.converged,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Melanoma rows are shifted on every feature group, most on colour.
    fn toy_table(n_benign: usize, n_mel: usize, seed: u64) -> FeatureTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n_benign + n_mel)
            .map(|index| {
                let label = if index < n_mel { Label::Melanoma } else { Label::Benign };
                let shift = if label.is_positive() { 1.0 } else { 0.0 };
                let mut f = [0.0; FEATURE_COUNT];
                for (k, v) in f.iter_mut().enumerate() {
                    let gain = if k == 9 { 2.5 } else { 0.6 };
                    *v = rng.gen_range(-1.0..1.0) + gain * shift;
                }
                ImageFeatures { index, image: format!("img{index}.png"), label, features: f }
            })
            .collect();
        FeatureTable { rows, failures: vec![] }
    }

    fn small_cfg() -> AppConfig {
        let mut cfg = AppConfig::default();
        cfg.experiment.repeats = 4;
        cfg.experiment.kernels = vec![KernelKind::Rbf, KernelKind::Linear];
        cfg
    }

    #[test]
    fn report_covers_every_configuration() {
        let cfg = small_cfg();
        let r = evaluate_table(&cfg, &toy_table(80, 20, 1)).unwrap();
        assert_eq!(r.per_seed.len(), 4 * 2 * 2 * 3);
        assert_eq!(r.aggregates.len(), 2 * 2 * 3);
        assert_eq!(r.table.len(), 4);
        assert_eq!(r.ablation.len(), 5);
        assert!(r.per_seed.iter().all(|s| s.error.is_none()));
        let best = r.table.iter().find(|a| a.kernel == KernelKind::Rbf && a.smote).unwrap();
        for a in r.aggregates.iter().filter(|a| a.kernel == KernelKind::Rbf && a.smote) {
            assert!(rank(best) >= rank(a));
        }
        assert!(best.auc.unwrap().mean > 0.8);
        assert!(r.format_table().contains("rbf"));
        assert_eq!(r.aggregate_csv().unwrap().lines().count(), 13);
    }

    #[test]
    fn smote_changes_only_the_training_set() {
        let r = evaluate_table(&small_cfg(), &toy_table(80, 20, 2)).unwrap();
        for seed in &r.seeds {
            let rows: Vec<&SeedRow> = r.per_seed.iter().filter(|s| s.seed == *seed).collect();
            let on = rows.iter().find(|s| s.smote).unwrap();
            let off = rows.iter().find(|s| !s.smote).unwrap();
            assert_eq!(on.test_size, off.test_size);
            assert_eq!(on.counts.unwrap().total(), off.counts.unwrap().total());
            assert_eq!(on.train_size, off.train_size);
            assert_eq!(on.train_size_balanced, 2 * 56);
            assert_eq!(off.train_size_balanced, 70);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = small_cfg();
        let t = toy_table(60, 15, 3);
        let a = evaluate_table(&cfg, &t).unwrap().to_json().unwrap();
        let b = evaluate_table(&cfg, &t).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn training_failures_are_recorded_not_fatal() {
        let mut t = toy_table(40, 10, 4);
        for r in &mut t.rows {
            r.features[10] = 3.0;
        }
        let r = evaluate_table(&small_cfg(), &t).unwrap();
        let diam = r.ablation.iter().find(|a| a.group == "diameter").unwrap();
        assert_eq!(diam.errors.len(), 4);
        assert_eq!(diam.aggregate.seeds_ok, 0);
        let all = r.ablation.iter().find(|a| a.group == "all").unwrap();
        assert!(all.errors.is_empty());
        assert!(r.per_seed.iter().all(|s| s.dropped_features == ["diameter_mm"]));
    }

    #[test]
    fn train_on_table_reports_balance() {
        let (model, rep) = train_on_table(&AppConfig::default(), &toy_table(50, 10, 5), 0).unwrap();
        assert_eq!((rep.benign, rep.melanoma), (50, 10));
        assert_eq!((rep.benign_after_smote, rep.melanoma_after_smote), (50, 50));
        assert_eq!(model.feature_indices.len(), FEATURE_COUNT);
        assert!(rep.dropped_features.is_empty());
        let single = FeatureTable { rows: toy_table(10, 0, 1).rows, failures: vec![] };
        assert!(matches!(train_on_table(&AppConfig::default(), &single, 0), Err(Error::SingleClass)));
    }
}
