use serde::{Deserialize, Serialize};

use crate::config::AppConfig;
use crate::error::Result;
use crate::eval::experiment::{display_path, train_on_table, FeatureTable, ImageFailure, ImageFeatures, REPORT_SCHEMA_VERSION};
use crate::eval::manifest::DatasetManifest;
use crate::eval::metrics::Stat;
use crate::imaging::{load_image, RgbImage};
use crate::learn::{Classifier, Label};
use crate::pipeline::{analyze, classify, StageTimes};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageTiming {
    pub index: usize,
    pub image: String,
    pub label: Label,
    pub width: usize,
    pub height: usize,
    pub iterations: usize,
    pub converged: bool,
    /// One entry per timed repetition.
    pub runs: Vec<StageTimes>,
}

/// Per-stage statistics over every timed run in a group, in ms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub group: String,
    pub n_images: usize,
    pub preprocess: Option<Stat>,
    pub segment: Option<Stat>,
    pub features: Option<Stat>,
    pub classify: Option<Stat>,
    pub total: Option<Stat>,
    pub iterations: Option<Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub repetitions: usize,
    pub warmup: usize,
    /// `given`, `trained` on the benchmark images, or `none`.
    pub model: String,
    pub images: Vec<ImageTiming>,
    pub failures: Vec<ImageFailure>,
    pub groups: Vec<StageTimings>,
}

fn timings(group: &str, images: &[&ImageTiming]) -> StageTimings {
    let runs = || images.iter().flat_map(|i| i.runs.iter());
    StageTimings {
        group: group.to_string(),
        n_images: images.len(),
        preprocess: Stat::of(runs().map(|t| t.preprocess_ms)),
        segment: Stat::of(runs().map(|t| t.segment_ms)),
        features: Stat::of(runs().map(|t| t.features_ms)),
        classify: Stat::of(runs().map(|t| t.classify_ms)),
        total: Stat::of(runs().map(|t| t.total_ms())),
        iterations: Stat::of(images.iter().map(|i| i.iterations as f64)),
    }
}

/// Times every stage on each image of `manifest` in the calling thread:
/// `warmup` discarded runs, then `repetitions` timed ones. Without a model
/// one is trained on the warm-up features so classification is timed too.
pub fn bench(manifest: &DatasetManifest, cfg: &AppConfig, model: Option<&Classifier<f64>>) -> Result<BenchReport> {
    cfg.validate()?;
    let pcfg = cfg.pipeline();
    let limit = cfg.bench.max_images.unwrap_or(usize::MAX);
    let mut loaded: Vec<(usize, RgbImage)> = Vec::new();
    let mut failures = Vec::new();
    let mut table = FeatureTable::default();

    for (index, entry) in manifest.entries.iter().enumerate().take(limit) {
        let image = display_path(manifest, &entry.image);
        let warm = if model.is_none() { cfg.bench.warmup.max(1) } else { cfg.bench.warmup };
        let outcome = load_image(&entry.image).and_then(|img| {
            let mut last = None;
            for _ in 0..warm {
                last = Some(analyze(&img, &pcfg)?);
            }
            Ok((img, last))
        });
        match outcome {
            Ok((img, last)) => {
                if let Some(a) = last {
                    table.rows.push(ImageFeatures { index, image, label: entry.label, features: a.report.features.to_array() });
                }
                loaded.push((index, img));
            }
            Err(e) => failures.push(ImageFailure { index, image, error: e.to_string() }),
        }
    }

    let trained;
    let (model, source) = match model {
        Some(m) => (Some(m), "given"),
        None => match train_on_table(cfg, &table, cfg.experiment.seed) {
            Ok((m, _)) => {
                trained = m;
                (Some(&trained), "trained")
            }
            Err(_) => (None, "none"),
        },
    };

    let mut images = Vec::new();
    for (index, img) in loaded {
        let entry = &manifest.entries[index];
        let mut runs = Vec::with_capacity(cfg.bench.repetitions);
        let mut last = None;
        let mut failed = None;
        for _ in 0..cfg.bench.repetitions {
            let outcome = analyze(&img, &pcfg).and_then(|mut a| {
                if let Some(m) = model {
                    classify(&mut a, m)?;
                }
                Ok(a)
            });
            match outcome {
                Ok(a) => {
                    runs.push(a.times);
                    last = Some(a);
                }
                Err(e) => {
                    failed = Some(e.to_string());
                    break;
                }
            }
        }
        let image = display_path(manifest, &entry.image);
        match (failed, last) {
            (None, Some(a)) => images.push(ImageTiming {
                index,
                image,
                label: entry.label,
                width: a.image.width(),
                height: a.image.height(),
                iterations: a.segmentation.iterations_used,
                converged: a.segmentation.converged,
                runs,
            }),
            (Some(error), _) => failures.push(ImageFailure { index, image, error }),
            (None, None) => {}
        }
    }
    failures.sort_by_key(|f| f.index);

    let group = |l: Label| images.iter().filter(|i| i.label == l).collect::<Vec<_>>();
    let groups = vec![
        timings("benign", &group(Label::Benign)),
        timings("melanoma", &group(Label::Melanoma)),
        timings("all", &images.iter().collect::<Vec<_>>()),
    ];
    Ok(BenchReport {
        schema_version: REPORT_SCHEMA_VERSION,
        repetitions: cfg.bench.repetitions,
        warmup: cfg.bench.warmup,
        model: source.to_string(),
        images,
        failures,
        groups,
    })
}

impl BenchReport {
    pub fn format_table(&self) -> String {
        let ms = |s: &Option<Stat>| s.map_or("     n/a      ".into(), |s| format!("{:7.1} ± {:5.1}", s.mean, s.std));
        let mut out = format!(
            "{:<9} {:>6}  {:<15} {:<15} {:<15} {:<15} {:<15} {:<15}\n",
            "Group", "Images", "Preprocess ms", "Segment ms", "Features ms", "Classify ms", "Total ms", "Iterations"
        );
        for g in &self.groups {
            out += &format!(
                "{:<9} {:>6}  {:<15} {:<15} {:<15} {:<15} {:<15} {:<15}\n",
                g.group,
                g.n_images,
                ms(&g.preprocess),
                ms(&g.segment),
                ms(&g.features),
                ms(&g.classify),
                ms(&g.total),
                ms(&g.iterations)
            );
        }
        out
    }
}
