use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use molescan::config::{AppConfig, DEFAULT_CONFIG};
use molescan::eval::{self, bench, load_manifest, run_experiment, train_on_table, write_manifest};
use molescan::features::{MirrorAxis, FEATURE_NAMES};
use molescan::imaging::{load_image, save_png};
use molescan::learn::Label;
use molescan::overlay::{color_overlay, mask_image, snapshot_overlay, xor_map, SnapshotRecorder, SNAPSHOTS};
use molescan::pipeline::{analyze, analyze_with, classify, StageTimes};
use molescan::synth::write_synth_dataset;
use molescan::Model;

#[derive(Parser)]
#[command(name = "molescan", version, about = "Dermoscopic lesion screening")]
struct Cli {
    /// Config file; defaults to $MOLESCAN_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config value, e.g. `--set svm.c=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Base seed for splits, SMOTE and the solver.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for reports and images.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for feature extraction and training.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one image; exits 0 for benign, 2 for melanoma.
    Classify {
        image: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Segment one image and write its mask.
    Segment {
        image: PathBuf,
        /// Also draw the curve at iterations 50, 100, 200 and 400.
        #[arg(long)]
        snapshots: bool,
    },
    /// Extract the feature vector and write the intermediate renderings.
    Features { image: PathBuf },
    /// Train a model on every image of a manifest.
    Train {
        manifest: PathBuf,
        /// Model path; defaults to `<out-dir>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Repeated stratified splits over kernels, C and SMOTE, plus ablation.
    Eval { manifest: PathBuf },
    /// Per-stage timings on the images of a manifest.
    Bench {
        manifest: PathBuf,
        /// Model used for the classification stage; one is trained when absent.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Convert a PH2 directory into a manifest CSV.
    MakeManifest {
        ph2_dir: PathBuf,
        #[arg(long, default_value = "ph2_manifest.csv")]
        output: PathBuf,
    },
    /// Print the default configuration.
    DefaultConfig,
    /// Write a synthetic labelled dataset with ground-truth masks.
    Synth {
        dir: PathBuf,
        #[arg(long, default_value_t = 16)]
        benign: usize,
        #[arg(long, default_value_t = 4)]
        melanoma: usize,
        #[arg(long, default_value_t = 384)]
        width: usize,
        #[arg(long, default_value_t = 280)]
        height: usize,
    },
}

struct Ctx {
    cfg: AppConfig,
    seed: u64,
    out_dir: PathBuf,
}

impl Ctx {
    fn out(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        Ok(self.out_dir.join(name))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned())
}

/// Run facts that change between invocations; kept apart from reports.
#[derive(Serialize)]
struct Metadata {
    command: &'static str,
    started_unix_ms: u128,
    elapsed_ms: f64,
    threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage_times: Option<StageTimes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment: Option<eval::ExperimentTiming>,
}

fn metadata(command: &'static str, started: SystemTime, clock: Instant) -> Metadata {
    Metadata {
        command,
        started_unix_ms: started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis()),
        elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        threads: rayon::current_num_threads(),
        stage_times: None,
        experiment: None,
    }
}

#[derive(Serialize)]
struct FeatureOutput<'a> {
    schema_version: u32,
    image: String,
    features: Vec<(&'a str, f64)>,
    color_classes: Vec<&'a str>,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    #[serde(flatten)]
    features: FeatureOutput<'a>,
    verdict: Label,
    decision: f64,
}

const OUTPUT_SCHEMA_VERSION: u32 = 1;

fn feature_output<'a>(image: &Path, a: &'a molescan::pipeline::Analysis) -> FeatureOutput<'a> {
    FeatureOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        image: image.display().to_string(),
        features: FEATURE_NAMES.iter().copied().zip(a.report.features.to_array()).collect(),
        color_classes: a.report.regions.iter().map(|r| r.color_class.name()).collect(),
        iterations: a.segmentation.iterations_used,
        converged: a.segmentation.converged,
    }
}

fn print_features(a: &molescan::pipeline::Analysis) {
    for (name, v) in FEATURE_NAMES.iter().zip(a.report.features.to_array()) {
        println!("  {name:<14} {v:>10.4}");
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    let mut cfg = AppConfig::load(cli.config.as_deref(), &cli.set)?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    let seed = cfg.experiment.seed;
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| cfg.output.out_dir.clone());
    let ctx = Ctx { cfg, seed, out_dir };
    let (started, clock) = (SystemTime::now(), Instant::now());

    match cli.command {
        Command::Classify { image, model } => {
            let model = Model::load(&model)?;
            let img = load_image(&image)?;
            let mut a = analyze(&img, &ctx.cfg.pipeline())?;
            let v = classify(&mut a, &model)?;
            println!("{}: {} (decision {:+.4})", image.display(), v.label, v.decision);
            print_features(&a);
            let out = ClassifyOutput { features: feature_output(&image, &a), verdict: v.label, decision: v.decision };
            let path = ctx.out(&format!("{}_classify.json", stem(&image)))?;
            write_json(&path, &out)?;
            let mut meta = metadata("classify", started, clock);
            meta.stage_times = Some(a.times);
            write_json(&ctx.out(&format!("{}_classify.metadata.json", stem(&image)))?, &meta)?;
            Ok(ExitCode::from(if v.label.is_positive() { 2 } else { 0 }))
        }
        Command::Segment { image, snapshots } => {
            let img = load_image(&image)?;
            let mut rec = SnapshotRecorder::default();
            let a = analyze_with(&img, &ctx.cfg.pipeline(), |it, grid| {
                if snapshots {
                    rec.observe(it, grid)
                }
            })?;
            let s = stem(&image);
            let mask_path = ctx.out(&format!("{s}_mask.png"))?;
            save_png(&mask_image(&a.segmentation.mask), &mask_path)?;
            println!(
                "{}: {} px lesion after {} evolutions{}",
                image.display(),
                a.segmentation.mask.count(),
                a.segmentation.iterations_used,
                if a.segmentation.converged { " (converged)" } else { "" }
            );
            println!("  mask      {}", mask_path.display());
            if snapshots {
                let path = ctx.out(&format!("{s}_snapshots.png"))?;
                save_png(&snapshot_overlay(&a.image, &rec.finish(&a.segmentation.mask)), &path)?;
                println!("  snapshots {}", path.display());
                if a.segmentation.iterations_used < SNAPSHOTS[SNAPSHOTS.len() - 1].0 {
                    println!("  snapshots past iteration {} repeat the final curve", a.segmentation.iterations_used);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Features { image } => {
            let img = load_image(&image)?;
            let a = analyze(&img, &ctx.cfg.pipeline())?;
            let s = stem(&image);
            write_json(&ctx.out(&format!("{s}_features.json"))?, &feature_output(&image, &a))?;
            save_png(&mask_image(&a.report.aligned_mask), ctx.out(&format!("{s}_aligned_mask.png"))?)?;
            save_png(&xor_map(&a.report.aligned_mask, MirrorAxis::Vertical)?, ctx.out(&format!("{s}_xor_h.png"))?)?;
            save_png(&xor_map(&a.report.aligned_mask, MirrorAxis::Horizontal)?, ctx.out(&format!("{s}_xor_v.png"))?)?;
            save_png(&color_overlay(&a.report, &ctx.cfg.features.color_table)?, ctx.out(&format!("{s}_colors.png"))?)?;
            println!("{}:", image.display());
            print_features(&a);
            println!("  outputs in {}", ctx.out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Train { manifest, model } => {
            let m = load_manifest(&manifest)?;
            m.require_both_classes()?;
            let table = eval::extract_all(&m, &ctx.cfg.pipeline());
            let (clf, report) = train_on_table(&ctx.cfg, &table, ctx.seed)?;
            let model_path = match model {
                Some(p) => p,
                None => ctx.out("model.json")?,
            };
            clf.save(&model_path)?;
            write_json(&ctx.out("train_report.json")?, &report)?;
            println!(
                "trained {} on {} images ({} failed)",
                report.kernel.name(),
                table.rows.len(),
                report.failures.len()
            );
            println!("  before SMOTE: {} benign, {} melanoma", report.benign, report.melanoma);
            println!("  after SMOTE:  {} benign, {} melanoma", report.benign_after_smote, report.melanoma_after_smote);
            if !report.dropped_features.is_empty() {
                println!("  constant features left out: {}", report.dropped_features.join(", "));
            }
            println!("  model {}", model_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { manifest } => {
            let m = load_manifest(&manifest)?;
            m.require_both_classes()?;
            let (report, timing) = run_experiment(&m, &ctx.cfg)?;
            let path = ctx.out("report.json")?;
            fs::write(&path, report.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))?;
            fs::write(ctx.out("aggregate.csv")?, report.aggregate_csv()?)?;
            let mut meta = metadata("eval", started, clock);
            meta.experiment = Some(timing);
            write_json(&ctx.out("report.metadata.json")?, &meta)?;
            print!("{}", report.format_table());
            for f in &report.failures {
                println!("failed: {} ({})", f.image, f.error);
            }
            println!("report {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { manifest, model } => {
            let m = load_manifest(&manifest)?;
            let model = model.map(|p| Model::load(&p)).transpose()?;
            // one image at a time on this thread, for stable timings
            let report = bench(&m, &ctx.cfg, model.as_ref())?;
            write_json(&ctx.out("bench.json")?, &report)?;
            print!("{}", report.format_table());
            for f in &report.failures {
                println!("failed: {} ({})", f.image, f.error);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::MakeManifest { ph2_dir, output } => {
            let dir = output.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let rows = eval::ph2_manifest_rows(&ph2_dir, dir)?;
            write_manifest(&output, &rows)?;
            println!("{} rows written to {}", rows.len(), output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::DefaultConfig => {
            print!("{DEFAULT_CONFIG}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { dir, benign, melanoma, width, height } => {
            if benign + melanoma == 0 {
                bail!("nothing to generate");
            }
            let p = write_synth_dataset(&dir, benign, melanoma, width, height, ctx.seed)?;
            println!("{} lesions, manifest {}", benign + melanoma, p.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
