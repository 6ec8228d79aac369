//! Application configuration: one TOML file, `--set key=value` overrides,
//! and validation errors that point at the offending line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ColorClass, FeatureConfig, Interval};
use crate::imaging::MIN_IMAGE_SIDE;
use crate::learn::{KernelSpec, SmoteConfig, SvmParams};
use crate::pipeline::{PipelineConfig, PreprocessConfig};
use crate::segmentation::SegmentationParams;

/// Environment variable naming the config file used when none is given.
pub const CONFIG_ENV: &str = "MOLESCAN_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Rbf,
    Polynomial,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Rbf => "rbf",
            KernelKind::Polynomial => "polynomial",
        }
    }
}

/// Kernel width: `"auto"` or a positive number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSetting {
    Value(f64),
    Named(AutoGamma),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoGamma {
    Auto,
}

impl GammaSetting {
    /// Auto resolves to 1 / (dim * variance); z-scored inputs have unit
    /// variance, so this is 1 / dim.
    pub fn resolve(self, dim: usize) -> f64 {
        match self {
            GammaSetting::Value(g) => g,
            GammaSetting::Named(AutoGamma::Auto) => 1.0 / dim.max(1) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    pub kernel: KernelKind,
    pub c: f64,
    pub gamma: GammaSetting,
    pub degree: u32,
    pub coef0: f64,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Rbf,
            c: 1.0,
            gamma: GammaSetting::Named(AutoGamma::Auto),
            degree: 3,
            coef0: 0.0,
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

impl SvmConfig {
    pub fn kernel_spec(&self, kind: KernelKind, dim: usize) -> KernelSpec {
        let gamma = self.gamma.resolve(dim);
        match kind {
            KernelKind::Linear => KernelSpec::Linear,
            KernelKind::Rbf => KernelSpec::Rbf { gamma },
            KernelKind::Polynomial => KernelSpec::Polynomial { gamma, degree: self.degree, coef0: self.coef0 },
        }
    }

    /// Solver parameters for `kind` and `c` on `dim` input columns.
    pub fn params_for(&self, kind: KernelKind, c: f64, dim: usize, seed: u64) -> SvmParams {
        SvmParams { c, kernel: self.kernel_spec(kind, dim), tol: self.tol, max_passes: self.max_passes, seed }
    }

    pub fn params(&self, dim: usize, seed: u64) -> SvmParams {
        self.params_for(self.kernel, self.c, dim, seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoteSection {
    pub enabled: bool,
    pub k_neighbors: usize,
    pub target_ratio: f64,
}

impl Default for SmoteSection {
    fn default() -> Self {
        let d = SmoteConfig::default();
        Self { enabled: true, k_neighbors: d.k_neighbors, target_ratio: d.target_ratio }
    }
}

impl SmoteSection {
    pub fn config(&self, seed: u64) -> SmoteConfig {
        SmoteConfig { k_neighbors: self.k_neighbors, target_ratio: self.target_ratio, rng_seed: seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// First split seed; repeat `i` uses `seed + i`.
    pub seed: u64,
    pub repeats: usize,
    pub train_ratio: f64,
    pub c_sweep: Vec<f64>,
    pub kernels: Vec<KernelKind>,
    /// Also train every configuration without SMOTE.
    pub compare_smote: bool,
    /// Train on each feature group alone, then on all features.
    pub ablation: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            repeats: 20,
            train_ratio: 0.7,
            c_sweep: vec![0.1, 1.0, 10.0],
            kernels: vec![KernelKind::Linear, KernelKind::Rbf, KernelKind::Polynomial],
            compare_smote: true,
            ablation: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub repetitions: usize,
    pub warmup: usize,
    /// Cap on images timed; absent means the whole manifest.
    pub max_images: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { repetitions: 5, warmup: 1, max_images: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub out_dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    pub preprocess: PreprocessConfig,
    pub segmentation: SegmentationParams<f64>,
    pub features: FeatureConfig,
    pub svm: SvmConfig,
    pub smote: SmoteSection,
    pub experiment: ExperimentConfig,
    pub bench: BenchConfig,
    pub output: OutputConfig,
}

/// The shipped default configuration. Parses to `AppConfig::default()`.
pub const DEFAULT_CONFIG: &str = r#"# molescan configuration.
# [fixed]   value belongs to the method; change only to experiment.
# [tunable] value was chosen for this implementation; adjust freely.

[preprocess]
kernel_size = 5            # [fixed] Gaussian window
sigma = 1.0                # [fixed] Gaussian sigma, pixels
# resize_long_edge = 768   # [tunable] resample camera captures; off by default

[segmentation]
lambda1 = 2                # [fixed] interior fidelity weight
lambda2 = 1                # [fixed] exterior fidelity weight
channel_weights = [1.0, 1.0, 1.0]  # [tunable] Y', U, V weights in the speed field
n_a = 40                   # [fixed] data-cycle passes per evolution
n_s = 2                    # [fixed] smoothing-cycle passes per evolution
max_evolutions = 400       # [fixed] evolution budget
init_fraction = 0.65       # [fixed] initial ellipse size relative to the frame
smooth_kernel_size = 5     # [fixed] smoothing-cycle Gaussian window
smooth_kernel_sigma = 1.0  # [fixed] smoothing-cycle Gaussian sigma

[features]
min_fraction = 0.01        # [tunable] smallest colour region, fraction of lesion area
gamma_mm_per_px = 0.02     # [tunable] pixel pitch; calibrate from a scale bar of known length

# [tunable] HSV boxes: hue in degrees, saturation and value in [0, 1].
# Intervals are closed unless open_hi = true. Overlaps resolve as
# black > blue_gray > dark_brown > light_brown > red > white.
[features.color_table.white]
hue = []
saturation = { lo = 0.0, hi = 0.2 }
value = { lo = 0.8, hi = 1.0 }

[features.color_table.red]
hue = [{ lo = 0.0, hi = 10.0 }, { lo = 350.0, hi = 360.0, open_hi = true }]
saturation = { lo = 0.4, hi = 1.0 }
value = { lo = 0.4, hi = 1.0 }

[features.color_table.light_brown]
hue = [{ lo = 20.0, hi = 40.0 }]
saturation = { lo = 0.2, hi = 0.6 }
value = { lo = 0.5, hi = 1.0 }

[features.color_table.dark_brown]
hue = [{ lo = 10.0, hi = 30.0 }]
saturation = { lo = 0.3, hi = 1.0 }
value = { lo = 0.15, hi = 0.5, open_hi = true }

[features.color_table.blue_gray]
hue = [{ lo = 180.0, hi = 260.0 }]
saturation = { lo = 0.1, hi = 1.0 }
value = { lo = 0.2, hi = 0.8 }

[features.color_table.black]
hue = []
saturation = { lo = 0.0, hi = 1.0 }
value = { lo = 0.0, hi = 0.15, open_hi = true }

[svm]
kernel = "rbf"             # [tunable] linear | rbf | polynomial
c = 1.0                    # [tunable] box constraint
gamma = "auto"             # [tunable] "auto" = 1 / (features * variance), or a number
degree = 3                 # [fixed] polynomial degree
coef0 = 0.0                # [tunable] polynomial offset
tol = 0.001                # [tunable] KKT tolerance
max_passes = 1000          # [tunable] iteration budget per training sample

[smote]
enabled = true             # [fixed] oversample the minority class
k_neighbors = 5            # [tunable]
target_ratio = 1.0         # [tunable] minority / majority after oversampling

[experiment]
seed = 0                   # [tunable] first split seed; repeat i uses seed + i
repeats = 20               # [tunable] stratified splits averaged
train_ratio = 0.7          # [fixed] train share of each class
c_sweep = [0.1, 1.0, 10.0] # [tunable] best C: mean AUC, then accuracy
kernels = ["linear", "rbf", "polynomial"]
compare_smote = true       # [tunable] also train without SMOTE
ablation = true            # [tunable] per-feature-group runs

[bench]
repetitions = 5            # [tunable] timed runs per image
warmup = 1                 # [tunable] discarded runs per image
# max_images = 20          # [tunable] cap on images timed

[output]
out_dir = "out"            # [tunable]
"#;

/// One failed constraint: dotted key and reason.
struct Issue {
    key: String,
    message: String,
}

fn issue(out: &mut Vec<Issue>, ok: bool, key: &str, message: impl Into<String>) {
    if !ok {
        out.push(Issue { key: key.to_string(), message: message.into() });
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl AppConfig {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            preprocess: self.preprocess.clone(),
            segmentation: self.segmentation.clone(),
            features: self.features.clone(),
        }
    }

    fn issues(&self) -> Vec<Issue> {
        let mut v = Vec::new();
        let p = &self.preprocess;
        issue(&mut v, p.kernel_size % 2 == 1 && p.kernel_size >= 3, "preprocess.kernel_size", "must be odd and >= 3");
        issue(&mut v, positive(p.sigma), "preprocess.sigma", "must be positive");
        issue(
            &mut v,
            p.resize_long_edge.is_none_or(|e| e >= MIN_IMAGE_SIDE),
            "preprocess.resize_long_edge",
            format!("must be at least {MIN_IMAGE_SIDE}"),
        );

        let s = &self.segmentation;
        issue(&mut v, s.lambda1 >= 1, "segmentation.lambda1", "must be >= 1");
        issue(&mut v, s.lambda2 >= 1, "segmentation.lambda2", "must be >= 1");
        issue(
            &mut v,
            s.channel_weights.iter().all(|w| *w >= 0.0 && w.is_finite()) && s.channel_weights.iter().any(|w| *w > 0.0),
            "segmentation.channel_weights",
            "must be nonnegative with at least one positive weight",
        );
        issue(&mut v, s.n_a >= 1, "segmentation.n_a", "must be >= 1");
        issue(&mut v, s.max_evolutions >= 1, "segmentation.max_evolutions", "must be >= 1");
        issue(&mut v, s.init_fraction > 0.0 && s.init_fraction <= 1.0, "segmentation.init_fraction", "must be in (0, 1]");
        issue(
            &mut v,
            s.smooth_kernel_size % 2 == 1 && s.smooth_kernel_size >= 3,
            "segmentation.smooth_kernel_size",
            "must be odd and >= 3",
        );
        issue(&mut v, positive(s.smooth_kernel_sigma), "segmentation.smooth_kernel_sigma", "must be positive");
        if let Err(e) = s.validate() {
            if v.iter().all(|i| !i.key.starts_with("segmentation.")) {
                issue(&mut v, false, "segmentation", e.to_string());
            }
        }

        let f = &self.features;
        issue(&mut v, (0.0..1.0).contains(&f.min_fraction), "features.min_fraction", "must be in [0, 1)");
        issue(&mut v, positive(f.gamma_mm_per_px), "features.gamma_mm_per_px", "must be positive");
        for c in ColorClass::ALL {
            let r = f.color_table.rule(c);
            let bad = |i: &Interval, max: f64| {
                !(i.lo.is_finite() && i.hi.is_finite() && i.lo <= i.hi && i.lo >= 0.0 && i.hi <= max)
            };
            let key = format!("features.color_table.{}", c.name());
            issue(&mut v, !r.hue.iter().any(|i| bad(i, 360.0)), &format!("{key}.hue"), "intervals must lie in [0, 360]");
            issue(&mut v, !bad(&r.saturation, 1.0), &format!("{key}.saturation"), "interval must lie in [0, 1]");
            issue(&mut v, !bad(&r.value, 1.0), &format!("{key}.value"), "interval must lie in [0, 1]");
        }

        let m = &self.svm;
        issue(&mut v, positive(m.c), "svm.c", "must be positive");
        issue(
            &mut v,
            match m.gamma {
                GammaSetting::Value(g) => positive(g),
                GammaSetting::Named(_) => true,
            },
            "svm.gamma",
            "must be \"auto\" or positive",
        );
        issue(&mut v, m.degree >= 1, "svm.degree", "must be >= 1");
        issue(&mut v, m.coef0.is_finite(), "svm.coef0", "must be finite");
        issue(&mut v, positive(m.tol), "svm.tol", "must be positive");
        issue(&mut v, m.max_passes >= 1, "svm.max_passes", "must be >= 1");

        issue(&mut v, self.smote.k_neighbors >= 1, "smote.k_neighbors", "must be >= 1");
        issue(&mut v, positive(self.smote.target_ratio), "smote.target_ratio", "must be positive");

        let e = &self.experiment;
        issue(&mut v, e.repeats >= 1, "experiment.repeats", "must be >= 1");
        issue(&mut v, e.train_ratio > 0.0 && e.train_ratio < 1.0, "experiment.train_ratio", "must be in (0, 1)");
        issue(
            &mut v,
            !e.c_sweep.is_empty() && e.c_sweep.iter().all(|c| positive(*c)),
            "experiment.c_sweep",
            "must be a nonempty list of positive values",
        );
        issue(&mut v, !e.kernels.is_empty(), "experiment.kernels", "must name at least one kernel");

        issue(&mut v, self.bench.repetitions >= 1, "bench.repetitions", "must be >= 1");
        issue(&mut v, self.bench.max_images != Some(0), "bench.max_images", "must be >= 1");
        v
    }

    /// Checks every constrained field; `source` is the text the config came
    /// from, used to report line numbers.
    pub fn validate_source(&self, source: Option<(&Path, &str)>) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            return Ok(());
        }
        let lines: Vec<String> = issues
            .iter()
            .map(|i| match source.and_then(|(path, text)| key_line(text, &i.key).map(|l| (path, l))) {
                Some((path, line)) => format!("{}:{line}: `{}` {}", path.display(), i.key, i.message),
                None => format!("`{}` {}", i.key, i.message),
            })
            .collect();
        Err(Error::Config(lines.join("; ")))
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_source(None)
    }

    /// Parses TOML text, applies `key=value` overrides, and validates.
    pub fn from_toml(text: &str, path: &Path, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: AppConfig = table.try_into().map_err(|e: toml::de::Error| {
            let msg = e.to_string();
            let msg = msg.trim_end();
            if overrides.is_empty() {
                // Re-run on the text so the error carries a span.
                match toml::from_str::<AppConfig>(text) {
                    Err(e) => Error::Config(format!("{}: {}", path.display(), e.to_string().trim_end())),
                    Ok(_) => Error::Config(format!("{}: {msg}", path.display())),
                }
            } else {
                Error::Config(format!("{} with overrides: {msg}", path.display()))
            }
        })?;
        cfg.validate_source(Some((path, text)))?;
        Ok(cfg)
    }

    /// Loads `path`, or the file named by `MOLESCAN_CONFIG`, or the
    /// defaults, then applies overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        match resolve_path(path) {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                Self::from_toml(&text, &p, overrides)
            }
            None => Self::from_toml("", Path::new("<defaults>"), overrides),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn resolve_path(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// Sets a dotted key from `key=value`. The value is parsed as TOML and
/// falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let parts: Vec<&str> = key.split('.').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override `{assignment}` has an empty key segment")));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (leaf, path) = parts.split_last().expect("nonempty");
    let mut cur = table;
    for p in path {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{assignment}`: `{p}` is not a table")))?;
    }
    cur.insert(leaf.to_string(), value);
    Ok(())
}

/// 1-based line of the deepest prefix of `key` present in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let doc = toml::de::DeTable::parse(text).ok()?;
    let mut table = doc.get_ref();
    let mut found = None;
    for part in key.split('.') {
        let (k, v) = table.get_key_value(part)?;
        found = Some(k.span().start);
        match v.get_ref() {
            toml::de::DeValue::Table(t) => table = t,
            _ => break,
        }
    }
    found.map(|offset| text[..offset].matches('\n').count() + 1)
}
