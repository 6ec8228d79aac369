//! Single-image pipeline: smoothing and colour transform, segmentation,
//! feature extraction and classification, with per-stage wall-clock times.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features_report, FeatureConfig, FeatureReport};
use crate::imaging::{convolve, gaussian_kernel, resize_long_edge, rgb_to_yuv, PlanarImage, RgbImage};
use crate::learn::{Classifier, Label};
use crate::segmentation::{evolve_with, LevelSetGrid, Segmentation, SegmentationParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    pub kernel_size: usize,
    pub sigma: f64,
    /// Resize so the long edge has this many pixels (camera captures);
    /// `None` keeps the native resolution.
    pub resize_long_edge: Option<usize>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { kernel_size: 5, sigma: 1.0, resize_long_edge: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub preprocess: PreprocessConfig,
    pub segmentation: SegmentationParams<f64>,
    pub features: FeatureConfig,
}

/// Milliseconds spent in each stage of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub preprocess_ms: f64,
    pub segment_ms: f64,
    pub features_ms: f64,
    pub classify_ms: f64,
}

impl StageTimes {
    pub fn total_ms(&self) -> f64 {
        self.preprocess_ms + self.segment_ms + self.features_ms + self.classify_ms
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    /// The image the stages ran on (after any resize).
    pub image: RgbImage,
    pub segmentation: Segmentation<f64>,
    pub report: FeatureReport<f64>,
    pub times: StageTimes,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub label: Label,
    pub decision: f64,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Optional resize, Y'UV conversion, Gaussian smoothing of every plane.
pub fn preprocess(img: &RgbImage, cfg: &PreprocessConfig) -> Result<(RgbImage, PlanarImage<f64>)> {
    let image = match cfg.resize_long_edge {
        Some(edge) if edge != img.width().max(img.height()) => resize_long_edge(img, edge)?,
        _ => img.clone(),
    };
    let kernel = gaussian_kernel(cfg.kernel_size, cfg.sigma)?;
    let planes = rgb_to_yuv::<f64>(&image).try_map(|p| convolve(p, &kernel))?;
    Ok((image, planes))
}

/// Runs preprocessing, segmentation and feature extraction. `observer`
/// sees the level-set grid after every evolution.
pub fn analyze_with(
    img: &RgbImage,
    cfg: &PipelineConfig,
    observer: impl FnMut(usize, &LevelSetGrid),
) -> Result<Analysis> {
    let t = Instant::now();
    let (image, planes) = preprocess(img, &cfg.preprocess).map_err(|e| e.in_stage("preprocess"))?;
    let preprocess_ms = ms(t);

    let t = Instant::now();
    let segmentation = evolve_with(&planes, &cfg.segmentation, observer).map_err(|e| e.in_stage("segment"))?;
    let segment_ms = ms(t);

    let t = Instant::now();
    let report = extract_features_report(&image, &segmentation.mask, &cfg.features).map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => e.in_stage("features"),
    })?;
    let features_ms = ms(t);

    Ok(Analysis { image, segmentation, report, times: StageTimes { preprocess_ms, segment_ms, features_ms, classify_ms: 0.0 } })
}

pub fn analyze(img: &RgbImage, cfg: &PipelineConfig) -> Result<Analysis> {
    analyze_with(img, cfg, |_, _| {})
}

/// Applies `model` to an analysis and records the classification time.
pub fn classify(analysis: &mut Analysis, model: &Classifier<f64>) -> Result<Verdict> {
    let t = Instant::now();
    let decision = model.decision(&analysis.report.features.to_array()).map_err(|e| e.in_stage("classify"))?;
    analysis.times.classify_ms = ms(t);
    Ok(Verdict { label: Label::from_decision(decision), decision })
}
