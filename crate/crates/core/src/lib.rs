//! Dermoscopic lesion screening.
//!
//! Pipeline: RGB to Y'UV and Gaussian smoothing ([`imaging`]), two-list
//! level-set segmentation ([`segmentation`]), ABCD feature extraction
//! ([`features`]), scaling, SMOTE and SMO-trained SVMs ([`learn`]), and the
//! evaluation harness ([`eval`]).
//!
//! Numeric stages are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the pipeline and CLI use.

pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod imaging;
pub mod learn;
pub mod overlay;
pub mod pipeline;
pub mod scalar;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Planes = imaging::PlanarImage<f64>;
pub type Kernel = imaging::GaussianKernel<f64>;
pub type SegParams = segmentation::SegmentationParams<f64>;
pub type Features = features::FeatureVector<f64>;
pub type Rect = features::MinAreaRect<f64>;
pub type Model = learn::Classifier<f64>;
