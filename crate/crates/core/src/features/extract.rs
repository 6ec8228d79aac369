use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    alignment_tilt, border_irregularity, build_rotation, color_variegation, min_area_rect, shape_asymmetry, structural_asymmetry,
    trace_contour, warp_image, warp_mask, ColorRegion, ColorTable, Contour, MinAreaRect, RotationSpec,
};
use crate::imaging::RgbImage;
use crate::scalar::Scalar;
use crate::segmentation::BinaryMask;

pub const FEATURE_COUNT: usize = 11;

/// Column names in feature order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "a_h",
    "a_v",
    "d_white",
    "d_red",
    "d_light_brown",
    "d_dark_brown",
    "d_blue_gray",
    "d_black",
    "border_i",
    "color_count",
    "diameter_mm",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    pub color_table: ColorTable,
    /// Smallest colour region that counts, as a fraction of lesion area.
    pub min_fraction: f64,
    /// Millimetres per pixel of the input image.
    pub gamma_mm_per_px: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { color_table: ColorTable::default(), min_fraction: 0.01, gamma_mm_per_px: 0.02 }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        self.color_table.validate()?;
        if !(0.0..1.0).contains(&self.min_fraction) {
            return Err(Error::InvalidParameter(format!("min_fraction {} outside [0, 1)", self.min_fraction)));
        }
        if !(self.gamma_mm_per_px > 0.0 && self.gamma_mm_per_px.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma {} must be positive", self.gamma_mm_per_px)));
        }
        Ok(())
    }
}

/// ABCD vector in the fixed order of [`FEATURE_NAMES`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub a_h: T,
    pub a_v: T,
    pub d: [T; 6],
    pub border_i: T,
    pub color_count: usize,
    pub diameter_mm: T,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn to_array(&self) -> [T; FEATURE_COUNT] {
        let [d1, d2, d3, d4, d5, d6] = self.d;
        [
            self.a_h,
            self.a_v,
            d1,
            d2,
            d3,
            d4,
            d5,
            d6,
            self.border_i,
            T::lit(self.color_count as f64),
            self.diameter_mm,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// `D = 2 a gamma`.
pub fn diameter<T: Scalar>(rect: &MinAreaRect<T>, gamma: T) -> Result<T> {
    if !(gamma > T::zero() && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma {gamma} must be positive")));
    }
    Ok(T::lit(2.0) * rect.side_long * gamma)
}

/// Intermediate results of one extraction, in canvas coordinates. The
/// canvas is the lesion's bounding box padded so that any rotation about
/// the centroid stays inside it; `origin` is the canvas's top-left corner
/// in input coordinates.
#[derive(Clone, Debug)]
pub struct FeatureReport<T> {
    pub features: FeatureVector<T>,
    pub origin: (isize, isize),
    pub mask: BinaryMask,
    pub image: RgbImage,
    pub contour: Contour,
    pub rect: MinAreaRect<T>,
    pub rotation: RotationSpec<T>,
    pub aligned_mask: BinaryMask,
    pub aligned_image: RgbImage,
    pub regions: Vec<ColorRegion<T>>,
}

fn stage<V>(name: &'static str, r: Result<V>) -> Result<V> {
    r.map_err(|e| e.in_stage(name))
}

/// Copies the lesion into a canvas wide enough for any rotation about its
/// centroid. Local coordinates make the result independent of where the
/// lesion sits in the frame.
fn canvas(img: &RgbImage, lesion: &BinaryMask) -> Result<((isize, isize), BinaryMask, RgbImage)> {
    let (x0, y0, x1, y1) = lesion.bounding_box().ok_or(Error::EmptyMask)?;
    let (mut sx, mut sy, mut n) = (0usize, 0usize, 0usize);
    for (x, y) in lesion.iter_true() {
        sx += x - x0;
        sy += y - y0;
        n += 1;
    }
    let (cx, cy) = (sx as f64 / n as f64, sy as f64 / n as f64);
    let reach = lesion
        .iter_true()
        .map(|(x, y)| ((x - x0) as f64 - cx).hypot((y - y0) as f64 - cy))
        .fold(0.0f64, f64::max);
    let pad = reach.ceil() as usize + 1;
    let (w, h) = (x1 - x0 + 1 + 2 * pad, y1 - y0 + 1 + 2 * pad);
    let origin = (x0 as isize - pad as isize, y0 as isize - pad as isize);
    let inside = |x: usize, y: usize| {
        let (gx, gy) = (origin.0 + x as isize, origin.1 + y as isize);
        (gx >= 0 && gy >= 0 && (gx as usize) < img.width() && (gy as usize) < img.height())
            .then_some((gx as usize, gy as usize))
    };
    let mask = BinaryMask::from_fn(w, h, |x, y| inside(x, y).is_some_and(|(gx, gy)| lesion.get(gx, gy)));
    let image = RgbImage::from_fn(w, h, |x, y| inside(x, y).map_or([0; 3], |(gx, gy)| img.get(gx, gy)));
    Ok((origin, mask, image))
}

/// Full ABCD extraction with intermediates. Works on the largest
/// 4-connected component of `mask`.
pub fn extract_features_report<T: Scalar>(
    img: &RgbImage,
    mask: &BinaryMask,
    config: &FeatureConfig,
) -> Result<FeatureReport<T>> {
    if (img.width(), img.height()) != (mask.width(), mask.height()) {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs mask {}x{}",
            img.width(),
            img.height(),
            mask.width(),
            mask.height()
        )));
    }
    config.validate()?;
    let lesion = mask.largest_component();
    let (origin, cmask, cimage) = stage("canvas", canvas(img, &lesion))?;

    let contour = stage("contour", trace_contour(&cmask))?;
    let rect: MinAreaRect<T> = stage("min_area_rect", min_area_rect(&contour))?;
    let tilt = alignment_tilt(&rect, &cmask);
    let (cx, cy) = cmask.centroid().ok_or(Error::EmptyMask)?;
    let rotation = stage("rotation", build_rotation(tilt, T::one(), (T::lit(cx), T::lit(cy))))?;
    let aligned_mask = warp_mask(&cmask, &rotation);
    let aligned_image = warp_image(&cimage, &rotation);
    if aligned_mask.is_empty() {
        return Err(Error::EmptyMask.in_stage("warp"));
    }

    let (a_h, a_v) = stage("asymmetry", shape_asymmetry(&aligned_mask))?;
    let regions: Vec<ColorRegion<T>> = stage(
        "color",
        color_variegation(&aligned_image, &aligned_mask, &config.color_table, config.min_fraction),
    )?;
    let (acx, acy) = aligned_mask.centroid().ok_or(Error::EmptyMask)?;
    let d = stage(
        "structure",
        structural_asymmetry((T::lit(acx), T::lit(acy)), aligned_mask.count(), &regions),
    )?;
    let border_i: T = stage("border", border_irregularity(&cmask, &contour))?;
    let diameter_mm = stage("diameter", diameter(&rect, T::lit(config.gamma_mm_per_px)))?;

    let features = FeatureVector {
        a_h: T::lit(a_h),
        a_v: T::lit(a_v),
        d,
        border_i,
        color_count: regions.len(),
        diameter_mm,
    };
    Ok(FeatureReport {
        features,
        origin,
        mask: cmask,
        image: cimage,
        contour,
        rect,
        rotation,
        aligned_mask,
        aligned_image,
        regions,
    })
}

pub fn extract_features<T: Scalar>(img: &RgbImage, mask: &BinaryMask, config: &FeatureConfig) -> Result<FeatureVector<T>> {
    extract_features_report(img, mask, config).map(|r| r.features)
}
