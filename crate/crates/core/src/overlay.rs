//! PNG renderings of intermediate results: evolution snapshots, masks,
//! mirror-XOR maps and colour-region outlines.

use crate::error::Result;
use crate::features::{classify_pixels, mirror_xor, ColorClass, ColorTable, FeatureReport, MirrorAxis};
use crate::imaging::RgbImage;
use crate::segmentation::{BinaryMask, LevelSetGrid};

/// Snapshot iterations and their outline colours.
pub const SNAPSHOTS: [(usize, [u8; 3]); 4] =
    [(50, [255, 0, 0]), (100, [0, 255, 0]), (200, [0, 255, 255]), (400, [0, 0, 255])];

/// Outline colour for each colour class.
pub fn class_outline(c: ColorClass) -> [u8; 3] {
    match c {
        ColorClass::DarkBrown => [255, 0, 0],
        ColorClass::BlueGray => [0, 255, 0],
        ColorClass::LightBrown => [255, 255, 0],
        ColorClass::White => [0, 255, 255],
        ColorClass::Red => [0, 0, 255],
        ColorClass::Black => [0, 0, 0],
    }
}

/// Mask pixels with at least one 4-neighbour outside the mask or frame.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        mask.get_signed(x, y)
            && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !mask.get_signed(x + dx, y + dy))
    })
}

pub fn draw_outline(img: &mut RgbImage, mask: &BinaryMask, rgb: [u8; 3]) {
    for (x, y) in boundary(mask).iter_true() {
        if x < img.width() && y < img.height() {
            img.set(x, y, rgb);
        }
    }
}

/// White lesion on black.
pub fn mask_image(mask: &BinaryMask) -> RgbImage {
    RgbImage::from_fn(mask.width(), mask.height(), |x, y| if mask.get(x, y) { [255; 3] } else { [0; 3] })
}

/// Collects interior masks at the snapshot iterations during evolution.
#[derive(Clone, Debug, Default)]
pub struct SnapshotRecorder {
    pub snapshots: Vec<(usize, BinaryMask)>,
}

impl SnapshotRecorder {
    pub fn observe(&mut self, iteration: usize, grid: &LevelSetGrid) {
        if SNAPSHOTS.iter().any(|(i, _)| *i == iteration) {
            self.snapshots.push((iteration, grid.interior_mask()));
        }
    }

    /// Snapshots past an early stop repeat the final mask.
    pub fn finish(mut self, final_mask: &BinaryMask) -> Vec<(usize, BinaryMask)> {
        for (i, _) in SNAPSHOTS {
            if !self.snapshots.iter().any(|(j, _)| *j == i) {
                self.snapshots.push((i, final_mask.clone()));
            }
        }
        self.snapshots.sort_by_key(|(i, _)| *i);
        self.snapshots
    }
}

/// Outlines of every snapshot over the image, later iterations on top.
pub fn snapshot_overlay(img: &RgbImage, snapshots: &[(usize, BinaryMask)]) -> RgbImage {
    let mut out = img.clone();
    for (it, mask) in snapshots {
        if let Some((_, rgb)) = SNAPSHOTS.iter().find(|(i, _)| i == it) {
            draw_outline(&mut out, mask, *rgb);
        }
    }
    out
}

/// Overlap white, non-overlapping pixels black, background gray.
pub fn xor_map(aligned: &BinaryMask, axis: MirrorAxis) -> Result<RgbImage> {
    let xor = mirror_xor(aligned, axis)?;
    Ok(RgbImage::from_fn(aligned.width(), aligned.height(), |x, y| {
        if xor.get(x, y) {
            [0; 3]
        } else if aligned.get(x, y) {
            [255; 3]
        } else {
            [128; 3]
        }
    }))
}

/// Outlines of each counted colour region over the aligned lesion.
pub fn color_overlay(report: &FeatureReport<f64>, table: &ColorTable) -> Result<RgbImage> {
    let (w, h) = (report.aligned_mask.width(), report.aligned_mask.height());
    let classes = classify_pixels(&report.aligned_image, &report.aligned_mask, table)?;
    let mut out = report.aligned_image.clone();
    draw_outline(&mut out, &report.aligned_mask, [255, 255, 255]);
    for region in &report.regions {
        let c = region.color_class;
        let m = BinaryMask::from_fn(w, h, |x, y| classes[y * w + x] == Some(c));
        draw_outline(&mut out, &m, class_outline(c));
    }
    Ok(out)
}
