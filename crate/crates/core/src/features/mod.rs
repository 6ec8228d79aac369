//! ABCD features of a segmented lesion.
//!
//! The lesion is traced, its minimum-area rectangle found, and the lesion
//! rotated about its centroid so its long axis is horizontal.
//! Shape asymmetry, colour classes and structural distances come from the
//! aligned lesion; border irregularity from the unrotated mask; diameter
//! from the rectangle.

mod asymmetry;
mod border;
mod color;
mod contour;
mod extract;
mod rect;
mod rotation;

pub use asymmetry::{mirror, mirror_xor, shape_asymmetry, MirrorAxis};
pub use border::{border_irregularity, perimeter};
pub use color::{
    classify_pixels, color_variegation, structural_asymmetry, ClassRule, ColorClass, ColorRegion, ColorTable, Interval,
};
pub use contour::{trace_contour, Contour};
pub use extract::{
    diameter, extract_features, extract_features_report, FeatureConfig, FeatureReport, FeatureVector, FEATURE_COUNT,
    FEATURE_NAMES,
};
pub use rect::{alignment_tilt, convex_hull, min_area_rect, principal_tilt, MinAreaRect, Point2};
pub use rotation::{build_rotation, warp_image, warp_mask, RotationSpec};
