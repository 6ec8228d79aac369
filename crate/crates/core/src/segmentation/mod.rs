//! Two-list fast level-set evolution (real-time Chan-Vese approximation).
//!
//! The curve lives between two one-pixel lists: `l_in` (phi = -1) and
//! `l_out` (phi = 1). A data cycle moves list points by the sign of the
//! region-competition speed
//! `F_d = lambda2 * (u - c2)^2 - lambda1 * (u - c1)^2`,
//! and a smoothing cycle moves them by the Gaussian-filtered interior
//! indicator compared with 1/2. Switching a point only touches its
//! 4-neighbourhood, so each pass costs O(curve length).

mod evolve;
mod grid;
mod mask;
mod params;

pub use evolve::{data_cycle, evolve, evolve_with, region_means, smoothing_cycle, weighted_field, Segmentation};
pub use grid::{init_ellipse, LevelSetGrid};
pub use mask::BinaryMask;
pub use params::SegmentationParams;
