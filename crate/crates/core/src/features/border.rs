use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::features::Contour;
use crate::scalar::Scalar;
use crate::segmentation::BinaryMask;

/// Perimeter of the boundary chain with its corners cut: the polygon through
/// the midpoints of consecutive links, offset outward by half a pixel
/// (which adds `pi` for any simple closed curve).
pub fn perimeter<T: Scalar>(contour: &Contour) -> T {
    let mids: Vec<(f64, f64)> = contour
        .links()
        .map(|(a, b)| ((a.0 + b.0) as f64 / 2.0, (a.1 + b.1) as f64 / 2.0))
        .collect();
    let n = mids.len();
    let chain: f64 = (0..n)
        .map(|i| {
            let (p, q) = (mids[i], mids[(i + 1) % n]);
            (q.0 - p.0).hypot(q.1 - p.1)
        })
        .sum();
    T::lit(chain + PI)
}

/// `I = P^2 / (4 pi A)`; 1 for a disk, larger for ragged outlines.
pub fn border_irregularity<T: Scalar>(mask: &BinaryMask, contour: &Contour) -> Result<T> {
    let area = mask.count();
    if area == 0 {
        return Err(Error::EmptyMask);
    }
    if contour.is_empty() {
        return Err(Error::DegenerateGeometry("empty contour".into()));
    }
    let p: T = perimeter(contour);
    Ok(p * p / (T::lit(4.0 * PI) * T::lit(area as f64)))
}
