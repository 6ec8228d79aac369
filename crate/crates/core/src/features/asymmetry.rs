use crate::error::{Error, Result};
use crate::segmentation::BinaryMask;

/// Which centroid line the mask is mirrored across.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MirrorAxis {
    /// Vertical line `x = C_x` (left-right mirror), giving `a_h`.
    Vertical,
    /// Horizontal line `y = C_y` (top-bottom mirror), giving `a_v`.
    Horizontal,
}

/// Mirror image of `mask` about its centroid line. The mirror line is
/// snapped to the nearest half pixel so the reflection stays on the grid.
pub fn mirror(mask: &BinaryMask, axis: MirrorAxis) -> Result<BinaryMask> {
    let (cx, cy) = mask.centroid().ok_or(Error::EmptyMask)?;
    let (mx, my) = ((2.0 * cx).round_ties_even() as isize, (2.0 * cy).round_ties_even() as isize);
    Ok(BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        match axis {
            MirrorAxis::Vertical => mask.get_signed(mx - x, y),
            MirrorAxis::Horizontal => mask.get_signed(x, my - y),
        }
    }))
}

/// Symmetric difference between the mask and its mirror image.
pub fn mirror_xor(mask: &BinaryMask, axis: MirrorAxis) -> Result<BinaryMask> {
    let m = mirror(mask, axis)?;
    let bits = mask.bits().iter().zip(m.bits()).map(|(a, b)| a ^ b).collect();
    Ok(BinaryMask::from_bits(mask.width(), mask.height(), bits).expect("same dimensions"))
}

/// `(a_h, a_v)`: non-overlapping area (half the XOR count) as a percentage
/// of lesion area, for the left-right and top-bottom mirrors.
pub fn shape_asymmetry(aligned: &BinaryMask) -> Result<(f64, f64)> {
    let area = aligned.count();
    if area == 0 {
        return Err(Error::EmptyMask);
    }
    let pct = |axis| -> Result<f64> {
        let nor = mirror_xor(aligned, axis)?.count() as f64 / 2.0;
        Ok(nor / area as f64 * 100.0)
    };
    Ok((pct(MirrorAxis::Vertical)?, pct(MirrorAxis::Horizontal)?))
}
