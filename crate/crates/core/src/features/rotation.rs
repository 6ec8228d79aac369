use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::RgbImage;
use crate::scalar::Scalar;
use crate::segmentation::BinaryMask;

/// Scaled rotation about the lesion centroid. `matrix` maps output pixel
/// coordinates to the input location that is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec<T> {
    pub alpha: T,
    pub beta: T,
    pub sf: T,
    pub centroid: (T, T),
    pub matrix: [[T; 3]; 2],
}

fn matrix<T: Scalar>(alpha: T, beta: T, (cx, cy): (T, T)) -> [[T; 3]; 2] {
    let one = T::one();
    [
        [alpha, beta, (one - alpha) * cx - beta * cy],
        [-beta, alpha, beta * cx + (one - alpha) * cy],
    ]
}

pub fn build_rotation<T: Scalar>(theta: T, sf: T, centroid: (T, T)) -> Result<RotationSpec<T>> {
    if !(sf > T::zero() && sf <= T::one()) {
        return Err(Error::InvalidParameter(format!("scale factor {sf} outside (0, 1]")));
    }
    if !theta.is_finite() || !centroid.0.is_finite() || !centroid.1.is_finite() {
        return Err(Error::InvalidParameter("rotation inputs must be finite".into()));
    }
    let (s, c) = theta.sin_cos();
    let (alpha, beta) = (sf * c, sf * s);
    Ok(RotationSpec { alpha, beta, sf, centroid, matrix: matrix(alpha, beta, centroid) })
}

impl<T: Scalar> RotationSpec<T> {
    /// Input location sampled for output pixel `(x, y)`.
    pub fn apply(&self, x: T, y: T) -> (T, T) {
        let m = &self.matrix;
        (m[0][0] * x + m[0][1] * y + m[0][2], m[1][0] * x + m[1][1] * y + m[1][2])
    }

    /// The spec undoing this one (same centroid, opposite angle, reciprocal
    /// scale). The reciprocal scale may exceed 1, so this bypasses the
    /// `build_rotation` range check.
    pub fn inverse(&self) -> Self {
        let d = self.sf * self.sf;
        let (alpha, beta) = (self.alpha / d, -self.beta / d);
        Self { alpha, beta, sf: T::one() / self.sf, centroid: self.centroid, matrix: matrix(alpha, beta, self.centroid) }
    }
}

/// Nearest-neighbour warp; samples outside the input are background.
pub fn warp_mask<T: Scalar>(mask: &BinaryMask, spec: &RotationSpec<T>) -> BinaryMask {
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        let (sx, sy) = spec.apply(T::lit(x as f64), T::lit(y as f64));
        let (sx, sy) = (sx.to_f64_lossy().round(), sy.to_f64_lossy().round());
        sx.is_finite() && sy.is_finite() && mask.get_signed(sx as isize, sy as isize)
    })
}

/// Bilinear warp; taps outside the input read black.
pub fn warp_image<T: Scalar>(img: &RgbImage, spec: &RotationSpec<T>) -> RgbImage {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let tap = |x: isize, y: isize| -> [f64; 3] {
        if x < 0 || y < 0 || x >= w || y >= h {
            [0.0; 3]
        } else {
            img.get(x as usize, y as usize).map(f64::from)
        }
    };
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let (sx, sy) = spec.apply(T::lit(x as f64), T::lit(y as f64));
        let (sx, sy) = (sx.to_f64_lossy(), sy.to_f64_lossy());
        if !(sx > -1.0 && sy > -1.0 && sx < w as f64 && sy < h as f64) {
            return [0; 3];
        }
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as isize, y0 as isize);
        let (a, b, c, d) = (tap(x0, y0), tap(x0 + 1, y0), tap(x0, y0 + 1), tap(x0 + 1, y0 + 1));
        std::array::from_fn(|k| {
            let top = a[k] + (b[k] - a[k]) * fx;
            let bot = c[k] + (d[k] - c[k]) * fx;
            (top + (bot - top) * fy).round().clamp(0.0, 255.0) as u8
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{min_area_rect, trace_contour};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn dice(a: &BinaryMask, b: &BinaryMask) -> f64 {
        let inter = a.bits().iter().zip(b.bits()).filter(|(p, q)| **p && **q).count();
        2.0 * inter as f64 / (a.count() + b.count()) as f64
    }

    #[test]
    fn zero_angle_is_identity() {
        let r = build_rotation(0.0, 1.0, (13.5, 7.25)).unwrap();
        let expect = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        for i in 0..2 {
            for j in 0..3 {
                assert_abs_diff_eq!(r.matrix[i][j], expect[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn quarter_turn_about_origin() {
        let r = build_rotation(FRAC_PI_2, 1.0, (0.0, 0.0)).unwrap();
        let expect = [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]];
        for i in 0..2 {
            for j in 0..3 {
                assert_abs_diff_eq!(r.matrix[i][j], expect[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eighth_turn_half_scale() {
        let r = build_rotation(FRAC_PI_4, 0.5, (10.0, 10.0)).unwrap();
        // 0.5 * cos(pi/4); translations (1 - a) * 10 - b * 10 and b * 10 + (1 - a) * 10
        let a = 0.353_553_390_593_273_8;
        assert_abs_diff_eq!(r.alpha, a, epsilon = 1e-12);
        assert_abs_diff_eq!(r.beta, a, epsilon = 1e-12);
        assert_abs_diff_eq!(r.matrix[0][2], 2.928_932_188_134_524_5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.matrix[1][2], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_scale() {
        for sf in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(build_rotation(0.3, sf, (0.0, 0.0)).is_err());
        }
    }

    #[test]
    fn centroid_is_fixed_point() {
        let r = build_rotation(0.7_f64, 0.8, (12.0, 30.0)).unwrap();
        let (x, y) = r.apply(12.0, 30.0);
        assert_abs_diff_eq!(x, 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 30.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_warp_leaves_input_unchanged() {
        let m = BinaryMask::from_fn(20, 15, |x, y| (x * 7 + y * 3) % 5 < 2);
        let img = RgbImage::from_fn(20, 15, |x, y| [x as u8 * 10, y as u8 * 10, 77]);
        let id = build_rotation(0.0, 1.0, (9.5, 7.0)).unwrap();
        assert_eq!(warp_mask(&m, &id), m);
        assert_eq!(warp_image(&img, &id), img);
    }

    #[test]
    fn aligning_a_rotated_rectangle_removes_its_tilt() {
        let m = crate::features::rect::tests::rotated_rect_mask(90, 90, 44.0, 16.0, 30.0);
        let rect: crate::features::MinAreaRect<f64> = min_area_rect(&trace_contour(&m).unwrap()).unwrap();
        let spec = build_rotation(rect.tilt, 1.0, m.centroid().unwrap()).unwrap();
        let aligned = warp_mask(&m, &spec);
        let again: crate::features::MinAreaRect<f64> = min_area_rect(&trace_contour(&aligned).unwrap()).unwrap();
        assert!(again.tilt.abs() <= 1f64.to_radians(), "{}", again.tilt.to_degrees());
    }

    #[test]
    fn f32_matrix_matches_f64() {
        let a = build_rotation(0.4_f32, 0.9, (5.0, 6.0)).unwrap();
        let b = build_rotation(0.4_f64, 0.9, (5.0, 6.0)).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert!((a.matrix[i][j] as f64 - b.matrix[i][j]).abs() < 1e-5);
            }
        }
    }

    proptest! {
        #[test]
        fn alpha_beta_reconstruct(theta in -3.2f64..3.2, sf in 0.01f64..=1.0, cx in -50.0f64..50.0, cy in -50.0f64..50.0) {
            let r = build_rotation(theta, sf, (cx, cy)).unwrap();
            prop_assert!((r.alpha - sf * theta.cos()).abs() < 1e-9);
            prop_assert!((r.beta - sf * theta.sin()).abs() < 1e-9);
            let unit = build_rotation(theta, 1.0, (cx, cy)).unwrap().matrix;
            let (c0, c1) = ((unit[0][0], unit[1][0]), (unit[0][1], unit[1][1]));
            prop_assert!((c0.0 * c0.0 + c0.1 * c0.1 - 1.0).abs() < 1e-12);
            prop_assert!((c0.0 * c1.0 + c0.1 * c1.1).abs() < 1e-12);
            let inv = r.inverse();
            let (x, y) = r.apply(3.0, -4.0);
            let (bx, by) = inv.apply(x, y);
            prop_assert!((bx - 3.0).abs() < 1e-8 && (by + 4.0).abs() < 1e-8);
        }

        #[test]
        fn warp_round_trip_keeps_blob(theta in -3.1f64..3.1, rx in 25.0f64..40.0, ry in 18.0f64..30.0, lobe in 0.0f64..15.0) {
            let m = BinaryMask::from_fn(140, 140, |x, y| {
                let (dx, dy) = (x as f64 - 70.0, y as f64 - 69.0);
                (dx / rx).powi(2) + (dy / ry).powi(2) <= 1.0 || (dx - rx).powi(2) + dy * dy <= lobe * lobe
            });
            let spec = build_rotation(theta, 1.0, m.centroid().unwrap()).unwrap();
            let back = warp_mask(&warp_mask(&m, &spec), &spec.inverse());
            prop_assert!(dice(&m, &back) >= 0.98, "dice {}", dice(&m, &back));
        }
    }
}
