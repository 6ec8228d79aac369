use crate::imaging::{Channel, PlanarImage, RgbImage};
use crate::scalar::Scalar;

// NTSC luma/chroma rows.
const Y_ROW: [f64; 3] = [0.299, 0.587, 0.114];
const U_ROW: [f64; 3] = [-0.147, -0.289, 0.436];
const V_ROW: [f64; 3] = [0.615, -0.515, -0.100];

/// Converts to unclamped, unquantized Y'/U/V planes named `"Y"`, `"U"`, `"V"`.
pub fn rgb_to_yuv<T: Scalar>(img: &RgbImage) -> PlanarImage<T> {
    let (w, h) = (img.width(), img.height());
    let rows = [Y_ROW, U_ROW, V_ROW].map(|r| r.map(T::lit));
    let mut planes: [Vec<T>; 3] = std::array::from_fn(|_| Vec::with_capacity(w * h));
    for px in img.pixels().chunks_exact(3) {
        let (r, g, b) = (T::lit(px[0] as f64), T::lit(px[1] as f64), T::lit(px[2] as f64));
        for (plane, row) in planes.iter_mut().zip(&rows) {
            plane.push(row[0] * r + row[1] * g + row[2] * b);
        }
    }
    let [y, u, v] = planes;
    let mut out = PlanarImage::new(w, h);
    for (name, data) in [("Y", y), ("U", u), ("V", v)] {
        let ch = Channel::new(w, h, data).expect("plane sized from image");
        out.push(name, ch).expect("finite by construction");
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hsv {
    /// Hue in degrees, `[0, 360)`.
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone RGB to HSV; hue is 0 for achromatic pixels.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> Hsv {
    let [r, g, b] = rgb.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return Hsv { h: 0.0, s, v };
    }
    let h = if max == r {
        60.0 * (((g - b) / delta).rem_euclid(6.0))
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    Hsv { h: if h >= 360.0 { h - 360.0 } else { h }, s, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn yuv_of(rgb: [u8; 3]) -> [f64; 3] {
        let img = RgbImage::filled(8, 8, rgb);
        let p = rgb_to_yuv::<f64>(&img);
        ["Y", "U", "V"].map(|n| p.plane(n).unwrap().get(3, 3))
    }

    #[test]
    fn pure_red_matches_hand_computed_values() {
        // 255 * (0.299, -0.147, 0.615)
        let [y, u, v] = yuv_of([255, 0, 0]);
        assert_abs_diff_eq!(y, 76.245, epsilon = 1e-9);
        assert_abs_diff_eq!(u, -37.485, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 156.825, epsilon = 1e-9);
    }

    #[test]
    fn white_and_black() {
        let [y, u, v] = yuv_of([255, 255, 255]);
        assert_abs_diff_eq!(y, 255.0, epsilon = 1e-9);
        assert!(u.abs() < 0.01 * 255.0);
        assert!(v.abs() < 0.01 * 255.0);
        assert_eq!(yuv_of([0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn gray_axis_has_negligible_chroma() {
        for g in 0..=255u8 {
            let [_, u, v] = yuv_of([g, g, g]);
            let bound = 0.01 * g as f64 + 1e-12;
            assert!(u.abs() <= bound && v.abs() <= bound, "gray {g}: u={u} v={v}");
        }
    }

    #[test]
    fn f32_planes() {
        let img = RgbImage::filled(8, 8, [255, 0, 0]);
        let p = rgb_to_yuv::<f32>(&img);
        assert!((p.plane("Y").unwrap().get(0, 0) - 76.245).abs() < 1e-4);
    }

    #[test]
    fn hsv_primaries_and_gray() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), Hsv { h: 0.0, s: 1.0, v: 1.0 });
        assert_eq!(rgb_to_hsv([0, 0, 255]), Hsv { h: 240.0, s: 1.0, v: 1.0 });
        let g = rgb_to_hsv([128, 128, 128]);
        assert_eq!((g.h, g.s), (0.0, 0.0));
        assert_abs_diff_eq!(g.v, 128.0 / 255.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rgb_to_hsv([0, 255, 0]).h, 120.0);
        // magenta-ish wraps below 360
        let m = rgb_to_hsv([255, 0, 1]);
        assert!(m.h > 359.0 && m.h < 360.0);
    }
}
