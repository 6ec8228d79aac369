use crate::error::{Error, Result};
use crate::imaging::RgbImage;

/// Bilinear resampling with corner-aligned sample positions.
pub fn resize_bilinear(img: &RgbImage, out_w: usize, out_h: usize) -> Result<RgbImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParameter(format!(
            "target dimensions must be positive, got {out_w}x{out_h}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    if (w, h) == (out_w, out_h) {
        return Ok(img.clone());
    }
    let scale = |n_in: usize, n_out: usize| {
        if n_out > 1 {
            (n_in - 1) as f64 / (n_out - 1) as f64
        } else {
            0.0
        }
    };
    let (sx, sy) = (scale(w, out_w), scale(h, out_h));
    let src = img.pixels();
    let mut out = Vec::with_capacity(out_w * out_h * 3);
    for oy in 0..out_h {
        let fy = oy as f64 * sy;
        let y0 = (fy.floor() as usize).min(h - 1);
        let y1 = (y0 + 1).min(h - 1);
        let ty = fy - y0 as f64;
        for ox in 0..out_w {
            let fx = ox as f64 * sx;
            let x0 = (fx.floor() as usize).min(w - 1);
            let x1 = (x0 + 1).min(w - 1);
            let tx = fx - x0 as f64;
            for c in 0..3 {
                let p = |x: usize, y: usize| src[(y * w + x) * 3 + c] as f64;
                let top = p(x0, y0) + (p(x1, y0) - p(x0, y0)) * tx;
                let bot = p(x0, y1) + (p(x1, y1) - p(x0, y1)) * tx;
                let v = top + (bot - top) * ty;
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RgbImage::new(out_w, out_h, out)
}

/// Scales so the longer edge equals `long_edge`, keeping the aspect ratio.
pub fn resize_long_edge(img: &RgbImage, long_edge: usize) -> Result<RgbImage> {
    let (w, h) = (img.width(), img.height());
    let (ow, oh) = if w >= h {
        (long_edge, ((h as f64 * long_edge as f64 / w as f64).round() as usize).max(1))
    } else {
        (((w as f64 * long_edge as f64 / h as f64).round() as usize).max(1), long_edge)
    };
    resize_bilinear(img, ow, oh)
}
