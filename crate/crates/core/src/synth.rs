//! Synthetic dermoscopy-like lesions with known ground truth, for tests,
//! demos and benchmarks when no real dataset is at hand.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{write_manifest, ManifestRow};
use crate::features::ColorClass;
use crate::imaging::{save_png, RgbImage};
use crate::overlay::mask_image;
use crate::learn::Label;
use crate::segmentation::BinaryMask;

#[derive(Clone, Debug)]
pub struct SynthLesion {
    pub image: RgbImage,
    pub mask: BinaryMask,
    pub label: Label,
    /// Classes painted into the lesion.
    pub colors: Vec<ColorClass>,
}

const SKIN: [f64; 3] = [222.0, 172.0, 150.0];
const LIGHT_BROWN: [f64; 3] = [190.0, 140.0, 95.0];
const DARK_BROWN: [f64; 3] = [105.0, 62.0, 30.0];
const BLACK: [f64; 3] = [22.0, 16.0, 14.0];
const BLUE_GRAY: [f64; 3] = [95.0, 110.0, 140.0];

/// Radius profile `r(a) = base * (1 + sum amp_k cos(k a + phase_k))`.
struct Outline {
    cx: f64,
    cy: f64,
    base: f64,
    harmonics: Vec<(f64, f64, f64)>,
}

impl Outline {
    fn radius(&self, a: f64) -> f64 {
        self.base * (1.0 + self.harmonics.iter().map(|&(k, amp, ph)| amp * (k * a + ph).cos()).sum::<f64>())
    }

    /// Signed distance proxy: positive inside.
    fn depth(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.cx, y - self.cy);
        self.radius(dy.atan2(dx)) - dx.hypot(dy)
    }
}

fn mix(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    std::array::from_fn(|k| a[k] + (b[k] - a[k]) * t)
}

/// One lesion on a skin background. Melanoma-like lesions are larger,
/// lobed and multi-coloured; benign ones are smooth, near-elliptic and
/// one or two browns.
pub fn synth_lesion(width: usize, height: usize, label: Label, seed: u64) -> SynthLesion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = width.min(height) as f64;
    let melanoma = label == Label::Melanoma;
    let base = side * if melanoma { rng.gen_range(0.20..0.26) } else { rng.gen_range(0.15..0.22) };
    let mut harmonics = vec![(2.0, rng.gen_range(0.05..0.18), rng.gen_range(0.0..TAU))];
    if melanoma {
        for k in 3..=7 {
            harmonics.push((k as f64, rng.gen_range(0.02..0.06), rng.gen_range(0.0..TAU)));
        }
    } else {
        harmonics.push((3.0, rng.gen_range(0.0..0.02), rng.gen_range(0.0..TAU)));
    }
    let outline = Outline {
        cx: width as f64 / 2.0 + rng.gen_range(-0.08..0.08) * width as f64,
        cy: height as f64 / 2.0 + rng.gen_range(-0.08..0.08) * height as f64,
        base,
        harmonics,
    };

    let body = if melanoma || rng.gen_bool(0.5) { DARK_BROWN } else { LIGHT_BROWN };
    let mut colors = vec![if body == DARK_BROWN { ColorClass::DarkBrown } else { ColorClass::LightBrown }];
    // melanoma: an off-centre black blob and a blue-gray patch
    let spot = |frac: f64, rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(0.0..TAU);
        let d = outline.base * rng.gen_range(0.2..0.45);
        (outline.cx + d * a.cos(), outline.cy + d * a.sin(), outline.base * frac)
    };
    let black = melanoma.then(|| spot(0.35, &mut rng));
    let blue = melanoma.then(|| spot(0.3, &mut rng));
    if melanoma {
        colors.extend([ColorClass::Black, ColorClass::BlueGray]);
    }

    let noise = Normal::new(0.0, 5.0).expect("valid sigma");
    let mask = BinaryMask::from_fn(width, height, |x, y| outline.depth(x as f64, y as f64) >= 0.0);
    let (w, h) = (width as f64, height as f64);
    let image = RgbImage::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        // dark vignette towards the corners, as from a dermatoscope's optics
        let r = ((fx / w - 0.5).powi(2) + (fy / h - 0.5).powi(2)).sqrt();
        let shade = 1.0 - 0.25 * (r - 0.45).max(0.0) / 0.25;
        let depth = outline.depth(fx, fy);
        let mut c = body;
        if let Some((bx, by, br)) = black {
            let t = (1.0 - (fx - bx).hypot(fy - by) / br).clamp(0.0, 1.0);
            c = mix(c, BLACK, (2.0 * t).min(1.0));
        }
        if let Some((bx, by, br)) = blue {
            let t = (1.0 - (fx - bx).hypot(fy - by) / br).clamp(0.0, 1.0);
            c = mix(c, BLUE_GRAY, (2.0 * t).min(1.0));
        }
        // 1.5 px soft rim
        let t = ((depth + 0.75) / 1.5).clamp(0.0, 1.0);
        let px = mix(SKIN, c, t);
        px.map(|v| (v * shade.max(0.5) + noise.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
    });
    SynthLesion { image, mask, label, colors }
}

/// Writes `n_benign + n_melanoma` lesions as PNG images and masks under
/// `dir`, plus `manifest.csv`; returns the manifest path. Lesion `i` uses
/// seed `seed + i`.
pub fn write_synth_dataset(
    dir: &Path,
    n_benign: usize,
    n_melanoma: usize,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir.join("images")).map_err(|e| Error::io(dir, e))?;
    std::fs::create_dir_all(dir.join("masks")).map_err(|e| Error::io(dir, e))?;
    let mut rows = Vec::new();
    for i in 0..n_benign + n_melanoma {
        // interleave the classes so any prefix holds both
        let label = if i % 2 == 1 && i / 2 < n_melanoma || i / 2 >= n_benign { Label::Melanoma } else { Label::Benign };
        let s = synth_lesion(width, height, label, seed.wrapping_add(i as u64));
        let (img, mask) = (format!("images/lesion_{i:04}.png"), format!("masks/lesion_{i:04}_mask.png"));
        save_png(&s.image, dir.join(&img))?;
        save_png(&mask_image(&s.mask), dir.join(&mask))?;
        rows.push(ManifestRow::new(img, label.name().to_string(), Some(mask), &s.colors));
    }
    let path = dir.join("manifest.csv");
    write_manifest(&path, &rows)?;
    Ok(path)
}
