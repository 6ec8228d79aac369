use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{rgb_to_hsv, Hsv, RgbImage};
use crate::scalar::Scalar;
use crate::segmentation::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorClass {
    White,
    Red,
    LightBrown,
    DarkBrown,
    BlueGray,
    Black,
}

impl ColorClass {
    /// Feature order of the structural distances.
    pub const ALL: [ColorClass; 6] = [
        ColorClass::White,
        ColorClass::Red,
        ColorClass::LightBrown,
        ColorClass::DarkBrown,
        ColorClass::BlueGray,
        ColorClass::Black,
    ];

    /// Highest priority first; the first matching rule wins.
    pub const PRECEDENCE: [ColorClass; 6] = [
        ColorClass::Black,
        ColorClass::BlueGray,
        ColorClass::DarkBrown,
        ColorClass::LightBrown,
        ColorClass::Red,
        ColorClass::White,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorClass::White => "white",
            ColorClass::Red => "red",
            ColorClass::LightBrown => "light_brown",
            ColorClass::DarkBrown => "dark_brown",
            ColorClass::BlueGray => "blue_gray",
            ColorClass::Black => "black",
        }
    }
}

/// `[lo, hi]`, or `[lo, hi)` when `open_hi` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub open_hi: bool,
}

impl Interval {
    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, open_hi: false }
    }

    pub const fn half_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, open_hi: true }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && if self.open_hi { v < self.hi } else { v <= self.hi }
    }
}

/// HSV box for one class. Hue in degrees; an empty hue list accepts any hue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRule {
    #[serde(default)]
    pub hue: Vec<Interval>,
    pub saturation: Interval,
    pub value: Interval,
}

impl ClassRule {
    pub fn matches(&self, hsv: &Hsv) -> bool {
        (self.hue.is_empty() || self.hue.iter().any(|i| i.contains(hsv.h)))
            && self.saturation.contains(hsv.s)
            && self.value.contains(hsv.v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColorTable {
    pub white: ClassRule,
    pub red: ClassRule,
    pub light_brown: ClassRule,
    pub dark_brown: ClassRule,
    pub blue_gray: ClassRule,
    pub black: ClassRule,
}

impl Default for ColorTable {
    fn default() -> Self {
        let unit = Interval::closed(0.0, 1.0);
        Self {
            white: ClassRule { hue: vec![], saturation: Interval::closed(0.0, 0.2), value: Interval::closed(0.8, 1.0) },
            red: ClassRule {
                hue: vec![Interval::closed(0.0, 10.0), Interval::half_open(350.0, 360.0)],
                saturation: Interval::closed(0.4, 1.0),
                value: Interval::closed(0.4, 1.0),
            },
            light_brown: ClassRule {
                hue: vec![Interval::closed(20.0, 40.0)],
                saturation: Interval::closed(0.2, 0.6),
                value: Interval::closed(0.5, 1.0),
            },
            dark_brown: ClassRule {
                hue: vec![Interval::closed(10.0, 30.0)],
                saturation: Interval::closed(0.3, 1.0),
                value: Interval::half_open(0.15, 0.5),
            },
            blue_gray: ClassRule {
                hue: vec![Interval::closed(180.0, 260.0)],
                saturation: Interval::closed(0.1, 1.0),
                value: Interval::closed(0.2, 0.8),
            },
            black: ClassRule { hue: vec![], saturation: unit, value: Interval::half_open(0.0, 0.15) },
        }
    }
}

impl ColorTable {
    pub fn rule(&self, class: ColorClass) -> &ClassRule {
        match class {
            ColorClass::White => &self.white,
            ColorClass::Red => &self.red,
            ColorClass::LightBrown => &self.light_brown,
            ColorClass::DarkBrown => &self.dark_brown,
            ColorClass::BlueGray => &self.blue_gray,
            ColorClass::Black => &self.black,
        }
    }

    pub fn classify(&self, rgb: [u8; 3]) -> Option<ColorClass> {
        let hsv = rgb_to_hsv(rgb);
        ColorClass::PRECEDENCE.into_iter().find(|&c| self.rule(c).matches(&hsv))
    }

    pub fn validate(&self) -> Result<()> {
        for c in ColorClass::ALL {
            let r = self.rule(c);
            let bad = |i: &Interval, max: f64| !(i.lo.is_finite() && i.hi.is_finite() && i.lo <= i.hi && i.lo >= 0.0 && i.hi <= max);
            if r.hue.iter().any(|i| bad(i, 360.0)) || bad(&r.saturation, 1.0) || bad(&r.value, 1.0) {
                return Err(Error::InvalidParameter(format!("colour rule `{}` has an invalid interval", c.name())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorRegion<T> {
    pub color_class: ColorClass,
    pub pixel_count: usize,
    pub weighted_centroid: (T, T),
}

/// Per-pixel class of every lesion pixel (`None` outside the lesion or
/// outside every rule).
pub fn classify_pixels(img: &RgbImage, mask: &BinaryMask, table: &ColorTable) -> Result<Vec<Option<ColorClass>>> {
    if (img.width(), img.height()) != (mask.width(), mask.height()) {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs mask {}x{}",
            img.width(),
            img.height(),
            mask.width(),
            mask.height()
        )));
    }
    let w = mask.width();
    Ok(mask
        .bits()
        .iter()
        .enumerate()
        .map(|(i, &inside)| if inside { table.classify(img.get(i % w, i / w)) } else { None })
        .collect())
}

/// Regions in feature order holding at least `min_fraction` of the lesion.
pub fn color_variegation<T: Scalar>(
    img: &RgbImage,
    mask: &BinaryMask,
    table: &ColorTable,
    min_fraction: f64,
) -> Result<Vec<ColorRegion<T>>> {
    let labels = classify_pixels(img, mask, table)?;
    let area = mask.count();
    let w = mask.width();
    let mut acc = [(0usize, 0.0f64, 0.0f64); 6];
    for (i, c) in labels.iter().enumerate() {
        if let Some(c) = c {
            let a = &mut acc[c.index()];
            a.0 += 1;
            a.1 += (i % w) as f64;
            a.2 += (i / w) as f64;
        }
    }
    let threshold = min_fraction * area as f64;
    Ok(ColorClass::ALL
        .into_iter()
        .zip(acc)
        .filter(|(_, (n, _, _))| *n > 0 && *n as f64 >= threshold)
        .map(|(class, (n, sx, sy))| ColorRegion {
            color_class: class,
            pixel_count: n,
            weighted_centroid: (T::lit(sx / n as f64), T::lit(sy / n as f64)),
        })
        .collect())
}

/// Distance from the lesion centroid to each class centroid, in units of
/// the equivalent radius `sqrt(area / pi)`; 0 for absent classes.
pub fn structural_asymmetry<T: Scalar>(centroid: (T, T), area: usize, regions: &[ColorRegion<T>]) -> Result<[T; 6]> {
    if area == 0 {
        return Err(Error::EmptyMask);
    }
    if !centroid.0.is_finite() || !centroid.1.is_finite() {
        return Err(Error::InvalidParameter("lesion centroid is not finite".into()));
    }
    let r_eq = T::lit((area as f64 / std::f64::consts::PI).sqrt());
    let mut d = [T::zero(); 6];
    for r in regions {
        let (dx, dy) = (r.weighted_centroid.0 - centroid.0, r.weighted_centroid.1 - centroid.1);
        d[r.color_class.index()] = (dx * dx + dy * dy).sqrt() / r_eq;
    }
    Ok(d)
}
