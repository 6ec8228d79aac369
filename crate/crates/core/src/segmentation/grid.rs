use crate::error::{Error, Result};
use crate::segmentation::BinaryMask;

pub(crate) const INTERIOR: i8 = -3;
pub(crate) const INNER: i8 = -1;
pub(crate) const OUTER: i8 = 1;
pub(crate) const EXTERIOR: i8 = 3;

/// Quantized level-set state: `phi` in {-3, -1, 1, 3} plus the two boundary
/// lists straddling the curve.
///
/// Lists hold linear pixel indices in a fixed order. Pixels on the image
/// border never enter the interior, and reads outside the grid see `3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSetGrid {
    width: usize,
    height: usize,
    pub(crate) phi: Vec<i8>,
    pub(crate) l_in: Vec<usize>,
    pub(crate) l_out: Vec<usize>,
}

impl LevelSetGrid {
    /// Builds the grid whose interior is `interior`, minus any border pixels.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        let (w, h) = (mask.width(), mask.height());
        let mut phi = vec![EXTERIOR; w * h];
        for y in 1..h.saturating_sub(1) {
            for x in 1..w.saturating_sub(1) {
                if mask.get(x, y) {
                    phi[y * w + x] = INTERIOR;
                }
            }
        }
        let mut grid = Self { width: w, height: h, phi, l_in: Vec::new(), l_out: Vec::new() };
        for i in 0..w * h {
            let inside = grid.phi[i] < 0;
            let straddles = grid.neighbors(i).any(|n| match n {
                Some(j) => (grid.phi[j] < 0) != inside,
                None => inside,
            });
            if straddles {
                if inside {
                    grid.phi[i] = INNER;
                    grid.l_in.push(i);
                } else {
                    grid.phi[i] = OUTER;
                    grid.l_out.push(i);
                }
            }
        }
        grid
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn phi(&self, x: usize, y: usize) -> i8 {
        self.phi[y * self.width + x]
    }

    pub fn phi_values(&self) -> &[i8] {
        &self.phi
    }

    pub fn l_in(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.l_in.iter().map(|&i| (i % self.width, i / self.width))
    }

    pub fn l_out(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.l_out.iter().map(|&i| (i % self.width, i / self.width))
    }

    pub fn l_in_len(&self) -> usize {
        self.l_in.len()
    }

    pub fn l_out_len(&self) -> usize {
        self.l_out.len()
    }

    pub fn interior_count(&self) -> usize {
        self.phi.iter().filter(|&&p| p < 0).count()
    }

    /// `H(-phi)`: true where `phi < 0`.
    pub fn interior_mask(&self) -> BinaryMask {
        BinaryMask::from_bits(self.width, self.height, self.phi.iter().map(|&p| p < 0).collect())
            .expect("sized from grid")
    }

    /// 4-neighbours of `i`; `None` marks a position outside the grid.
    #[inline]
    pub(crate) fn neighbors(&self, i: usize) -> impl Iterator<Item = Option<usize>> {
        let (w, h) = (self.width, self.height);
        let (x, y) = (i % w, i / w);
        [
            (x > 0).then(|| i - 1),
            (x + 1 < w).then(|| i + 1),
            (y > 0).then(|| i - w),
            (y + 1 < h).then(|| i + w),
        ]
        .into_iter()
    }

    #[inline]
    fn phi_or_frame(&self, n: Option<usize>) -> i8 {
        n.map_or(EXTERIOR, |j| self.phi[j])
    }

    #[inline]
    pub(crate) fn is_border(&self, i: usize) -> bool {
        let (x, y) = (i % self.width, i / self.width);
        x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height
    }

    /// Moves an outer point inward. Returns `false` for border pixels.
    pub(crate) fn switch_in(&mut self, i: usize, new_out: &mut Vec<usize>) -> bool {
        if self.is_border(i) {
            return false;
        }
        self.phi[i] = INNER;
        self.l_in.push(i);
        for n in self.neighbors(i).flatten() {
            if self.phi[n] == EXTERIOR {
                self.phi[n] = OUTER;
                new_out.push(n);
            }
        }
        true
    }

    /// Moves an inner point outward.
    pub(crate) fn switch_out(&mut self, i: usize, new_in: &mut Vec<usize>) {
        self.phi[i] = OUTER;
        self.l_out.push(i);
        for n in self.neighbors(i).flatten() {
            if self.phi[n] == INTERIOR {
                self.phi[n] = INNER;
                new_in.push(n);
            }
        }
    }

    /// Drops `l_in` points with no exterior neighbour (they become -3).
    pub(crate) fn clean_l_in(&mut self) {
        let mut list = std::mem::take(&mut self.l_in);
        list.retain(|&i| {
            let keep = self.phi[i] == INNER && self.neighbors(i).any(|n| self.phi_or_frame(n) > 0);
            if !keep && self.phi[i] == INNER {
                self.phi[i] = INTERIOR;
            }
            keep
        });
        self.l_in = list;
    }

    /// Drops `l_out` points with no interior neighbour (they become 3).
    pub(crate) fn clean_l_out(&mut self) {
        let mut list = std::mem::take(&mut self.l_out);
        list.retain(|&i| {
            let keep = self.phi[i] == OUTER && self.neighbors(i).any(|n| self.phi_or_frame(n) < 0);
            if !keep && self.phi[i] == OUTER {
                self.phi[i] = EXTERIOR;
            }
            keep
        });
        self.l_out = list;
    }

    /// Full-grid check of every structural invariant.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let (w, h) = (self.width, self.height);
        let mut in_list = vec![0u8; w * h];
        for &i in &self.l_in {
            if i >= w * h {
                return Err(format!("l_in index {i} outside grid"));
            }
            if in_list[i] != 0 {
                return Err(format!("point {i} listed twice"));
            }
            in_list[i] = 1;
        }
        for &i in &self.l_out {
            if i >= w * h {
                return Err(format!("l_out index {i} outside grid"));
            }
            if in_list[i] != 0 {
                return Err(format!("point {i} listed twice"));
            }
            in_list[i] = 2;
        }
        for i in 0..w * h {
            let p = self.phi[i];
            let mut ns = self.neighbors(i).map(|n| self.phi_or_frame(n));
            let ok = match p {
                INTERIOR => ns.all(|q| q < 0) && in_list[i] == 0,
                INNER => in_list[i] == 1 && ns.any(|q| q > 0),
                OUTER => in_list[i] == 2 && ns.any(|q| q < 0),
                EXTERIOR => ns.all(|q| q > 0) && in_list[i] == 0,
                _ => false,
            };
            if !ok {
                return Err(format!("invariant broken at ({}, {}) with phi {p}", i % w, i / w));
            }
            if p < 0 && self.is_border(i) {
                return Err(format!("border pixel ({}, {}) is interior", i % w, i / w));
            }
        }
        Ok(())
    }
}

/// Centred axis-aligned ellipse with semi-axes `fraction * width / 2` and
/// `fraction * height / 2`.
pub fn init_ellipse(width: usize, height: usize, fraction: f64) -> Result<LevelSetGrid> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("init fraction must be in (0, 1], got {fraction}")));
    }
    let (a, b) = (fraction * width as f64 / 2.0, fraction * height as f64 / 2.0);
    if a < 2.0 || b < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "initial ellipse is degenerate: semi-axes {a:.2} x {b:.2} px"
        )));
    }
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let inside = BinaryMask::from_fn(width, height, |x, y| {
        let (dx, dy) = ((x as f64 - cx) / a, (y as f64 - cy) / b);
        dx * dx + dy * dy < 1.0
    });
    Ok(LevelSetGrid::from_mask(&inside))
}
