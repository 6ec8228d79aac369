use crate::error::{Error, Result};
use crate::imaging::{gaussian_kernel, Channel, GaussianKernel, PlanarImage};
use crate::scalar::Scalar;
use crate::segmentation::{init_ellipse, BinaryMask, LevelSetGrid, SegmentationParams};

/// Relative gap below which interior and exterior means are treated as equal.
const CONTRAST_EPS: f64 = 1e-9;

/// Result of [`evolve`].
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation<T> {
    /// Largest 4-connected component of the final interior.
    pub mask: BinaryMask,
    /// Evolutions run, each one data cycle plus (unless converged) one smoothing cycle.
    pub iterations_used: usize,
    /// `false` when the evolution cap was hit before the data cycle settled.
    pub converged: bool,
    pub interior_mean: T,
    pub exterior_mean: T,
}

/// `u = sum_c w_c * plane_c / sum_c w_c`, weights matched to planes by position.
pub fn weighted_field<T: Scalar>(planes: &PlanarImage<T>, weights: &[T; 3]) -> Result<Channel<T>> {
    if planes.is_empty() {
        return Err(Error::InvalidParameter("no planes to segment".into()));
    }
    let total: T = weights.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::InvalidParameter("channel weights sum to zero".into()));
    }
    for (i, w) in weights.iter().enumerate() {
        if *w != T::zero() && i >= planes.len() {
            return Err(Error::InvalidParameter(format!(
                "channel weight {i} is nonzero but the image has {} plane(s)",
                planes.len()
            )));
        }
    }
    let n = planes.width() * planes.height();
    let mut u = vec![T::zero(); n];
    for (plane, &w) in planes.planes().iter().zip(weights) {
        if w == T::zero() {
            continue;
        }
        let scale = w / total;
        for (acc, &v) in u.iter_mut().zip(plane.data()) {
            *acc = *acc + scale * v;
        }
    }
    Channel::new(planes.width(), planes.height(), u)
}

fn check_dims<T: Scalar>(grid: &LevelSetGrid, planes: &PlanarImage<T>) -> Result<()> {
    if grid.width() != planes.width() || grid.height() != planes.height() {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs planes {}x{}",
            grid.width(),
            grid.height(),
            planes.width(),
            planes.height()
        )));
    }
    Ok(())
}

/// Mean of the weighted field inside (`phi < 0`) and outside (`phi > 0`).
pub fn region_means<T: Scalar>(
    grid: &LevelSetGrid,
    planes: &PlanarImage<T>,
    weights: &[T; 3],
) -> Result<(T, T)> {
    check_dims(grid, planes)?;
    let u = weighted_field(planes, weights)?;
    RegionSums::scan(grid, u.data()).means().map_err(|r| r.at(0))
}

/// Runs `params.n_a` data passes. Returns whether any point switched.
pub fn data_cycle<T: Scalar>(
    grid: &mut LevelSetGrid,
    planes: &PlanarImage<T>,
    params: &SegmentationParams<T>,
) -> Result<bool> {
    params.validate()?;
    check_dims(grid, planes)?;
    let u = weighted_field(planes, &params.channel_weights)?;
    let mut sums = RegionSums::scan(grid, u.data());
    data_passes(grid, u.data(), &mut sums, params).map_err(|r| r.at(0))
}

/// Runs `params.n_s` smoothing passes on the Gaussian-filtered interior indicator.
pub fn smoothing_cycle<T: Scalar>(grid: &mut LevelSetGrid, params: &SegmentationParams<T>) -> Result<()> {
    params.validate()?;
    let kernel = smoothing_kernel(params)?;
    smoothing_passes(grid, &kernel, params.n_s, &mut |_, _| {});
    Ok(())
}

/// Evolves from the initial ellipse until the data cycle settles or the cap is hit.
pub fn evolve<T: Scalar>(planes: &PlanarImage<T>, params: &SegmentationParams<T>) -> Result<Segmentation<T>> {
    evolve_with(planes, params, |_, _| {})
}

/// [`evolve`] with a callback invoked after every evolution.
pub fn evolve_with<T: Scalar>(
    planes: &PlanarImage<T>,
    params: &SegmentationParams<T>,
    mut observer: impl FnMut(usize, &LevelSetGrid),
) -> Result<Segmentation<T>> {
    params.validate()?;
    let u = weighted_field(planes, &params.channel_weights)?;
    let u = u.data();
    let kernel = smoothing_kernel(params)?;
    let mut grid = init_ellipse(planes.width(), planes.height(), params.init_fraction)?;
    let mut sums = RegionSums::scan(&grid, u);

    let (c1, c2): (T, T) = sums.means().map_err(|r| r.at(0))?;
    if !has_contrast(c1, c2) {
        return Err(Collapse::NoContrast.at(0));
    }

    let mut iterations_used = 0;
    let mut converged = false;
    for it in 1..=params.max_evolutions {
        iterations_used = it;
        let changed = data_passes(&mut grid, u, &mut sums, params).map_err(|r| r.at(it))?;
        if !changed {
            converged = true;
            observer(it, &grid);
            break;
        }
        smoothing_passes(&mut grid, &kernel, params.n_s, &mut |i, entered| {
            if entered {
                sums.add(u[i]);
            } else {
                sums.remove(u[i]);
            }
        });
        sums.check().map_err(|r| r.at(it))?;
        observer(it, &grid);
    }

    let interior = grid.interior_mask();
    let mask = interior.largest_component();
    let n = mask.count();
    if n == 0 || n == mask.width() * mask.height() {
        return Err(Collapse::Empty.at(iterations_used));
    }
    let (c1, c2): (T, T) = RegionSums::scan(&grid, u).means().map_err(|r| r.at(iterations_used))?;
    if !has_contrast(c1, c2) {
        return Err(Collapse::NoContrast.at(iterations_used));
    }
    Ok(Segmentation { mask, iterations_used, converged, interior_mean: c1, exterior_mean: c2 })
}

fn has_contrast<T: Scalar>(c1: T, c2: T) -> bool {
    let (a, b) = (c1.to_f64_lossy(), c2.to_f64_lossy());
    (a - b).abs() > CONTRAST_EPS * (1.0 + a.abs() + b.abs())
}

fn smoothing_kernel<T: Scalar>(params: &SegmentationParams<T>) -> Result<GaussianKernel<f64>> {
    gaussian_kernel(params.smooth_kernel_size, params.smooth_kernel_sigma.to_f64_lossy())
}

#[derive(Clone, Copy, Debug)]
enum Collapse {
    Empty,
    NoContrast,
}

impl Collapse {
    fn at(self, iteration: usize) -> Error {
        let reason = match self {
            Collapse::Empty => "curve collapsed: interior or exterior is empty",
            Collapse::NoContrast => "no contrast between interior and exterior",
        };
        Error::SegmentationFailed { iteration, reason: reason.into() }
    }
}

/// Running interior/total sums of the field, accumulated in f64.
struct RegionSums {
    sum_in: f64,
    n_in: usize,
    sum_all: f64,
    n_all: usize,
}

impl RegionSums {
    fn scan<T: Scalar>(grid: &LevelSetGrid, u: &[T]) -> Self {
        let (mut sum_in, mut n_in, mut sum_all) = (0.0, 0, 0.0);
        for (&p, &v) in grid.phi.iter().zip(u) {
            let v = v.to_f64_lossy();
            sum_all += v;
            if p < 0 {
                sum_in += v;
                n_in += 1;
            }
        }
        Self { sum_in, n_in, sum_all, n_all: u.len() }
    }

    #[inline]
    fn add<T: Scalar>(&mut self, v: T) {
        self.sum_in += v.to_f64_lossy();
        self.n_in += 1;
    }

    #[inline]
    fn remove<T: Scalar>(&mut self, v: T) {
        self.sum_in -= v.to_f64_lossy();
        self.n_in -= 1;
    }

    fn check(&self) -> std::result::Result<(), Collapse> {
        if self.n_in == 0 || self.n_in == self.n_all {
            Err(Collapse::Empty)
        } else {
            Ok(())
        }
    }

    fn means<T: Scalar>(&self) -> std::result::Result<(T, T), Collapse> {
        self.check()?;
        let n_out = self.n_all - self.n_in;
        let c1 = self.sum_in / self.n_in as f64;
        let c2 = (self.sum_all - self.sum_in) / n_out as f64;
        Ok((T::lit(c1), T::lit(c2)))
    }
}

fn data_passes<T: Scalar>(
    grid: &mut LevelSetGrid,
    u: &[T],
    sums: &mut RegionSums,
    params: &SegmentationParams<T>,
) -> std::result::Result<bool, Collapse> {
    let l1 = T::lit(params.lambda1 as f64);
    let l2 = T::lit(params.lambda2 as f64);
    let mut changed = false;
    for _ in 0..params.n_a {
        let (c1, c2): (T, T) = sums.means()?;
        let speed = |v: T| l2 * (v - c2) * (v - c2) - l1 * (v - c1) * (v - c1);
        let mut moved = false;

        let old = std::mem::take(&mut grid.l_out);
        let mut kept = Vec::with_capacity(old.len() + 16);
        let mut fresh = Vec::new();
        for i in old {
            if speed(u[i]) > T::zero() && grid.switch_in(i, &mut fresh) {
                sums.add(u[i]);
                moved = true;
            } else {
                kept.push(i);
            }
        }
        kept.append(&mut fresh);
        grid.l_out = kept;
        grid.clean_l_in();

        let old = std::mem::take(&mut grid.l_in);
        let mut kept = Vec::with_capacity(old.len() + 16);
        for i in old {
            if speed(u[i]) < T::zero() {
                grid.switch_out(i, &mut fresh);
                sums.remove(u[i]);
                moved = true;
            } else {
                kept.push(i);
            }
        }
        kept.append(&mut fresh);
        grid.l_in = kept;
        grid.clean_l_out();

        #[cfg(test)]
        grid.audit().expect("level-set invariants after data pass");

        sums.check()?;
        if !moved {
            break;
        }
        changed = true;
    }
    Ok(changed)
}

/// `G * H(-phi)` at pixel `i`; positions outside the grid count as exterior.
fn filtered_interior(grid: &LevelSetGrid, kernel: &GaussianKernel<f64>, i: usize) -> f64 {
    let (w, h) = (grid.width() as isize, grid.height() as isize);
    let r = kernel.radius() as isize;
    let k = kernel.size();
    let (x, y) = ((i % grid.width()) as isize, (i / grid.width()) as isize);
    let weights = kernel.weights();
    let mut acc = 0.0;
    for dy in -r..=r {
        let yy = y + dy;
        if yy < 0 || yy >= h {
            continue;
        }
        let row = yy as usize * grid.width();
        let wrow = (dy + r) as usize * k;
        for dx in -r..=r {
            let xx = x + dx;
            if xx < 0 || xx >= w {
                continue;
            }
            if grid.phi[row + xx as usize] < 0 {
                acc += weights[wrow + (dx + r) as usize];
            }
        }
    }
    acc
}

fn smoothing_passes(
    grid: &mut LevelSetGrid,
    kernel: &GaussianKernel<f64>,
    n_s: usize,
    on_switch: &mut impl FnMut(usize, bool),
) {
    for _ in 0..n_s {
        let old = std::mem::take(&mut grid.l_out);
        let mut kept = Vec::with_capacity(old.len() + 16);
        let mut fresh = Vec::new();
        for i in old {
            if filtered_interior(grid, kernel, i) > 0.5 && grid.switch_in(i, &mut fresh) {
                on_switch(i, true);
            } else {
                kept.push(i);
            }
        }
        kept.append(&mut fresh);
        grid.l_out = kept;
        grid.clean_l_in();

        let old = std::mem::take(&mut grid.l_in);
        let mut kept = Vec::with_capacity(old.len() + 16);
        for i in old {
            if filtered_interior(grid, kernel, i) < 0.5 {
                grid.switch_out(i, &mut fresh);
                on_switch(i, false);
            } else {
                kept.push(i);
            }
        }
        kept.append(&mut fresh);
        grid.l_in = kept;
        grid.clean_l_out();

        #[cfg(test)]
        grid.audit().expect("level-set invariants after smoothing pass");
    }
}
