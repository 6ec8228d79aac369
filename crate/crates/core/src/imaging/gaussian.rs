use crate::error::{Error, Result};
use crate::imaging::Channel;
use crate::scalar::Scalar;

/// Isotropic zero-mean Gaussian, normalized to unit sum.
///
/// `weights` is the full `size x size` matrix; `factor` is its normalized
/// 1-D marginal, so `weights[i][j] == factor[i] * factor[j]` up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel<T> {
    size: usize,
    sigma: T,
    weights: Vec<T>,
    factor: Vec<T>,
}

impl<T: Scalar> GaussianKernel<T> {
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn sigma(&self) -> T {
        self.sigma
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.size / 2
    }

    /// Row-major `size x size` weights.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> T {
        self.weights[row * self.size + col]
    }

    pub fn factor(&self) -> &[T] {
        &self.factor
    }
}

pub fn gaussian_kernel<T: Scalar>(size: usize, sigma: T) -> Result<GaussianKernel<T>> {
    if size < 3 || size % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "gaussian kernel size must be odd and >= 3, got {size}"
        )));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("gaussian sigma must be positive, got {sigma}")));
    }
    let c = (size / 2) as f64;
    let two_var = 2.0 * sigma.to_f64_lossy().powi(2);

    let mut weights = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let (di, dj) = (i as f64 - c, j as f64 - c);
            weights.push((-(di * di + dj * dj) / two_var).exp());
        }
    }
    let total: f64 = weights.iter().sum();

    let mut factor: Vec<f64> = (0..size).map(|i| (-(i as f64 - c).powi(2) / two_var).exp()).collect();
    let ftotal: f64 = factor.iter().sum();
    factor.iter_mut().for_each(|f| *f /= ftotal);

    Ok(GaussianKernel {
        size,
        sigma,
        weights: weights.into_iter().map(|w| T::lit(w / total)).collect(),
        factor: factor.into_iter().map(T::lit).collect(),
    })
}

/// Same-size convolution with clamp-to-edge borders.
///
/// Runs as two 1-D passes; clamping is per axis, so this equals the direct
/// 2-D sum over `kernel.weights()`.
pub fn convolve<T: Scalar>(plane: &Channel<T>, kernel: &GaussianKernel<T>) -> Result<Channel<T>> {
    let (w, h) = (plane.width(), plane.height());
    let k = kernel.size();
    if w < k || h < k {
        return Err(Error::DimensionMismatch(format!(
            "plane {w}x{h} is smaller than the {k}x{k} kernel"
        )));
    }
    let r = kernel.radius() as isize;
    let f = kernel.factor();
    let src = plane.data();

    let mut tmp = vec![T::zero(); w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out = &mut tmp[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (t, &wt) in f.iter().enumerate() {
                let sx = (x as isize + t as isize - r).clamp(0, w as isize - 1) as usize;
                acc = acc + wt * row[sx];
            }
            *o = acc;
        }
    }

    let mut dst = vec![T::zero(); w * h];
    for y in 0..h {
        let out = &mut dst[y * w..(y + 1) * w];
        for (t, &wt) in f.iter().enumerate() {
            let sy = (y as isize + t as isize - r).clamp(0, h as isize - 1) as usize;
            let row = &tmp[sy * w..(sy + 1) * w];
            for (o, &v) in out.iter_mut().zip(row) {
                *o = *o + wt * v;
            }
        }
    }
    Channel::new(w, h, dst)
}
