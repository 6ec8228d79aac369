use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Interleaved 8-bit RGB raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::DimensionMismatch(format!(
                "pixel buffer has {} bytes, expected {}",
                pixels.len(),
                width * height * 3
            )));
        }
        Ok(Self { width, height, pixels })
    }

    /// Constant-colour image.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let pixels = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self { width, height, pixels }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, pixels }
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
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }
}

/// A single floating-point channel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> Channel<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self { width, height, data: vec![value; width * height] }
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
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Named floating-point planes sharing one grid (Y'/U/V after conversion).
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarImage<T> {
    width: usize,
    height: usize,
    names: Vec<String>,
    planes: Vec<Channel<T>>,
}

impl<T: Scalar> PlanarImage<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, names: Vec::new(), planes: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, plane: Channel<T>) -> Result<()> {
        if plane.width != self.width || plane.height != self.height {
            return Err(Error::DimensionMismatch(format!(
                "plane is {}x{}, image is {}x{}",
                plane.width, plane.height, self.width, self.height
            )));
        }
        if !plane.is_finite() {
            return Err(Error::InvalidParameter("plane contains non-finite values".into()));
        }
        self.names.push(name.into());
        self.planes.push(plane);
        Ok(())
    }

    pub fn with_plane(mut self, name: impl Into<String>, plane: Channel<T>) -> Result<Self> {
        self.push(name, plane)?;
        Ok(self)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn planes(&self) -> &[Channel<T>] {
        &self.planes
    }

    pub fn plane(&self, name: &str) -> Option<&Channel<T>> {
        self.names.iter().position(|n| n == name).map(|i| &self.planes[i])
    }

    /// Applies `f` to every plane, keeping the names.
    pub fn try_map(&self, mut f: impl FnMut(&Channel<T>) -> Result<Channel<T>>) -> Result<Self> {
        let mut out = Self::new(self.width, self.height);
        for (name, plane) in self.names.iter().zip(&self.planes) {
            out.push(name.clone(), f(plane)?)?;
        }
        Ok(out)
    }
}
