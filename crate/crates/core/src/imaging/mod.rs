//! Decoding, resizing, colour-space transforms and Gaussian smoothing.

mod color;
mod gaussian;
mod io;
mod raster;
mod resize;

pub use color::{rgb_to_hsv, rgb_to_yuv, Hsv};
pub use gaussian::{convolve, gaussian_kernel, GaussianKernel};
pub use io::{load_image, save_png, MIN_IMAGE_SIDE};
pub use raster::{Channel, PlanarImage, RgbImage};
pub use resize::{resize_bilinear, resize_long_edge};
