use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::RgbImage;

/// Smallest accepted side length for decoded images.
pub const MIN_IMAGE_SIDE: usize = 8;

/// Decodes PNG/BMP/JPEG into 8-bit RGB. Alpha is dropped and grayscale is
/// promoted to three equal channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader
        .decode()
        .map_err(|e| Error::Decode { path: path.to_path_buf(), message: e.to_string() })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if w < MIN_IMAGE_SIDE || h < MIN_IMAGE_SIDE {
        return Err(Error::ImageTooSmall { width: w, height: h, min: MIN_IMAGE_SIDE });
    }
    RgbImage::new(w, h, rgb.into_raw())
}

pub fn save_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    image::save_buffer_with_format(
        path,
        img.pixels(),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::Rgb8,
        image::ImageFormat::Png,
    )
    .map_err(|e| Error::Encode { path: path.to_path_buf(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_black() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("black.png");
        save_png(&RgbImage::filled(16, 16, [0, 0, 0]), &path).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height()), (16, 16));
        assert_eq!(img.pixels().len(), 768);
        assert!(img.pixels().iter().all(|&b| b == 0));
    }

    #[test]
    fn grayscale_and_alpha_are_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let gray = dir.path().join("gray.png");
        image::GrayImage::from_pixel(10, 9, image::Luma([77])).save(&gray).unwrap();
        let img = load_image(&gray).unwrap();
        assert!(img.pixels().iter().all(|&b| b == 77));

        let rgba = dir.path().join("rgba.png");
        image::RgbaImage::from_pixel(10, 9, image::Rgba([1, 2, 3, 4])).save(&rgba).unwrap();
        assert_eq!(load_image(&rgba).unwrap().get(0, 0), [1, 2, 3]);
    }

    #[test]
    fn bmp_is_supported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bmp");
        image::RgbImage::from_pixel(12, 8, image::Rgb([9, 8, 7])).save(&path).unwrap();
        assert_eq!(load_image(&path).unwrap().get(11, 7), [9, 8, 7]);
    }

    #[test]
    fn errors() {
        let dir = tempfile::tempdir().unwrap();
        let tiny = dir.path().join("tiny.png");
        save_png(&RgbImage::filled(1, 1, [5, 5, 5]), &tiny).unwrap();
        assert!(matches!(load_image(&tiny), Err(Error::ImageTooSmall { .. })));

        let missing = dir.path().join("nope.png");
        assert!(matches!(load_image(&missing), Err(Error::NotFound(_))));

        let junk = dir.path().join("junk.png");
        std::fs::write(&junk, b"definitely not an image").unwrap();
        assert!(matches!(load_image(&junk), Err(Error::Decode { .. })));
    }
}
