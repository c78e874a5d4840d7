//! PNG and PPM/PGM frames to and from [`ImageBuffer`].

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};
use palmnav_core::ImageBuffer;

use crate::error::{PalmError, Result};

/// Loads any PNG or PNM file as an RGB buffer.
pub fn load_rgb(path: &Path) -> Result<ImageBuffer> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => PalmError::io(path, io),
        other => PalmError::format(path, other.to_string()),
    })?;
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(ImageBuffer::new(w as usize, h as usize, 3, rgb.into_raw())?)
}

/// Writes a one- or three-channel buffer; the format follows the extension.
pub fn save(img: &ImageBuffer, path: &Path) -> Result<()> {
    let format =
        ImageFormat::from_path(path).map_err(|e| PalmError::format(path, e.to_string()))?;
    to_dynamic(img)?
        .save_with_format(path, format)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => PalmError::io(path, io),
            other => PalmError::format(path, other.to_string()),
        })
}

/// PNG bytes of a buffer, for embedding.
pub fn png_bytes(img: &ImageBuffer) -> Result<Vec<u8>> {
    let mut out = std::io::Cursor::new(Vec::new());
    to_dynamic(img)?
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| PalmError::format("<memory>", e.to_string()))?;
    Ok(out.into_inner())
}

fn to_dynamic(img: &ImageBuffer) -> Result<DynamicImage> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let data = img.data().to_vec();
    let dynamic = match img.channels() {
        1 => GrayImage::from_raw(w, h, data).map(DynamicImage::ImageLuma8),
        3 => RgbImage::from_raw(w, h, data).map(DynamicImage::ImageRgb8),
        _ => None,
    };
    dynamic.ok_or_else(|| {
        PalmError::Invalid(format!("cannot encode a {}-channel image", img.channels()))
    })
}
