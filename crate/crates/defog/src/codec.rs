//! PNG (8/16-bit) and binary PPM (P6) input, 8-bit PNG output.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use defog_core::image::MIN_SIDE;
use defog_core::PlanarImage;

use crate::error::{DefogError, Result};

fn format_error(path: &Path, reason: impl Into<String>) -> DefogError {
    DefogError::Format { path: path.to_path_buf(), reason: reason.into() }
}

/// Reads a raster as a 3-channel image in `[0, 1]`. 8-bit samples map by
/// `v/255`, 16-bit samples by `v/65535`. Gray and alpha inputs are expanded
/// to RGB.
pub fn load_image(path: impl AsRef<Path>) -> Result<PlanarImage> {
    let path = path.as_ref();
    let mut magic = [0u8; 2];
    File::open(path).and_then(|mut f| f.read_exact(&mut magic)).map_err(|e| DefogError::io(path, e))?;

    let format = match &magic {
        [0x89, b'P'] => ImageFormat::Png,
        b"P6" => ImageFormat::Pnm,
        _ => return Err(format_error(path, "expected PNG or binary PPM (P6)")),
    };
    let file = File::open(path).map_err(|e| DefogError::io(path, e))?;
    let mut reader = ImageReader::new(BufReader::new(file));
    reader.set_format(format);
    let decoded = reader.decode().map_err(|e| format_error(path, e.to_string()))?;

    let (width, height) = (decoded.width(), decoded.height());
    if (width as usize) < MIN_SIDE || (height as usize) < MIN_SIDE {
        return Err(DefogError::TooSmall { path: path.to_path_buf(), width, height });
    }
    let (w, h) = (width as usize, height as usize);
    let n = w * h;
    let mut data = vec![0.0; 3 * n];
    let sixteen_bit = matches!(
        decoded,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    if sixteen_bit {
        for (k, px) in decoded.to_rgb16().pixels().enumerate() {
            for c in 0..3 {
                data[c * n + k] = f64::from(px.0[c]) / 65535.0;
            }
        }
    } else {
        for (k, px) in decoded.to_rgb8().pixels().enumerate() {
            for c in 0..3 {
                data[c * n + k] = f64::from(px.0[c]) / 255.0;
            }
        }
    }
    Ok(PlanarImage::new(h, w, 3, data)?)
}

/// 8-bit sample for an intensity: `round(255·clamp(v, 0, 1))`, halves away from zero.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

/// Writes an 8-bit PNG (RGB for 3 channels, gray for 1).
pub fn save_image(img: &PlanarImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let n = img.pixels();
    let buffer: Vec<u8> =
        (0..n).flat_map(|k| (0..img.channels()).map(move |c| (c, k))).map(|(c, k)| quantize(img.plane(c)[k])).collect();
    let dynamic = if img.channels() == 3 {
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, buffer).expect("buffer sized from image"))
    } else {
        DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, buffer).expect("buffer sized from image"))
    };
    dynamic.save_with_format(path, ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(io) => DefogError::io(path, io),
        other => format_error(path, other.to_string()),
    })
}

/// Rounds every sample to the nearest 8-bit level, as a save/load round trip would.
pub fn quantize_image(img: &PlanarImage) -> PlanarImage {
    let data = img.data().iter().map(|&v| f64::from(quantize(v)) / 255.0).collect();
    PlanarImage::new(img.height(), img.width(), img.channels(), data).expect("quantized samples stay in [0, 1]")
}
