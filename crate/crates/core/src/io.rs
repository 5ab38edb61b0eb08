//! Image file decoding and debug-map export. Compiled only with the
//! `io` feature so the core stays portable to wasm.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};
use crate::matrix::Matrix;

/// Decodes a PNG or JPEG file into planar RGB with channels in `[0, 1]`.
///
/// 8-bit sources are divided by 255, 16-bit sources by 65535, so the two
/// depths land on the same scale.
pub fn load_image(path: &Path) -> Result<RgbImage> {
    let read_err = |reason: String| Error::ImageRead {
        path: path.display().to_string(),
        reason,
    };
    let dynamic = image::open(path).map_err(|e| read_err(e.to_string()))?;

    use image::DynamicImage as D;
    let sixteen_bit = matches!(
        dynamic,
        D::ImageLuma16(_) | D::ImageLumaA16(_) | D::ImageRgb16(_) | D::ImageRgba16(_)
    );
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension);
    }

    let mut r = Matrix::zeros(h, w);
    let mut g = Matrix::zeros(h, w);
    let mut b = Matrix::zeros(h, w);
    if sixteen_bit {
        let buf = dynamic.to_rgb16();
        for (y, row) in buf.rows().enumerate() {
            for (x, px) in row.enumerate() {
                r.set(y, x, px.0[0] as f64 / 65535.0);
                g.set(y, x, px.0[1] as f64 / 65535.0);
                b.set(y, x, px.0[2] as f64 / 65535.0);
            }
        }
    } else {
        let buf = dynamic.to_rgb8();
        for (y, row) in buf.rows().enumerate() {
            for (x, px) in row.enumerate() {
                r.set(y, x, px.0[0] as f64 / 255.0);
                g.set(y, x, px.0[1] as f64 / 255.0);
                b.set(y, x, px.0[2] as f64 / 255.0);
            }
        }
    }
    RgbImage::from_planes(r, g, b)
}

/// Decodes a file and converts straight to grayscale.
pub fn load_grayscale(path: &Path) -> Result<GrayImage> {
    Ok(crate::image::to_grayscale(&load_image(path)?))
}

/// Writes a scalar map as a 16-bit grayscale PNG.
///
/// Values are clamped to `[0, 1]` and quantised to the full `u16` range,
/// which keeps enough resolution to inspect filter responses that live in
/// a narrow band.
pub fn save_map_png16(path: &Path, map: &Matrix) -> Result<()> {
    let write_err = |reason: String| Error::ImageWrite {
        path: path.display().to_string(),
        reason,
    };
    if map.rows() == 0 || map.cols() == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut buf = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(
        map.cols() as u32,
        map.rows() as u32,
    );
    for (x, y, px) in buf.enumerate_pixels_mut() {
        let v = map.get(y as usize, x as usize).clamp(0.0, 1.0);
        px.0[0] = (v * 65535.0).round() as u16;
    }
    buf.save(path).map_err(|e| write_err(e.to_string()))
}
