//! Whole-image statistical focus indicators: the energy family, Shannon
//! entropy and the entropy focus criterion (EFC) with its
//! dimension-adjusted variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};

/// The five statistical indicators for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatFeatures {
    pub mean_pixel_energy: f64,
    pub rms_channel_energy: f64,
    pub shannon_entropy: f64,
    pub efc: f64,
    pub nefc: f64,
}

impl StatFeatures {
    pub fn compute(rgb: &RgbImage, gray: &GrayImage) -> Result<StatFeatures> {
        Ok(StatFeatures {
            mean_pixel_energy: mean_pixel_energy(gray),
            rms_channel_energy: rms_channel_energy(rgb),
            shannon_entropy: shannon_entropy(gray)?,
            efc: efc(gray)?,
            nefc: nefc(gray)?,
        })
    }
}

/// Sum of squared pixel intensities.
pub fn energy(img: &GrayImage) -> f64 {
    img.pixels().as_slice().iter().map(|&v| v * v).sum()
}

/// Energy divided by the pixel count.
pub fn mean_pixel_energy(img: &GrayImage) -> f64 {
    energy(img) / img.pixels().len() as f64
}

/// Root mean square of the three per-channel energies.
pub fn rms_channel_energy(img: &RgbImage) -> f64 {
    let channel_energy =
        |m: &crate::matrix::Matrix| -> f64 { m.as_slice().iter().map(|&v| v * v).sum() };
    let (er, eg, eb) = (
        channel_energy(img.red()),
        channel_energy(img.green()),
        channel_energy(img.blue()),
    );
    ((er * er + eg * eg + eb * eb) / 3.0).sqrt()
}

/// Element-wise Shannon entropy, −Σ x·log₂x with the x = 0 term taken
/// as 0. Operates on raw pixel values, not a histogram.
pub fn shannon_entropy(img: &GrayImage) -> Result<f64> {
    let mut total = 0.0;
    for &x in img.pixels().as_slice() {
        if x < 0.0 {
            return Err(Error::NegativeIntensity(x));
        }
        if x > 0.0 {
            total += x * x.log2();
        }
    }
    Ok(-total)
}

/// Entropy focus criterion: pixel values are normalised by the image's
/// total energy sqrt(Σ I²) and fed through −Σ y·ln y.
pub fn efc(img: &GrayImage) -> Result<f64> {
    let s_max = energy(img).sqrt();
    if s_max == 0.0 {
        return Err(Error::AllZeroImage);
    }
    let mut total = 0.0;
    for &x in img.pixels().as_slice() {
        if x < 0.0 {
            return Err(Error::NegativeIntensity(x));
        }
        if x > 0.0 {
            let y = x / s_max;
            total += y * y.ln();
        }
    }
    Ok(-total)
}

/// EFC rescaled by sqrt(M·N) / sqrt(ln(M·N)) to temper the raw
/// criterion's growth with image size.
pub fn nefc(img: &GrayImage) -> Result<f64> {
    let mn = img.pixels().len() as f64;
    if mn < 2.0 {
        return Err(Error::Degenerate("NEFC needs at least two pixels (ln(M*N) = 0)"));
    }
    Ok(efc(img)? * mn.sqrt() / mn.ln().sqrt())
}
