//! Image containers and fundus segmentation.
//!
//! Pixels are `f64` in `[0, 1]`. Retinal photographs carry a black
//! surround outside the circular field of view; `fundus_mask` recovers
//! that field so metrics can be restricted to it.

use crate::error::{Error, Result};
use crate::matrix::{box_blur, Matrix};

/// Default intensity threshold separating the fundus disc from the
/// black surround, applied after a smoothing pass.
pub const DEFAULT_MASK_THRESHOLD: f64 = 0.05;

/// Planar RGB image, each channel in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct RgbImage {
    r: Matrix,
    g: Matrix,
    b: Matrix,
}

impl RgbImage {
    /// Assembles from three equally sized channel planes.
    pub fn from_planes(r: Matrix, g: Matrix, b: Matrix) -> Result<Self> {
        if r.rows() == 0 || r.cols() == 0 {
            return Err(Error::ZeroDimension);
        }
        if (g.rows(), g.cols()) != (r.rows(), r.cols())
            || (b.rows(), b.cols()) != (r.rows(), r.cols())
        {
            return Err(Error::DimensionMismatch(format!(
                "channel planes disagree: r {}x{}, g {}x{}, b {}x{}",
                r.rows(),
                r.cols(),
                g.rows(),
                g.cols(),
                b.rows(),
                b.cols()
            )));
        }
        Ok(RgbImage { r, g, b })
    }

    pub fn height(&self) -> usize {
        self.r.rows()
    }

    pub fn width(&self) -> usize {
        self.r.cols()
    }

    pub fn red(&self) -> &Matrix {
        &self.r
    }

    pub fn green(&self) -> &Matrix {
        &self.g
    }

    pub fn blue(&self) -> &Matrix {
        &self.b
    }
}

/// Single-channel image in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pixels: Matrix,
}

impl GrayImage {
    pub fn from_matrix(pixels: Matrix) -> Result<Self> {
        if pixels.rows() == 0 || pixels.cols() == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(GrayImage { pixels })
    }

    pub fn height(&self) -> usize {
        self.pixels.rows()
    }

    pub fn width(&self) -> usize {
        self.pixels.cols()
    }

    pub fn pixels(&self) -> &Matrix {
        &self.pixels
    }

    pub fn into_matrix(self) -> Matrix {
        self.pixels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels.get(r, c)
    }
}

/// ITU-R BT.709 luma conversion.
///
/// The weights (0.2125, 0.7154, 0.0721) sum to exactly 1.0 in `f64`, so a
/// white input maps to exactly 1.0.
pub fn to_grayscale(rgb: &RgbImage) -> GrayImage {
    let pixels = Matrix::from_fn(rgb.height(), rgb.width(), |r, c| {
        0.2125 * rgb.r.get(r, c) + 0.7154 * rgb.g.get(r, c) + 0.0721 * rgb.b.get(r, c)
    });
    GrayImage { pixels }
}

/// Boolean region of interest with the same shape as its source image.
#[derive(Debug, Clone, PartialEq)]
pub struct FundusMask {
    rows: usize,
    cols: usize,
    inside: Vec<bool>,
}

impl FundusMask {
    /// Builds from a flat row-major boolean buffer.
    pub fn from_vec(rows: usize, cols: usize, inside: Vec<bool>) -> Self {
        assert_eq!(inside.len(), rows * cols);
        FundusMask { rows, cols, inside }
    }

    /// Mask covering the whole frame.
    pub fn full(rows: usize, cols: usize) -> Self {
        FundusMask { rows, cols, inside: vec![true; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.inside[r * self.cols + c]
    }

    /// Number of pixels inside the region.
    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Fraction of the frame inside the region.
    pub fn coverage(&self) -> f64 {
        self.count() as f64 / (self.rows * self.cols) as f64
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }
}

/// Segments the circular field of view of a fundus photograph.
///
/// The image is smoothed with a 5x5 mean filter so isolated dark pixels
/// inside the disc and bright specks in the surround do not fragment the
/// region, then thresholded: a pixel is inside iff its smoothed intensity
/// exceeds `threshold`.
pub fn fundus_mask(image: &GrayImage, threshold: f64) -> Result<FundusMask> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::BadThreshold(threshold));
    }
    let blurred = box_blur(image.pixels(), 5)?;
    let inside: Vec<bool> = blurred.as_slice().iter().map(|&v| v > threshold).collect();
    if !inside.iter().any(|&b| b) {
        return Err(Error::DegenerateMask);
    }
    Ok(FundusMask::from_vec(image.height(), image.width(), inside))
}
