//! Local-gradient sharpness measures: the Tenengrad family on Sobel
//! magnitudes and the Laplacian family, including the log
//! Pech-Pacheco variance measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{FundusMask, GrayImage};
use crate::matrix::{convolve2d, Matrix};

/// Per-pixel gradient magnitude G = sqrt(Gx² + Gy²).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    magnitude: Matrix,
}

impl GradientField {
    pub fn magnitude(&self) -> &Matrix {
        &self.magnitude
    }

    /// Nearest-rank percentile of the magnitudes, `p` in (0, 100].
    pub fn percentile(&self, p: f64) -> f64 {
        percentile_of(self.magnitude.as_slice(), p)
    }

    /// Sum of squared magnitudes over pixels with magnitude >= tau.
    fn sum_squares_above(&self, tau: f64) -> f64 {
        self.magnitude
            .as_slice()
            .iter()
            .filter(|&&g| g >= tau)
            .map(|&g| g * g)
            .sum()
    }
}

/// The gradient feature block for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradFeatures {
    pub tenengrad: f64,
    pub tenengrad_thresholded: f64,
    pub mean_abs_laplacian: f64,
    pub energy_laplacian: f64,
    pub log_pech_pacheco: f64,
}

/// Percentile of the gradient magnitude used for the default
/// thresholded-Tenengrad column.
pub const DEFAULT_TENENGRAD_PERCENTILE: f64 = 75.0;

impl GradFeatures {
    /// Computes the block; `tau` overrides the adaptive per-image
    /// threshold (75th percentile of the gradient magnitude).
    pub fn compute(img: &GrayImage, tau: Option<f64>) -> Result<GradFeatures> {
        GradFeatures::compute_masked(img, tau, None)
    }

    /// Same block restricted to in-mask pixels: the responses are still
    /// computed over the full frame (convolution needs neighbours) but
    /// the sums, means, and the percentile run over the mask only.
    pub fn compute_masked(
        img: &GrayImage,
        tau: Option<f64>,
        mask: Option<&FundusMask>,
    ) -> Result<GradFeatures> {
        if let Some(m) = mask {
            if m.rows() != img.height() || m.cols() != img.width() {
                return Err(Error::DimensionMismatch(format!(
                    "mask is {}x{} but image is {}x{}",
                    m.rows(),
                    m.cols(),
                    img.height(),
                    img.width()
                )));
            }
        }
        let keep = |i: usize| mask.map_or(true, |m| m.as_slice()[i]);
        let field = sobel_magnitude(img);
        let mags: Vec<f64> = field
            .magnitude
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, &g)| g)
            .collect();
        if mags.is_empty() {
            return Err(Error::EmptyMaskRegion);
        }
        let laps: Vec<f64> = laplacian(img)
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, &v)| v)
            .collect();
        let tau = tau.unwrap_or_else(|| percentile_of(&mags, DEFAULT_TENENGRAD_PERCENTILE));
        let mal = laps.iter().map(|v| v.abs()).sum::<f64>() / laps.len() as f64;
        let deviation: f64 = laps
            .iter()
            .map(|v| {
                let d = v.abs() - mal;
                d * d
            })
            .sum();
        if deviation == 0.0 {
            return Err(Error::Degenerate(
                "absolute Laplacian has zero variance (constant image)",
            ));
        }
        Ok(GradFeatures {
            tenengrad: mags.iter().map(|g| g * g).sum(),
            tenengrad_thresholded: mags.iter().filter(|&&g| g >= tau).map(|g| g * g).sum(),
            mean_abs_laplacian: mal,
            energy_laplacian: laps.iter().map(|v| v * v).sum(),
            log_pech_pacheco: deviation.ln(),
        })
    }
}

fn percentile_of(values: &[f64], p: f64) -> f64 {
    assert!(p > 0.0 && p <= 100.0, "percentile must lie in (0, 100]");
    let mut values = values.to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((p / 100.0) * values.len() as f64).ceil() as usize;
    values[rank.max(1) - 1]
}

const SOBEL_X: [f64; 9] = [-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0];
const SOBEL_Y: [f64; 9] = [1.0, 2.0, 1.0, 0.0, 0.0, 0.0, -1.0, -2.0, -1.0];

/// Convolutions of `field` with the two Sobel kernels, as (gx, gy).
pub fn sobel_gradients(field: &Matrix) -> (Matrix, Matrix) {
    let sx = Matrix::from_vec(3, 3, SOBEL_X.to_vec());
    let sy = Matrix::from_vec(3, 3, SOBEL_Y.to_vec());
    let gx = convolve2d(field, &sx).expect("3x3 kernel is odd");
    let gy = convolve2d(field, &sy).expect("3x3 kernel is odd");
    (gx, gy)
}

/// Gradient magnitude from the pair of 3x3 Sobel kernels.
pub fn sobel_magnitude(img: &GrayImage) -> GradientField {
    let (gx, gy) = sobel_gradients(img.pixels());
    GradientField {
        magnitude: gx.zip_map(&gy, |a, b| (a * a + b * b).sqrt()),
    }
}

/// Unthresholded Tenengrad: Σ G².
pub fn tenengrad(img: &GrayImage) -> f64 {
    sobel_magnitude(img).sum_squares_above(f64::NEG_INFINITY)
}

/// Thresholded Tenengrad: Σ G² over pixels with G >= tau.
pub fn tenengrad_thresholded(img: &GrayImage, tau: f64) -> f64 {
    assert!(tau >= 0.0, "tau must be non-negative");
    sobel_magnitude(img).sum_squares_above(tau)
}

/// Laplacian response, convolution with (1/6)·[[0,−1,0],[−1,4,−1],[0,−1,0]].
pub fn laplacian(img: &GrayImage) -> Matrix {
    let k = [0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0];
    let kernel = Matrix::from_vec(3, 3, k.iter().map(|v| v / 6.0).collect());
    convolve2d(img.pixels(), &kernel).expect("3x3 kernel is odd")
}

/// Mean absolute Laplacian response.
pub fn mean_abs_laplacian(img: &GrayImage) -> f64 {
    let lap = laplacian(img);
    lap.as_slice().iter().map(|v| v.abs()).sum::<f64>() / lap.len() as f64
}

/// Energy of the Laplacian response, Σ (∇²I)².
pub fn energy_laplacian(img: &GrayImage) -> f64 {
    laplacian(img).as_slice().iter().map(|v| v * v).sum()
}

/// Natural log of the summed squared deviations of |∇²I| around its
/// mean. A constant image has zero deviation and no defined log.
pub fn log_pech_pacheco(img: &GrayImage) -> Result<f64> {
    let lap = laplacian(img);
    let mal = lap.as_slice().iter().map(|v| v.abs()).sum::<f64>() / lap.len() as f64;
    log_deviation_sum(&lap, mal)
}

fn log_deviation_sum(lap: &Matrix, mal: f64) -> Result<f64> {
    let sum: f64 = lap
        .as_slice()
        .iter()
        .map(|v| {
            let d = v.abs() - mal;
            d * d
        })
        .sum();
    if sum == 0.0 {
        return Err(Error::Degenerate(
            "absolute Laplacian has zero variance (constant image)",
        ));
    }
    Ok(sum.ln())
}
