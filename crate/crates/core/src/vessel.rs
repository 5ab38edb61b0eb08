//! Frangi multiscale vessel enhancement, the structure-tensor
//! perivascular mask derived from it, and the perivascular-weighted
//! sharpness metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::{laplacian, sobel_gradients, sobel_magnitude};
use crate::image::{FundusMask, GrayImage};
use crate::matrix::{gaussian_blur, Matrix};

/// Frangi filter parameters.
///
/// Defaults are the standard 1998 choices: scales {1, 2, 4, 8} px,
/// β = 0.5, c = 15 on a [0,255] intensity range (15/255 here), and
/// dark-vessel polarity, which is what retinal photographs need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrangiParams {
    pub scales: Vec<f64>,
    pub beta: f64,
    pub c: f64,
    pub dark_vessels: bool,
}

impl Default for FrangiParams {
    fn default() -> Self {
        FrangiParams {
            scales: vec![1.0, 2.0, 4.0, 8.0],
            beta: 0.5,
            c: 15.0 / 255.0,
            dark_vessels: true,
        }
    }
}

impl FrangiParams {
    fn validate(&self) -> Result<()> {
        let ascending = self.scales.windows(2).all(|w| w[0] < w[1]);
        if self.scales.is_empty() || self.scales.iter().any(|&s| s <= 0.0) || !ascending {
            return Err(Error::BadScales);
        }
        if self.beta <= 0.0 || self.c <= 0.0 {
            return Err(Error::Degenerate("Frangi beta and c must be positive"));
        }
        Ok(())
    }
}

/// Frangi response map, normalised to [0, 1] inside the fundus mask and
/// zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselnessMap {
    response: Matrix,
}

impl VesselnessMap {
    pub fn response(&self) -> &Matrix {
        &self.response
    }

    pub fn into_matrix(self) -> Matrix {
        self.response
    }
}

/// Non-negative per-pixel weights concentrated around vessel borders.
#[derive(Debug, Clone, PartialEq)]
pub struct PerivascularMask {
    weights: Matrix,
}

impl PerivascularMask {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Builds directly from a weight matrix; entries must be >= 0.
    pub fn from_weights(weights: Matrix) -> Result<Self> {
        if weights.as_slice().iter().any(|&v| v < 0.0) {
            return Err(Error::Degenerate("perivascular weights must be non-negative"));
        }
        Ok(PerivascularMask { weights })
    }
}

/// σ²-normalised Hessian of an already smoothed image, via central
/// differences with clamped borders.
fn hessian(smooth: &Matrix, sigma: f64) -> (Matrix, Matrix, Matrix) {
    let (rows, cols) = (smooth.rows(), smooth.cols());
    let at = |r: isize, c: isize| {
        smooth.get(
            r.clamp(0, rows as isize - 1) as usize,
            c.clamp(0, cols as isize - 1) as usize,
        )
    };
    let s2 = sigma * sigma;
    let mut dxx = Matrix::zeros(rows, cols);
    let mut dyy = Matrix::zeros(rows, cols);
    let mut dxy = Matrix::zeros(rows, cols);
    for ru in 0..rows {
        for cu in 0..cols {
            let (r, c) = (ru as isize, cu as isize);
            let f = at(r, c);
            dxx.set(ru, cu, s2 * (at(r, c + 1) - 2.0 * f + at(r, c - 1)));
            dyy.set(ru, cu, s2 * (at(r + 1, c) - 2.0 * f + at(r - 1, c)));
            dxy.set(
                ru,
                cu,
                s2 * (at(r + 1, c + 1) - at(r + 1, c - 1) - at(r - 1, c + 1)
                    + at(r - 1, c - 1))
                    / 4.0,
            );
        }
    }
    (dxx, dxy, dyy)
}

/// Multiscale Frangi vessel enhancement.
pub fn frangi(img: &GrayImage, params: &FrangiParams, mask: &FundusMask) -> Result<VesselnessMap> {
    params.validate()?;
    if (mask.rows(), mask.cols()) != (img.height(), img.width()) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.rows(),
            mask.cols(),
            img.height(),
            img.width()
        )));
    }
    let (rows, cols) = (img.height(), img.width());
    let two_beta_sq = 2.0 * params.beta * params.beta;
    let two_c_sq = 2.0 * params.c * params.c;
    let mut best = Matrix::zeros(rows, cols);
    for &sigma in &params.scales {
        let smooth = gaussian_blur(img.pixels(), sigma);
        let (dxx, dxy, dyy) = hessian(&smooth, sigma);
        for r in 0..rows {
            for c in 0..cols {
                let (hxx, hxy, hyy) = (dxx.get(r, c), dxy.get(r, c), dyy.get(r, c));
                let half_trace = (hxx + hyy) / 2.0;
                let half_diff = (hxx - hyy) / 2.0;
                let root = (half_diff * half_diff + hxy * hxy).sqrt();
                let (ea, eb) = (half_trace - root, half_trace + root);
                // order by magnitude: |l1| <= |l2|
                let (l1, l2) = if ea.abs() <= eb.abs() { (ea, eb) } else { (eb, ea) };
                let wrong_polarity = if params.dark_vessels { l2 <= 0.0 } else { l2 >= 0.0 };
                if wrong_polarity {
                    continue;
                }
                let rb = l1 / l2;
                let s_sq = l1 * l1 + l2 * l2;
                let v = (-rb * rb / two_beta_sq).exp() * (1.0 - (-s_sq / two_c_sq).exp());
                if v > best.get(r, c) {
                    best.set(r, c, v);
                }
            }
        }
    }
    // normalise over the masked region, zero outside it
    let mut max = 0.0f64;
    for r in 0..rows {
        for c in 0..cols {
            if mask.contains(r, c) {
                max = max.max(best.get(r, c));
            }
        }
    }
    let response = Matrix::from_fn(rows, cols, |r, c| {
        if mask.contains(r, c) && max > 0.0 {
            best.get(r, c) / max
        } else {
            0.0
        }
    });
    Ok(VesselnessMap { response })
}

/// Block-averaged downscale by an integer factor; partial edge blocks
/// average whatever they cover.
fn downscale(m: &Matrix, factor: usize) -> Matrix {
    let rows = m.rows().div_ceil(factor);
    let cols = m.cols().div_ceil(factor);
    Matrix::from_fn(rows, cols, |r, c| {
        let r1 = ((r + 1) * factor).min(m.rows());
        let c1 = ((c + 1) * factor).min(m.cols());
        let mut sum = 0.0;
        for rr in r * factor..r1 {
            for cc in c * factor..c1 {
                sum += m.get(rr, cc);
            }
        }
        sum / ((r1 - r * factor) * (c1 - c * factor)) as f64
    })
}

fn upscale_bilinear(m: &Matrix, rows: usize, cols: usize, factor: usize) -> Matrix {
    let f = factor as f64;
    Matrix::from_fn(rows, cols, |r, c| {
        let y = ((r as f64 + 0.5) / f - 0.5).clamp(0.0, (m.rows() - 1) as f64);
        let x = ((c as f64 + 0.5) / f - 0.5).clamp(0.0, (m.cols() - 1) as f64);
        let (y0, x0) = (y.floor() as usize, x.floor() as usize);
        let (y1, x1) = ((y0 + 1).min(m.rows() - 1), (x0 + 1).min(m.cols() - 1));
        let (fy, fx) = (y - y0 as f64, x - x0 as f64);
        m.get(y0, x0) * (1.0 - fy) * (1.0 - fx)
            + m.get(y0, x1) * (1.0 - fy) * fx
            + m.get(y1, x0) * fy * (1.0 - fx)
            + m.get(y1, x1) * fy * fx
    })
}

/// Approximate Frangi on a block-downscaled image, upsampled back to
/// full resolution. A performance escape hatch for very large inputs;
/// `factor` = 1 is the exact path. Scales below one downscaled pixel
/// are clamped to 0.5.
pub fn frangi_downscaled(
    img: &GrayImage,
    params: &FrangiParams,
    mask: &FundusMask,
    factor: usize,
) -> Result<VesselnessMap> {
    assert!(factor >= 1, "downscale factor must be at least 1");
    if factor == 1 {
        return frangi(img, params, mask);
    }
    params.validate()?;
    if (mask.rows(), mask.cols()) != (img.height(), img.width()) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs image {}x{}",
            mask.rows(),
            mask.cols(),
            img.height(),
            img.width()
        )));
    }
    let small = downscale(img.pixels(), factor);
    let (srows, scols) = (small.rows(), small.cols());
    // a block is inside the small mask iff any covered pixel is inside
    let mut inside = vec![false; srows * scols];
    for r in 0..mask.rows() {
        for c in 0..mask.cols() {
            if mask.contains(r, c) {
                inside[(r / factor) * scols + c / factor] = true;
            }
        }
    }
    let small_mask = FundusMask::from_vec(srows, scols, inside);
    let small_params = FrangiParams {
        scales: params.scales.iter().map(|s| (s / factor as f64).max(0.5)).collect(),
        ..params.clone()
    };
    let small_map = frangi(
        &GrayImage::from_matrix(small)?,
        &small_params,
        &small_mask,
    )?;
    let up = upscale_bilinear(small_map.response(), img.height(), img.width(), factor);
    let mut max = 0.0f64;
    for r in 0..img.height() {
        for c in 0..img.width() {
            if mask.contains(r, c) {
                max = max.max(up.get(r, c));
            }
        }
    }
    let response = Matrix::from_fn(img.height(), img.width(), |r, c| {
        if mask.contains(r, c) && max > 0.0 {
            (up.get(r, c) / max).clamp(0.0, 1.0)
        } else {
            0.0
        }
    });
    Ok(VesselnessMap { response })
}

/// Gaussian-smoothed outer products of the Sobel gradient:
/// (A_xx, A_xy, A_yy).
pub fn structure_tensor(field: &Matrix, sigma: f64) -> (Matrix, Matrix, Matrix) {
    assert!(sigma > 0.0, "sigma must be positive");
    let (gx, gy) = sobel_gradients(field);
    let axx = gaussian_blur(&gx.zip_map(&gx, |a, b| a * b), sigma);
    let axy = gaussian_blur(&gx.zip_map(&gy, |a, b| a * b), sigma);
    let ayy = gaussian_blur(&gy.zip_map(&gy, |a, b| a * b), sigma);
    (axx, axy, ayy)
}

/// Which structure-tensor components enter the perivascular weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MaskFormula {
    /// sqrt(2·A_xy² + A_yy²), the literal component selection.
    #[default]
    Literal,
    /// Full Frobenius norm sqrt(A_xx² + 2·A_xy² + A_yy²), kept for
    /// sensitivity analysis.
    Frobenius,
}

/// Perivascular weights from the structure tensor (σ = 1) of the
/// vesselness response.
pub fn perivascular_mask(vmap: &VesselnessMap) -> PerivascularMask {
    perivascular_mask_with(vmap, MaskFormula::Literal)
}

pub fn perivascular_mask_with(vmap: &VesselnessMap, formula: MaskFormula) -> PerivascularMask {
    let (axx, axy, ayy) = structure_tensor(vmap.response(), 1.0);
    let weights = Matrix::from_fn(vmap.response().rows(), vmap.response().cols(), |r, c| {
        let (xx, xy, yy) = (axx.get(r, c), axy.get(r, c), ayy.get(r, c));
        match formula {
            MaskFormula::Literal => (2.0 * xy * xy + yy * yy).sqrt(),
            MaskFormula::Frobenius => (xx * xx + 2.0 * xy * xy + yy * yy).sqrt(),
        }
    });
    PerivascularMask { weights }
}

/// How the weighted sum is reduced to a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WeightNormalisation {
    /// Divide by the pixel count M·N (a plain mean).
    #[default]
    PixelCount,
    /// Divide by Σ V′, a weighted average.
    WeightSum,
}

fn weighted_mean(values: &Matrix, pmask: &PerivascularMask, norm: WeightNormalisation) -> f64 {
    let w = pmask.weights();
    let num: f64 = values
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .map(|(v, w)| v * w)
        .sum();
    match norm {
        WeightNormalisation::PixelCount => num / values.len() as f64,
        WeightNormalisation::WeightSum => {
            let denom: f64 = w.as_slice().iter().sum();
            if denom == 0.0 {
                0.0
            } else {
                num / denom
            }
        }
    }
}

fn check_dims(img: &GrayImage, pmask: &PerivascularMask) -> Result<()> {
    let w = pmask.weights();
    if (w.rows(), w.cols()) != (img.height(), img.width()) {
        return Err(Error::DimensionMismatch(format!(
            "perivascular mask {}x{} vs image {}x{}",
            w.rows(),
            w.cols(),
            img.height(),
            img.width()
        )));
    }
    Ok(())
}

/// Mean over all pixels of V′·G².
pub fn perivascular_tenengrad(img: &GrayImage, pmask: &PerivascularMask) -> Result<f64> {
    perivascular_tenengrad_with(img, pmask, WeightNormalisation::PixelCount)
}

pub fn perivascular_tenengrad_with(
    img: &GrayImage,
    pmask: &PerivascularMask,
    norm: WeightNormalisation,
) -> Result<f64> {
    check_dims(img, pmask)?;
    let g = sobel_magnitude(img);
    let g_sq = g.magnitude().map(|v| v * v);
    Ok(weighted_mean(&g_sq, pmask, norm))
}

/// Mean over all pixels of V′·|∇²I|.
pub fn perivascular_abs_laplacian(img: &GrayImage, pmask: &PerivascularMask) -> Result<f64> {
    perivascular_abs_laplacian_with(img, pmask, WeightNormalisation::PixelCount)
}

pub fn perivascular_abs_laplacian_with(
    img: &GrayImage,
    pmask: &PerivascularMask,
    norm: WeightNormalisation,
) -> Result<f64> {
    check_dims(img, pmask)?;
    let lap = laplacian(img).map(f64::abs);
    Ok(weighted_mean(&lap, pmask, norm))
}
