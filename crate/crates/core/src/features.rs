//! Assembles the per-image feature vector: the statistical block, the
//! gradient block, the two perivascular-weighted metrics, and the wavelet
//! block for every configured family, in one fixed documented order.

use crate::error::{Error, Result};
use crate::grad::GradFeatures;
use crate::image::{fundus_mask, to_grayscale, FundusMask, GrayImage, RgbImage, DEFAULT_MASK_THRESHOLD};
use crate::matrix::Matrix;
use crate::stat::StatFeatures;
use crate::vessel::{
    frangi, frangi_downscaled, perivascular_abs_laplacian, perivascular_mask,
    perivascular_tenengrad, FrangiParams,
};
use crate::wavelet::{WaveletFamily, WaveletFeatures};

/// Bumped whenever a column is added, removed, renamed, or reordered.
/// Stored in extracted CSVs and persisted models; mismatches refuse to score.
pub const FEATURE_SCHEMA_VERSION: &str = "fv1";

/// Everything the extractor needs to turn one image into one row.
#[derive(Debug, Clone)]
pub struct ExtractionOptions {
    /// Fundus-disc segmentation threshold on the smoothed luminance.
    pub mask_threshold: f64,
    /// Restrict the statistical and gradient blocks to the fundus disc as
    /// well. Off by default: those formulas sum over the full frame, and
    /// the mask is only required for the wavelet block.
    pub mask_all_metrics: bool,
    /// Fixed Tenengrad threshold; `None` uses the per-image 75th
    /// percentile of the gradient magnitude.
    pub tenengrad_tau: Option<f64>,
    pub frangi: FrangiParams,
    /// Compute vesselness on a block-averaged image, ≥ 2 to enable.
    pub frangi_downscale: usize,
    /// Wavelet families, in column order.
    pub families: Vec<WaveletFamily>,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        ExtractionOptions {
            mask_threshold: DEFAULT_MASK_THRESHOLD,
            mask_all_metrics: false,
            tenengrad_tau: None,
            frangi: FrangiParams::default(),
            frangi_downscale: 1,
            families: WaveletFamily::all().to_vec(),
        }
    }
}

/// One extracted row plus its identity, as read from or written to a
/// feature CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub id: String,
    pub subject: String,
    /// 1 = sharp/good, 0 = blurry/bad, `None` = unlabeled.
    pub label: Option<u8>,
    pub values: Vec<f64>,
}

/// Column names in extraction order for the given family list.
pub fn feature_names(families: &[WaveletFamily]) -> Vec<String> {
    let mut names: Vec<String> = [
        "stat.mean_pixel_energy",
        "stat.rms_channel_energy",
        "stat.shannon_entropy",
        "stat.efc",
        "stat.nefc",
        "grad.tenengrad",
        "grad.tenengrad_thresholded",
        "grad.mean_abs_laplacian",
        "grad.energy_laplacian",
        "grad.log_pech_pacheco",
        "vessel.perivascular_tenengrad",
        "vessel.perivascular_abs_laplacian",
    ]
    .into_iter()
    .map(str::to_string)
    .collect();
    for family in families {
        for column in ["var_horizontal", "var_vertical", "var_diagonal", "sum_sq"] {
            names.push(format!("wavelet.{}.{}", family.tag(), column));
        }
    }
    names
}

/// Computes every feature for one image, in `feature_names` order.
pub fn extract(rgb: &RgbImage, opts: &ExtractionOptions) -> Result<Vec<f64>> {
    let gray = to_grayscale(rgb);
    let mask = fundus_mask(&gray, opts.mask_threshold)?;

    let stat = if opts.mask_all_metrics {
        // Every statistical metric depends only on the multiset of pixel
        // values and their count, so restricting to the disc is the same
        // formula over the in-mask pixels laid out as a 1xK image.
        StatFeatures::compute(&masked_rgb(rgb, &mask)?, &masked_gray(&gray, &mask)?)?
    } else {
        StatFeatures::compute(rgb, &gray)?
    };
    let grad = GradFeatures::compute_masked(
        &gray,
        opts.tenengrad_tau,
        opts.mask_all_metrics.then_some(&mask),
    )?;

    let vmap = if opts.frangi_downscale >= 2 {
        frangi_downscaled(&gray, &opts.frangi, &mask, opts.frangi_downscale)?
    } else {
        frangi(&gray, &opts.frangi, &mask)?
    };
    let pmask = perivascular_mask(&vmap);

    let mut values = vec![
        stat.mean_pixel_energy,
        stat.rms_channel_energy,
        stat.shannon_entropy,
        stat.efc,
        stat.nefc,
        grad.tenengrad,
        grad.tenengrad_thresholded,
        grad.mean_abs_laplacian,
        grad.energy_laplacian,
        grad.log_pech_pacheco,
        perivascular_tenengrad(&gray, &pmask)?,
        perivascular_abs_laplacian(&gray, &pmask)?,
    ];
    for family in &opts.families {
        let w = WaveletFeatures::compute(&gray, &mask, *family)?;
        values.extend([w.var_horizontal, w.var_vertical, w.var_diagonal, w.sum_sq]);
    }
    Ok(values)
}

fn masked_values(m: &Matrix, mask: &FundusMask) -> Vec<f64> {
    m.as_slice()
        .iter()
        .zip(mask.as_slice())
        .filter(|(_, &inside)| inside)
        .map(|(&v, _)| v)
        .collect()
}

fn masked_gray(img: &GrayImage, mask: &FundusMask) -> Result<GrayImage> {
    let vals = masked_values(img.pixels(), mask);
    if vals.is_empty() {
        return Err(Error::EmptyMaskRegion);
    }
    GrayImage::from_matrix(Matrix::from_vec(1, vals.len(), vals))
}

fn masked_rgb(rgb: &RgbImage, mask: &FundusMask) -> Result<RgbImage> {
    let r = masked_values(rgb.red(), mask);
    let g = masked_values(rgb.green(), mask);
    let b = masked_values(rgb.blue(), mask);
    if r.is_empty() {
        return Err(Error::EmptyMaskRegion);
    }
    let k = r.len();
    RgbImage::from_planes(
        Matrix::from_vec(1, k, r),
        Matrix::from_vec(1, k, g),
        Matrix::from_vec(1, k, b),
    )
}

/// The three PCA clusters the analysis is run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cluster {
    Statistical,
    Gradient,
    Wavelet,
}

impl Cluster {
    pub fn all() -> [Cluster; 3] {
        [Cluster::Statistical, Cluster::Gradient, Cluster::Wavelet]
    }

    pub fn name(self) -> &'static str {
        match self {
            Cluster::Statistical => "statistical",
            Cluster::Gradient => "gradient",
            Cluster::Wavelet => "wavelet",
        }
    }

    pub fn from_name(name: &str) -> Result<Cluster> {
        Cluster::all()
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownCluster(name.to_string()))
    }

    /// Indices of this cluster's columns within `names`.
    ///
    /// The statistical cluster is exactly {mean pixel energy, Shannon
    /// entropy, EFC, NEFC}; RMS channel energy stays out of the PCA. The
    /// gradient cluster includes the perivascular-weighted columns.
    pub fn member_indices(self, names: &[String]) -> Vec<usize> {
        const STAT_PCA: [&str; 4] = [
            "stat.mean_pixel_energy",
            "stat.shannon_entropy",
            "stat.efc",
            "stat.nefc",
        ];
        names
            .iter()
            .enumerate()
            .filter(|(_, n)| match self {
                Cluster::Statistical => STAT_PCA.contains(&n.as_str()),
                Cluster::Gradient => n.starts_with("grad.") || n.starts_with("vessel."),
                Cluster::Wavelet => n.starts_with("wavelet."),
            })
            .map(|(i, _)| i)
            .collect()
    }
}
