//! `dump-debug`: write the intermediate maps behind one image's feature
//! row as 16-bit PNGs, next to the row itself.

use std::path::Path;

use anyhow::{Context, Result};

use crate::config::Config;
use crate::feature_csv::{write_features, FeatureRow};
use fundus_iq::features::{extract, feature_names};
use fundus_iq::grad::sobel_magnitude;
use fundus_iq::image::{fundus_mask, to_grayscale};
use fundus_iq::io::{load_image, save_map_png16};
use fundus_iq::matrix::Matrix;
use fundus_iq::vessel::{frangi, frangi_downscaled, perivascular_mask};

/// Rescales a non-negative response map to [0, 1] so narrow-band filter
/// output stays visible after quantisation.
fn normalised(map: &Matrix) -> Matrix {
    let mut max = 0.0f64;
    for r in 0..map.rows() {
        for c in 0..map.cols() {
            max = max.max(map.get(r, c));
        }
    }
    let mut out = Matrix::zeros(map.rows(), map.cols());
    if max > 0.0 {
        for r in 0..map.rows() {
            for c in 0..map.cols() {
                out.set(r, c, map.get(r, c) / max);
            }
        }
    }
    out
}

pub fn run(image_path: &Path, out_dir: &Path, cfg: &Config) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;

    let rgb = load_image(image_path)?;
    let gray = to_grayscale(&rgb);
    let mask = fundus_mask(&gray, cfg.mask_threshold)?;
    let opts = cfg.extraction_options();

    let mut mask_map = Matrix::zeros(mask.rows(), mask.cols());
    for r in 0..mask.rows() {
        for c in 0..mask.cols() {
            if mask.contains(r, c) {
                mask_map.set(r, c, 1.0);
            }
        }
    }

    let vmap = if cfg.frangi_downscale >= 2 {
        frangi_downscaled(&gray, &opts.frangi, &mask, cfg.frangi_downscale)?
    } else {
        frangi(&gray, &opts.frangi, &mask)?
    };
    let pmask = perivascular_mask(&vmap);

    save_map_png16(&out_dir.join("grayscale.png"), gray.pixels())?;
    save_map_png16(&out_dir.join("mask.png"), &mask_map)?;
    save_map_png16(
        &out_dir.join("gradient_magnitude.png"),
        &normalised(sobel_magnitude(&gray).magnitude()),
    )?;
    save_map_png16(&out_dir.join("vesselness.png"), vmap.response())?;
    save_map_png16(
        &out_dir.join("perivascular_weights.png"),
        &normalised(pmask.weights()),
    )?;

    let names = feature_names(&cfg.wavelet_families);
    let row = FeatureRow {
        id: image_path.display().to_string(),
        subject: "debug".to_string(),
        label: None,
        outcome: extract(&rgb, &opts).map_err(|e| e.to_string()),
    };
    write_features(&out_dir.join("features.csv"), &names, &[row])?;

    println!(
        "wrote grayscale, mask, gradient_magnitude, vesselness, perivascular_weights \
         and features.csv to {}",
        out_dir.display()
    );
    Ok(())
}
