//! Browser demo backing: renders synthetic fundus phantoms, their
//! vesselness maps and live sharpness metrics for the static page in
//! `www/`. Everything here is plain Rust so the whole crate tests on the
//! host; the `wasm32` wrappers at the bottom only marshal buffers.

use fundus_iq::features::{extract, feature_names, ExtractionOptions};
use fundus_iq::image::{fundus_mask, to_grayscale, RgbImage, DEFAULT_MASK_THRESHOLD};
use fundus_iq::synth::{blur_rgb, fundus_phantom};
use fundus_iq::vessel::{frangi, FrangiParams};

pub const MIN_SIZE: usize = 48;
pub const MAX_SIZE: usize = 512;

fn clamp_size(size: usize) -> usize {
    size.clamp(MIN_SIZE, MAX_SIZE)
}

fn make_phantom(size: usize, seed: u32, blur_sigma: f64) -> RgbImage {
    let sharp = fundus_phantom(clamp_size(size), seed as u64);
    if blur_sigma > 0.0 {
        blur_rgb(&sharp, blur_sigma)
    } else {
        sharp
    }
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// RGBA pixels of a phantom, row-major, ready for an ImageData buffer.
pub fn phantom_rgba(size: usize, seed: u32, blur_sigma: f64) -> Vec<u8> {
    let img = make_phantom(size, seed, blur_sigma);
    let (h, w) = (img.height(), img.width());
    let mut out = Vec::with_capacity(h * w * 4);
    for y in 0..h {
        for x in 0..w {
            out.push(to_byte(img.red().get(y, x)));
            out.push(to_byte(img.green().get(y, x)));
            out.push(to_byte(img.blue().get(y, x)));
            out.push(255);
        }
    }
    out
}

/// Three-stop heat ramp: black through ember to white.
fn heat(v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    let stop = [0.85, 0.35, 0.10];
    let channel = |c: usize| {
        if v < 0.5 {
            to_byte(stop[c] * (v * 2.0))
        } else {
            to_byte(stop[c] + (1.0 - stop[c]) * (v * 2.0 - 1.0))
        }
    };
    [channel(0), channel(1), channel(2)]
}

/// RGBA heatmap of the Frangi vesselness response for a phantom.
pub fn vesselness_rgba(size: usize, seed: u32, blur_sigma: f64) -> Vec<u8> {
    let img = make_phantom(size, seed, blur_sigma);
    let gray = to_grayscale(&img);
    // the phantom always has a lit disc, so the default mask succeeds
    let mask = fundus_mask(&gray, DEFAULT_MASK_THRESHOLD).expect("phantom disc is lit");
    let vmap = frangi(&gray, &FrangiParams::default(), &mask).expect("default params are valid");
    let response = vmap.response();
    let mut out = Vec::with_capacity(response.rows() * response.cols() * 4);
    for y in 0..response.rows() {
        for x in 0..response.cols() {
            let [r, g, b] = heat(response.get(y, x));
            out.extend_from_slice(&[r, g, b, 255]);
        }
    }
    out
}

/// Feature name/value pairs for a phantom, as a JSON array so insertion
/// order survives into the page.
pub fn metrics_json(size: usize, seed: u32, blur_sigma: f64) -> String {
    let img = make_phantom(size, seed, blur_sigma);
    let opts = ExtractionOptions::default();
    let pairs: Vec<(String, f64)> = match extract(&img, &opts) {
        Ok(values) => feature_names(&opts.families).into_iter().zip(values).collect(),
        Err(e) => return format!("{{\"error\":{}}}", serde_json::to_string(&e.to_string()).unwrap()),
    };
    serde_json::to_string(&pairs).expect("plain floats serialise")
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::wasm_bindgen;

    #[wasm_bindgen]
    pub fn phantom_rgba(size: usize, seed: u32, blur_sigma: f64) -> Vec<u8> {
        super::phantom_rgba(size, seed, blur_sigma)
    }

    #[wasm_bindgen]
    pub fn vesselness_rgba(size: usize, seed: u32, blur_sigma: f64) -> Vec<u8> {
        super::vesselness_rgba(size, seed, blur_sigma)
    }

    #[wasm_bindgen]
    pub fn metrics_json(size: usize, seed: u32, blur_sigma: f64) -> String {
        super::metrics_json(size, seed, blur_sigma)
    }
}
