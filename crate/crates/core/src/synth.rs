//! Seeded procedural imagery: fundus-like phantoms with curved dark
//! vessels on a bright disc, value-noise textures, and Gaussian blur
//! helpers. Everything is a pure function of (size, seed), so corpora are
//! reproducible across runs and platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::image::{GrayImage, RgbImage};
use crate::matrix::{gaussian_blur, Matrix};

/// Smoothly interpolated lattice noise in [0,1], summed over octaves.
fn value_noise(size: usize, rng: &mut ChaCha8Rng, base_cell: f64, octaves: usize) -> Matrix {
    let mut out = Matrix::zeros(size, size);
    let mut amplitude = 1.0;
    let mut cell = base_cell;
    let mut total_amp = 0.0;
    for _ in 0..octaves {
        let lattice = ((size as f64 / cell).ceil() as usize) + 2;
        let grid: Vec<f64> = (0..lattice * lattice).map(|_| rng.gen::<f64>()).collect();
        for r in 0..size {
            for c in 0..size {
                let (fr, fc) = (r as f64 / cell, c as f64 / cell);
                let (r0, c0) = (fr.floor() as usize, fc.floor() as usize);
                let (tr, tc) = (fr - r0 as f64, fc - c0 as f64);
                // smoothstep fade
                let (sr, sc) = (tr * tr * (3.0 - 2.0 * tr), tc * tc * (3.0 - 2.0 * tc));
                let at = |rr: usize, cc: usize| grid[rr * lattice + cc];
                let top = at(r0, c0) * (1.0 - sc) + at(r0, c0 + 1) * sc;
                let bottom = at(r0 + 1, c0) * (1.0 - sc) + at(r0 + 1, c0 + 1) * sc;
                let v = top * (1.0 - sr) + bottom * sr;
                out.set(r, c, out.get(r, c) + amplitude * v);
            }
        }
        total_amp += amplitude;
        amplitude *= 0.5;
        cell = (cell / 2.0).max(1.5);
    }
    out.map(|v| v / total_amp)
}

/// Darkness field of curved vessels: 1 on the centreline, Gaussian
/// falloff across the width, tapering towards the tips.
fn vessel_map(size: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut dark = Matrix::zeros(size, size);
    let s = size as f64;
    let centre = (s - 1.0) / 2.0;
    let radius = s * 0.46;
    // the trunks radiate from an off-centre optic-disc point
    let disc_angle: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let disc_r = centre + 0.55 * radius * disc_angle.sin();
    let disc_c = centre + 0.55 * radius * disc_angle.cos();
    let n_vessels = rng.gen_range(9..=13);
    for _ in 0..n_vessels {
        let mut r = disc_r + rng.gen_range(-3.0..3.0);
        let mut c = disc_c + rng.gen_range(-3.0..3.0);
        let mut heading = rng.gen::<f64>() * std::f64::consts::TAU;
        let mut curvature: f64 = rng.gen_range(-0.02..0.02);
        let width0 = rng.gen_range(1.5..4.0);
        let length = radius * rng.gen_range(1.4..2.1);
        let steps = (length / 0.5) as usize;
        for step in 0..steps {
            let t = step as f64 / steps as f64;
            let width = width0 * (1.0 - 0.55 * t);
            // slow drift keeps the path curved rather than straight
            curvature += rng.gen_range(-0.004..0.004);
            heading += curvature.clamp(-0.05, 0.05);
            r += 0.5 * heading.sin();
            c += 0.5 * heading.cos();
            let (dr, dc) = (r - centre, c - centre);
            if (dr * dr + dc * dc).sqrt() > radius - 1.0 {
                break;
            }
            let reach = (3.0 * width).ceil() as isize;
            let (ri, ci) = (r.round() as isize, c.round() as isize);
            for pr in (ri - reach).max(0)..=(ri + reach).min(size as isize - 1) {
                for pc in (ci - reach).max(0)..=(ci + reach).min(size as isize - 1) {
                    let d2 = (pr as f64 - r).powi(2) + (pc as f64 - c).powi(2);
                    let v = (-d2 / (2.0 * width * width)).exp();
                    let cell = dark.get(pr as usize, pc as usize);
                    if v > cell {
                        dark.set(pr as usize, pc as usize, v);
                    }
                }
            }
        }
    }
    dark
}

/// A fundus-like phantom: bright textured disc, dark curved vessels, a
/// brighter optic-disc spot, and a near-black surround.
pub fn fundus_phantom(size: usize, seed: u64) -> RgbImage {
    assert!(size >= 32, "phantom needs at least 32 pixels per side");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let texture = value_noise(size, &mut rng, size as f64 / 8.0, 3);
    let grain = value_noise(size, &mut rng, 2.0, 1);
    let vessels = vessel_map(size, &mut rng);
    let s = size as f64;
    let centre = (s - 1.0) / 2.0;
    let radius = s * 0.46;
    let disc_angle: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let (od_r, od_c) = (
        centre + 0.55 * radius * disc_angle.sin(),
        centre + 0.55 * radius * disc_angle.cos(),
    );
    let od_radius = s * 0.07;
    let lum = Matrix::from_fn(size, size, |r, c| {
        let (dr, dc) = (r as f64 - centre, c as f64 - centre);
        let dist = (dr * dr + dc * dc).sqrt();
        if dist > radius {
            return 0.012 + 0.012 * grain.get(r, c);
        }
        // gentle vignette towards the rim, like real fundus illumination
        let vignette = 1.0 - 0.25 * (dist / radius).powi(2);
        let mut v = (0.62 + 0.2 * texture.get(r, c) + 0.05 * grain.get(r, c)) * vignette;
        let od_d2 = (r as f64 - od_r).powi(2) + (c as f64 - od_c).powi(2);
        v += 0.18 * (-od_d2 / (2.0 * od_radius * od_radius)).exp();
        v *= 1.0 - 0.6 * vessels.get(r, c);
        v.clamp(0.0, 1.0)
    });
    let r = lum.map(|v| (v * 1.18).min(1.0));
    let b = lum.map(|v| v * 0.35);
    RgbImage::from_planes(r, lum, b).expect("size checked above")
}

/// Full-frame natural-looking texture (no disc geometry), for corpus
/// variety beyond vascular phantoms.
pub fn natural_texture(size: usize, seed: u64) -> RgbImage {
    assert!(size >= 8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = value_noise(size, &mut rng, size as f64 / 6.0, 4);
    let tint: f64 = rng.gen_range(0.6..1.0);
    let lum = base.map(|v| 0.15 + 0.7 * v);
    let r = lum.map(|v| (v * (0.8 + 0.4 * tint)).min(1.0));
    let b = lum.map(|v| v * (1.4 - 0.6 * tint));
    RgbImage::from_planes(r, lum, b).expect("size checked above")
}

/// Gaussian blur applied per channel.
pub fn blur_rgb(img: &RgbImage, sigma: f64) -> RgbImage {
    RgbImage::from_planes(
        gaussian_blur(img.red(), sigma),
        gaussian_blur(img.green(), sigma),
        gaussian_blur(img.blue(), sigma),
    )
    .expect("blur preserves dimensions")
}

/// Gaussian blur of a grayscale image.
pub fn blur_gray(img: &GrayImage, sigma: f64) -> GrayImage {
    GrayImage::from_matrix(gaussian_blur(img.pixels(), sigma)).expect("blur preserves dimensions")
}

/// A (sharp, blurred) pair of one phantom; σ is drawn from [2,4] when not
/// given explicitly.
pub fn phantom_pair(size: usize, seed: u64, sigma: Option<f64>) -> (RgbImage, RgbImage, f64) {
    let sharp = fundus_phantom(size, seed);
    let sigma = sigma.unwrap_or_else(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5111_ab1e);
        rng.gen_range(2.0..=4.0)
    });
    let blurred = blur_rgb(&sharp, sigma);
    (sharp, blurred, sigma)
}
