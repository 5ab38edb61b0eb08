//! Focus and quality metrics for retinal fundus photographs.
//!
//! The crate turns an RGB fundus image into a fixed vector of sharpness
//! features: statistical (energy and entropy family), gradient (Tenengrad
//! and Laplacian family), vesselness-weighted perivascular metrics, and
//! one-level wavelet sub-band statistics. On top of that sits a small,
//! fully deterministic ML layer (scaler, PCA, cross-validated logistic
//! regression, random forest, sigmoid-kernel SVM, ROC/AUC evaluation) to
//! triage images into sharp and blurry.
//!
//! Everything numeric is `f64`, every stochastic step takes an explicit
//! seed, and identical inputs produce identical bytes on any platform.
//!
//! ```
//! use fundus_iq::features::{extract, feature_names, ExtractionOptions};
//! use fundus_iq::synth::fundus_phantom;
//!
//! let img = fundus_phantom(64, 7);
//! let opts = ExtractionOptions::default();
//! let values = extract(&img, &opts).unwrap();
//! assert_eq!(values.len(), feature_names(&opts.families).len());
//! ```

pub mod error;
pub mod features;
pub mod grad;
pub mod image;
#[cfg(feature = "io")]
pub mod io;
pub mod matrix;
pub mod ml;
pub mod stat;
pub mod synth;
pub mod vessel;
pub mod wavelet;

pub use error::{Error, Result};
