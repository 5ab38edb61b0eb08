use thiserror::Error;

/// Errors for image handling, metric domains and model training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read image {path}: {reason}")]
    ImageRead { path: String, reason: String },
    #[error("cannot write image {path}: {reason}")]
    ImageWrite { path: String, reason: String },
    #[error("image has zero width or height")]
    ZeroDimension,
    #[error("kernel dimensions must be odd, got {rows}x{cols}")]
    EvenKernel { rows: usize, cols: usize },
    #[error("mask threshold {0} must lie strictly inside (0, 1)")]
    BadThreshold(f64),
    #[error("degenerate fundus mask: no pixel above threshold")]
    DegenerateMask,
    #[error("negative pixel intensity {0} outside the metric domain")]
    NegativeIntensity(f64),
    #[error("metric undefined for an all-zero image")]
    AllZeroImage,
    #[error("metric undefined: {0}")]
    Degenerate(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Frangi scale list must be non-empty, positive and ascending")]
    BadScales,
    #[error("image extent {extent} smaller than wavelet filter length {filter}")]
    ImageTooSmall { extent: usize, filter: usize },
    #[error("no wavelet coefficients inside the mask")]
    EmptyMaskRegion,
    #[error("column '{0}' is constant and cannot be standard-scaled")]
    ConstantColumn(String),
    #[error("requested {requested} principal components but data supports at most {max}")]
    TooManyComponents { requested: usize, max: usize },
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("test fraction {0} must lie strictly inside (0, 1)")]
    BadTestFraction(f64),
    #[error("SMO did not converge within {0} passes")]
    SmoNonConvergence(usize),
    #[error("unknown feature cluster '{0}'")]
    UnknownCluster(String),
    #[error("feature schema mismatch: {0}")]
    FeatureMismatch(String),
    #[error("malformed model file: {0}")]
    ModelParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
