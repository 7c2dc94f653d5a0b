//! Sliding-patch image denoising: every m×m patch is a sparse-coding LIP
//! over the inverse 2-D DCT, and overlapping reconstructions are averaged.

pub mod error;
pub mod image;
pub mod noise;
pub mod patches;
pub mod pipeline;
pub mod stats;

pub use crate::error::{DenoiseError, Result};
pub use crate::image::Image;
pub use crate::noise::add_gaussian_noise;
pub use crate::patches::PatchGrid;
pub use crate::pipeline::{
    denoise, fingerprint, DenoiseConfig, DenoiseReport, EpsRule, PatchOutcome, ReferenceSet, HISTOGRAM_BANDWIDTH,
};
pub use crate::stats::{mean_iterations, psnr, Histogram};
