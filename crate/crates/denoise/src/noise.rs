//! Seeded additive Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{DenoiseError, Result};
use crate::image::Image;

/// Adds i.i.d. N(0, sigma_var) noise, drawn row-major from a ChaCha stream
/// seeded with `seed`, then clamps to [0, 1].
pub fn add_gaussian_noise(img: &Image, sigma_var: f64, seed: u64) -> Result<Image> {
    if !(sigma_var >= 0.0 && sigma_var.is_finite()) {
        return Err(DenoiseError::InvalidConfig(format!("noise variance must be nonnegative, got {sigma_var}")));
    }
    if sigma_var == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma_var.sqrt()).expect("finite positive deviation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = img.pixels().iter().map(|&p| (p + normal.sample(&mut rng)).clamp(0.0, 1.0)).collect();
    Image::new(img.width(), img.height(), pixels)
}
