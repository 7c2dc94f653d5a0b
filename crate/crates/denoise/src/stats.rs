//! Image quality and convergence statistics.

use std::fmt::Write as _;

use crate::error::{DenoiseError, Result};
use crate::image::Image;

/// 10·log₁₀(1/MSE) for unit dynamic range; +∞ for identical images.
pub fn psnr(reference: &Image, test: &Image) -> Result<f64> {
    if reference.width() != test.width() || reference.height() != test.height() {
        return Err(DenoiseError::InvalidImage("PSNR of images with different sizes".into()));
    }
    let n = reference.pixels().len() as f64;
    let mse = reference.pixels().iter().zip(test.pixels()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
    Ok(-10.0 * mse.log10())
}

/// Mean over patches of the first iteration within the threshold, with
/// patches that never got there counted as `max_iters`.
pub fn mean_iterations(first_within: &[Option<usize>], max_iters: usize) -> f64 {
    if first_within.is_empty() {
        return 0.0;
    }
    let total: usize = first_within.iter().map(|k| k.unwrap_or(max_iters)).sum();
    total as f64 / first_within.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bandwidth: f64,
    /// (bin_left, count) for every bin from 0 up to the largest value.
    pub bins: Vec<(f64, usize)>,
}

impl Histogram {
    /// Nonnegative values binned as [k·w, (k+1)·w).
    pub fn new(values: &[f64], bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(DenoiseError::InvalidConfig(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(DenoiseError::InvalidConfig(format!("cannot bin value {bad}")));
        }
        let bin = |v: f64| (v / bandwidth).floor() as usize;
        let nbins = values.iter().map(|&v| bin(v) + 1).max().unwrap_or(0);
        let mut counts = vec![0usize; nbins];
        for &v in values {
            counts[bin(v)] += 1;
        }
        let bins = counts.into_iter().enumerate().map(|(k, c)| (k as f64 * bandwidth, c)).collect();
        Ok(Self { bandwidth, bins })
    }

    pub fn mass(&self) -> usize {
        self.bins.iter().map(|b| b.1).sum()
    }

    /// CSV with columns bin_left,count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,count\n");
        for (left, count) in &self.bins {
            writeln!(out, "{left:.6},{count}").expect("writing to a String cannot fail");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_of_known_error() {
        let a = Image::constant(4, 4, 0.5).unwrap();
        let b = Image::constant(4, 4, 0.6).unwrap();
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn mean_counts_misses_as_max() {
        assert_eq!(mean_iterations(&[Some(1), None, Some(3)], 8), 4.0);
        assert_eq!(mean_iterations(&[], 8), 0.0);
    }

    #[test]
    fn histogram_bins() {
        let h = Histogram::new(&[0.0, 0.005, 0.012, 0.031], 0.01).unwrap();
        assert_eq!(h.bins.iter().map(|b| b.1).collect::<Vec<_>>(), vec![2, 1, 0, 1]);
        assert_eq!(h.mass(), 4);
        assert!(h.to_csv().starts_with("bin_left,count\n0.000000,2\n"));
        assert!(Histogram::new(&[-1.0], 0.01).is_err());
    }
}
