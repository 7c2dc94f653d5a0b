//! Sliding m×m patches and coverage-averaged reconstruction.

use flips_core::Vector;

use crate::error::{DenoiseError, Result};
use crate::image::Image;

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    width: usize,
    height: usize,
    m: usize,
    stride: usize,
    /// Top-left corners, row-major.
    origins: Vec<(usize, usize)>,
    /// Number of patches covering each pixel.
    coverage: Vec<u32>,
}

impl PatchGrid {
    /// Stride-1 grid.
    pub fn new(width: usize, height: usize, m: usize) -> Result<Self> {
        Self::with_stride(width, height, m, 1)
    }

    /// Any stride up to m; the last row and column of patches are shifted flush with
    /// the border so every pixel is covered.
    pub fn with_stride(width: usize, height: usize, m: usize, stride: usize) -> Result<Self> {
        if m == 0 || stride == 0 {
            return Err(DenoiseError::InvalidConfig("patch side and stride must be positive".into()));
        }
        if stride > m {
            return Err(DenoiseError::InvalidConfig(format!("stride {stride} exceeds patch side {m}")));
        }
        if m > width.min(height) {
            return Err(DenoiseError::InvalidConfig(format!("patch side {m} exceeds image size {width}x{height}")));
        }
        let starts = |len: usize| {
            let mut s: Vec<usize> = (0..=len - m).step_by(stride).collect();
            if *s.last().expect("nonempty") != len - m {
                s.push(len - m);
            }
            s
        };
        let (rows, cols) = (starts(height), starts(width));
        let origins: Vec<_> = rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect();
        let mut coverage = vec![0u32; width * height];
        for &(r0, c0) in &origins {
            for r in r0..r0 + m {
                for c in c0..c0 + m {
                    coverage[r * width + c] += 1;
                }
            }
        }
        Ok(Self { width, height, m, stride, origins, coverage })
    }

    pub fn for_image(img: &Image, m: usize) -> Result<Self> {
        Self::new(img.width(), img.height(), m)
    }

    pub fn patch_side(&self) -> usize {
        self.m
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn origin(&self, index: usize) -> (usize, usize) {
        self.origins[index]
    }

    pub fn coverage(&self) -> &[u32] {
        &self.coverage
    }

    fn check(&self, img: &Image) -> Result<()> {
        if img.width() != self.width || img.height() != self.height {
            return Err(DenoiseError::InvalidImage(format!(
                "image is {}x{}, grid expects {}x{}",
                img.width(),
                img.height(),
                self.width,
                self.height
            )));
        }
        Ok(())
    }

    /// Patch `index` as a row-major vector of length m².
    pub fn extract(&self, img: &Image, index: usize) -> Result<Vector> {
        self.check(img)?;
        let (r0, c0) = self.origins[index];
        let m = self.m;
        Ok(Vector::from_fn(m * m, |i, _| img.get(r0 + i / m, c0 + i % m)))
    }

    pub fn extract_all(&self, img: &Image) -> Result<Vec<Vector>> {
        (0..self.len()).map(|i| self.extract(img, i)).collect()
    }

    /// Per-pixel mean of the patches covering it, accumulated in patch order
    /// as a running mean so that identical contributions reproduce exactly.
    pub fn reconstruct(&self, patches: &[Vector]) -> Result<Image> {
        if patches.len() != self.len() {
            return Err(DenoiseError::InvalidConfig(format!("{} patches for a grid of {}", patches.len(), self.len())));
        }
        let m = self.m;
        let mut mean = vec![0.0; self.width * self.height];
        let mut seen = vec![0u32; self.width * self.height];
        for (p, &(r0, c0)) in patches.iter().zip(&self.origins) {
            if p.len() != m * m {
                return Err(DenoiseError::InvalidConfig(format!("patch of length {}, expected {}", p.len(), m * m)));
            }
            for i in 0..m * m {
                let idx = (r0 + i / m) * self.width + c0 + i % m;
                seen[idx] += 1;
                mean[idx] += (p[i] - mean[idx]) / f64::from(seen[idx]);
            }
        }
        debug_assert_eq!(seen, self.coverage);
        Image::new(self.width, self.height, mean)
    }
}
