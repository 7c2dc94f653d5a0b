//! ℓ1 cost geometry: the cost value, its dual norm, projection onto the ℓ1
//! ball, the linear minimization oracle, and the thresholding primitives
//! shared by the proximal baselines.

use crate::error::{LipError, Result};
use crate::Vector;

/// The atomic cost c. Only the ℓ1 norm is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomicCost {
    pub kind: CostKind,
    pub dim: usize,
}

impl AtomicCost {
    pub fn l1(dim: usize) -> Self {
        Self { kind: CostKind::L1, dim }
    }

    /// c(f).
    pub fn value(&self, f: &Vector) -> f64 {
        match self.kind {
            CostKind::L1 => f.lp_norm(1),
        }
    }

    /// c′(f) = max over the unit ball of ⟨f, h⟩.
    pub fn dual_norm(&self, f: &Vector) -> f64 {
        match self.kind {
            CostKind::L1 => f.amax(),
        }
    }

    /// Euclidean projection onto {c ≤ radius}.
    pub fn project(&self, f: &Vector, radius: f64) -> Vector {
        match self.kind {
            CostKind::L1 => l1_project(f, radius),
        }
    }

    /// Minimizer of ⟨gradient, g⟩ over {c ≤ 1}.
    pub fn lmo(&self, gradient: &Vector) -> Result<Vector> {
        match self.kind {
            CostKind::L1 => l1_lmo(gradient),
        }
    }
}

/// Euclidean projection of `f` onto {g : ‖g‖₁ ≤ radius}, by sorting the
/// magnitudes and finding the soft-threshold level.
pub fn l1_project(f: &Vector, radius: f64) -> Vector {
    assert!(radius > 0.0, "projection radius must be positive");
    if f.lp_norm(1) <= radius {
        return f.clone();
    }
    let mut mags: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if u > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    soft_threshold(f, theta.max(0.0))
}

/// Linear minimization oracle over the unit ℓ1 ball.
///
/// Places mass −sgn(∂ᵢ) on every coordinate attaining ‖gradient‖∞, split
/// equally among ties.
pub fn l1_lmo(gradient: &Vector) -> Result<Vector> {
    let top = gradient.amax();
    if top == 0.0 || !top.is_finite() {
        return Err(LipError::ZeroGradient);
    }
    let ties = gradient.iter().filter(|g| g.abs() == top).count() as f64;
    Ok(gradient.map(|g| if g.abs() == top { -g.signum() / ties } else { 0.0 }))
}

/// Componentwise shrinkage sgn(vᵢ)·max(|vᵢ| − τ, 0).
pub fn soft_threshold(v: &Vector, tau: f64) -> Vector {
    debug_assert!(tau >= 0.0);
    v.map(|x| x.signum() * (x.abs() - tau).max(0.0))
}

/// Block shrinkage v·max(0, 1 − τ/‖v‖); zero maps to zero.
pub fn block_soft_threshold(v: &Vector, tau: f64) -> Vector {
    debug_assert!(tau >= 0.0);
    let norm = v.norm();
    if norm <= tau || norm == 0.0 {
        Vector::zeros(v.len())
    } else {
        v * (1.0 - tau / norm)
    }
}
