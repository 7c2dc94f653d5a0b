//! Closed-form solution when φ is unitary: f* = soft(φᵃx, τ) with τ chosen
//! so that Σ min(|yᵢ|, τ)² = ε².

use crate::error::{LipError, Result};
use crate::geometry::soft_threshold;
use crate::instance::LipInstance;
use crate::Vector;

/// The τ ≥ 0 solving Σ min(|yᵢ|, τ)² = ε²; requires ‖y‖ > ε.
pub fn threshold_level(y: &Vector, eps: f64) -> Result<f64> {
    let norm = y.norm();
    if norm <= eps {
        return Err(LipError::Degenerate { norm_x: norm, eps });
    }
    let mut mags: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(f64::total_cmp);
    let n = mags.len();
    let target = eps * eps;
    // Below the j-th smallest magnitude, the sum is prefix + (n − j)τ².
    let mut prefix = 0.0;
    for (j, &a) in mags.iter().enumerate() {
        let tail = (n - j) as f64;
        if prefix + tail * a * a >= target {
            return Ok(((target - prefix) / tail).max(0.0).sqrt());
        }
        prefix += a * a;
    }
    unreachable!("‖y‖ > ε guarantees the last magnitude brackets τ")
}

/// Exact minimizer for a unitary operator.
pub fn analytic_solution(inst: &LipInstance) -> Result<Vector> {
    if !inst.op().is_unitary() {
        return Err(LipError::InvalidInstance("closed-form solution needs a unitary operator".into()));
    }
    let y = inst.adj_x();
    Ok(soft_threshold(y, threshold_level(y, inst.eps())?))
}
