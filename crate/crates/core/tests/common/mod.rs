#![allow(dead_code)]

use std::sync::Arc;

use flips_core::{LinearOperator, LipInstance, Matrix, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Identity-operator instance with ε a random fraction of ‖x‖ and ε̄ = 0.99ε.
pub fn identity_instance(rng: &mut ChaCha8Rng, n: usize) -> LipInstance {
    let x = gaussian_vector(rng, n);
    let eps = rng.gen_range(0.2..0.6) * x.norm();
    LipInstance::new(x, Arc::new(LinearOperator::identity(n)), eps, 0.99 * eps).unwrap()
}

/// Wide Gaussian operator (n < d) so every x is reachable.
pub fn dense_instance(rng: &mut ChaCha8Rng, n: usize, d: usize) -> LipInstance {
    let m = gaussian_matrix(rng, n, d) / (n as f64).sqrt();
    let x = gaussian_vector(rng, n);
    let eps = rng.gen_range(0.2..0.5) * x.norm();
    LipInstance::new(x, Arc::new(LinearOperator::dense(m)), eps, 0.99 * eps).unwrap()
}

/// Oracle for unitary φ: soft-threshold φᵃx at the τ found by bisection on
/// Σ min(|yᵢ|, τ)² = ε².
pub fn soft_threshold_oracle(y: &Vector, eps: f64) -> Vector {
    let (mut lo, mut hi) = (0.0, y.amax());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s: f64 = y.iter().map(|v| v.abs().min(mid).powi(2)).sum();
        if s < eps * eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    y.map(|v| v.signum() * (v.abs() - tau).max(0.0))
}

/// min over a uniform θ-grid of ‖x − θp‖², θ ∈ [−R, R].
pub fn e_grid(x: &Vector, p: &Vector, points: usize) -> f64 {
    let r = 2.0 * x.norm() / p.norm().max(1e-300);
    (0..points)
        .map(|i| -r + 2.0 * r * i as f64 / (points - 1) as f64)
        .map(|t| (x - p * t).norm_squared())
        .fold(f64::INFINITY, f64::min)
}

/// Smallest positive θ with ‖x − θp‖ = ε, by scanning then bisecting.
pub fn smallest_root(x: &Vector, p: &Vector, eps: f64) -> Option<f64> {
    let g = |t: f64| (x - p * t).norm() - eps;
    let upper = 4.0 * x.norm() / p.norm();
    let steps = 100_000;
    let mut prev = 0.0;
    for i in 1..=steps {
        let t = upper * i as f64 / steps as f64;
        if g(t) <= 0.0 {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = t;
    }
    None
}

/// Random h strictly inside K(level): x's preimage direction plus a small
/// perturbation, rejected until inside.
pub fn interior_point(rng: &mut ChaCha8Rng, inst: &LipInstance, level: f64) -> Vector {
    let base = inst.ls_solution().clone();
    loop {
        let scale = rng.gen_range(0.05..1.5) * base.norm();
        let h = &base + gaussian_vector(rng, base.len()) * (scale / (base.len() as f64).sqrt());
        let h = &h * rng.gen_range(0.2..3.0);
        if flips_core::smooth::cone_member(inst, &h, level) {
            let e = flips_core::smooth::e_residual(inst, &h);
            if e < level * level * (1.0 - 1e-3) {
                return h;
            }
        }
    }
}

/// Relative error with an absolute floor.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

pub fn vec_rel_err(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm().max(1e-12)
}
