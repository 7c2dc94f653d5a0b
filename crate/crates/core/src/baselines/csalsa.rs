//! C-SALSA: ADMM on the splitting v₁ = f, v₂ = φf with an ℓ1 prox and a
//! projection onto the ε-ball around x.

use nalgebra::Cholesky;

use crate::error::{LipError, Result};
use crate::geometry::soft_threshold;
use crate::instance::LipInstance;
use crate::operator::OperatorKind;
use crate::trace::{Monitor, Observation, Solution, SolverTrace};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsalsaConfig {
    /// Augmented Lagrangian penalty μ.
    pub mu: f64,
    pub max_iters: usize,
}

impl CsalsaConfig {
    /// μ = 2.5, or 3 for patches of side at least 64.
    pub fn for_patch_side(m: usize, max_iters: usize) -> Self {
        Self { mu: if m >= 64 { 3.0 } else { 2.5 }, max_iters }
    }
}

/// Projection onto {v : ‖v − center‖ ≤ radius}.
pub fn ball_project(v: &Vector, center: &Vector, radius: f64) -> Vector {
    let diff = v - center;
    let n = diff.norm();
    if n <= radius {
        v.clone()
    } else {
        center + diff * (radius / n)
    }
}

enum Inverse {
    Half,
    Factored(Cholesky<f64, nalgebra::Dyn>),
}

impl Inverse {
    fn new(inst: &LipInstance) -> Result<Self> {
        match inst.op().kind() {
            OperatorKind::Dense(m) => {
                let n = m.ncols();
                let a = Matrix::identity(n, n) + m.tr_mul(m);
                a.cholesky().map(Inverse::Factored).ok_or(LipError::SingularSystem)
            }
            _ => Ok(Inverse::Half),
        }
    }

    fn solve(&self, r: &Vector) -> Vector {
        match self {
            Inverse::Half => r * 0.5,
            Inverse::Factored(c) => c.solve(r),
        }
    }
}

pub fn csalsa_solve(inst: &LipInstance, cfg: &CsalsaConfig) -> Result<Solution> {
    csalsa_solve_with(inst, cfg, &Monitor::default())
}

pub fn csalsa_solve_with(inst: &LipInstance, cfg: &CsalsaConfig, monitor: &Monitor) -> Result<Solution> {
    if !(cfg.mu > 0.0 && cfg.mu.is_finite()) {
        return Err(LipError::InvalidConfig(format!("mu must be positive, got {}", cfg.mu)));
    }
    inst.ensure_feasible()?;
    let op = inst.op();
    let x = inst.x();
    let eps = inst.eps();
    let inverse = Inverse::new(inst)?;

    let mut f = Vector::zeros(op.signal_dim());
    let mut v1 = f.clone();
    let mut d1 = f.clone();
    let mut v2 = Vector::zeros(op.measurement_dim());
    let mut d2 = v2.clone();
    let mut trace = SolverTrace::new("csalsa");

    let observe = |trace: &mut SolverTrace, f: &Vector, phi_f: &Vector, k: usize| {
        let residual = (x - phi_f).norm();
        let eta = inst.cost().value(f);
        monitor.observe(
            trace,
            Observation { k, eta, gamma: 1.0 / cfg.mu, f, residual, gap: None, ergodic_gap: None, dual: None },
        )
    };
    let mut stop = observe(&mut trace, &f, &Vector::zeros(op.measurement_dim()), 0);

    let mut k = 0;
    while !stop && k < cfg.max_iters {
        k += 1;
        let r = &v1 + &d1 + op.backward(&(&v2 + &d2));
        f = inverse.solve(&r);
        let phi_f = op.forward(&f);
        v1 = soft_threshold(&(&f - &d1), 1.0 / cfg.mu);
        v2 = ball_project(&(&phi_f - &d2), x, eps);
        d1 -= &f - &v1;
        d2 -= &phi_f - &v2;
        stop = observe(&mut trace, &f, &phi_f, k);
    }
    Ok(Solution { f, h: None, lambda: None, trace })
}
