//! Chambolle-Pock on min_f max_u c(f) + ⟨u, φf − x⟩ − ε‖u‖.

use crate::error::{LipError, Result};
use crate::geometry::{block_soft_threshold, soft_threshold};
use crate::instance::LipInstance;
use crate::operator::LinearOperator;
use crate::trace::{Monitor, Observation, Solution, SolverTrace};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpConfig {
    /// Dual step σ.
    pub sigma_step: f64,
    /// Primal step τ.
    pub tau_step: f64,
    /// Extrapolation weight θ.
    pub theta: f64,
    pub max_iters: usize,
}

impl CpConfig {
    /// σ = τ = 1/‖φ‖ and θ = 0.6.
    pub fn for_operator(op: &LinearOperator, max_iters: usize) -> Self {
        let step = 1.0 / op.op_norm_sq().sqrt();
        Self { sigma_step: step, tau_step: step, theta: 0.6, max_iters }
    }

    pub fn validate(&self, op: &LinearOperator) -> Result<()> {
        if !(self.sigma_step > 0.0 && self.tau_step > 0.0) {
            return Err(LipError::InvalidConfig("CP steps must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(LipError::InvalidConfig(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        let product = self.sigma_step * self.tau_step * op.op_norm_sq();
        if product > 1.0 + 1e-9 {
            return Err(LipError::StepSizeViolation { product });
        }
        Ok(())
    }
}

/// Proximal map of σ·(u ↦ ⟨x,u⟩ + ε‖u‖) at v.
pub fn dual_prox(v: &Vector, sigma: f64, x: &Vector, eps: f64) -> Vector {
    block_soft_threshold(&(v - x * sigma), sigma * eps)
}

pub fn cp_solve(inst: &LipInstance, cfg: &CpConfig) -> Result<Solution> {
    cp_solve_with(inst, cfg, &Monitor::default())
}

/// Returns the last primal iterate; the running average is kept in the trace.
pub fn cp_solve_with(inst: &LipInstance, cfg: &CpConfig, monitor: &Monitor) -> Result<Solution> {
    let op = inst.op();
    cfg.validate(op)?;
    inst.ensure_feasible()?;
    let (sigma, tau) = (cfg.sigma_step, cfg.tau_step);
    let x = inst.x();
    let eps = inst.eps();

    let mut f = Vector::zeros(op.signal_dim());
    let mut f_bar = f.clone();
    let mut u = Vector::zeros(op.measurement_dim());
    let mut avg = f.clone();
    let mut trace = SolverTrace::new("cp");

    let observe = |trace: &mut SolverTrace, f: &Vector, k: usize| {
        let residual = (x - op.forward(f)).norm();
        let eta = inst.cost().value(f);
        monitor
            .observe(trace, Observation { k, eta, gamma: tau, f, residual, gap: None, ergodic_gap: None, dual: None })
    };
    let mut stop = observe(&mut trace, &f, 0);

    let mut k = 0;
    while !stop && k < cfg.max_iters {
        k += 1;
        u = dual_prox(&(&u + op.forward(&f_bar) * sigma), sigma, x, eps);
        let f_new = soft_threshold(&(&f - op.backward(&u) * tau), tau);
        f_bar = &f_new + (&f_new - &f) * cfg.theta;
        f = f_new;
        avg += (&f - &avg) / k as f64;
        stop = observe(&mut trace, &f, k);
    }
    trace.ergodic = Some(avg);
    Ok(Solution { f, h: None, lambda: Some(u), trace })
}
