//! Projected accelerated gradient descent on η over the cost's unit ball.
//!
//! Only the ball constraint is projected; the step must be small enough for
//! the iterates to stay inside K(ε̄) on their own.

use crate::error::{LipError, Result};
use crate::instance::LipInstance;
use crate::smooth::EtaEval;
use crate::trace::{Monitor, Observation, Solution, SolverTrace};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PagdConfig {
    /// Gradient step 1/b.
    pub inv_b: f64,
    pub max_iters: usize,
}

impl PagdConfig {
    /// 1/b = 0.1/(η(h₀)²‖φ‖²), which keeps the iterates inside K(ε̄) on
    /// random instances across scales.
    pub fn for_instance(inst: &LipInstance, max_iters: usize) -> Result<Self> {
        inst.ensure_feasible()?;
        let eta0 = EtaEval::new(inst, inst.initial_point()?)?.eta;
        Ok(Self { inv_b: 0.1 / (eta0 * eta0 * inst.op().op_norm_sq()), max_iters })
    }
}

/// t_{k+1} = (1 + √(1 + 4t_k²))/2.
pub fn next_t(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

fn eval_in_cone(inst: &LipInstance, h: Vector, iteration: usize) -> Result<EtaEval> {
    let ev = EtaEval::new(inst, h).map_err(|e| match e {
        LipError::NotInCone => LipError::ConeViolation { iteration },
        other => other,
    })?;
    let eb = inst.eps_bar();
    if ev.e >= eb * eb {
        return Err(LipError::ConeViolation { iteration });
    }
    Ok(ev)
}

pub fn pagd_solve(inst: &LipInstance, cfg: &PagdConfig) -> Result<Solution> {
    pagd_solve_with(inst, cfg, &Monitor::default())
}

pub fn pagd_solve_with(inst: &LipInstance, cfg: &PagdConfig, monitor: &Monitor) -> Result<Solution> {
    if !(cfg.inv_b > 0.0 && cfg.inv_b.is_finite()) {
        return Err(LipError::InvalidConfig(format!("inv_b must be positive, got {}", cfg.inv_b)));
    }
    inst.ensure_feasible()?;
    let mut z = eval_in_cone(inst, inst.initial_point()?, 0)?;
    let mut y = z.clone();
    let mut t = 1.0;
    let mut trace = SolverTrace::new("pagd");

    let observe = |trace: &mut SolverTrace, ev: &EtaEval, k: usize| {
        let f = ev.rescaled();
        let residual = (inst.x() - &ev.phi_h * ev.eta).norm();
        monitor.observe(
            trace,
            Observation { k, eta: ev.eta, gamma: cfg.inv_b, f: &f, residual, gap: None, ergodic_gap: None, dual: None },
        )
    };
    let mut stop = observe(&mut trace, &z, 0);

    let mut k = 0;
    while !stop && k < cfg.max_iters {
        k += 1;
        let grad = y.grad().map_err(|_| LipError::ConeViolation { iteration: k })?;
        let step = inst.cost().project(&(&y.h - grad * cfg.inv_b), 1.0);
        let z_new = eval_in_cone(inst, step, k)?;
        let t_new = next_t(t);
        let ext = &z_new.h + (&z_new.h - &z.h) * ((t - 1.0) / t_new);
        t = t_new;
        y = eval_in_cone(inst, ext, k)?;
        z = z_new;
        stop = observe(&mut trace, &z, k);
    }
    Ok(Solution { f: z.rescaled(), h: Some(z.h), lambda: z.lambda, trace })
}
