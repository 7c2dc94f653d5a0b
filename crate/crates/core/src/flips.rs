//! FLIPS: a direction from an oracle over the cost's unit ball, then an
//! exact line search for η restricted to the cone K(ε̄).

use std::fmt;
use std::str::FromStr;

use crate::error::{LipError, Result};
use crate::instance::LipInstance;
use crate::linesearch::{gamma_max_segment, gamma_opt_segment, Segment};
use crate::smooth::{cone_member_image, m_matrix_extreme_eigs, EtaEval};
use crate::trace::{Monitor, Observation, Solution, SolverTrace};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    /// Frank-Wolfe vertex of the unit ball.
    Linear,
    /// Projected gradient step onto the unit ball.
    Quadratic,
    /// Projected gradient step with momentum on the previous direction.
    Accelerated,
}

impl Oracle {
    /// Whether η is guaranteed non-increasing along the iterates.
    pub fn is_monotone(self) -> bool {
        !matches!(self, Oracle::Accelerated)
    }
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Oracle::Linear => "linear",
            Oracle::Quadratic => "quadratic",
            Oracle::Accelerated => "accelerated",
        })
    }
}

impl FromStr for Oracle {
    type Err = LipError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Oracle::Linear),
            "quadratic" => Ok(Oracle::Quadratic),
            "accelerated" | "accelerated-quadratic" => Ok(Oracle::Accelerated),
            other => Err(LipError::Parse(format!("unknown oracle '{other}'"))),
        }
    }
}

/// Gradient step 1/β of the quadratic oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    /// κ/(λ_max(M(h₀))‖φ‖²), which adapts to the scale of x and ε.
    Curvature(f64),
}

pub const DEFAULT_CURVATURE_SCALE: f64 = 5.0;

impl StepSize {
    /// The per-patch-side table for m×m DCT patches.
    pub fn table(m: usize) -> Self {
        StepSize::Fixed(default_inv_beta(m))
    }

    pub fn resolve(self, inst: &LipInstance, h0: &Vector) -> Result<f64> {
        let v = match self {
            StepSize::Fixed(v) => v,
            StepSize::Curvature(kappa) => {
                let (_, top) = m_matrix_extreme_eigs(inst, h0)?;
                kappa / (top * inst.op().op_norm_sq())
            }
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(LipError::InvalidConfig(format!("step {self} resolves to {v}")))
        }
    }

    fn scale(self) -> f64 {
        match self {
            StepSize::Fixed(v) | StepSize::Curvature(v) => v,
        }
    }
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize::Curvature(DEFAULT_CURVATURE_SCALE)
    }
}

impl fmt::Display for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSize::Fixed(v) => write!(f, "{v}"),
            StepSize::Curvature(k) => write!(f, "curvature:{k}"),
        }
    }
}

impl FromStr for StepSize {
    type Err = LipError;

    /// Accepts a number or "curvature:<kappa>".
    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| LipError::Parse(format!("bad step size '{s}'")));
        match s.strip_prefix("curvature:") {
            Some(k) => Ok(StepSize::Curvature(parse(k)?)),
            None if s == "curvature" => Ok(StepSize::default()),
            None => Ok(StepSize::Fixed(parse(s)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipsConfig {
    pub oracle: Oracle,
    pub step: StepSize,
    /// Momentum weight of the accelerated oracle.
    pub rho: f64,
    pub max_iters: usize,
    /// Stop when ‖g(h) − h‖ ≤ tol_h (non-momentum oracles only).
    pub tol_h: f64,
}

impl Default for FlipsConfig {
    fn default() -> Self {
        Self { oracle: Oracle::Accelerated, step: StepSize::default(), rho: 0.7, max_iters: 50, tol_h: 1e-12 }
    }
}

impl FlipsConfig {
    pub fn validate(&self) -> Result<()> {
        let v = self.step.scale();
        if !(v > 0.0 && v.is_finite()) {
            return Err(LipError::InvalidConfig(format!("step size must be positive, got {}", self.step)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(LipError::InvalidConfig(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.tol_h >= 0.0) {
            return Err(LipError::InvalidConfig(format!("tol_h must be nonnegative, got {}", self.tol_h)));
        }
        Ok(())
    }
}

/// Gradient step of the quadratic oracles tuned for m×m DCT patches with
/// pixel values in [0, 1].
pub fn default_inv_beta(m: usize) -> f64 {
    match m {
        0..=4 => 8e-2,
        5..=8 => 2e-3,
        9..=16 => 1.6e-3,
        17..=32 => 2.8e-4,
        _ => 2.8e-5,
    }
}

pub fn direction_linear(inst: &LipInstance, grad: &Vector) -> Result<Vector> {
    inst.cost().lmo(grad)
}

pub fn direction_quadratic(inst: &LipInstance, h: &Vector, grad: &Vector, inv_beta: f64) -> Vector {
    inst.cost().project(&(h - grad * inv_beta), 1.0)
}

/// Returns (g, d_next) with d_next = g − h.
pub fn direction_accelerated(
    inst: &LipInstance,
    h: &Vector,
    grad: &Vector,
    d_prev: &Vector,
    inv_beta: f64,
    rho: f64,
) -> (Vector, Vector) {
    let g = inst.cost().project(&(h - (grad + d_prev * rho) * inv_beta), 1.0);
    let d = &g - h;
    (g, d)
}

/// Whether a non-momentum run has stalled.
pub fn stopping(oracle: Oracle, step_norm: f64, gamma: f64, tol_h: f64) -> bool {
    oracle.is_monotone() && (step_norm <= tol_h || gamma == 0.0)
}

pub fn flips_solve(inst: &LipInstance, cfg: &FlipsConfig) -> Result<Solution> {
    flips_solve_with(inst, cfg, &Monitor::default())
}

pub fn flips_solve_with(inst: &LipInstance, cfg: &FlipsConfig, monitor: &Monitor) -> Result<Solution> {
    cfg.validate()?;
    inst.ensure_feasible()?;
    let op = inst.op();
    let h0 = inst.initial_point()?;
    let phi_h0 = op.forward(&h0);
    if !cone_member_image(inst, &phi_h0, inst.eps_bar()) {
        return Err(LipError::NotInCone);
    }
    let inv_beta = match cfg.oracle {
        Oracle::Linear => 0.0,
        _ => cfg.step.resolve(inst, &h0)?,
    };
    let mut ev = EtaEval::with_image(inst, h0, phi_h0)?;
    let mut trace = SolverTrace::new(format!("flips-{}", cfg.oracle));
    let mut d_prev = Vector::zeros(ev.h.len());

    let observe = |trace: &mut SolverTrace, ev: &EtaEval, k: usize, gamma: f64| {
        let f = ev.rescaled();
        let residual = (inst.x() - &ev.phi_h * ev.eta).norm();
        monitor.observe(
            trace,
            Observation { k, eta: ev.eta, gamma, f: &f, residual, gap: None, ergodic_gap: None, dual: None },
        )
    };
    let mut stop = observe(&mut trace, &ev, 0, 0.0);

    let mut k = 0;
    while !stop && k < cfg.max_iters {
        k += 1;
        let grad = ev.grad()?;
        let d = match cfg.oracle {
            Oracle::Linear => direction_linear(inst, grad)? - &ev.h,
            Oracle::Quadratic => direction_quadratic(inst, &ev.h, grad, inv_beta) - &ev.h,
            Oracle::Accelerated => {
                let (_, d) = direction_accelerated(inst, &ev.h, grad, &d_prev, inv_beta, cfg.rho);
                d_prev = d.clone();
                d
            }
        };
        let step_norm = d.norm();
        if cfg.oracle.is_monotone() && step_norm <= cfg.tol_h {
            break;
        }
        let phi_d = op.forward(&d);
        let seg = Segment::from_images(inst.x(), &ev.phi_h, &phi_d);
        let gamma_hat = gamma_max_segment(&seg, inst.norm_x_sq(), inst.eps_bar());
        let gamma = match gamma_opt_segment(&seg, inst.gap(), gamma_hat) {
            Ok(g) => g,
            Err(LipError::DegenerateDirection) => 0.0,
            Err(e) => return Err(e),
        };
        if gamma > 0.0 {
            let h = &ev.h + &d * gamma;
            let phi_h = op.forward(&h);
            ev = EtaEval::with_image(inst, h, phi_h)?;
        }
        stop = observe(&mut trace, &ev, k, gamma) || stopping(cfg.oracle, step_norm, gamma, cfg.tol_h);
    }

    Ok(Solution { f: ev.rescaled(), h: Some(ev.h), lambda: ev.lambda, trace })
}
