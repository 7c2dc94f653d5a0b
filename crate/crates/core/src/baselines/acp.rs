//! Accelerated Chambolle-Pock on the saddle problem
//! min_{h ∈ B_c} max_{λ ∈ Λ̄} 2l(λ) − ⟨λ, φh⟩,
//! whose dual side −2l is strongly convex and smooth on Λ̄.

use crate::error::{LipError, Result};
use crate::instance::LipInstance;
use crate::smooth::{eta_bar_lower, eta_hat_candidate, l_value, regularity_constants, EtaEval};
use crate::trace::{Monitor, Observation, Solution, SolverTrace};
use crate::Vector;

/// Halfspace refinements allowed after the ball projection.
const MAX_REFINEMENTS: usize = 50;

/// Λ̄ = {λ : l(λ) ≥ η̄, ‖λ‖ ≤ B}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaBarSet {
    pub eta_bar: f64,
    pub bound_b: f64,
}

impl LambdaBarSet {
    pub fn contains(&self, x: &Vector, eps: f64, lam: &Vector, tol: f64) -> bool {
        lam.norm() <= self.bound_b * (1.0 + tol)
            && lam.dot(x) - eps * lam.norm() >= self.eta_bar * self.eta_bar * (1.0 - tol)
    }
}

fn ball(lam: &Vector, radius: f64) -> Vector {
    let n = lam.norm();
    if n <= radius {
        lam.clone()
    } else {
        lam * (radius / n)
    }
}

/// Ball projection followed by alternating halfspace cuts of
/// {⟨λ,x⟩ − ε‖λ‖ ≥ η̄²} linearized at the current point.
pub fn lambda_bar_project(set: &LambdaBarSet, x: &Vector, eps: f64, lam: &Vector) -> Vector {
    let target = set.eta_bar * set.eta_bar;
    let mut p = ball(lam, set.bound_b);
    for _ in 0..MAX_REFINEMENTS {
        let np = p.norm();
        let g = p.dot(x) - eps * np - target;
        if g >= 0.0 {
            break;
        }
        let normal = if np > 0.0 { x - &p * (eps / np) } else { x * (1.0 - eps / x.norm()) };
        let nn = normal.norm_squared();
        if nn == 0.0 {
            break;
        }
        p += normal * (-g / nn);
        p = ball(&p, set.bound_b);
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcpConfig {
    pub eta_bar: f64,
    pub bound_b: f64,
    pub theta0: f64,
    pub t0: f64,
    pub s0: f64,
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub max_iters: usize,
}

impl AcpConfig {
    /// Constants from the instance with η̄ = ‖x‖(‖x‖−ε)/c′(φᵃx) and η̂ from
    /// the least-squares solution.
    pub fn from_instance(inst: &LipInstance, max_iters: usize) -> Result<Self> {
        let eta_bar = eta_bar_lower(inst)?;
        let eta_hat = eta_hat_candidate(inst)?.max(eta_bar);
        let c = regularity_constants(inst, eta_bar, eta_hat)?;
        Ok(Self {
            eta_bar,
            bound_b: c.bound_b,
            theta0: 1.0,
            t0: 1.0 / (2.0 * c.beta_prime),
            s0: c.beta_prime / inst.op().op_norm_sq(),
            alpha_prime: c.alpha_prime,
            beta_prime: c.beta_prime,
            max_iters,
        })
    }

    pub fn lambda_set(&self) -> LambdaBarSet {
        LambdaBarSet { eta_bar: self.eta_bar, bound_b: self.bound_b }
    }
}

/// max_λ L(h,λ) − min_{h′ ∈ B_c} L(h′,λ) = η(h) − 2l(λ) + c′(φᵃλ);
/// +∞ when h is outside K(ε).
pub fn duality_gap(inst: &LipInstance, h: &Vector, lam: &Vector) -> f64 {
    let Ok(ev) = EtaEval::new(inst, h.clone()) else {
        return f64::INFINITY;
    };
    let Ok(l) = l_value(inst.x(), inst.eps(), lam) else {
        return f64::INFINITY;
    };
    ev.eta - 2.0 * l + inst.cost().dual_norm(&inst.op().backward(lam))
}

pub fn acp_solve(inst: &LipInstance, cfg: &AcpConfig) -> Result<Solution> {
    acp_solve_with(inst, cfg, &Monitor::default())
}

pub fn acp_solve_with(inst: &LipInstance, cfg: &AcpConfig, monitor: &Monitor) -> Result<Solution> {
    if !(cfg.t0 > 0.0 && cfg.s0 > 0.0 && cfg.eta_bar > 0.0 && cfg.bound_b > 0.0 && cfg.alpha_prime >= 0.0) {
        return Err(LipError::InvalidConfig("ACP constants must be positive".into()));
    }
    inst.ensure_feasible()?;
    let op = inst.op();
    let x = inst.x();
    let eps = inst.eps();
    let set = cfg.lambda_set();

    let h0 = inst.initial_point()?;
    let start =
        EtaEval::new(inst, h0.clone()).ok().and_then(|ev| ev.lambda).unwrap_or_else(|| x * (cfg.eta_bar / x.norm()));
    let mut h = h0;
    let mut lam = lambda_bar_project(&set, x, eps, &start);
    let mut lam_prev = lam.clone();
    let (mut theta, mut t, mut s) = (cfg.theta0, cfg.t0, cfg.s0);
    let mut trace = SolverTrace::new("acp");

    // Ergodic averages weighted by 1/t_k, the dual step that produced λ_{k+1}.
    let mut h_avg = h.clone();
    let mut lam_avg = lam.clone();
    let mut weight = 0.0;

    let observe = |trace: &mut SolverTrace, h: &Vector, lam: &Vector, avg: (&Vector, &Vector), k: usize, step: f64| {
        let l = l_value(x, eps, lam).ok();
        let (eta, f, residual) = match EtaEval::new(inst, h.clone()) {
            Ok(ev) => {
                let residual = (x - &ev.phi_h * ev.eta).norm();
                (ev.eta, ev.rescaled(), residual)
            }
            Err(_) => {
                let f = h * l.unwrap_or(0.0);
                let residual = (x - op.forward(&f)).norm();
                (l.unwrap_or(0.0), f, residual)
            }
        };
        let gap = Some(duality_gap(inst, h, lam));
        let ergodic_gap = Some(duality_gap(inst, avg.0, avg.1));
        monitor.observe(trace, Observation { k, eta, gamma: step, f: &f, residual, gap, ergodic_gap, dual: l })
    };
    let mut stop = observe(&mut trace, &h, &lam, (&h_avg, &lam_avg), 0, 0.0);

    let mut k = 0;
    while !stop && k < cfg.max_iters {
        k += 1;
        let lam_bar = &lam + (&lam - &lam_prev) * theta;
        h = inst.cost().project(&(&h + op.backward(&lam_bar) * s), 1.0);
        let l = l_value(x, eps, &lam)?;
        let nl = lam.norm();
        let ascent = x - &lam * (eps / nl) - op.forward(&h) * l;
        let lam_new = lambda_bar_project(&set, x, eps, &(&lam + ascent * (t / l)));
        lam_prev = std::mem::replace(&mut lam, lam_new);
        let step = t;
        let w = 1.0 / t;
        weight += w;
        h_avg += (&h - &h_avg) * (w / weight);
        lam_avg += (&lam - &lam_avg) * (w / weight);
        theta = 1.0 / (1.0 + cfg.alpha_prime * t).sqrt();
        t *= theta;
        s /= theta;
        stop = observe(&mut trace, &h, &lam, (&h_avg, &lam_avg), k, step);
    }
    trace.ergodic = Some(h_avg);

    let f = match EtaEval::new(inst, h.clone()) {
        Ok(ev) => ev.rescaled(),
        Err(_) => &h * l_value(x, eps, &lam)?,
    };
    Ok(Solution { f, h: Some(h), lambda: Some(lam), trace })
}
