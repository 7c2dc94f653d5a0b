//! The smooth reformulation of the LIP.
//!
//! For h in the cone K(ε) = {h : ⟨x,φh⟩ > 0, e(h) ≤ ε²}, η(h) is the
//! smallest θ > 0 with ‖x − θφ(h)‖ = ε. It is convex, positively homogeneous
//! of degree −1, and its minimum over the unit ball of the cost equals the
//! optimal cost c*, attained at h* = f*/c*.

use nalgebra::SymmetricEigen;

use crate::error::{LipError, Result};
use crate::instance::LipInstance;
use crate::{Matrix, Vector};

/// Relative slack on ε² − e(h) separating interior points from the boundary
/// of the cone.
pub const INTERIOR_SLACK: f64 = 1e-12;

/// e(h) from ⟨x,φh⟩ and ‖φh‖², clamped to [0, ‖x‖²].
pub fn e_from_parts(norm_x_sq: f64, ip: f64, pp: f64) -> f64 {
    if pp <= 0.0 {
        return norm_x_sq;
    }
    (norm_x_sq - ip * ip / pp).clamp(0.0, norm_x_sq)
}

/// Squared distance from x to the line spanned by φ(h).
pub fn e_residual(inst: &LipInstance, h: &Vector) -> f64 {
    e_of_image(inst, &inst.op().forward(h))
}

pub(crate) fn e_of_image(inst: &LipInstance, phi_h: &Vector) -> f64 {
    e_from_parts(inst.norm_x_sq(), inst.x().dot(phi_h), phi_h.norm_squared())
}

/// Membership of h in the cone K(level).
pub fn cone_member(inst: &LipInstance, h: &Vector, level: f64) -> bool {
    cone_member_image(inst, &inst.op().forward(h), level)
}

pub(crate) fn cone_member_image(inst: &LipInstance, phi_h: &Vector, level: f64) -> bool {
    let ip = inst.x().dot(phi_h);
    let pp = phi_h.norm_squared();
    pp > 0.0 && ip > 0.0 && e_from_parts(inst.norm_x_sq(), ip, pp) <= level * level * (1.0 + INTERIOR_SLACK)
}

/// Everything the solvers need at one point h of the cone.
#[derive(Debug, Clone)]
pub struct EtaEval {
    pub h: Vector,
    pub phi_h: Vector,
    /// ⟨x, φh⟩.
    pub ip: f64,
    /// ‖φh‖.
    pub nphi: f64,
    pub e: f64,
    pub eta: f64,
    /// λ(h), present only for interior points.
    pub lambda: Option<Vector>,
    /// ∇η(h) = −φᵃλ(h), present with `lambda`.
    pub grad: Option<Vector>,
}

impl EtaEval {
    pub fn new(inst: &LipInstance, h: Vector) -> Result<Self> {
        let phi_h = inst.op().apply(&h)?;
        Self::with_image(inst, h, phi_h)
    }

    /// Evaluation when φ(h) is already known.
    pub fn with_image(inst: &LipInstance, h: Vector, phi_h: Vector) -> Result<Self> {
        let ip = inst.x().dot(&phi_h);
        let pp = phi_h.norm_squared();
        let eps_sq = inst.eps() * inst.eps();
        let e = e_from_parts(inst.norm_x_sq(), ip, pp);
        if pp <= 0.0 || ip <= 0.0 || e > eps_sq * (1.0 + INTERIOR_SLACK) {
            return Err(LipError::NotInCone);
        }
        let root_s = (pp * (eps_sq - e).max(0.0)).sqrt();
        let eta = inst.gap() / (ip + root_s);

        let (lambda, grad) = if eps_sq - e > INTERIOR_SLACK * eps_sq {
            let lam = (inst.x() - &phi_h * eta) * (eta / root_s);
            let grad = -inst.op().backward(&lam);
            (Some(lam), Some(grad))
        } else {
            (None, None)
        };
        Ok(Self { h, phi_h, ip, nphi: pp.sqrt(), e, eta, lambda, grad })
    }

    pub fn is_interior(&self) -> bool {
        self.lambda.is_some()
    }

    pub fn lambda(&self) -> Result<&Vector> {
        self.lambda.as_ref().ok_or(LipError::BoundaryOfCone)
    }

    pub fn grad(&self) -> Result<&Vector> {
        self.grad.as_ref().ok_or(LipError::BoundaryOfCone)
    }

    /// The rescaled point η(h)·h, feasible for the LIP.
    pub fn rescaled(&self) -> Vector {
        &self.h * self.eta
    }
}

pub fn eta(inst: &LipInstance, h: &Vector) -> Result<f64> {
    Ok(EtaEval::new(inst, h.clone())?.eta)
}

pub fn lambda_of_h(inst: &LipInstance, h: &Vector) -> Result<Vector> {
    EtaEval::new(inst, h.clone())?.lambda.ok_or(LipError::BoundaryOfCone)
}

pub fn grad_eta(inst: &LipInstance, h: &Vector) -> Result<Vector> {
    EtaEval::new(inst, h.clone())?.grad.ok_or(LipError::BoundaryOfCone)
}

struct MParts {
    scale: f64,
    eta: f64,
    r: f64,
    norm_lam: f64,
    lambda: Vector,
}

fn m_parts(inst: &LipInstance, h: &Vector) -> Result<MParts> {
    let ev = EtaEval::new(inst, h.clone())?;
    let lambda = ev.lambda.ok_or(LipError::BoundaryOfCone)?;
    let norm_lam = lambda.norm();
    if norm_lam == 0.0 {
        return Err(LipError::BoundaryOfCone);
    }
    let eps = inst.eps();
    let eta = ev.eta;
    Ok(MParts {
        scale: norm_lam / (eps * eta),
        eta,
        r: 2.0 * eps / norm_lam + inst.gap() / (eta * eta),
        norm_lam,
        lambda,
    })
}

/// M(h) = (‖λ‖/(εη))(η²I + rλλᵀ − (λxᵀ + xλᵀ)) with r = 2ε/‖λ‖ + (‖x‖²−ε²)/η².
pub fn m_matrix(inst: &LipInstance, h: &Vector) -> Result<Matrix> {
    let p = m_parts(inst, h)?;
    let n = p.lambda.len();
    let x = inst.x();
    let mut m = Matrix::identity(n, n) * (p.eta * p.eta);
    m += &p.lambda * p.lambda.transpose() * p.r;
    m -= &p.lambda * x.transpose() + x * p.lambda.transpose();
    Ok(m * p.scale)
}

/// ∇²η(h)·v = φᵃ(M(h)φ(v)), without forming M(h).
pub fn hessian_apply(inst: &LipInstance, h: &Vector, v: &Vector) -> Result<Vector> {
    let p = m_parts(inst, h)?;
    let x = inst.x();
    let w = inst.op().apply(v)?;
    let lw = p.lambda.dot(&w);
    let xw = x.dot(&w);
    let mw = (&w * (p.eta * p.eta) + &p.lambda * (p.r * lw - xw) - x * lw) * p.scale;
    Ok(inst.op().backward(&mw))
}

/// Closed-form smallest and largest eigenvalues of M(h).
pub fn m_matrix_extreme_eigs(inst: &LipInstance, h: &Vector) -> Result<(f64, f64)> {
    let p = m_parts(inst, h)?;
    let k = inst.gap();
    let eps = inst.eps();
    let nl3 = p.norm_lam.powi(3);
    let pref = k * nl3 / (2.0 * eps * p.eta.powi(3));
    let disc = (1.0 - m_discriminant_term(eps, k, p.eta, p.norm_lam)).max(0.0).sqrt();
    Ok((pref * (1.0 - disc), pref * (1.0 + disc)))
}

/// 8εη⁶/((‖x‖²−ε²)²‖λ‖³); never exceeds 1 since M(h) is positive semidefinite.
pub fn m_discriminant_term(eps: f64, gap: f64, eta: f64, norm_lam: f64) -> f64 {
    8.0 * eps * eta.powi(6) / (gap * gap * norm_lam.powi(3))
}

/// ⟨λ,x⟩ − ε‖λ‖, positive exactly on Λ.
fn l_squared(x: &Vector, eps: f64, lam: &Vector) -> Result<f64> {
    let v = lam.dot(x) - eps * lam.norm();
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(LipError::NotInLambda)
    }
}

/// l(λ) = √(⟨λ,x⟩ − ε‖λ‖).
pub fn l_value(x: &Vector, eps: f64, lam: &Vector) -> Result<f64> {
    l_squared(x, eps, lam).map(f64::sqrt)
}

/// ∇l(λ) = (x − ελ/‖λ‖)/(2l(λ)).
pub fn l_gradient(x: &Vector, eps: f64, lam: &Vector) -> Result<Vector> {
    let l = l_value(x, eps, lam)?;
    Ok((x - lam * (eps / lam.norm())) / (2.0 * l))
}

/// H(λ) = −ε/(2l‖λ‖)(I − λλᵀ/‖λ‖²) − wwᵀ/(4l³) with w = x − ελ/‖λ‖.
pub fn l_hessian(x: &Vector, eps: f64, lam: &Vector) -> Result<Matrix> {
    let l = l_value(x, eps, lam)?;
    let n = lam.len();
    let nl = lam.norm();
    let u = lam / nl;
    let w = x - &u * eps;
    let proj = Matrix::identity(n, n) - &u * u.transpose();
    Ok(proj * (-eps / (2.0 * l * nl)) - &w * w.transpose() / (4.0 * l.powi(3)))
}

/// Closed-form smallest and largest |eigenvalue| of H(λ).
pub fn l_hessian_extreme_eigs(x: &Vector, eps: f64, lam: &Vector) -> Result<(f64, f64)> {
    let l = l_value(x, eps, lam)?;
    let k = x.norm_squared() - eps * eps;
    let pref = k / (8.0 * l.powi(3));
    let d = 8.0 * eps * l.powi(6) / (k * k * lam.norm().powi(3));
    let disc = (1.0 - d).max(0.0).sqrt();
    Ok((pref * (1.0 - disc), pref * (1.0 + disc)))
}

/// Strong convexity and smoothness constants of η and of the dual function,
/// plus the bounds they are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityConstants {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub bound_b: f64,
    pub eta_hat: f64,
    pub eta_bar: f64,
    pub eig_min: f64,
    pub eig_max: f64,
}

pub fn regularity_constants(inst: &LipInstance, eta_bar: f64, eta_hat: f64) -> Result<RegularityConstants> {
    if !(eta_bar > 0.0 && eta_bar <= eta_hat && eta_hat.is_finite()) {
        return Err(LipError::InvalidBounds(format!(
            "need 0 < eta_bar <= eta_hat, got eta_bar={eta_bar}, eta_hat={eta_hat}"
        )));
    }
    let (eig_min, eig_max) = inst.op().gram_eig_bounds();
    let eps = inst.eps();
    let eps_bar = inst.eps_bar();
    let k = inst.gap();
    let nx = inst.norm_x();
    let slack = eps * eps - eps_bar * eps_bar;

    let alpha = 2.0 * eta_bar.powi(3) * eig_min / k;
    let beta = eps * eps * eta_hat.powi(3) * (nx + eps) * eig_max / (slack.powf(1.5) * (nx - eps).powi(2));
    // ‖λ(h*)‖ ≤ εc*²/((‖x‖−ε)√(ε²−ε̄²)) since η(h)‖φh‖ ≥ ‖x‖−ε.
    let bound_b = eps * eta_hat * eta_hat / ((nx - eps) * slack.sqrt());
    let alpha_prime = eps * (eta_bar / bound_b).powi(3) / k;
    let beta_prime = k / (2.0 * eta_bar.powi(3));
    Ok(RegularityConstants { alpha, beta, alpha_prime, beta_prime, bound_b, eta_hat, eta_bar, eig_min, eig_max })
}

/// Upper bound on c* from the least-squares solution f′:
/// c(f′)(1 − √(1 − (‖x‖²−ε²)/‖φf′‖²)).
pub fn eta_hat_candidate(inst: &LipInstance) -> Result<f64> {
    inst.ensure_feasible()?;
    let f = inst.ls_solution();
    let x_ls_sq = inst.op().forward(f).norm_squared();
    let ratio = (inst.gap() / x_ls_sq).min(1.0);
    Ok(inst.cost().value(f) * (1.0 - (1.0 - ratio).sqrt()))
}

/// Lower bound on c*: ‖x‖(‖x‖−ε)/c′(φᵃx).
pub fn eta_bar_lower(inst: &LipInstance) -> Result<f64> {
    let dual = inst.cost().dual_norm(inst.adj_x());
    if dual == 0.0 {
        return Err(LipError::SingularSystem);
    }
    Ok(inst.norm_x() * (inst.norm_x() - inst.eps()) / dual)
}

/// Numeric extreme eigenvalues of a symmetric matrix.
pub fn symmetric_extreme_eigs(m: &Matrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues.min(), eig.eigenvalues.max())
}
