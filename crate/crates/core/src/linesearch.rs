//! Closed-form step sizes along a segment h + γd.
//!
//! Everything reduces to the five inner products of x, φh and φd, so the
//! line search costs one application of φ to d.

use crate::error::{LipError, Result};
use crate::instance::LipInstance;
use crate::Vector;

/// Bisection steps used when no quadratic root qualifies.
const BISECTION_STEPS: usize = 200;

/// Inner products describing the segment h + γd in measurement space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// ⟨x, φh⟩.
    pub xp: f64,
    /// ⟨x, φd⟩.
    pub xq: f64,
    /// ‖φh‖².
    pub pp: f64,
    /// ⟨φh, φd⟩.
    pub pq: f64,
    /// ‖φd‖².
    pub qq: f64,
}

impl Segment {
    pub fn from_images(x: &Vector, phi_h: &Vector, phi_d: &Vector) -> Self {
        Self {
            xp: x.dot(phi_h),
            xq: x.dot(phi_d),
            pp: phi_h.norm_squared(),
            pq: phi_h.dot(phi_d),
            qq: phi_d.norm_squared(),
        }
    }

    pub fn new(inst: &LipInstance, h: &Vector, d: &Vector) -> Result<Self> {
        let phi_h = inst.op().apply(h)?;
        let phi_d = inst.op().apply(d)?;
        Ok(Self::from_images(inst.x(), &phi_h, &phi_d))
    }

    /// ⟨x, φ(h+γd)⟩.
    fn a(&self, g: f64) -> f64 {
        self.xp + g * self.xq
    }

    /// ‖φ(h+γd)‖².
    fn n(&self, g: f64) -> f64 {
        self.pp + 2.0 * g * self.pq + g * g * self.qq
    }

    /// η(h+γd) for a gap ‖x‖² − ε².
    pub fn eta(&self, gap: f64, g: f64) -> f64 {
        let a = self.a(g);
        let s = (a * a - self.n(g) * gap).max(0.0);
        gap / (a + s.sqrt())
    }

    /// A quantity with the sign of −dη(h+γd)/dγ:
    /// 2A′√S + 2AA′ − N′K, where A, N are as above and S = A² − NK.
    pub fn descent_indicator(&self, gap: f64, g: f64) -> f64 {
        let a = self.a(g);
        let s = (a * a - self.n(g) * gap).max(0.0);
        let dn = 2.0 * (self.pq + g * self.qq);
        2.0 * self.xq * s.sqrt() + 2.0 * a * self.xq - dn * gap
    }

    /// dη(h+γd)/dγ.
    pub fn eta_derivative(&self, gap: f64, g: f64) -> f64 {
        let a = self.a(g);
        let s = (a * a - self.n(g) * gap).max(0.0);
        let rs = s.sqrt();
        -gap * self.descent_indicator(gap, g) / (2.0 * rs * (a + rs).powi(2))
    }
}

/// Roots of aγ² + bγ + c in increasing order, computed without cancellation.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sgn * disc.sqrt());
    let mut r = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, c / q] };
    r.sort_by(f64::total_cmp);
    r
}

/// Largest γ̂ ∈ [0, 1] with h + γd ∈ K(ε̄) for all γ ∈ [0, γ̂].
///
/// Membership is the sign of q(γ) = (⟨x,φh⟩ + γ⟨x,φd⟩)² − (‖x‖²−ε̄²)‖φ(h+γd)‖²,
/// whose coefficients are a = xq² − K̄qq, b = 2(xp·xq − K̄pq), c = xp² − K̄pp.
pub fn gamma_max_segment(seg: &Segment, norm_x_sq: f64, eps_bar: f64) -> f64 {
    let kb = norm_x_sq - eps_bar * eps_bar;
    let a = seg.xq * seg.xq - kb * seg.qq;
    let b = 2.0 * (seg.xp * seg.xq - kb * seg.pq);
    let c = (seg.xp * seg.xp - kb * seg.pp).max(0.0);
    let exit = first_exit(a, b, c);
    // A quadratic that stays nonnegative cannot cross ⟨x,φ(h+γd)⟩ = 0.
    exit.min(1.0)
}

/// First γ > 0 where q turns negative, +∞ if never.
fn first_exit(a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 {
        return if b < 0.0 { -c / b } else { f64::INFINITY };
    }
    if a > 0.0 && b >= 0.0 {
        return f64::INFINITY;
    }
    let roots = quadratic_roots(a, b, c);
    if roots.is_empty() {
        // Convex with no real roots stays positive; concave cannot occur with c ≥ 0.
        return f64::INFINITY;
    }
    if a < 0.0 {
        roots[1].max(0.0)
    } else {
        let r = roots[0];
        if r >= 0.0 {
            r
        } else {
            f64::INFINITY
        }
    }
}

pub fn gamma_max(inst: &LipInstance, h: &Vector, d: &Vector) -> Result<f64> {
    let seg = Segment::new(inst, h, d)?;
    Ok(gamma_max_segment(&seg, inst.norm_x_sq(), inst.eps_bar()))
}

/// Exact minimizer of η(h+γd) over [0, γ̂].
///
/// Stationarity squared gives a quadratic with coefficients
/// qq(K·qq − xq²), 2qq(K·pq − xp·xq), K·pq² − 2xp·xq·pq + xq²·pp
/// (K = ‖x‖² − ε²); squaring can add spurious roots, so the candidate with
/// the smallest η wins.
pub fn gamma_opt_segment(seg: &Segment, gap: f64, gamma_hat: f64) -> Result<f64> {
    if seg.qq == 0.0 {
        return Err(LipError::DegenerateDirection);
    }
    if gamma_hat <= 0.0 || seg.descent_indicator(gap, 0.0) <= 0.0 {
        return Ok(0.0);
    }
    if seg.descent_indicator(gap, gamma_hat) >= 0.0 {
        return Ok(gamma_hat);
    }
    let r = seg.qq * (gap * seg.qq - seg.xq * seg.xq);
    let s = 2.0 * seg.qq * (gap * seg.pq - seg.xp * seg.xq);
    let u = gap * seg.pq * seg.pq - 2.0 * seg.xp * seg.xq * seg.pq + seg.xq * seg.xq * seg.pp;

    let mut best: Option<(f64, f64)> = None;
    let mut consider = |g: f64| {
        let e = seg.eta(gap, g);
        if best.map_or(true, |(_, be)| e < be) {
            best = Some((g, e));
        }
    };
    let mut found = false;
    for g in quadratic_roots(r, s, u) {
        if g > 0.0 && g < gamma_hat {
            consider(g);
            found = true;
        }
    }
    if !found {
        consider(bisect_stationary(seg, gap, gamma_hat));
    }
    let (g, e) = best.expect("at least one candidate");
    // Rounding guard: never accept a step that is worse than standing still.
    Ok(if e > seg.eta(gap, 0.0) { 0.0 } else { g })
}

/// Sign change of the descent indicator on (0, γ̂); requires it positive at
/// 0 and negative at γ̂.
fn bisect_stationary(seg: &Segment, gap: f64, gamma_hat: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, gamma_hat);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if seg.descent_indicator(gap, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn gamma_opt(inst: &LipInstance, h: &Vector, d: &Vector) -> Result<f64> {
    let seg = Segment::new(inst, h, d)?;
    let gamma_hat = gamma_max_segment(&seg, inst.norm_x_sq(), inst.eps_bar());
    gamma_opt_segment(&seg, inst.gap(), gamma_hat)
}
