use std::sync::Arc;

use crate::error::{LipError, Result};
use crate::geometry::AtomicCost;
use crate::lstsq::least_squares_init;
use crate::operator::LinearOperator;
use crate::Vector;

/// One constrained linear inverse problem min c(f) s.t. ‖x − φ(f)‖ ≤ ε,
/// together with the cone level ε̄ ∈ (0, ε) used by the smooth solvers and
/// the quantities every solver reuses.
#[derive(Debug, Clone)]
pub struct LipInstance {
    x: Vector,
    op: Arc<LinearOperator>,
    eps: f64,
    eps_bar: f64,
    cost: AtomicCost,
    adj_x: Vector,
    norm_x_sq: f64,
    gap: f64,
    ls_solution: Vector,
    ls_residual: f64,
}

impl LipInstance {
    /// Builds an instance, requiring ‖x‖ > ε > ε̄ > 0.
    ///
    /// A strictly infeasible problem is still constructible; solvers check
    /// [`LipInstance::is_strictly_feasible`] before iterating.
    pub fn new(x: Vector, op: Arc<LinearOperator>, eps: f64, eps_bar: f64) -> Result<Self> {
        if x.len() != op.measurement_dim() {
            return Err(LipError::DimensionMismatch { expected: op.measurement_dim(), got: x.len() });
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(LipError::InvalidInstance(format!("eps must be positive, got {eps}")));
        }
        let norm_x = x.norm();
        if norm_x <= eps {
            return Err(LipError::Degenerate { norm_x, eps });
        }
        if !(eps_bar > 0.0 && eps_bar < eps) {
            return Err(LipError::InvalidInstance(format!("eps_bar must lie in (0, eps) = (0, {eps}), got {eps_bar}")));
        }
        let ls_solution = least_squares_init(&op, &x)?;
        let ls_residual = (&x - op.forward(&ls_solution)).norm();
        let adj_x = op.backward(&x);
        let norm_x_sq = norm_x * norm_x;
        let cost = AtomicCost::l1(op.signal_dim());
        Ok(Self { gap: norm_x_sq - eps * eps, x, op, eps, eps_bar, cost, adj_x, norm_x_sq, ls_solution, ls_residual })
    }

    /// Same as [`LipInstance::new`] with ε̄ = `ratio`·ε.
    pub fn with_eps_bar_ratio(x: Vector, op: Arc<LinearOperator>, eps: f64, ratio: f64) -> Result<Self> {
        Self::new(x, op, eps, ratio * eps)
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn op(&self) -> &LinearOperator {
        &self.op
    }

    pub fn op_arc(&self) -> &Arc<LinearOperator> {
        &self.op
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eps_bar(&self) -> f64 {
        self.eps_bar
    }

    pub fn cost(&self) -> &AtomicCost {
        &self.cost
    }

    /// φᵃ(x).
    pub fn adj_x(&self) -> &Vector {
        &self.adj_x
    }

    pub fn norm_x_sq(&self) -> f64 {
        self.norm_x_sq
    }

    pub fn norm_x(&self) -> f64 {
        self.norm_x_sq.sqrt()
    }

    /// ‖x‖² − ε².
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Minimum-norm least-squares solution f′.
    pub fn ls_solution(&self) -> &Vector {
        &self.ls_solution
    }

    /// ‖x − φ(f′)‖.
    pub fn ls_residual(&self) -> f64 {
        self.ls_residual
    }

    pub fn is_strictly_feasible(&self) -> bool {
        self.ls_residual < self.eps
    }

    pub fn ensure_feasible(&self) -> Result<()> {
        if self.is_strictly_feasible() {
            Ok(())
        } else {
            Err(LipError::Infeasible { residual: self.ls_residual, eps: self.eps })
        }
    }

    /// h₀ = f′ / c(f′).
    pub fn initial_point(&self) -> Result<Vector> {
        let c = self.cost.value(&self.ls_solution);
        if c == 0.0 {
            return Err(LipError::SingularSystem);
        }
        Ok(&self.ls_solution / c)
    }

    /// ‖x − φ(f)‖.
    pub fn residual(&self, f: &Vector) -> f64 {
        (&self.x - self.op.forward(f)).norm()
    }
}
