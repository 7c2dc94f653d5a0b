//! Minimum-norm least-squares solution f′ of min ‖x − φ(f)‖, used to
//! initialize the solvers and to decide strict feasibility.

use nalgebra::SymmetricEigen;

use crate::error::{LipError, Result};
use crate::operator::{LinearOperator, OperatorKind};
use crate::Vector;

/// Eigenvalues of φᵃφ below this fraction of the largest one are treated as
/// zero by the pseudoinverse fallback.
const RELATIVE_CUTOFF: f64 = 1e-12;

pub fn least_squares_init(op: &LinearOperator, x: &Vector) -> Result<Vector> {
    let rhs = op.adjoint(x)?;
    if x.iter().all(|v| *v == 0.0) {
        return Err(LipError::InvalidInstance("least squares needs a nonzero measurement".into()));
    }
    let m = match op.kind() {
        OperatorKind::Identity(_) | OperatorKind::InverseDct2 { .. } => return Ok(rhs),
        OperatorKind::Dense(m) => m,
    };
    let gram = m.tr_mul(m);

    if let Some(chol) = gram.clone().cholesky() {
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = (diag.min(), diag.max());
        if lo > 0.0 && (lo / hi).powi(2) > RELATIVE_CUTOFF {
            return Ok(chol.solve(&rhs));
        }
    }

    // Rank-deficient normal equations: truncated eigen-pseudoinverse.
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.max();
    if top <= 0.0 {
        return Err(LipError::SingularSystem);
    }
    let mut f = Vector::zeros(rhs.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > RELATIVE_CUTOFF * top {
            let v = eig.eigenvectors.column(i);
            f += v * (v.dot(&rhs) / lambda);
        }
    }
    Ok(f)
}
