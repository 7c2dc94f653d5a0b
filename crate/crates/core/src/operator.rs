//! Linear measurement operators φ and their adjoints.

use std::f64::consts::PI;
use std::io::BufRead;
use std::sync::OnceLock;

use nalgebra::SymmetricEigen;

use crate::error::{LipError, Result};
use crate::{Matrix, Vector};

/// The concrete representation behind a [`LinearOperator`].
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// Arbitrary dense matrix, measurement_dim × signal_dim.
    Dense(Matrix),
    /// Identity on R^n.
    Identity(usize),
    /// Orthonormal 2-D inverse DCT on m × m patches. Signals are DCT
    /// coefficient blocks and measurements are pixel blocks, both stored
    /// row-major.
    InverseDct2 { side: usize },
}

/// A linear map φ from the signal space to the measurement space, with its
/// adjoint φᵃ.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    kind: OperatorKind,
    /// Orthonormal DCT-II matrix, rows indexed by frequency.
    dct_basis: Option<Matrix>,
    gram_bounds: OnceLock<(f64, f64)>,
}

impl PartialEq for LinearOperator {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl LinearOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity operator needs a positive dimension");
        Self::from_kind(OperatorKind::Identity(n))
    }

    pub fn dense(matrix: Matrix) -> Self {
        assert!(matrix.nrows() > 0 && matrix.ncols() > 0, "dense operator needs a non-empty matrix");
        Self::from_kind(OperatorKind::Dense(matrix))
    }

    /// 2-D inverse DCT dictionary for `side × side` patches.
    pub fn inverse_dct2(side: usize) -> Self {
        assert!(side > 0, "patch side must be positive");
        let mut op = Self::from_kind(OperatorKind::InverseDct2 { side });
        op.dct_basis = Some(dct2_basis(side));
        op
    }

    fn from_kind(kind: OperatorKind) -> Self {
        Self { kind, dct_basis: None, gram_bounds: OnceLock::new() }
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn signal_dim(&self) -> usize {
        match &self.kind {
            OperatorKind::Dense(m) => m.ncols(),
            OperatorKind::Identity(n) => *n,
            OperatorKind::InverseDct2 { side } => side * side,
        }
    }

    pub fn measurement_dim(&self) -> usize {
        match &self.kind {
            OperatorKind::Dense(m) => m.nrows(),
            OperatorKind::Identity(n) => *n,
            OperatorKind::InverseDct2 { side } => side * side,
        }
    }

    /// True when φᵃ∘φ is the identity.
    pub fn is_unitary(&self) -> bool {
        matches!(self.kind, OperatorKind::Identity(_) | OperatorKind::InverseDct2 { .. })
    }

    /// φ(h).
    pub fn apply(&self, h: &Vector) -> Result<Vector> {
        check_len(self.signal_dim(), h.len())?;
        Ok(self.forward(h))
    }

    /// φᵃ(v).
    pub fn adjoint(&self, v: &Vector) -> Result<Vector> {
        check_len(self.measurement_dim(), v.len())?;
        Ok(self.backward(v))
    }

    pub(crate) fn forward(&self, h: &Vector) -> Vector {
        debug_assert_eq!(h.len(), self.signal_dim());
        match &self.kind {
            OperatorKind::Dense(m) => m * h,
            OperatorKind::Identity(_) => h.clone(),
            OperatorKind::InverseDct2 { side } => {
                let c = self.dct_basis.as_ref().expect("dct basis");
                let coeffs = block_from_vec(*side, h);
                // pixels = Cᵀ · Y · C
                block_to_vec(&(c.transpose() * coeffs * c))
            }
        }
    }

    pub(crate) fn backward(&self, v: &Vector) -> Vector {
        debug_assert_eq!(v.len(), self.measurement_dim());
        match &self.kind {
            OperatorKind::Dense(m) => m.tr_mul(v),
            OperatorKind::Identity(_) => v.clone(),
            OperatorKind::InverseDct2 { side } => {
                let c = self.dct_basis.as_ref().expect("dct basis");
                let pixels = block_from_vec(*side, v);
                // coefficients = C · X · Cᵀ
                block_to_vec(&(c * pixels * c.transpose()))
            }
        }
    }

    /// Smallest and largest eigenvalues of φᵃ∘φ, computed once.
    pub fn gram_eig_bounds(&self) -> (f64, f64) {
        *self.gram_bounds.get_or_init(|| match &self.kind {
            OperatorKind::Dense(m) => {
                let gram = m.tr_mul(m);
                let eig = SymmetricEigen::new(gram);
                let lo = eig.eigenvalues.min().max(0.0);
                let hi = eig.eigenvalues.max();
                (lo, hi)
            }
            _ => (1.0, 1.0),
        })
    }

    /// Squared operator norm ‖φ‖², the largest eigenvalue of φᵃ∘φ.
    pub fn op_norm_sq(&self) -> f64 {
        self.gram_eig_bounds().1
    }

    /// Reads a dense operator from CSV.
    ///
    /// The first line is the header `rows,cols`, the second holds the two
    /// dimensions, and the remaining `rows` lines hold the matrix row-major.
    /// A file whose first line already holds the two integers is accepted as
    /// well.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .map(|l| l.map_err(|e| LipError::Parse(e.to_string())))
            .filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));

        let first = lines.next().ok_or_else(|| LipError::Parse("empty operator file".into()))??;
        let dims_line = if first.trim().eq_ignore_ascii_case("rows,cols") {
            lines.next().ok_or_else(|| LipError::Parse("missing dimension line".into()))??
        } else {
            first
        };
        let dims = parse_row(&dims_line)?;
        if dims.len() != 2 || dims.iter().any(|d| *d < 1.0 || d.fract() != 0.0) {
            return Err(LipError::Parse(format!("expected two positive integers, got `{dims_line}`")));
        }
        let (rows, cols) = (dims[0] as usize, dims[1] as usize);

        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines.next().ok_or_else(|| LipError::Parse(format!("missing matrix row {r}")))??;
            let row = parse_row(&line)?;
            if row.len() != cols {
                return Err(LipError::Parse(format!("row {r} has {} entries, expected {cols}", row.len())));
            }
            data.extend(row);
        }
        if let Some(extra) = lines.next() {
            extra?;
            return Err(LipError::Parse("trailing rows after matrix".into()));
        }
        Ok(Self::dense(Matrix::from_row_slice(rows, cols, &data)))
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(LipError::DimensionMismatch { expected, got })
    }
}

pub(crate) fn parse_row(line: &str) -> Result<Vec<f64>> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| LipError::Parse(format!("not a number: `{s}`"))))
        .collect()
}

/// Orthonormal DCT-II matrix C with C[k][n] = a_k cos(π (2n + 1) k / 2m).
fn dct2_basis(m: usize) -> Matrix {
    let mf = m as f64;
    Matrix::from_fn(m, m, |k, n| {
        let scale = if k == 0 { (1.0 / mf).sqrt() } else { (2.0 / mf).sqrt() };
        scale * (PI * (2.0 * n as f64 + 1.0) * k as f64 / (2.0 * mf)).cos()
    })
}

fn block_from_vec(m: usize, v: &Vector) -> Matrix {
    Matrix::from_row_slice(m, m, v.as_slice())
}

fn block_to_vec(b: &Matrix) -> Vector {
    Vector::from_iterator(b.len(), b.transpose().iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_apply_and_adjoint() {
        let op = LinearOperator::identity(2);
        let h = Vector::from_vec(vec![1.0, 2.0]);
        assert_eq!(op.apply(&h).unwrap(), h);
        let v = Vector::from_vec(vec![5.0, -1.0]);
        assert_eq!(op.adjoint(&v).unwrap(), v);
    }

    #[test]
    fn dense_permutation() {
        let op = LinearOperator::dense(Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let h = Vector::from_vec(vec![3.0, 4.0]);
        assert_eq!(op.apply(&h).unwrap(), Vector::from_vec(vec![4.0, 3.0]));
    }

    #[test]
    fn dimension_mismatch() {
        let op = LinearOperator::dense(Matrix::zeros(2, 3));
        assert_eq!(op.apply(&Vector::zeros(2)), Err(LipError::DimensionMismatch { expected: 3, got: 2 }));
        assert_eq!(op.adjoint(&Vector::zeros(3)), Err(LipError::DimensionMismatch { expected: 2, got: 3 }));
    }

    #[test]
    fn dct_of_constant_patch_is_dc_only() {
        let op = LinearOperator::inverse_dct2(4);
        let ones = Vector::from_element(16, 1.0);
        let coeffs = op.adjoint(&ones).unwrap();
        assert!((coeffs[0] - 4.0).abs() < 1e-12);
        assert!(coeffs.iter().skip(1).all(|c| c.abs() < 1e-12));
        let back = op.apply(&coeffs).unwrap();
        assert!((back - ones).amax() < 1e-12);
    }

    #[test]
    fn csv_with_and_without_header() {
        let text = "rows,cols\n2,3\n1,2,3\n4,5,6\n";
        let op = LinearOperator::from_csv(text.as_bytes()).unwrap();
        assert_eq!(op.measurement_dim(), 2);
        assert_eq!(op.signal_dim(), 3);
        let h = Vector::from_vec(vec![1.0, 0.0, -1.0]);
        assert_eq!(op.apply(&h).unwrap(), Vector::from_vec(vec![-2.0, -2.0]));

        let bare = "2,3\n1,2,3\n4,5,6\n";
        assert_eq!(LinearOperator::from_csv(bare.as_bytes()).unwrap(), op);
    }

    #[test]
    fn csv_errors() {
        assert!(LinearOperator::from_csv("".as_bytes()).is_err());
        assert!(LinearOperator::from_csv("rows,cols\n2,2\n1,2\n".as_bytes()).is_err());
        assert!(LinearOperator::from_csv("rows,cols\n2,2\n1,2\n3,x\n".as_bytes()).is_err());
        assert!(LinearOperator::from_csv("rows,cols\n1,2\n1,2,3\n".as_bytes()).is_err());
        assert!(LinearOperator::from_csv("rows,cols\n1,2\n1,2\n9,9\n".as_bytes()).is_err());
    }

    #[test]
    fn gram_bounds_of_scaled_identity() {
        let op = LinearOperator::dense(Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 0.5])));
        let (lo, hi) = op.gram_eig_bounds();
        assert!((lo - 0.25).abs() < 1e-12);
        assert!((hi - 4.0).abs() < 1e-12);
        assert_eq!(LinearOperator::inverse_dct2(3).gram_eig_bounds(), (1.0, 1.0));
    }
}
