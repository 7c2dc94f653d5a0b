//! Solvers for the constrained linear inverse problem
//!
//! ```text
//! minimize c(f)  subject to  ‖x − φ(f)‖ ≤ ε
//! ```
//!
//! with an ℓ1 cost. The crate provides the smooth reformulation of the
//! problem in terms of the scaling function η (see [`smooth`]), the FLIPS
//! solver built on it (oracle direction plus closed-form exact line search,
//! see [`flips`]), and reference solvers for the same problem in
//! [`baselines`]: Chambolle-Pock, accelerated Chambolle-Pock on the
//! strongly concave min-max form, C-SALSA and projected accelerated gradient
//! descent.

pub mod baselines;
pub mod error;
pub mod flips;
pub mod geometry;
pub mod instance;
pub mod linesearch;
pub mod lstsq;
pub mod operator;
pub mod smooth;
pub mod solver;
pub mod trace;

pub use error::{LipError, Result};
pub use flips::{flips_solve, FlipsConfig, Oracle, StepSize};
pub use geometry::AtomicCost;
pub use instance::LipInstance;
pub use operator::{LinearOperator, OperatorKind};
pub use solver::{run_solver, SolverKind, SolverParams};
pub use trace::{Monitor, Observation, Solution, SolverTrace, TraceRecord};

/// Dense real vector used for both signal and measurement spaces.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
