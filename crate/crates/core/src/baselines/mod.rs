//! Reference solvers for the same LIP.

pub mod acp;
pub mod analytic;
pub mod cp;
pub mod csalsa;
pub mod pagd;

pub use acp::{acp_solve, acp_solve_with, duality_gap, lambda_bar_project, AcpConfig, LambdaBarSet};
pub use analytic::{analytic_solution, threshold_level};
pub use cp::{cp_solve, cp_solve_with, dual_prox, CpConfig};
pub use csalsa::{ball_project, csalsa_solve, csalsa_solve_with, CsalsaConfig};
pub use pagd::{pagd_solve, pagd_solve_with, PagdConfig};
