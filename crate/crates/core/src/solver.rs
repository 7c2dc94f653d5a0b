//! Uniform entry point over FLIPS and the baselines.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{
    acp_solve_with, cp_solve_with, csalsa_solve_with, pagd_solve_with, AcpConfig, CpConfig, CsalsaConfig, PagdConfig,
};
use crate::error::{LipError, Result};
use crate::flips::{flips_solve_with, FlipsConfig, Oracle, StepSize};
use crate::instance::LipInstance;
use crate::trace::{Monitor, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Flips,
    Cp,
    Acp,
    Csalsa,
    Pagd,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] =
        [SolverKind::Flips, SolverKind::Cp, SolverKind::Acp, SolverKind::Csalsa, SolverKind::Pagd];
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Flips => "flips",
            SolverKind::Cp => "cp",
            SolverKind::Acp => "acp",
            SolverKind::Csalsa => "csalsa",
            SolverKind::Pagd => "pagd",
        })
    }
}

impl FromStr for SolverKind {
    type Err = LipError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flips" => Ok(SolverKind::Flips),
            "cp" => Ok(SolverKind::Cp),
            "acp" => Ok(SolverKind::Acp),
            "csalsa" | "c-salsa" => Ok(SolverKind::Csalsa),
            "pagd" => Ok(SolverKind::Pagd),
            other => Err(LipError::Parse(format!("unknown solver '{other}'"))),
        }
    }
}

/// Parameters for every solver; each solver reads the fields it needs.
/// Fields left `None` are derived from the instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub max_iters: usize,
    pub oracle: Oracle,
    pub step: StepSize,
    pub rho: f64,
    pub tol_h: f64,
    pub theta: f64,
    pub cp_step: Option<f64>,
    pub mu: f64,
    pub inv_b: Option<f64>,
    pub eta_bar: Option<f64>,
}

impl SolverParams {
    /// Defaults tuned for m×m DCT patches.
    pub fn for_patch_side(m: usize) -> Self {
        let flips = FlipsConfig::default();
        Self {
            max_iters: flips.max_iters,
            oracle: flips.oracle,
            step: flips.step,
            rho: flips.rho,
            tol_h: flips.tol_h,
            theta: 0.6,
            cp_step: None,
            mu: CsalsaConfig::for_patch_side(m, 0).mu,
            inv_b: None,
            eta_bar: None,
        }
    }

    pub fn flips_config(&self) -> FlipsConfig {
        FlipsConfig {
            oracle: self.oracle,
            step: self.step,
            rho: self.rho,
            max_iters: self.max_iters,
            tol_h: self.tol_h,
        }
    }
}

impl Default for SolverParams {
    fn default() -> Self {
        Self::for_patch_side(16)
    }
}

pub fn run_solver(kind: SolverKind, params: &SolverParams, inst: &LipInstance, monitor: &Monitor) -> Result<Solution> {
    match kind {
        SolverKind::Flips => flips_solve_with(inst, &params.flips_config(), monitor),
        SolverKind::Cp => {
            let mut cfg = CpConfig::for_operator(inst.op(), params.max_iters);
            cfg.theta = params.theta;
            if let Some(step) = params.cp_step {
                cfg.sigma_step = step;
                cfg.tau_step = step;
            }
            cp_solve_with(inst, &cfg, monitor)
        }
        SolverKind::Acp => {
            let mut cfg = AcpConfig::from_instance(inst, params.max_iters)?;
            if let Some(eb) = params.eta_bar {
                cfg.eta_bar = eb;
            }
            acp_solve_with(inst, &cfg, monitor)
        }
        SolverKind::Csalsa => {
            let cfg = CsalsaConfig { mu: params.mu, max_iters: params.max_iters };
            csalsa_solve_with(inst, &cfg, monitor)
        }
        SolverKind::Pagd => {
            let mut cfg = PagdConfig::for_instance(inst, params.max_iters)?;
            if let Some(inv_b) = params.inv_b {
                cfg.inv_b = inv_b;
            }
            pagd_solve_with(inst, &cfg, monitor)
        }
    }
}
