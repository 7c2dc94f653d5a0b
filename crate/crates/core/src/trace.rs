//! Per-iteration solver records and the monitor that fills them.

use std::fmt::Write as _;
use std::time::Instant;

use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// η(h_k) for the smooth solvers, c(f_k) for the proximal ones.
    pub eta: f64,
    /// Step size used to reach this iterate; 0 for the initial record.
    pub gamma: f64,
    pub seconds: f64,
    /// ‖f_k − f_ref‖ when a reference is known.
    pub dist_to_ref: Option<f64>,
    /// eta − c* when c* is known.
    pub suboptimality: Option<f64>,
    /// ‖x − φ(f_k)‖.
    pub residual: f64,
    /// Saddle-point duality gap, recorded by the min-max solvers.
    pub gap: Option<f64>,
    /// Duality gap at the weighted ergodic averages.
    pub ergodic_gap: Option<f64>,
    /// l(λ_k), recorded by the min-max solvers.
    pub dual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub solver: String,
    pub records: Vec<TraceRecord>,
    /// Running average of the primal iterates, kept by primal-dual solvers.
    pub ergodic: Option<Vector>,
    start: Instant,
}

impl PartialEq for SolverTrace {
    fn eq(&self, other: &Self) -> bool {
        self.solver == other.solver && self.records == other.records && self.ergodic == other.ergodic
    }
}

impl SolverTrace {
    pub fn new(solver: impl Into<String>) -> Self {
        Self { solver: solver.into(), records: Vec::new(), ergodic: None, start: Instant::now() }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Number of iterations performed (the initial record is k = 0).
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    /// First k ≥ 1 whose distance to the reference is at most `thresh`.
    pub fn first_within(&self, thresh: f64) -> Option<usize> {
        self.records.iter().filter(|r| r.k >= 1).find(|r| r.dist_to_ref.is_some_and(|d| d <= thresh)).map(|r| r.k)
    }

    /// CSV with columns k,eta,gamma,seconds,dist_to_ref.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,eta,gamma,seconds,dist_to_ref\n");
        for r in &self.records {
            let dist = r.dist_to_ref.map(|d| format!("{d:e}")).unwrap_or_default();
            writeln!(out, "{},{:e},{:e},{:e},{}", r.k, r.eta, r.gamma, r.seconds, dist)
                .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Side information a solver uses to annotate its trace and, optionally, to
/// stop early.
#[derive(Debug, Clone, Default)]
pub struct Monitor {
    pub reference: Option<Vector>,
    pub c_star: Option<f64>,
    /// Stop as soon as ‖f_k − f_ref‖ ≤ this value.
    pub stop_within: Option<f64>,
    /// Skip per-iteration records except the first and last.
    pub sparse: bool,
}

/// What a solver reports about its current iterate.
pub struct Observation<'a> {
    pub k: usize,
    pub eta: f64,
    pub gamma: f64,
    pub f: &'a Vector,
    pub residual: f64,
    pub gap: Option<f64>,
    pub ergodic_gap: Option<f64>,
    pub dual: Option<f64>,
}

impl Monitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_reference(mut self, f_ref: Vector) -> Self {
        self.reference = Some(f_ref);
        self
    }

    pub fn with_c_star(mut self, c_star: f64) -> Self {
        self.c_star = Some(c_star);
        self
    }

    pub fn stop_within(mut self, thresh: f64) -> Self {
        self.stop_within = Some(thresh);
        self
    }

    pub fn sparse(mut self, sparse: bool) -> Self {
        self.sparse = sparse;
        self
    }

    /// Appends a record; returns true when the solver should stop.
    pub fn observe(&self, trace: &mut SolverTrace, obs: Observation<'_>) -> bool {
        let dist = self.reference.as_ref().map(|r| (obs.f - r).norm());
        let record = TraceRecord {
            k: obs.k,
            eta: obs.eta,
            gamma: obs.gamma,
            seconds: trace.elapsed(),
            dist_to_ref: dist,
            suboptimality: self.c_star.map(|c| obs.eta - c),
            residual: obs.residual,
            gap: obs.gap,
            ergodic_gap: obs.ergodic_gap,
            dual: obs.dual,
        };
        if self.sparse && trace.records.len() >= 2 {
            *trace.records.last_mut().expect("nonempty") = record;
        } else {
            trace.records.push(record);
        }
        obs.k >= 1 && matches!((dist, self.stop_within), (Some(d), Some(t)) if d <= t)
    }
}

/// Output of any solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Feasible LIP solution estimate.
    pub f: Vector,
    /// Normalized iterate in the cost's unit ball, for solvers that keep one.
    pub h: Option<Vector>,
    /// Dual iterate, for the min-max solvers.
    pub lambda: Option<Vector>,
    pub trace: SolverTrace,
}
