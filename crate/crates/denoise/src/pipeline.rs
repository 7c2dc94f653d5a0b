//! Per-patch LIP solving with an inverse-DCT dictionary.

use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use flips_core::baselines::analytic_solution;
use flips_core::smooth::e_from_parts;
use flips_core::{run_solver, LinearOperator, LipError, LipInstance, Monitor, SolverKind, SolverParams, Vector};
use rayon::prelude::*;

use crate::error::{DenoiseError, Result};
use crate::image::Image;
use crate::patches::PatchGrid;
use crate::stats::{mean_iterations, psnr, Histogram};

/// Bin width of the e(f*) histogram.
pub const HISTOGRAM_BANDWIDTH: f64 = 0.01;

/// How the residual radius ε follows from the noise variance σ and the
/// patch side m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    /// ε = √(σ·m²), the expected noise norm over an m×m patch.
    PixelCount,
    /// ε = √(σ·m).
    Side,
    Fixed(f64),
}

impl EpsRule {
    pub fn eps(self, sigma_var: f64, m: usize) -> f64 {
        match self {
            EpsRule::PixelCount => (sigma_var * (m * m) as f64).sqrt(),
            EpsRule::Side => (sigma_var * m as f64).sqrt(),
            EpsRule::Fixed(eps) => eps,
        }
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::PixelCount => f.write_str("pixels"),
            EpsRule::Side => f.write_str("side"),
            EpsRule::Fixed(eps) => write!(f, "{eps}"),
        }
    }
}

impl FromStr for EpsRule {
    type Err = DenoiseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pixels" => Ok(EpsRule::PixelCount),
            "side" => Ok(EpsRule::Side),
            other => {
                other.parse::<f64>().ok().filter(|e| *e > 0.0 && e.is_finite()).map(EpsRule::Fixed).ok_or_else(|| {
                    DenoiseError::InvalidConfig(format!(
                        "eps rule must be 'pixels', 'side' or a positive number, got '{other}'"
                    ))
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    pub m: usize,
    /// Noise variance used by the ε rule.
    pub sigma_var: f64,
    pub solver: SolverKind,
    pub params: SolverParams,
    pub eps_rule: EpsRule,
    /// ε̄ = eps_bar_ratio · ε.
    pub eps_bar_ratio: f64,
    /// Distance to the reference counted as converged.
    pub threshold: f64,
    /// Stop each patch as soon as it is within the threshold.
    pub stop_at_threshold: bool,
}

impl DenoiseConfig {
    pub fn new(m: usize, sigma_var: f64, solver: SolverKind) -> Self {
        Self {
            m,
            sigma_var,
            solver,
            params: SolverParams::for_patch_side(m),
            eps_rule: EpsRule::PixelCount,
            eps_bar_ratio: 0.999,
            threshold: 5e-3,
            stop_at_threshold: false,
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps_rule.eps(self.sigma_var, self.m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DenoiseError::InvalidConfig(msg));
        if self.m == 0 {
            return bad("patch side must be positive".into());
        }
        if !(self.sigma_var >= 0.0 && self.sigma_var.is_finite()) {
            return bad(format!("noise variance must be nonnegative, got {}", self.sigma_var));
        }
        let eps = self.eps();
        if !(eps > 0.0 && eps.is_finite()) {
            return bad(format!("eps must be positive, got {eps}"));
        }
        if !(self.eps_bar_ratio > 0.0 && self.eps_bar_ratio < 1.0) {
            return bad(format!("eps_bar ratio must lie in (0, 1), got {}", self.eps_bar_ratio));
        }
        if !(self.threshold > 0.0) {
            return bad(format!("threshold must be positive, got {}", self.threshold));
        }
        if self.params.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        Ok(())
    }
}

/// Exact per-patch optima of the LIP, used as the distance reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub m: usize,
    pub eps: f64,
    /// Fingerprint of the noisy image the references belong to.
    pub fingerprint: u64,
    pub solutions: Vec<Vector>,
}

/// FNV-1a over the pixel bit patterns.
pub fn fingerprint(img: &Image) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let words = [img.width() as u64, img.height() as u64];
    for bits in words.into_iter().chain(img.pixels().iter().map(|p| p.to_bits())) {
        for byte in bits.to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

impl ReferenceSet {
    /// Soft-thresholded DCT coefficients of every patch; the dictionary is
    /// unitary, so this is the exact optimum.
    pub fn compute(noisy: &Image, m: usize, eps: f64) -> Result<Self> {
        let grid = PatchGrid::for_image(noisy, m)?;
        let op = Arc::new(LinearOperator::inverse_dct2(m));
        let patches = grid.extract_all(noisy)?;
        let solutions = patches
            .into_par_iter()
            .enumerate()
            .map(|(i, x)| {
                if x.norm() <= eps {
                    return Ok(Vector::zeros(m * m));
                }
                let inst = LipInstance::new(x, op.clone(), eps, 0.5 * eps)
                    .map_err(|source| DenoiseError::Solver { patch: i, source })?;
                analytic_solution(&inst).map_err(|source| DenoiseError::Solver { patch: i, source })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, eps, fingerprint: fingerprint(noisy), solutions })
    }

    pub fn matches(&self, noisy: &Image, m: usize, eps: f64) -> bool {
        self.m == m && self.eps == eps && self.fingerprint == fingerprint(noisy)
    }

    /// Header line `m,eps,fingerprint,patches`, then one patch per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "m,eps,fingerprint,patches")?;
        writeln!(w, "{},{:e},{},{}", self.m, self.eps, self.fingerprint, self.solutions.len())?;
        for f in &self.solutions {
            let row: Vec<String> = f.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: &str| DenoiseError::Cache(msg.to_string());
        let mut lines = r.lines();
        let mut next = || -> Result<String> { lines.next().ok_or_else(|| bad("truncated file"))?.map_err(Into::into) };
        if next()?.trim() != "m,eps,fingerprint,patches" {
            return Err(bad("unexpected header"));
        }
        let meta = next()?;
        let fields: Vec<&str> = meta.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(bad("metadata line needs four fields"));
        }
        let m: usize = fields[0].parse().map_err(|_| bad("bad m"))?;
        let eps: f64 = fields[1].parse().map_err(|_| bad("bad eps"))?;
        let fingerprint: u64 = fields[2].parse().map_err(|_| bad("bad fingerprint"))?;
        let count: usize = fields[3].parse().map_err(|_| bad("bad patch count"))?;
        let solutions = (0..count)
            .map(|_| {
                let line = next()?;
                let vals = line
                    .trim()
                    .split(',')
                    .map(|v| v.parse::<f64>().map_err(|_| bad("bad value")))
                    .collect::<Result<Vec<_>>>()?;
                if vals.len() != m * m {
                    return Err(bad("patch of the wrong length"));
                }
                Ok(Vector::from_vec(vals))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, eps, fingerprint, solutions })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchOutcome {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    /// ‖x‖ ≤ ε: f = 0 is optimal and no solver runs.
    pub trivial: bool,
    pub iterations: usize,
    /// First iteration with ‖f_k − f*‖ ≤ threshold.
    pub first_within: Option<usize>,
    /// e(f*) of the exact optimum.
    pub e_fstar: f64,
    pub eps_sq: f64,
    /// ‖f‖₁ of the returned solution.
    pub cost: f64,
    pub ref_cost: f64,
    /// ‖x − φf‖.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseReport {
    pub solver: String,
    pub m: usize,
    pub eps: f64,
    pub threshold: f64,
    pub max_iters: usize,
    pub psnr_noisy: Option<f64>,
    pub psnr_recovered: Option<f64>,
    /// Over the non-trivial patches.
    pub mean_iterations_to_threshold: f64,
    pub patches: Vec<PatchOutcome>,
    pub histogram: Histogram,
    /// Excluded from the CSV output so reports are reproducible.
    pub wall_seconds: f64,
}

impl DenoiseReport {
    pub fn trivial_patches(&self) -> usize {
        self.patches.iter().filter(|p| p.trivial).count()
    }

    /// Every patch has e(f*) < ε².
    pub fn separation_holds(&self) -> bool {
        self.patches.iter().all(|p| p.e_fstar < p.eps_sq)
    }

    pub fn max_e_ratio(&self) -> f64 {
        self.patches.iter().map(|p| p.e_fstar / p.eps_sq).fold(0.0, f64::max)
    }

    /// Two-column key,value summary.
    pub fn summary_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut out = String::from("key,value\n");
        let rows = [
            ("solver", self.solver.clone()),
            ("m", self.m.to_string()),
            ("eps", format!("{:e}", self.eps)),
            ("patches", self.patches.len().to_string()),
            ("trivial_patches", self.trivial_patches().to_string()),
            ("threshold", format!("{:e}", self.threshold)),
            ("max_iters", self.max_iters.to_string()),
            ("psnr_noisy", opt(self.psnr_noisy)),
            ("psnr_recovered", opt(self.psnr_recovered)),
            ("mean_iterations_to_threshold", format!("{:.6}", self.mean_iterations_to_threshold)),
            ("max_e_over_eps_sq", format!("{:.6}", self.max_e_ratio())),
            ("separation_holds", self.separation_holds().to_string()),
        ];
        for (k, v) in rows {
            writeln!(out, "{k},{v}").expect("writing to a String cannot fail");
        }
        out
    }

    /// One row per patch.
    pub fn patches_csv(&self) -> String {
        let mut out =
            String::from("patch,row,col,trivial,iterations,first_within,e_fstar,eps_sq,cost,ref_cost,residual\n");
        for p in &self.patches {
            let within = p.first_within.map(|k| k.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e}",
                p.index,
                p.row,
                p.col,
                p.trivial,
                p.iterations,
                within,
                p.e_fstar,
                p.eps_sq,
                p.cost,
                p.ref_cost,
                p.residual
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Denoises `noisy` patch by patch; `clean`, when given, enables the PSNR
/// fields. References are computed when not supplied.
pub fn denoise(
    noisy: &Image,
    clean: Option<&Image>,
    cfg: &DenoiseConfig,
    references: Option<&ReferenceSet>,
) -> Result<(Image, DenoiseReport)> {
    let start = Instant::now();
    cfg.validate()?;
    let m = cfg.m;
    let eps = cfg.eps();
    let grid = PatchGrid::for_image(noisy, m)?;
    let computed;
    let refs = match references {
        Some(r) if r.matches(noisy, m, eps) => r,
        Some(_) => return Err(DenoiseError::Cache("reference set belongs to another image or setting".into())),
        None => {
            computed = ReferenceSet::compute(noisy, m, eps)?;
            &computed
        }
    };
    let op = Arc::new(LinearOperator::inverse_dct2(m));
    let patches = grid.extract_all(noisy)?;

    let solved = patches
        .into_par_iter()
        .enumerate()
        .map(|(i, x)| solve_patch(&grid, &op, cfg, eps, i, x, &refs.solutions[i]))
        .collect::<Result<Vec<_>>>()?;
    let (pixels, outcomes): (Vec<Vector>, Vec<PatchOutcome>) = solved.into_iter().unzip();
    let recovered = grid.reconstruct(&pixels)?;

    let hits: Vec<Option<usize>> = outcomes.iter().filter(|p| !p.trivial).map(|p| p.first_within).collect();
    let e_values: Vec<f64> = outcomes.iter().map(|p| p.e_fstar).collect();
    let report = DenoiseReport {
        solver: solver_label(cfg),
        m,
        eps,
        threshold: cfg.threshold,
        max_iters: cfg.params.max_iters,
        psnr_noisy: clean.map(|c| psnr(c, noisy)).transpose()?,
        psnr_recovered: clean.map(|c| psnr(c, &recovered)).transpose()?,
        mean_iterations_to_threshold: mean_iterations(&hits, cfg.params.max_iters),
        patches: outcomes,
        histogram: Histogram::new(&e_values, HISTOGRAM_BANDWIDTH)?,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((recovered, report))
}

fn solver_label(cfg: &DenoiseConfig) -> String {
    match cfg.solver {
        SolverKind::Flips => format!("flips-{}", cfg.params.oracle),
        other => other.to_string(),
    }
}

fn solve_patch(
    grid: &PatchGrid,
    op: &Arc<LinearOperator>,
    cfg: &DenoiseConfig,
    eps: f64,
    index: usize,
    x: Vector,
    f_ref: &Vector,
) -> Result<(Vector, PatchOutcome)> {
    let (row, col) = grid.origin(index);
    let norm_x_sq = x.norm_squared();
    let phi_ref = op.apply(f_ref).map_err(|source| DenoiseError::Solver { patch: index, source })?;
    let e_fstar = e_from_parts(norm_x_sq, x.dot(&phi_ref), phi_ref.norm_squared());
    let mut outcome = PatchOutcome {
        index,
        row,
        col,
        trivial: false,
        iterations: 0,
        first_within: None,
        e_fstar,
        eps_sq: eps * eps,
        cost: 0.0,
        ref_cost: f_ref.lp_norm(1),
        residual: x.norm(),
    };
    if x.norm() <= eps {
        outcome.trivial = true;
        outcome.first_within = Some(0);
        return Ok((Vector::zeros(x.len()), outcome));
    }
    let wrap = |source: LipError| DenoiseError::Solver { patch: index, source };
    let inst = LipInstance::new(x, op.clone(), eps, cfg.eps_bar_ratio * eps).map_err(wrap)?;
    let mut monitor = Monitor::new().with_reference(f_ref.clone());
    if cfg.stop_at_threshold {
        monitor = monitor.stop_within(cfg.threshold);
    }
    let sol = run_solver(cfg.solver, &cfg.params, &inst, &monitor).map_err(wrap)?;
    let pixels = op.apply(&sol.f).map_err(wrap)?;
    outcome.iterations = sol.trace.iterations();
    outcome.first_within = sol.trace.first_within(cfg.threshold);
    outcome.cost = sol.f.lp_norm(1);
    outcome.residual = inst.residual(&sol.f);
    Ok((pixels, outcome))
}
