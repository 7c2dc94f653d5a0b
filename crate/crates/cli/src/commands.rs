//! The four subcommands. Each returns its results so that callers other than
//! the binary can inspect them; files go to `out_dir`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use flips_core::{
    baselines::analytic_solution, run_solver, LinearOperator, LipInstance, Monitor, Oracle, SolverKind, SolverParams,
    StepSize, Vector,
};
use flips_denoise::{
    add_gaussian_noise, denoise, DenoiseConfig, DenoiseReport, EpsRule, Image, PatchGrid, ReferenceSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::io::{read_vector, short, vector_csv, write};
use crate::settings::Settings;

/// ε̄/ε for single instances.
pub const SOLVE_EPS_BAR_RATIO: f64 = 0.99;
pub const SOLVE_MAX_ITERS: usize = 1000;
pub const DENOISE_MAX_ITERS: usize = 50;
pub const BENCH_MAX_ITERS: usize = 1000;

pub fn solver_params(s: &Settings, max_iters: usize) -> SolverParams {
    let mut p = SolverParams::for_patch_side(s.m);
    p.max_iters = max_iters;
    p.oracle = s.oracle;
    p.step = s.inv_beta;
    p.rho = s.rho;
    p.theta = s.theta;
    if let Some(mu) = s.mu {
        p.mu = mu;
    }
    p.inv_b = s.inv_b;
    p.eta_bar = s.eta_bar;
    p
}

pub fn build_operator(name: &str, n: usize) -> Result<LinearOperator> {
    match name {
        "identity" => Ok(LinearOperator::identity(n)),
        "dct2" => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                bail!("the dct2 operator needs a square number of entries, got {n}");
            }
            Ok(LinearOperator::inverse_dct2(side))
        }
        path => {
            let file = std::fs::File::open(path).with_context(|| format!("opening operator {path}"))?;
            let op = LinearOperator::from_csv(std::io::BufReader::new(file))
                .with_context(|| format!("parsing operator {path}"))?;
            if op.measurement_dim() != n {
                bail!("operator maps into dimension {} but x has {n} entries", op.measurement_dim());
            }
            Ok(op)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub f: Vector,
    pub cost: f64,
    pub residual: f64,
    pub eps: f64,
    pub iterations: usize,
}

/// Solves one instance read from `x_path`; writes solution, trace and summary CSVs.
pub fn cmd_solve(s: &Settings, x_path: &Path) -> Result<SolveOutcome> {
    let x = read_vector(x_path)?;
    let eps = s.eps.ok_or_else(|| anyhow!("solve needs --eps"))?;
    let eps_bar = s.eps_bar.unwrap_or(SOLVE_EPS_BAR_RATIO * eps);
    let op = Arc::new(build_operator(&s.operator, x.len())?);
    let inst = LipInstance::new(x, op, eps, eps_bar)?;
    inst.ensure_feasible()?;
    let params = solver_params(s, s.max_iters.unwrap_or(SOLVE_MAX_ITERS));
    let sol = run_solver(s.solver, &params, &inst, &Monitor::new())?;
    let outcome = SolveOutcome {
        cost: inst.cost().value(&sol.f),
        residual: inst.residual(&sol.f),
        eps,
        iterations: sol.trace.iterations(),
        f: sol.f.clone(),
    };
    std::fs::create_dir_all(&s.out_dir).with_context(|| format!("creating {}", s.out_dir.display()))?;
    write(&s.out_dir.join("solution.csv"), &vector_csv("f", &sol.f))?;
    write(&s.out_dir.join("trace.csv"), &sol.trace.to_csv())?;
    let summary = format!(
        "key,value\nsolver,{}\ncost,{:e}\nresidual,{:e}\neps,{:e}\niterations,{}\n",
        s.solver, outcome.cost, outcome.residual, eps, outcome.iterations
    );
    write(&s.out_dir.join("summary.csv"), &summary)?;
    Ok(outcome)
}

pub fn denoise_config(s: &Settings, solver: SolverKind, max_iters: usize) -> DenoiseConfig {
    let mut cfg = DenoiseConfig::new(s.m, s.sigma, solver);
    cfg.params = solver_params(s, max_iters);
    cfg.eps_rule = match s.eps {
        Some(eps) => EpsRule::Fixed(eps),
        None => s.eps_rule,
    };
    if let Some(eb) = s.eps_bar {
        cfg.eps_bar_ratio = eb / cfg.eps();
    }
    cfg.threshold = s.threshold;
    cfg
}

fn load_input(s: &Settings) -> Result<Image> {
    let path = s.input.as_ref().ok_or_else(|| anyhow!("this command needs --input <image>"))?;
    Image::load(path).with_context(|| format!("loading {}", path.display()))
}

/// Reuses the cache at `--ref-cache` when it belongs to this image and
/// setting, and rewrites it otherwise.
fn references(s: &Settings, noisy: &Image, cfg: &DenoiseConfig) -> Result<ReferenceSet> {
    let eps = cfg.eps();
    if let Some(path) = &s.ref_cache {
        if path.exists() {
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let cached = ReferenceSet::read_csv(std::io::BufReader::new(file))?;
            if cached.matches(noisy, cfg.m, eps) {
                return Ok(cached);
            }
        }
    }
    let refs = ReferenceSet::compute(noisy, cfg.m, eps)?;
    if let Some(path) = &s.ref_cache {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        refs.write_csv(std::io::BufWriter::new(file))?;
    }
    Ok(refs)
}

#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub report: DenoiseReport,
    pub files: Vec<PathBuf>,
}

/// Adds seeded noise to the input, denoises it and writes images and CSV reports.
pub fn cmd_denoise(s: &Settings) -> Result<DenoiseOutcome> {
    let clean = load_input(s)?;
    let noisy = add_gaussian_noise(&clean, s.sigma, s.seed)?;
    let cfg = denoise_config(s, s.solver, s.max_iters.unwrap_or(DENOISE_MAX_ITERS));
    cfg.validate()?;
    let refs = references(s, &noisy, &cfg)?;
    let (recovered, report) = denoise(&noisy, Some(&clean), &cfg, Some(&refs))?;

    std::fs::create_dir_all(&s.out_dir).with_context(|| format!("creating {}", s.out_dir.display()))?;
    let files: Vec<PathBuf> = ["noisy.pgm", "recovered.pgm", "summary.csv", "patches.csv", "histogram.csv"]
        .iter()
        .map(|f| s.out_dir.join(f))
        .collect();
    noisy.save(&files[0])?;
    recovered.save(&files[1])?;
    write(&files[2], &report.summary_csv())?;
    write(&files[3], &report.patches_csv())?;
    write(&files[4], &report.histogram.to_csv())?;
    Ok(DenoiseOutcome { report, files })
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub solver: String,
    pub mean_iterations: f64,
    pub misses: usize,
    pub psnr_noisy: f64,
    pub psnr_recovered: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub m: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchOutcome {
    pub fn markdown(&self) -> String {
        let mut out = format!(
            "| solver | mean iterations to threshold ({m}x{m}) | misses | PSNR noisy | PSNR recovered | seconds |\n|---|---|---|---|---|---|\n",
            m = self.m
        );
        for r in &self.rows {
            writeln!(
                out,
                "| {} | {:.2} | {} | {:.3} | {:.3} | {:.2} |",
                r.solver, r.mean_iterations, r.misses, r.psnr_noisy, r.psnr_recovered, r.seconds
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Same columns as the Markdown table, without timings.
    pub fn csv(&self) -> String {
        let mut out = String::from("solver,m,mean_iterations,misses,psnr_noisy,psnr_recovered\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:e},{},{:e},{:e}",
                r.solver, self.m, r.mean_iterations, r.misses, r.psnr_noisy, r.psnr_recovered
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn mean_of(&self, solver: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.solver == solver || r.solver.starts_with(&format!("{solver}-")))
            .map(|r| r.mean_iterations)
    }
}

/// Mean iterations to the threshold for each solver, every patch stopping
/// once it is within the threshold of the exact optimum.
pub fn cmd_bench(s: &Settings) -> Result<BenchOutcome> {
    let clean = load_input(s)?;
    let noisy = add_gaussian_noise(&clean, s.sigma, s.seed)?;
    let max_iters = s.max_iters.unwrap_or(BENCH_MAX_ITERS);
    let mut refs = None;
    let mut rows = Vec::new();
    for &solver in &s.solvers {
        let mut cfg = denoise_config(s, solver, max_iters);
        cfg.stop_at_threshold = true;
        cfg.validate()?;
        if refs.is_none() {
            refs = Some(references(s, &noisy, &cfg)?);
        }
        let (_, report) = denoise(&noisy, Some(&clean), &cfg, refs.as_ref())?;
        rows.push(BenchRow {
            solver: report.solver.clone(),
            mean_iterations: report.mean_iterations_to_threshold,
            misses: report.patches.iter().filter(|p| !p.trivial && p.first_within.is_none()).count(),
            psnr_noisy: report.psnr_noisy.unwrap_or(f64::NAN),
            psnr_recovered: report.psnr_recovered.unwrap_or(f64::NAN),
            seconds: report.wall_seconds,
        });
    }
    let outcome = BenchOutcome { m: s.m, rows };
    std::fs::create_dir_all(&s.out_dir).with_context(|| format!("creating {}", s.out_dir.display()))?;
    write(&s.out_dir.join("bench.md"), &outcome.markdown())?;
    write(&s.out_dir.join("bench.csv"), &outcome.csv())?;
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Identity instances with dims 8–32 and ε between 20% and 80% of ‖x‖.
pub fn identity_suite(seed: u64, count: usize) -> Vec<LipInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(8..=32);
            let x = gaussian(&mut rng, n);
            let eps = rng.gen_range(0.2..0.8) * x.norm();
            LipInstance::new(x, Arc::new(LinearOperator::identity(n)), eps, SOLVE_EPS_BAR_RATIO * eps)
                .expect("random instances are well formed")
        })
        .collect()
}

/// A small image with edges, ramps and texture for the patch checks.
fn synthetic_image(seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let texture: Vec<f64> = (0..32 * 32).map(|_| rng.gen_range(-0.05..0.05)).collect();
    Image::from_fn(32, 32, |r, c| {
        let base = if (r / 8 + c / 8) % 2 == 0 { 0.3 } else { 0.7 };
        (base + 0.01 * c as f64 - 0.005 * r as f64 + texture[r * 32 + c]).clamp(0.0, 1.0)
    })
    .expect("synthetic image is valid")
}

/// Runs the solver invariants on seeded instances and the patch invariants
/// on the input image (or a synthetic one).
pub fn cmd_verify(s: &Settings) -> Result<VerifyOutcome> {
    let mut out = VerifyOutcome::default();
    let suite = identity_suite(s.seed, 10);

    let mut worst = 0.0f64;
    let mut worst_chain = 0.0f64;
    let mut descent_ok = true;
    for inst in &suite {
        let c_star = inst.cost().value(&analytic_solution(inst)?);
        for solver in SolverKind::ALL {
            let oracles: &[Oracle] = if solver == SolverKind::Flips {
                &[Oracle::Quadratic, Oracle::Accelerated]
            } else {
                &[Oracle::Accelerated]
            };
            for &oracle in oracles {
                let mut params = SolverParams::for_patch_side(s.m);
                params.max_iters = 1000;
                params.oracle = oracle;
                params.step = StepSize::Fixed(0.5 / inst.norm_x());
                params.tol_h = 0.0;
                let sol = run_solver(solver, &params, inst, &Monitor::new())?;
                worst = worst.max((inst.cost().value(&sol.f) - c_star).abs() / c_star);
                if solver == SolverKind::Flips {
                    for r in &sol.trace.records {
                        worst_chain = worst_chain.max((r.residual / inst.eps() - 1.0).abs());
                    }
                    if oracle.is_monotone() {
                        descent_ok &= sol.trace.records.windows(2).all(|w| w[1].eta <= w[0].eta + 1e-12);
                    }
                }
            }
        }
    }
    out.push("solvers match the soft-threshold optimum", worst <= 1e-3, format!("max relative cost error {worst:.2e}"));
    out.push(
        "iterates satisfy the quadratic equation for eta",
        worst_chain <= 1e-9,
        format!("max |residual/eps - 1| {worst_chain:.2e}"),
    );
    out.push("eta is non-increasing for the quadratic oracle", descent_ok, String::new());

    let clean = match &s.input {
        Some(_) => load_input(s)?,
        None => synthetic_image(s.seed),
    };
    let m = s.m.min(clean.width()).min(clean.height()).min(8);
    let grid = PatchGrid::for_image(&clean, m)?;
    let round_trip = grid.reconstruct(&grid.extract_all(&clean)?)? == clean;
    out.push("reconstructing unmodified patches is bit-exact", round_trip, format!("{m}x{m} patches"));

    let noisy = add_gaussian_noise(&clean, s.sigma, s.seed)?;
    let verify_settings = Settings { m, ..s.clone() };
    let cfg = denoise_config(&verify_settings, SolverKind::Flips, DENOISE_MAX_ITERS);
    let run = || denoise(&noisy, Some(&clean), &cfg, None);
    let (_, a) = run()?;
    let (_, b) = run()?;
    let worst_res = a.patches.iter().map(|p| p.residual - a.eps).fold(f64::NEG_INFINITY, f64::max);
    out.push("every patch solution is feasible", worst_res <= 1e-8, format!("max residual - eps {worst_res:.2e}"));
    out.push("e(f*) < eps^2 on every patch", a.separation_holds(), format!("max e/eps^2 {}", short(a.max_e_ratio())));
    out.push(
        "histogram mass equals patch count",
        a.histogram.mass() == a.patches.len(),
        format!("{} patches", a.patches.len()),
    );
    out.push(
        "seeded denoising is deterministic",
        a.summary_csv() == b.summary_csv() && a.patches_csv() == b.patches_csv(),
        String::new(),
    );
    Ok(out)
}
