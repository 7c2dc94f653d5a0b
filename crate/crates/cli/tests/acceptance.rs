//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use flips_cli::{cmd_bench, cmd_denoise, Settings};
use flips_core::baselines::{acp_solve, AcpConfig};
use flips_core::linesearch::{gamma_max, gamma_opt};
use flips_core::smooth::{
    cone_member, e_residual, eta, grad_eta, hessian_apply, l_hessian, l_hessian_extreme_eigs, m_matrix,
    m_matrix_extreme_eigs,
};
use flips_core::{
    run_solver, LinearOperator, LipInstance, Matrix, Monitor, Oracle, SolverKind, SolverParams, StepSize, Vector,
};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(pass: bool, detail: String) -> Verdict {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn identity_instance(rng: &mut ChaCha8Rng, n: usize) -> LipInstance {
    let x = gaussian(rng, n);
    let eps = rng.gen_range(0.2..0.6) * x.norm();
    LipInstance::new(x, Arc::new(LinearOperator::identity(n)), eps, 0.99 * eps).unwrap()
}

fn dense_instance(rng: &mut ChaCha8Rng, n: usize, d: usize) -> LipInstance {
    let m = Matrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal)) / (n as f64).sqrt();
    let x = gaussian(rng, n);
    let eps = rng.gen_range(0.2..0.5) * x.norm();
    LipInstance::new(x, Arc::new(LinearOperator::dense(m)), eps, 0.99 * eps).unwrap()
}

fn mixed_instance(rng: &mut ChaCha8Rng, i: usize, max_dim: usize) -> LipInstance {
    let n = rng.gen_range(2..=max_dim);
    if i.is_multiple_of(2) {
        identity_instance(rng, n)
    } else {
        let d = n + rng.gen_range(1..4);
        dense_instance(rng, n, d)
    }
}

/// The 20 identity instances, dims 8–32.
fn suite() -> Vec<LipInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..20)
        .map(|_| {
            let n = rng.gen_range(8..=32);
            identity_instance(&mut rng, n)
        })
        .collect()
}

/// Optimal cost for φ = identity: Σ(|xᵢ| − τ)₊ with τ found by bisection on
/// ‖x − soft(x, τ)‖ = ε.
fn soft_threshold_cost(x: &Vector, eps: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, x.amax());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r: f64 = x.iter().map(|v| v.abs().min(mid).powi(2)).sum();
        if r < eps * eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    x.iter().map(|v| (v.abs() - tau).max(0.0)).sum()
}

/// Random h strictly inside K(level).
fn interior_point(rng: &mut ChaCha8Rng, inst: &LipInstance, level: f64) -> Vector {
    let base = inst.ls_solution().clone();
    loop {
        let scale = rng.gen_range(0.05..1.5) * base.norm();
        let h = (&base + gaussian(rng, base.len()) * (scale / (base.len() as f64).sqrt())) * rng.gen_range(0.2..3.0);
        if cone_member(inst, &h, level) && e_residual(inst, &h) < level * level * (1.0 - 1e-3) {
            return h;
        }
    }
}

fn flips_params(oracle: Oracle, inst: &LipInstance) -> SolverParams {
    let mut p = SolverParams::for_patch_side(16);
    p.oracle = oracle;
    p.step = StepSize::Fixed(0.5 / inst.norm_x());
    p.tol_h = 0.0;
    p.max_iters = if oracle == Oracle::Linear { 30_000 } else { 1000 };
    p
}

fn all_flips_runs(inst: &LipInstance, oracles: &[Oracle]) -> Vec<(Oracle, flips_core::Solution)> {
    oracles
        .iter()
        .map(|&o| (o, run_solver(SolverKind::Flips, &flips_params(o, inst), inst, &Monitor::new()).unwrap()))
        .collect()
}

const ORACLES: [Oracle; 3] = [Oracle::Linear, Oracle::Quadratic, Oracle::Accelerated];

fn analytic_equivalence() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_name = String::new();
    for inst in suite() {
        let c_star = soft_threshold_cost(inst.x(), inst.eps());
        let mut runs: Vec<(String, Vector)> =
            all_flips_runs(&inst, &ORACLES).into_iter().map(|(o, s)| (format!("flips-{o}"), s.f)).collect();
        for solver in [SolverKind::Cp, SolverKind::Acp, SolverKind::Csalsa, SolverKind::Pagd] {
            let mut p = SolverParams::for_patch_side(16);
            p.max_iters = 1000;
            runs.push((solver.to_string(), run_solver(solver, &p, &inst, &Monitor::new()).unwrap().f));
        }
        for (name, f) in runs {
            let err = (f.lp_norm(1) - c_star).abs() / c_star;
            if err > worst {
                worst = err;
                worst_name = name;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-3 && secs < 5.0, format!("max relative cost error {worst:.2e} ({worst_name}), {secs:.2} s"))
}

fn quadratic_equation_invariant() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut iterates = 0;
    for inst in suite() {
        for (_, sol) in all_flips_runs(&inst, &ORACLES) {
            for r in &sol.trace.records {
                worst = worst.max((r.residual / inst.eps() - 1.0).abs());
                iterates += 1;
            }
        }
    }
    check(worst <= 1e-9, format!("max |residual/eps - 1| {worst:.2e} over {iterates} iterates"))
}

fn derivative_checks() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_g, mut worst_h): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let inst = mixed_instance(&mut rng, i, 16);
        let h = interior_point(&mut rng, &inst, inst.eps_bar());
        let g = grad_eta(&inst, &h).unwrap();
        let t = 1e-6 * h.norm();
        let fd = Vector::from_fn(h.len(), |j, _| {
            let mut e = Vector::zeros(h.len());
            e[j] = t;
            (eta(&inst, &(&h + &e)).unwrap() - eta(&inst, &(&h - &e)).unwrap()) / (2.0 * t)
        });
        worst_g = worst_g.max((&g - &fd).norm() / fd.norm());
        let v = gaussian(&mut rng, h.len());
        let s = 1e-5 * h.norm() / v.norm();
        let hv = hessian_apply(&inst, &h, &v).unwrap();
        let fd_h = (grad_eta(&inst, &(&h + &v * s)).unwrap() - grad_eta(&inst, &(&h - &v * s)).unwrap()) / (2.0 * s);
        worst_h = worst_h.max((&hv - &fd_h).norm() / fd_h.norm());
    }
    check(
        worst_g <= 1e-5 && worst_h <= 1e-4,
        format!("gradient {worst_g:.2e}, Hessian {worst_h:.2e} (max relative error)"),
    )
}

fn extreme(m: &Matrix) -> (f64, f64) {
    let ev = SymmetricEigen::new(m.clone()).eigenvalues;
    let abs: Vec<f64> = ev.iter().map(|v| v.abs()).collect();
    (abs.iter().cloned().fold(f64::INFINITY, f64::min), abs.iter().cloned().fold(0.0, f64::max))
}

fn eigenvalue_closed_forms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst_m: f64 = 0.0;
    for i in 0..50 {
        let inst = mixed_instance(&mut rng, i, 6);
        let h = interior_point(&mut rng, &inst, inst.eps_bar());
        let (lo, hi) = m_matrix_extreme_eigs(&inst, &h).unwrap();
        let (nlo, nhi) = extreme(&m_matrix(&inst, &h).unwrap());
        worst_m = worst_m.max(rel(lo, nlo)).max(rel(hi, nhi));
    }
    let mut worst_l: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let x = gaussian(&mut rng, n);
        let eps = rng.gen_range(0.1..0.8) * x.norm();
        let lam = loop {
            let lam = &x * rng.gen_range(0.05..3.0) + gaussian(&mut rng, n) * rng.gen_range(0.0..1.0);
            if lam.dot(&x) - eps * lam.norm() > 1e-3 * lam.norm() * x.norm() {
                break lam;
            }
        };
        let (lo, hi) = l_hessian_extreme_eigs(&x, eps, &lam).unwrap();
        let (nlo, nhi) = extreme(&l_hessian(&x, eps, &lam).unwrap());
        worst_l = worst_l.max(rel(lo, nlo)).max(rel(hi, nhi));
    }
    check(
        worst_m <= 1e-8 && worst_l <= 1e-8,
        format!("curvature of eta {worst_m:.2e}, curvature of the dual {worst_l:.2e} (max relative error)"),
    )
}

/// Membership in K(level) from the definition.
fn inside(inst: &LipInstance, h: &Vector, level: f64) -> bool {
    let p = inst.op().apply(h).unwrap();
    let ip = inst.x().dot(&p);
    ip > 0.0 && ip * ip >= p.norm_squared() * (inst.norm_x_sq() - level * level)
}

/// Smallest root of θ²‖p‖² − 2θ⟨x,p⟩ + ‖x‖² − ε² = 0.
fn eta_textbook(inst: &LipInstance, h: &Vector) -> f64 {
    let p = inst.op().apply(h).unwrap();
    let (pp, ip) = (p.norm_squared(), inst.x().dot(&p));
    (ip - (ip * ip - pp * inst.gap()).max(0.0).sqrt()) / pp
}

fn exact_line_search() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points = 100_000;
    let (mut worst_grid, mut worst_bisect): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let inst = mixed_instance(&mut rng, i, 12);
        let h = interior_point(&mut rng, &inst, inst.eps_bar());
        let d = gaussian(&mut rng, h.len()) * (rng.gen_range(0.1..3.0) * h.norm() / (h.len() as f64).sqrt());
        let level = inst.eps_bar();

        let gh = gamma_max(&inst, &h, &d).unwrap();
        let first_out = (1..=10_000).map(|j| j as f64 / 10_000.0).find(|&t| !inside(&inst, &(&h + &d * t), level));
        let boundary = match first_out {
            None => 1.0,
            Some(t) => {
                let (mut lo, mut hi) = (t - 1e-4, t);
                while hi - lo > 1e-10 {
                    let mid = 0.5 * (lo + hi);
                    if inside(&inst, &(&h + &d * mid), level) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        };
        worst_bisect = worst_bisect.max((gh - boundary).abs());

        let g = gamma_opt(&inst, &h, &d).unwrap();
        let step = gh / (points - 1) as f64;
        let (mut g_grid, mut e_grid) = (0.0, f64::INFINITY);
        for j in 0..points {
            let t = step * j as f64;
            let e = eta_textbook(&inst, &(&h + &d * t));
            if e < e_grid {
                g_grid = t;
                e_grid = e;
            }
        }
        worst_grid = worst_grid.max((g - g_grid).abs() / step);
    }
    check(
        worst_grid <= 1.0 && worst_bisect <= 1e-6,
        format!("argmin within {worst_grid:.3} grid steps, boundary within {worst_bisect:.1e} of bisection"),
    )
}

fn monotone_descent() -> Verdict {
    let mut worst_rise = f64::NEG_INFINITY;
    let mut runs = 0;
    for inst in suite() {
        for (_, sol) in all_flips_runs(&inst, &[Oracle::Linear, Oracle::Quadratic]) {
            for w in sol.trace.records.windows(2) {
                worst_rise = worst_rise.max(w[1].eta - w[0].eta);
            }
            runs += 1;
        }
    }
    check(worst_rise <= 1e-12, format!("largest increase of eta {worst_rise:.2e} over {runs} runs"))
}

fn table_reproduction() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let s = Settings {
        input: Some(fixture("cameraman64.pgm")),
        m: 8,
        out_dir: dir.path().to_path_buf(),
        ..Settings::default()
    };
    let start = Instant::now();
    let out = cmd_bench(&s).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let flips = out.mean_of("flips").unwrap();
    let csalsa = out.mean_of("csalsa").unwrap();
    let cp = out.mean_of("cp").unwrap();
    let ratio = cp / csalsa;
    check(
        flips < csalsa && csalsa < cp && flips <= 20.0 && ratio >= 1.5 && secs < 120.0,
        format!("FLIPS {flips:.2}, C-SALSA {csalsa:.2}, CP {cp:.2}, CP/C-SALSA {ratio:.2}, {secs:.1} s"),
    )
}

fn denoise_settings(out: &std::path::Path) -> Settings {
    Settings {
        input: Some(fixture("cameraman64.pgm")),
        m: 16,
        max_iters: Some(50),
        out_dir: out.to_path_buf(),
        ..Settings::default()
    }
}

fn psnr_gain() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_denoise(&denoise_settings(dir.path())).unwrap().report;
    let (noisy, rec) = (r.psnr_noisy.unwrap(), r.psnr_recovered.unwrap());
    check(rec >= noisy + 3.0, format!("{noisy:.3} dB -> {rec:.3} dB (gain {:.3} dB)", rec - noisy))
}

fn acp_rate() -> Verdict {
    let eps = 0.3f64.sqrt();
    let inst = LipInstance::new(
        Vector::from_row_slice(&[1.0, 0.2, -0.1]),
        Arc::new(LinearOperator::identity(3)),
        eps,
        0.9 * eps,
    )
    .unwrap();
    let sol = acp_solve(&inst, &AcpConfig::from_instance(&inst, 800).unwrap()).unwrap();
    let gap: Vec<f64> = sol.trace.records.iter().map(|r| r.ergodic_gap.unwrap()).collect();
    let min = gap[1..].iter().cloned().fold(f64::INFINITY, f64::min);
    let bounded = gap[1..].iter().all(|g| *g <= gap[1]);
    let ratios: Vec<f64> = (200..=400).map(|k| gap[2 * k] / gap[k]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    check(
        min >= 0.0 && bounded && mean <= 0.6,
        format!("ergodic gap min {min:.2e}, bounded by gap_1 {bounded}, mean gap(2k)/gap(k) {mean:.3}"),
    )
}

fn separation() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_denoise(&denoise_settings(dir.path())).unwrap();
    let r = &out.report;
    let below = r.patches.iter().filter(|p| p.e_fstar < p.eps_sq).count();
    let hist = std::fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    let mass: usize = hist.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    check(
        below == r.patches.len() && mass == r.patches.len() && hist.starts_with("bin_left,count\n"),
        format!(
            "{below}/{} patches with e(f*) < eps^2, max ratio {:.4}, histogram mass {mass}",
            r.patches.len(),
            r.max_e_ratio()
        ),
    )
}

fn determinism() -> Verdict {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_denoise(&denoise_settings(a.path())).unwrap();
    cmd_denoise(&denoise_settings(b.path())).unwrap();
    let files = ["summary.csv", "patches.csv", "histogram.csv"];
    let same =
        files.iter().all(|f| std::fs::read(a.path().join(f)).unwrap() == std::fs::read(b.path().join(f)).unwrap());
    check(same, format!("{} compared byte for byte", files.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("analytic-oracle equivalence", analytic_equivalence),
        ("quadratic-equation invariant", quadratic_equation_invariant),
        ("gradient and Hessian checks", derivative_checks),
        ("eigenvalue closed forms", eigenvalue_closed_forms),
        ("exact line search", exact_line_search),
        ("monotone descent", monotone_descent),
        ("iteration counts on 8x8 patches", table_reproduction),
        ("PSNR gain on 16x16 patches", psnr_gain),
        ("ACP rate property", acp_rate),
        ("separation property", separation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let (status, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {status} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
