//! Command-line front end: `solve`, `denoise`, `bench` and `verify`.
//!
//! Exit codes: 0 success, 1 I/O or configuration error, 2 infeasible
//! instance, 3 a `verify` check failed.

pub mod commands;
pub mod io;
pub mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use flips_core::LipError;
use flips_denoise::DenoiseError;

pub use commands::{cmd_bench, cmd_denoise, cmd_solve, cmd_verify};
pub use settings::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "flips", version, about = "Constrained l1 solvers and sliding-patch DCT denoising")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance: minimize ‖f‖₁ subject to ‖x − φ(f)‖ ≤ ε.
    Solve {
        /// Measurement vector x as CSV.
        x: PathBuf,
        #[command(flatten)]
        opts: Options,
    },
    /// Add seeded Gaussian noise to an image and denoise it patch by patch.
    Denoise(Options),
    /// Compare mean iterations to the reference threshold across solvers.
    Bench(Options),
    /// Run the solver and patch invariant checks.
    Verify(Options),
}

/// Every flag is optional; unset flags fall back to the config file and then
/// to the defaults shown.
#[derive(Debug, Args, Default)]
pub struct Options {
    /// key = value file with the same keys as the flags (underscores or dashes).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// flips, cp, acp, csalsa or pagd [default: flips]
    #[arg(long)]
    pub solver: Option<String>,
    /// Comma-separated solvers for bench [default: flips,csalsa,cp]
    #[arg(long)]
    pub solvers: Option<String>,
    /// FLIPS oracle: linear, quadratic or accelerated [default: accelerated]
    #[arg(long)]
    pub oracle: Option<String>,
    /// FLIPS gradient step: a number, or curvature:<k> for k/λmax of the
    /// curvature at the starting point [default: curvature:5]
    #[arg(long)]
    pub inv_beta: Option<String>,
    /// Momentum of the accelerated oracle [default: 0.7]
    #[arg(long)]
    pub rho: Option<String>,
    /// CP extrapolation weight [default: 0.6]
    #[arg(long)]
    pub theta: Option<String>,
    /// C-SALSA penalty [default: 2.5, or 3 for m >= 64]
    #[arg(long)]
    pub mu: Option<String>,
    /// PAGD step 1/b [default: 0.1/(η(h₀)²‖φ‖²)]
    #[arg(long)]
    pub inv_b: Option<String>,
    /// Residual radius ε; required by solve, overrides --eps-rule otherwise
    #[arg(long)]
    pub eps: Option<String>,
    /// Cone radius ε̄ < ε [default: 0.99ε for solve, 0.999ε for patches]
    #[arg(long)]
    pub eps_bar: Option<String>,
    /// ACP lower bound η̄ on the dual [default: derived from the instance]
    #[arg(long)]
    pub eta_bar: Option<String>,
    /// Patch side [default: 16]
    #[arg(long)]
    pub m: Option<String>,
    /// Noise variance [default: 0.0055]
    #[arg(long)]
    pub sigma: Option<String>,
    /// pixels (ε = √(σm²)), side (ε = √(σm)) or a number [default: pixels]
    #[arg(long)]
    pub eps_rule: Option<String>,
    /// Seed for all randomness [default: 0]
    #[arg(long)]
    pub seed: Option<String>,
    /// Iteration cap [default: 1000 for solve and bench, 50 for denoise]
    #[arg(long)]
    pub max_iters: Option<String>,
    /// Distance to the exact optimum counted as converged [default: 0.005]
    #[arg(long)]
    pub threshold: Option<String>,
    /// identity, dct2 or a dense CSV matrix for solve [default: identity]
    #[arg(long)]
    pub operator: Option<String>,
    /// Clean input image, PGM or PNG
    #[arg(long)]
    pub input: Option<String>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out_dir: Option<String>,
    /// CSV cache of the exact per-patch optima
    #[arg(long)]
    pub ref_cache: Option<String>,
}

impl Options {
    fn flags(&self) -> [(&'static str, &Option<String>); 21] {
        [
            ("solver", &self.solver),
            ("solvers", &self.solvers),
            ("oracle", &self.oracle),
            ("inv_beta", &self.inv_beta),
            ("rho", &self.rho),
            ("theta", &self.theta),
            ("mu", &self.mu),
            ("inv_b", &self.inv_b),
            ("eps", &self.eps),
            ("eps_bar", &self.eps_bar),
            ("eta_bar", &self.eta_bar),
            ("m", &self.m),
            ("sigma", &self.sigma),
            ("eps_rule", &self.eps_rule),
            ("seed", &self.seed),
            ("max_iters", &self.max_iters),
            ("threshold", &self.threshold),
            ("operator", &self.operator),
            ("input", &self.input),
            ("out_dir", &self.out_dir),
            ("ref_cache", &self.ref_cache),
        ]
    }

    /// Defaults, then the config file, then the flags.
    pub fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_config_file(path)?;
        }
        for (key, value) in self.flags() {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

/// Exit code for an error: 2 when the instance (or a patch) is infeasible.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let infeasible = err.chain().any(|cause| {
        if let Some(e) = cause.downcast_ref::<LipError>() {
            return e.is_infeasible();
        }
        matches!(cause.downcast_ref::<DenoiseError>(), Some(DenoiseError::Solver { source, .. }) if source.is_infeasible())
    });
    if infeasible {
        EXIT_INFEASIBLE
    } else {
        EXIT_USAGE
    }
}

/// Writes to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Solve { x, opts } => {
            let s = opts.settings()?;
            let out = cmd_solve(&s, x)?;
            say!("cost {}\n", io::short(out.cost));
            say!("residual {} (eps {})\n", io::short(out.residual), io::short(out.eps));
            say!("iterations {}\n", out.iterations);
            Ok(EXIT_OK)
        }
        Command::Denoise(opts) => {
            let s = opts.settings()?;
            let out = cmd_denoise(&s)?;
            say!("{}", out.report.summary_csv());
            for f in &out.files {
                say!("wrote {}\n", f.display());
            }
            Ok(EXIT_OK)
        }
        Command::Bench(opts) => {
            let s = opts.settings()?;
            let out = cmd_bench(&s)?;
            say!("{}", out.markdown());
            Ok(EXIT_OK)
        }
        Command::Verify(opts) => {
            let s = opts.settings()?;
            let out = cmd_verify(&s)?;
            for c in &out.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    say!("{status} {}\n", c.name);
                } else {
                    say!("{status} {} ({})\n", c.name, c.detail);
                }
            }
            Ok(if out.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}
