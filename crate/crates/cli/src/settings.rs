//! Run settings: defaults, overlaid by a key=value config file, overlaid by
//! command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use flips_core::{Oracle, SolverKind, StepSize};
use flips_denoise::EpsRule;

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub solver: SolverKind,
    /// Solvers compared by `bench`.
    pub solvers: Vec<SolverKind>,
    pub oracle: Oracle,
    pub inv_beta: StepSize,
    pub rho: f64,
    pub theta: f64,
    /// None picks 2.5, or 3 for patches of side at least 64.
    pub mu: Option<f64>,
    /// None derives 1/b from the instance.
    pub inv_b: Option<f64>,
    /// Residual radius; overrides the ε rule when denoising.
    pub eps: Option<f64>,
    /// None uses 0.99·ε for `solve` and 0.999·ε for patches.
    pub eps_bar: Option<f64>,
    /// None derives η̄ from the instance.
    pub eta_bar: Option<f64>,
    pub m: usize,
    /// Noise variance.
    pub sigma: f64,
    pub eps_rule: EpsRule,
    pub seed: u64,
    /// None uses the per-command default.
    pub max_iters: Option<usize>,
    pub threshold: f64,
    /// `identity`, `dct2`, or the path of a dense CSV matrix.
    pub operator: String,
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub ref_cache: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            solver: SolverKind::Flips,
            solvers: vec![SolverKind::Flips, SolverKind::Csalsa, SolverKind::Cp],
            oracle: Oracle::Accelerated,
            inv_beta: StepSize::default(),
            rho: 0.7,
            theta: 0.6,
            mu: None,
            inv_b: None,
            eps: None,
            eps_bar: None,
            eta_bar: None,
            m: 16,
            sigma: 0.0055,
            eps_rule: EpsRule::PixelCount,
            seed: 0,
            max_iters: None,
            threshold: 5e-3,
            operator: "identity".into(),
            input: None,
            out_dir: PathBuf::from("out"),
            ref_cache: None,
        }
    }
}

/// Keys accepted in config files; flags use the same names with dashes.
pub const KEYS: &[&str] = &[
    "solver",
    "solvers",
    "oracle",
    "inv_beta",
    "rho",
    "theta",
    "mu",
    "inv_b",
    "eps",
    "eps_bar",
    "eta_bar",
    "m",
    "sigma",
    "eps_rule",
    "seed",
    "max_iters",
    "threshold",
    "operator",
    "input",
    "out_dir",
    "ref_cache",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| anyhow!("invalid value '{value}' for {key}: {e}"))
}

impl Settings {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "solver" => self.solver = parse(&key, v)?,
            "solvers" => {
                self.solvers = v.split(',').map(|s| parse(&key, s)).collect::<Result<_>>()?;
            }
            "oracle" => self.oracle = parse(&key, v)?,
            "inv_beta" => self.inv_beta = parse(&key, v)?,
            "rho" => self.rho = parse(&key, v)?,
            "theta" => self.theta = parse(&key, v)?,
            "mu" => self.mu = Some(parse(&key, v)?),
            "inv_b" => self.inv_b = Some(parse(&key, v)?),
            "eps" => self.eps = Some(parse(&key, v)?),
            "eps_bar" => self.eps_bar = Some(parse(&key, v)?),
            "eta_bar" => self.eta_bar = Some(parse(&key, v)?),
            "m" => self.m = parse(&key, v)?,
            "sigma" => self.sigma = parse(&key, v)?,
            "eps_rule" => self.eps_rule = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "max_iters" => self.max_iters = Some(parse(&key, v)?),
            "threshold" => self.threshold = parse(&key, v)?,
            "operator" => self.operator = v.to_string(),
            "input" => self.input = Some(PathBuf::from(v)),
            "out_dir" => self.out_dir = PathBuf::from(v),
            "ref_cache" => self.ref_cache = Some(PathBuf::from(v)),
            other => bail!("unknown setting '{other}'"),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_config_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| anyhow!("config line {}: expected key = value", i + 1))?;
            self.set(key, value).with_context(|| format!("config line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.apply_config_str(&text)
    }

    /// Checks every numeric parameter before any solver runs.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(anyhow!("{name} must be positive, got {v}"))
            }
        };
        match self.inv_beta {
            StepSize::Fixed(v) | StepSize::Curvature(v) => positive("inv_beta", v)?,
        }
        if !(0.0..1.0).contains(&self.rho) {
            bail!("rho must lie in [0, 1), got {}", self.rho);
        }
        if !(0.0..=1.0).contains(&self.theta) {
            bail!("theta must lie in [0, 1], got {}", self.theta);
        }
        for (name, v) in [("mu", self.mu), ("inv_b", self.inv_b), ("eps", self.eps), ("eta_bar", self.eta_bar)] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if let Some(eb) = self.eps_bar {
            positive("eps_bar", eb)?;
            if let Some(eps) = self.eps {
                if eb >= eps {
                    bail!("eps_bar must be smaller than eps, got {eb} >= {eps}");
                }
            }
        }
        if self.m == 0 {
            bail!("m must be positive");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            bail!("sigma must be nonnegative, got {}", self.sigma);
        }
        if self.max_iters == Some(0) {
            bail!("max_iters must be positive");
        }
        positive("threshold", self.threshold)?;
        if self.solvers.is_empty() {
            bail!("solvers must name at least one solver");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines_are_applied() {
        let mut s = Settings::default();
        s.apply_config_str("# tuning\nsolver = cp\ntheta=0.5 # inline\n\nmax-iters = 7\ninv_beta = curvature:4\n")
            .unwrap();
        assert_eq!(s.solver, SolverKind::Cp);
        assert_eq!(s.theta, 0.5);
        assert_eq!(s.max_iters, Some(7));
        assert_eq!(s.inv_beta, StepSize::Curvature(4.0));
    }

    #[test]
    fn bad_lines_are_rejected() {
        assert!(Settings::default().apply_config_str("solver").is_err());
        assert!(Settings::default().apply_config_str("colour = red").is_err());
        assert!(Settings::default().apply_config_str("rho = fast").is_err());
    }

    #[test]
    fn validation_catches_out_of_range_values() {
        let ok = Settings::default();
        ok.validate().unwrap();
        assert!(Settings { rho: 1.0, ..ok.clone() }.validate().is_err());
        assert!(Settings { theta: -0.1, ..ok.clone() }.validate().is_err());
        assert!(Settings { mu: Some(0.0), ..ok.clone() }.validate().is_err());
        assert!(Settings { eps: Some(0.5), eps_bar: Some(0.6), ..ok.clone() }.validate().is_err());
        assert!(Settings { max_iters: Some(0), ..ok.clone() }.validate().is_err());
        assert!(Settings { inv_beta: StepSize::Fixed(-1.0), ..ok }.validate().is_err());
    }

    #[test]
    fn every_key_is_settable() {
        let samples = [
            ("solver", "acp"),
            ("solvers", "flips,cp"),
            ("oracle", "linear"),
            ("inv_beta", "0.01"),
            ("rho", "0.5"),
            ("theta", "1"),
            ("mu", "3"),
            ("inv_b", "1e-3"),
            ("eps", "0.5"),
            ("eps_bar", "0.4"),
            ("eta_bar", "0.1"),
            ("m", "8"),
            ("sigma", "0.01"),
            ("eps_rule", "side"),
            ("seed", "9"),
            ("max_iters", "10"),
            ("threshold", "1e-2"),
            ("operator", "dct2"),
            ("input", "a.pgm"),
            ("out_dir", "o"),
            ("ref_cache", "r.csv"),
        ];
        assert_eq!(samples.len(), KEYS.len());
        let mut s = Settings::default();
        for (k, v) in samples {
            assert!(KEYS.contains(&k));
            s.set(k, v).unwrap();
        }
        s.validate().unwrap();
    }
}
