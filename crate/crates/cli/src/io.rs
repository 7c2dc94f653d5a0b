//! Plain-text vectors and report files.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use flips_core::Vector;

/// Parses numbers separated by commas, whitespace or newlines. Lines starting
/// with `#` and a leading non-numeric header line are skipped.
pub fn parse_vector(text: &str) -> Result<Vector> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => values.extend(vals),
            Err(_) if values.is_empty() && i == 0 && fields.iter().all(|f| f.parse::<f64>().is_err()) => continue,
            Err(_) => return Err(anyhow!("line {}: expected numbers, got '{line}'", i + 1)),
        }
    }
    if values.is_empty() {
        return Err(anyhow!("no values found"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(anyhow!("non-finite value {bad}"));
    }
    Ok(Vector::from_vec(values))
}

pub fn read_vector(path: &Path) -> Result<Vector> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_vector(&text).with_context(|| format!("parsing {}", path.display()))
}

/// One value per line under the given header.
pub fn vector_csv(header: &str, v: &Vector) -> String {
    let mut out = format!("{header}\n");
    for x in v.iter() {
        out.push_str(&format!("{x:e}\n"));
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Ten significant digits with trailing zeros removed.
pub fn short(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let digits = (9 - v.abs().log10().floor() as i32).clamp(0, 17) as usize;
    let s = format!("{v:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
