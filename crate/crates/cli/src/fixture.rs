//! Fixture comparison: CSV against CSV, either byte-exact or with a numeric
//! tolerance per field, with a per-row diff report on mismatch.

use std::path::PathBuf;

/// Environment variable that prefixes relative fixture paths.
pub const FIXTURE_DIR_VAR: &str = "MUWEYL_FIXTURES";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompareMode {
    /// Every line must match byte for byte.
    Exact,
    /// Fields that parse as floats on both sides may differ by at most the
    /// tolerance; all other fields must match byte for byte.
    Numeric(f64),
}

/// Resolves a fixture path: absolute paths pass through, relative paths are
/// joined under [`FIXTURE_DIR_VAR`] when it is set.
pub fn resolve_fixture_path(path: &str) -> PathBuf {
    let p = PathBuf::from(path);
    if p.is_absolute() {
        return p;
    }
    match std::env::var_os(FIXTURE_DIR_VAR) {
        Some(dir) => PathBuf::from(dir).join(p),
        None => p,
    }
}

fn field_matches(expected: &str, actual: &str, mode: CompareMode) -> Result<(), String> {
    if expected == actual {
        return Ok(());
    }
    if let CompareMode::Numeric(tol) = mode {
        if let (Ok(e), Ok(a)) = (expected.parse::<f64>(), actual.parse::<f64>()) {
            let delta = (e - a).abs();
            if delta <= tol {
                return Ok(());
            }
            return Err(format!("expected {expected}, got {actual} (|delta| = {delta:.3e})"));
        }
    }
    Err(format!("expected `{expected}`, got `{actual}`"))
}

/// Compares an actual CSV document against the expected one. The `Ok` side
/// is silent; the `Err` side is a readable report listing the first
/// mismatching rows.
pub fn compare_csv(expected: &str, actual: &str, mode: CompareMode) -> Result<(), String> {
    const MAX_REPORTED: usize = 20;
    let exp_lines: Vec<&str> = expected.lines().collect();
    let act_lines: Vec<&str> = actual.lines().collect();
    let mut diffs: Vec<String> = Vec::new();
    if exp_lines.len() != act_lines.len() {
        diffs.push(format!(
            "line count differs: expected {}, got {}",
            exp_lines.len(),
            act_lines.len()
        ));
    }
    for (i, (exp, act)) in exp_lines.iter().zip(&act_lines).enumerate() {
        if diffs.len() > MAX_REPORTED {
            break;
        }
        let line_no = i + 1;
        if exp == act {
            continue;
        }
        if mode == CompareMode::Exact {
            diffs.push(format!("line {line_no}: expected `{exp}`, got `{act}`"));
            continue;
        }
        let exp_fields: Vec<&str> = exp.split(',').collect();
        let act_fields: Vec<&str> = act.split(',').collect();
        if exp_fields.len() != act_fields.len() {
            diffs.push(format!(
                "line {line_no}: field count differs: expected `{exp}`, got `{act}`"
            ));
            continue;
        }
        for (j, (ef, af)) in exp_fields.iter().zip(&act_fields).enumerate() {
            if let Err(msg) = field_matches(ef, af, mode) {
                diffs.push(format!("line {line_no}, field {}: {msg}", j + 1));
            }
        }
    }
    if diffs.is_empty() {
        return Ok(());
    }
    let shown = diffs.len().min(MAX_REPORTED);
    let mut report = diffs[..shown].join("\n");
    if diffs.len() > shown {
        report.push_str(&format!("\n... and {} more", diffs.len() - shown));
    }
    Err(report)
}
