use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use corona_core::models::{BundleConfig, EmissionModel};

use super::{lookup, out_err};
use crate::error::CliError;
use crate::CurvesArgs;

const BUNDLE_VARS: [&str; 3] = ["E", "n", "d"];

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

/// Parses `var=lo:hi:steps`.
pub fn parse_sweep(s: &str) -> Result<Sweep, CliError> {
    let bad = || CliError::input(format!("--sweep `{s}`: expected var=lo:hi:steps"));
    let (var, range) = s.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let sweep = Sweep {
        var: var.trim().to_string(),
        lo: lo.trim().parse().map_err(|_| bad())?,
        hi: hi.trim().parse().map_err(|_| bad())?,
        steps: steps.trim().parse().map_err(|_| bad())?,
    };
    if !BUNDLE_VARS.contains(&sweep.var.as_str()) {
        return Err(CliError::input(format!("--sweep: `{}` is not one of E, n, d", sweep.var)));
    }
    if !(sweep.lo.is_finite() && sweep.hi.is_finite()) {
        return Err(bad());
    }
    Ok(sweep)
}

/// `steps + 1` evenly spaced points from `lo` to `hi`; `steps = 0` gives `[lo]`.
pub fn sweep_points(s: &Sweep) -> Vec<f64> {
    if s.steps == 0 {
        return vec![s.lo];
    }
    let mut xs: Vec<f64> = (0..=s.steps)
        .map(|i| s.lo + (s.hi - s.lo) * i as f64 / s.steps as f64)
        .collect();
    xs[s.steps] = s.hi;
    xs
}

fn parse_fixed(items: &[String], swept: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut fixed = BTreeMap::new();
    for item in items.iter().flat_map(|s| s.split(',')) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--fixed `{item}`: expected var=value")))?;
        let k = k.trim();
        if !BUNDLE_VARS.contains(&k) {
            return Err(CliError::input(format!("--fixed: `{k}` is not one of E, n, d")));
        }
        if k == swept {
            return Err(CliError::input(format!("`{k}` is both swept and fixed")));
        }
        let v: f64 = v.trim().parse().map_err(|_| CliError::input(format!("--fixed `{item}`: bad number")))?;
        fixed.insert(k.to_string(), v);
    }
    for var in BUNDLE_VARS.iter().filter(|v| **v != swept) {
        if !fixed.contains_key(*var) {
            return Err(CliError::input(format!("--fixed {var}=... is required")));
        }
    }
    Ok(fixed)
}

fn evaluate_sweep(model: &dyn EmissionModel, sweep: &Sweep, fixed: &BTreeMap<String, f64>) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for x in sweep_points(sweep) {
        let mut at = fixed.clone();
        at.insert(sweep.var.clone(), x);
        let value = BundleConfig::new(at["E"], at["n"], at["d"]).and_then(|b| model.evaluate(&b));
        match value {
            Ok(y) => rows.push((x, y)),
            Err(e) => failures.push((x, e.to_string())),
        }
    }
    if failures.is_empty() {
        return Ok(rows);
    }
    let listed: Vec<String> = failures.iter().map(|(x, _)| x.to_string()).collect();
    Err(CliError::compute(format!(
        "{} of {} sweep points are outside the model's domain at {} = {} (first: {})",
        failures.len(),
        failures.len() + rows.len(),
        sweep.var,
        listed.join(", "),
        failures[0].1
    )))
}

pub fn curves(args: &CurvesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = lookup(&args.model)?;
    let sweep = parse_sweep(&args.sweep)?;
    let fixed = parse_fixed(&args.fixed, &sweep.var)?;
    let rows = evaluate_sweep(model, &sweep, &fixed)?;
    let mut csv = format!("{},{}\n", sweep.var, model.slug());
    for (x, y) in rows {
        let _ = writeln!(csv, "{x},{y}");
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| CliError::write(path, e)),
        None => out.write_all(csv.as_bytes()).map_err(out_err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let s = parse_sweep("E=12:32:50").unwrap();
        assert_eq!((s.var.as_str(), s.lo, s.hi, s.steps), ("E", 12.0, 32.0, 50));
        let pts = sweep_points(&s);
        assert_eq!(pts.len(), 51);
        assert_eq!((pts[0], pts[50]), (12.0, 32.0));
        assert_eq!(sweep_points(&parse_sweep("n=4:16:0").unwrap()), vec![4.0]);
        assert!(parse_sweep("x=1:2:3").is_err());
        assert!(parse_sweep("E=1:2").is_err());
        assert!(parse_sweep("E=1:2:-1").is_err());
    }

    #[test]
    fn fixed_values_must_complete_the_bundle() {
        assert!(parse_fixed(&["n=8".into(), "d=2.4".into()], "E").is_ok());
        assert!(parse_fixed(&["n=8,d=2.4".into()], "E").is_ok());
        assert!(parse_fixed(&["n=8".into()], "E").is_err());
        assert!(parse_fixed(&["E=20".into(), "n=8".into(), "d=2.4".into()], "E").is_err());
    }
}
