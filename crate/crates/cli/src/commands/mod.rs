mod benchmark;
mod curves;
mod discover;
mod eval;
mod predict;

use std::io::Write;
use std::path::Path;

use corona_core::evolve::RunReport;
use corona_core::expr::ExprGraph;
use corona_core::models::{EmissionKind, EmissionModel, GraphModel, ModelRegistry};

use crate::error::{read_to_string, CliError};
use crate::Kind;

pub use benchmark::{benchmark, benchmark_models, BenchmarkRow};
pub use curves::{curves, parse_sweep, sweep_points, Sweep};
pub use discover::discover;
pub use eval::eval;
pub use predict::predict;

pub(crate) fn out_err(e: std::io::Error) -> CliError {
    CliError::compute(format!("cannot write output: {e}"))
}

pub(crate) fn lookup(slug: &str) -> Result<&'static dyn EmissionModel, CliError> {
    Ok(ModelRegistry::builtin().get(slug)?)
}

impl From<Kind> for EmissionKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::An => EmissionKind::An,
            Kind::Ri => EmissionKind::Ri,
        }
    }
}

/// A graph from a graph JSON file or from the `rank`-th entry of a report.
pub fn load_formula(path: &Path, rank: usize, kind: EmissionKind) -> Result<GraphModel, CliError> {
    let text = read_to_string(path)?;
    let bad = |e: serde_json::Error| CliError::input(format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    let (graph, source) = if value.get("equations").is_some() {
        let report: RunReport = serde_json::from_value(value).map_err(bad)?;
        let entry = report
            .equations
            .iter()
            .find(|e| e.rank == rank)
            .ok_or_else(|| CliError::input(format!("{} has no equation of rank {rank}", path.display())))?;
        (entry.graph.clone(), format!("rank {rank} of {}", path.display()))
    } else {
        let graph: ExprGraph = serde_json::from_value(value).map_err(bad)?;
        (graph, path.display().to_string())
    };
    let slug = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "formula".into());
    Ok(GraphModel { slug, kind, graph, source })
}

pub fn list_models(out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "{:<20} {:<4} {:>5}  source", "model", "kind", "terms").map_err(out_err)?;
    for info in ModelRegistry::builtin().catalog() {
        let piecewise = if info.piecewise { " (piecewise)" } else { "" };
        writeln!(out, "{:<20} {:<4} {:>5}  {}{piecewise}", info.slug, info.kind, info.terms, info.source)
            .map_err(out_err)?;
    }
    Ok(())
}
