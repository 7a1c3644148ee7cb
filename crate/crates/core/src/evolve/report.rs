use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{GPConfig, Individual};
use crate::dataset::Dataset;
use crate::expr::{format_sig6, ExprGraph};
use crate::objective::{LossBreakdown, MonotonicitySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEquation {
    pub rank: usize,
    pub equation: String,
    pub terms: usize,
    pub nodes: usize,
    pub loss: LossBreakdown,
    pub graph: ExprGraph,
}

/// Top-5 total losses of one generation, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    #[serde(with = "crate::float_serde::vec_pos_inf")]
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub variables: Vec<String>,
    pub target: String,
    pub config: GPConfig,
    pub monotonicity: Vec<MonotonicitySpec>,
    pub equations: Vec<RankedEquation>,
    pub trace: Vec<TraceRow>,
}

impl RunReport {
    /// Builds the report from a ranked final population. Repeated structures
    /// are listed once, at their best rank.
    pub(super) fn new(
        data: &Dataset,
        specs: &[MonotonicitySpec],
        config: &GPConfig,
        ranked: &[Individual],
        trace: Vec<TraceRow>,
    ) -> RunReport {
        let mut seen = HashSet::new();
        let mut equations = Vec::new();
        for ind in ranked {
            if equations.len() >= config.report_top {
                break;
            }
            let graph = ind.graph.canonical();
            let equation = graph.render();
            if !seen.insert(equation.clone()) {
                continue;
            }
            equations.push(RankedEquation {
                rank: equations.len() + 1,
                terms: graph.term_count(),
                nodes: graph.node_count(),
                loss: ind.loss.unwrap_or_else(LossBreakdown::rejected),
                equation,
                graph,
            });
        }
        RunReport {
            seed: config.seed,
            variables: data.variables().to_vec(),
            target: data.target_name().to_string(),
            config: config.clone(),
            monotonicity: specs.to_vec(),
            equations,
            trace,
        }
    }

    pub fn best(&self) -> Option<&RankedEquation> {
        self.equations.first()
    }

    /// Best-so-far total loss per generation.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.trace
            .iter()
            .map(|r| {
                best = best.min(r.losses.first().copied().unwrap_or(f64::INFINITY));
                best
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `generation,rank1..rank5` with full-precision losses.
    pub fn loss_trace_csv(&self) -> String {
        let mut out = String::from("generation,rank1,rank2,rank3,rank4,rank5\n");
        for row in &self.trace {
            let _ = write!(out, "{}", row.generation);
            for k in 0..5 {
                match row.losses.get(k) {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn leaderboard(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "target {} | seed {} | population {} | generations {} | max_terms {} | lambda_mono {}",
            self.target,
            self.seed,
            self.config.population_size,
            self.config.generations,
            self.config.max_terms,
            self.config.lambda_mono
        );
        let _ = writeln!(
            out,
            "{:>4}  {:>12}  {:>12}  {:>12}  {:>10}  {:>5}  equation",
            "rank", "total", "l_acc", "l_mono", "R2", "nodes"
        );
        for e in &self.equations {
            let _ = writeln!(
                out,
                "{:>4}  {:>12}  {:>12}  {:>12}  {:>10}  {:>5}  {}",
                e.rank,
                format_sig6(e.loss.total),
                format_sig6(e.loss.l_acc),
                format_sig6(e.loss.l_mono),
                format!("{:.6}", e.loss.r2),
                e.nodes,
                e.equation
            );
        }
        out
    }
}
