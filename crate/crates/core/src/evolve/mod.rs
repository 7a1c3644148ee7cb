//! Genetic-programming search over expression graphs.
//!
//! Each generation keeps the best half of the ranked population unchanged,
//! fills part of the remaining slots with mutated crossover offspring of the
//! survivors, and the rest with fresh random graphs. Every candidate is
//! refit by least squares and scored by the combined loss.
//!
//! All randomness comes from per-(generation, slot) ChaCha streams derived
//! from the seed before any scoring happens, so serial and parallel runs are
//! identical.

mod config;
mod operators;
mod report;

pub use config::{ConfigError, GPConfig, MutationRates, TemplateWeights};
pub use operators::{
    crossover, AddRemove, EdgeFeatureMutation, MutationOperator, MutationRegistry, SubgraphReplace, Terms,
    VariationContext,
};
pub use report::{RankedEquation, RunReport, TraceRow};

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::expr::ExprGraph;
use crate::objective::{fit_and_score, LossBreakdown, MonotonicitySpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dataset has no input variables")]
    EmptyDataset,
    #[error("target column is constant; R² is undefined")]
    Degenerate,
    #[error("monotonicity constraint: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub graph: ExprGraph,
    pub loss: Option<LossBreakdown>,
}

impl Individual {
    pub fn unscored(graph: ExprGraph) -> Individual {
        Individual { graph, loss: None }
    }

    /// Total loss, with unscored individuals treated as +∞.
    pub fn total(&self) -> f64 {
        self.loss.map(|l| l.total).unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Purpose {
    Fresh = 0,
    Offspring = 1,
    Control = 2,
}

/// Independent stream for one slot of one generation.
fn slot_rng(seed: u64, generation: usize, purpose: Purpose, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | ((purpose as u64) << 30) | slot as u64);
    rng
}

/// `population_size` random graphs, slot `i` drawn from its own generation-0 stream.
pub fn init_population(ctx: &VariationContext) -> Vec<Individual> {
    (0..ctx.config.population_size)
        .map(|slot| {
            let mut rng = slot_rng(ctx.config.seed, 0, Purpose::Fresh, slot);
            Individual::unscored(ctx.random_graph(&mut rng))
        })
        .collect()
}

fn rank_cmp(a: &Individual, b: &Individual) -> Ordering {
    a.total()
        .total_cmp(&b.total())
        .then(a.graph.node_count().cmp(&b.graph.node_count()))
}

/// Stable ascending sort by total loss, then node count, then current order.
pub fn rank(pop: &mut [Individual]) {
    pop.sort_by(rank_cmp);
}

/// Ranks, keeps the best half, and refills the other half with fresh random
/// (unscored) graphs drawn from the given generation's slot streams.
pub fn select(mut scored: Vec<Individual>, ctx: &VariationContext, generation: usize) -> Vec<Individual> {
    let size = ctx.config.population_size;
    rank(&mut scored);
    scored.truncate(size / 2);
    for slot in scored.len()..size {
        let mut rng = slot_rng(ctx.config.seed, generation, Purpose::Fresh, slot);
        scored.push(Individual::unscored(ctx.random_graph(&mut rng)));
    }
    scored
}

/// Overwrites the first `offspring_fraction` of the refill slots with
/// offspring of survivors paired uniformly at random.
fn breed(
    pop: &mut [Individual],
    survivors: usize,
    ctx: &VariationContext,
    registry: &MutationRegistry,
    generation: usize,
) {
    let cfg = &ctx.config;
    let refill = pop.len() - survivors;
    let end = survivors + (cfg.offspring_fraction * refill as f64).round() as usize;
    let mut control = slot_rng(cfg.seed, generation, Purpose::Control, 0);
    let mut slot = survivors;
    while slot < end {
        let a = control.gen_range(0..survivors);
        let b = control.gen_range(0..survivors);
        let mut rng = slot_rng(cfg.seed, generation, Purpose::Offspring, slot);
        let (c, d) = if rng.gen_bool(cfg.crossover_prob) {
            crossover(&pop[a].graph, &pop[b].graph, cfg.swap_terms, &mut rng)
        } else {
            (pop[a].graph.clone(), pop[b].graph.clone())
        };
        for child in [c, d] {
            if slot >= end {
                break;
            }
            let child = if rng.gen_bool(cfg.mutation_prob) {
                registry.mutate(&child, ctx, &mut rng)
            } else {
                child
            };
            pop[slot] = Individual::unscored(child);
            slot += 1;
        }
    }
}

fn score_one(ind: &mut Individual, data: &Dataset, specs: &[MonotonicitySpec], lambda: f64) {
    if ind.loss.is_some() {
        return;
    }
    match fit_and_score(&ind.graph, data, specs, lambda) {
        Ok((g, l)) => {
            ind.graph = g;
            ind.loss = Some(l);
        }
        Err(_) => ind.loss = Some(LossBreakdown::rejected()),
    }
}

/// Fits and scores every unscored individual. Scored ones are left alone.
pub fn score_population(
    pop: &mut [Individual],
    data: &Dataset,
    specs: &[MonotonicitySpec],
    lambda: f64,
    mode: ExecutionMode,
) {
    match mode {
        ExecutionMode::Serial => pop.iter_mut().for_each(|i| score_one(i, data, specs, lambda)),
        ExecutionMode::Parallel => pop.par_iter_mut().for_each(|i| score_one(i, data, specs, lambda)),
    }
}

/// Later copies of an already seen canonical structure get +∞.
fn dedup(pop: &mut [Individual]) {
    let mut seen = HashSet::new();
    for ind in pop.iter_mut() {
        let key = structure_key(&ind.graph);
        if !seen.insert(key) {
            ind.loss = Some(LossBreakdown::rejected());
        }
    }
}

/// Canonical render with every coefficient set to 1, so fits do not matter.
fn structure_key(g: &ExprGraph) -> String {
    g.with_coefficients(&vec![1.0; g.term_count()]).canonical().render()
}

fn check_inputs(data: &Dataset, specs: &[MonotonicitySpec], config: &GPConfig) -> Result<(), EvolveError> {
    config.validate()?;
    if data.variables().is_empty() {
        return Err(EvolveError::EmptyDataset);
    }
    let y = data.target();
    if y.iter().all(|v| *v == y[0]) {
        return Err(EvolveError::Degenerate);
    }
    for s in specs {
        s.check().map_err(|e| EvolveError::Spec(e.to_string()))?;
        if !data.variables().contains(&s.variable) {
            return Err(EvolveError::Spec(format!("`{}` is not a dataset variable", s.variable)));
        }
        if let Some(v) = data
            .variables()
            .iter()
            .find(|v| **v != s.variable && !s.nominal.contains_key(*v))
        {
            return Err(EvolveError::Spec(format!("sweep of `{}` has no nominal value for `{v}`", s.variable)));
        }
    }
    Ok(())
}

fn top_losses(pop: &[Individual]) -> Vec<f64> {
    pop.iter().take(5).map(Individual::total).collect()
}

pub fn run_discovery(
    data: &Dataset,
    specs: &[MonotonicitySpec],
    config: &GPConfig,
) -> Result<RunReport, EvolveError> {
    run_discovery_with(data, specs, config, ExecutionMode::Parallel)
}

pub fn run_discovery_with(
    data: &Dataset,
    specs: &[MonotonicitySpec],
    config: &GPConfig,
    mode: ExecutionMode,
) -> Result<RunReport, EvolveError> {
    check_inputs(data, specs, config)?;
    let ctx = VariationContext::new(data.variables().to_vec(), config);
    let registry = MutationRegistry::builtin(&config.mutation_rates);
    let lambda = config.lambda_mono;

    let mut pop = init_population(&ctx);
    score_population(&mut pop, data, specs, lambda, mode);
    if config.dedup {
        dedup(&mut pop);
    }
    rank(&mut pop);
    let mut trace = vec![TraceRow { generation: 0, losses: top_losses(&pop) }];

    for generation in 1..=config.generations {
        let survivors = config.population_size / 2;
        pop = select(pop, &ctx, generation);
        breed(&mut pop, survivors, &ctx, &registry, generation);
        score_population(&mut pop, data, specs, lambda, mode);
        if config.dedup {
            dedup(&mut pop);
        }
        rank(&mut pop);
        trace.push(TraceRow { generation, losses: top_losses(&pop) });
    }

    Ok(RunReport::new(data, specs, config, &pop, trace))
}
