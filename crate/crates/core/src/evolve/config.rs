use rand::distributions::WeightedIndex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{ExponentAlphabet, TemplateKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("population_size must be even and at least 2, got {0}")]
    Population(usize),
    #[error("max_terms must be at least 1")]
    MaxTerms,
    #[error("lambda_mono must be positive and finite, got {0}")]
    Lambda(f64),
    #[error("mutation rates must be nonnegative and sum to 1 (sum = {0})")]
    MutationRates(f64),
    #[error("{name} must lie in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("template weights must be nonnegative with a positive non-constant weight")]
    TemplateWeights,
    #[error("swap_terms must be at least 1")]
    SwapTerms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationRates {
    pub edge_feature: f64,
    pub subgraph_replace: f64,
    pub add_remove: f64,
}

impl Default for MutationRates {
    fn default() -> Self {
        MutationRates {
            edge_feature: 0.4,
            subgraph_replace: 0.3,
            add_remove: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateWeights {
    pub polynomial: f64,
    pub rational: f64,
    pub logarithmic: f64,
    pub constant: f64,
}

impl Default for TemplateWeights {
    fn default() -> Self {
        TemplateWeights {
            polynomial: 0.35,
            rational: 0.25,
            logarithmic: 0.25,
            constant: 0.15,
        }
    }
}

impl TemplateWeights {
    pub fn weight(&self, kind: TemplateKind) -> f64 {
        match kind {
            TemplateKind::PolynomialTerm => self.polynomial,
            TemplateKind::RationalTerm => self.rational,
            TemplateKind::LogarithmicTerm => self.logarithmic,
            TemplateKind::ConstantTerm => self.constant,
        }
    }

    /// Sampling distribution over [`TemplateKind::ALL`], optionally without constants.
    pub(crate) fn distribution(&self, with_constant: bool) -> WeightedIndex<f64> {
        let w = TemplateKind::ALL.map(|k| {
            if k == TemplateKind::ConstantTerm && !with_constant {
                0.0
            } else {
                self.weight(k)
            }
        });
        WeightedIndex::new(w).expect("validated weights")
    }
}

/// Settings for one discovery run. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GPConfig {
    pub population_size: usize,
    pub generations: usize,
    pub max_terms: usize,
    pub lambda_mono: f64,
    pub mutation_rates: MutationRates,
    /// Chance that a pair of parents is recombined rather than copied.
    pub crossover_prob: f64,
    /// Chance that each offspring is mutated.
    pub mutation_prob: f64,
    /// Share of the non-survivor slots filled by offspring; the rest are fresh random graphs.
    pub offspring_fraction: f64,
    /// Terms exchanged one-for-one per crossover.
    pub swap_terms: usize,
    pub exponent_alphabet: ExponentAlphabet,
    pub allow_log: bool,
    pub template_weights: TemplateWeights,
    /// Rescore repeated canonical structures as +∞.
    pub dedup: bool,
    pub seed: u64,
    /// Number of ranked equations kept in the report.
    pub report_top: usize,
}

impl Default for GPConfig {
    fn default() -> Self {
        GPConfig {
            population_size: 500,
            generations: 200,
            max_terms: 4,
            lambda_mono: 0.01,
            mutation_rates: MutationRates::default(),
            crossover_prob: 0.7,
            mutation_prob: 0.7,
            offspring_fraction: 0.5,
            swap_terms: 1,
            exponent_alphabet: ExponentAlphabet::default(),
            allow_log: true,
            template_weights: TemplateWeights::default(),
            dedup: false,
            seed: 0,
            report_top: 10,
        }
    }
}

impl GPConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size < 2 || self.population_size % 2 != 0 {
            return Err(ConfigError::Population(self.population_size));
        }
        if self.max_terms == 0 {
            return Err(ConfigError::MaxTerms);
        }
        if !(self.lambda_mono > 0.0 && self.lambda_mono.is_finite()) {
            return Err(ConfigError::Lambda(self.lambda_mono));
        }
        let r = self.mutation_rates;
        let sum = r.edge_feature + r.subgraph_replace + r.add_remove;
        let nonneg = [r.edge_feature, r.subgraph_replace, r.add_remove]
            .iter()
            .all(|v| *v >= 0.0 && v.is_finite());
        if !nonneg || (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::MutationRates(sum));
        }
        for (name, value) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
            ("offspring_fraction", self.offspring_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::Probability { name, value });
            }
        }
        if self.swap_terms == 0 {
            return Err(ConfigError::SwapTerms);
        }
        let w = self.template_weights;
        let all = [w.polynomial, w.rational, w.logarithmic, w.constant];
        if all.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
            || w.polynomial + w.rational + w.logarithmic <= 0.0
        {
            return Err(ConfigError::TemplateWeights);
        }
        Ok(())
    }
}
