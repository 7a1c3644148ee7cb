//! The discovery run file.

use corona_core::dataset::Dataset;
use corona_core::evolve::{GPConfig, MutationRates, TemplateWeights};
use corona_core::expr::ExponentAlphabet;
use corona_core::objective::{MonotonicitySpec, Sign};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const OPERATORS: [&str; 4] = ["add", "mul", "pow", "log"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicityEntry {
    pub var: String,
    pub sign: Sign,
    #[serde(default)]
    pub domain: Option<(f64, f64)>,
    #[serde(default)]
    pub grid: Option<usize>,
}

/// Every field is optional. Omitted GP settings take their library defaults;
/// omitted `variables` means every non-target column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub variables: Option<Vec<String>>,
    pub target: Option<String>,
    pub operators: Option<Vec<String>>,
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub max_terms: Option<usize>,
    pub lambda_mono: Option<f64>,
    #[serde(default)]
    pub monotonicity: Vec<MonotonicityEntry>,
    pub seed: Option<u64>,
    pub exponent_range: Option<(i32, i32)>,
    pub mutation_rates: Option<MutationRates>,
    pub template_weights: Option<TemplateWeights>,
}

impl RunConfigFile {
    pub fn gp_config(&self) -> Result<GPConfig, CliError> {
        let mut cfg = GPConfig::default();
        if let Some(ops) = &self.operators {
            if let Some(bad) = ops.iter().find(|o| !OPERATORS.contains(&o.as_str())) {
                return Err(CliError::input(format!(
                    "config: unknown operator `{bad}` (expected a subset of {})",
                    OPERATORS.join(", ")
                )));
            }
            for needed in ["add", "mul", "pow"] {
                if !ops.iter().any(|o| o == needed) {
                    return Err(CliError::input(format!("config: operator `{needed}` is required by the term templates")));
                }
            }
            cfg.allow_log = ops.iter().any(|o| o == "log");
        }
        if let Some(v) = self.population_size {
            cfg.population_size = v;
        }
        if let Some(v) = self.generations {
            cfg.generations = v;
        }
        if let Some(v) = self.max_terms {
            cfg.max_terms = v;
        }
        if let Some(v) = self.lambda_mono {
            cfg.lambda_mono = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some((lo, hi)) = self.exponent_range {
            cfg.exponent_alphabet = ExponentAlphabet::from_range(lo, hi)
                .ok_or_else(|| CliError::input(format!("config: exponent_range [{lo}, {hi}] has no nonzero integer")))?;
        }
        if let Some(v) = self.mutation_rates {
            cfg.mutation_rates = v;
        }
        if let Some(v) = self.template_weights {
            cfg.template_weights = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Restricts the data to the configured variables.
    pub fn select(&self, data: Dataset) -> Result<Dataset, CliError> {
        match &self.variables {
            Some(vars) => Ok(data.select(vars)?),
            None => Ok(data),
        }
    }

    /// Nominals default to column medians, the domain and grid to the
    /// library defaults.
    pub fn monotonicity_specs(&self, data: &Dataset) -> Result<Vec<MonotonicitySpec>, CliError> {
        self.monotonicity
            .iter()
            .map(|m| {
                let mut spec = MonotonicitySpec::from_data(&m.var, m.sign, data)
                    .map_err(|e| CliError::input(format!("config: monotonicity on `{}`: {e}", m.var)))?;
                if let Some(d) = m.domain {
                    spec.domain = d;
                }
                if let Some(g) = m.grid {
                    spec.grid = g;
                }
                spec.check()
                    .map_err(|e| CliError::input(format!("config: monotonicity on `{}`: {e}", m.var)))?;
                Ok(spec)
            })
            .collect()
    }
}
