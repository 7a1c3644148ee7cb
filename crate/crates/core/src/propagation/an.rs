use serde::{Deserialize, Serialize};

use super::{phase_distance, require_kind, LineGeometry, PropagationError};
use crate::models::{EmissionKind, EmissionModel};

pub const DEFAULT_C_EMPIRICAL: f64 = 10.0;
pub const DEFAULT_C_DISCOVERED: f64 = 11.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnPrediction {
    /// Generation level of each phase, dB re 1 µW/m.
    pub generation: Vec<f64>,
    pub distances: Vec<f64>,
    /// A-weighted sound pressure contributed by each phase, dB.
    pub contributions: Vec<f64>,
    pub total: f64,
    pub c_coef: f64,
}

/// `10·log10 Σ 10^(Lᵢ/10)`. Entries of −∞ contribute nothing.
pub fn energy_sum(levels: &[f64]) -> f64 {
    let max = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = levels.iter().map(|l| 10f64.powf((l - max) / 10.0)).sum();
    max + 10.0 * s.log10()
}

/// `L_p,i = L_AN,i − C·log10(R_i) − 5.8`, summed incoherently over phases.
pub fn an_from_levels(generation: &[f64], distances: &[f64], c_coef: f64) -> AnPrediction {
    assert_eq!(generation.len(), distances.len());
    let contributions: Vec<f64> = generation
        .iter()
        .zip(distances)
        .map(|(l, r)| l - c_coef * r.log10() - 5.8)
        .collect();
    AnPrediction {
        generation: generation.to_vec(),
        distances: distances.to_vec(),
        total: energy_sum(&contributions),
        contributions,
        c_coef,
    }
}

/// Ground-level AN. `c_coef` defaults to 11.4 for discovered laws and 10
/// otherwise. A phase's `l_an` overrides the model.
pub fn an_ground_level(
    geometry: &LineGeometry,
    model: &dyn EmissionModel,
    c_coef: Option<f64>,
) -> Result<AnPrediction, PropagationError> {
    geometry.validate()?;
    require_kind(model, EmissionKind::An)?;
    let c = c_coef.unwrap_or(if model.discovered() { DEFAULT_C_DISCOVERED } else { DEFAULT_C_EMPIRICAL });
    let mut generation = Vec::with_capacity(geometry.phases.len());
    let mut distances = Vec::with_capacity(geometry.phases.len());
    for (i, p) in geometry.phases.iter().enumerate() {
        distances.push(phase_distance(geometry, i)?);
        generation.push(match p.l_an {
            Some(v) => v,
            None => model.evaluate(&p.bundle()?)?,
        });
    }
    Ok(an_from_levels(&generation, &distances, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_phase_arithmetic() {
        let p = an_from_levels(&[50.0], &[10.0], 11.4);
        assert!((p.total - 32.8).abs() < 1e-12);
    }

    #[test]
    fn three_equal_contributions() {
        let s = energy_sum(&[40.0, 40.0, 40.0]);
        assert!((s - (40.0 + 10.0 * 3f64.log10())).abs() < 1e-12);
        assert!((s - 44.771).abs() < 5e-4);
    }

    #[test]
    fn suppressed_phases_drop_out() {
        assert_eq!(energy_sum(&[37.5, f64::NEG_INFINITY, f64::NEG_INFINITY]), 37.5);
        assert_eq!(energy_sum(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
