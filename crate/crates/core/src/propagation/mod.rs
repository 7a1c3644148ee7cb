//! From bundle-level emission to quantities at the measurement point.
//!
//! Audible noise: each phase's generation level is attenuated with distance
//! and the phases are summed incoherently. Radio interference: each phase's
//! excitation is injected into a multiconductor line model, decoupled into
//! modes, and turned into the lateral ground-level field.

mod an;
mod line;
mod ri;

pub use an::{an_from_levels, an_ground_level, energy_sum, AnPrediction, DEFAULT_C_DISCOVERED, DEFAULT_C_EMPIRICAL};
pub use line::{
    build_line_model, modal_decompose, penetration_depth, Conductor, LineElectricalModel, ModalDecomposition,
    DEFAULT_CONDUCTIVITY,
};
pub use ri::{
    corona_currents, gamma_linear, ground_field, ri_level, ri_line_prediction, DominantPhase, PhaseCombination,
    PhaseCombinationRegistry, PhaseRi, PowerSum, RiPrediction, DEFAULT_F_RI, DEFAULT_RHO, Z0,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{BundleConfig, EmissionKind, EmissionModel, ModelError};

pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagationError {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("measurement point is {distance} m from phase {phase}; at least 0.1 m is required")]
    CoincidentPoint { phase: usize, distance: f64 },
    #[error("modal decomposition failed: {0}")]
    DefectiveMatrix(String),
    #[error("mode {mode} has non-positive attenuation {alpha}")]
    ZeroAttenuation { mode: usize, alpha: f64 },
    #[error("field is zero; level is undefined")]
    ZeroField,
    #[error("{0} must be positive and finite")]
    Parameter(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn default_mic_height() -> f64 {
    1.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementPoint {
    pub x: f64,
    #[serde(default = "default_mic_height")]
    pub h: f64,
}

/// One phase bundle. Lengths in m except the subconductor diameter `d` (cm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub x: f64,
    pub h: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub n: f64,
    pub d: f64,
    /// Subconductor radius in m; defaults to `d / 200`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_sub: Option<f64>,
    /// Radius of the circle through the subconductor centres, in m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle_radius: Option<f64>,
    /// Equivalent single-conductor radius in m, used when `bundle_radius` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_eq: Option<f64>,
    /// Fixes the AN generation level instead of evaluating a model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_an: Option<f64>,
    /// Fixes the RI excitation (dB re 1 µA/√m) instead of evaluating a model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_ri: Option<f64>,
}

impl Phase {
    pub fn bundle(&self) -> Result<BundleConfig, ModelError> {
        BundleConfig::new(self.e, self.n, self.d)
    }

    pub fn subconductor_radius(&self) -> f64 {
        self.r_sub.unwrap_or(self.d / 200.0)
    }

    /// `R_b·(n·r/R_b)^(1/n)` from the bundle radius, else the supplied value.
    /// A single conductor without either uses its own radius.
    pub fn equivalent_radius(&self) -> Result<f64, PropagationError> {
        let r = self.subconductor_radius();
        if let Some(rb) = self.bundle_radius {
            if !(rb > 0.0) {
                return Err(PropagationError::Geometry(format!("bundle_radius must be positive, got {rb}")));
            }
            return Ok(rb * (self.n * r / rb).powf(1.0 / self.n));
        }
        match self.r_eq {
            Some(v) if v > 0.0 => Ok(v),
            Some(v) => Err(PropagationError::Geometry(format!("r_eq must be positive, got {v}"))),
            None if self.n == 1.0 => Ok(r),
            None => Err(PropagationError::Geometry(format!(
                "phase at x = {} has n = {} but neither bundle_radius nor r_eq",
                self.x, self.n
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineGeometry {
    pub phases: Vec<Phase>,
    pub mic: MeasurementPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_ri: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl LineGeometry {
    pub fn validate(&self) -> Result<(), PropagationError> {
        if self.phases.is_empty() {
            return Err(PropagationError::Geometry("at least one phase is required".into()));
        }
        let m = self.mic;
        if !(m.x.is_finite() && m.h.is_finite() && m.h >= 0.0) {
            return Err(PropagationError::Geometry(format!("measurement point ({}, {}) is invalid", m.x, m.h)));
        }
        for (i, p) in self.phases.iter().enumerate() {
            if !(p.x.is_finite() && p.h.is_finite()) {
                return Err(PropagationError::Geometry(format!("phase {i} position is not finite")));
            }
            if p.h <= m.h {
                return Err(PropagationError::Geometry(format!(
                    "phase {i} height {} m must exceed the measurement height {} m",
                    p.h, m.h
                )));
            }
        }
        Ok(())
    }

    pub fn frequency(&self) -> f64 {
        self.f_ri.unwrap_or(DEFAULT_F_RI)
    }

    pub fn resistivity(&self) -> f64 {
        self.rho.unwrap_or(DEFAULT_RHO)
    }

    /// Equivalent conductors at the bundle centroids.
    pub fn conductors(&self) -> Result<Vec<Conductor>, PropagationError> {
        self.phases
            .iter()
            .map(|p| Ok(Conductor { x: p.x, h: p.h, radius: p.equivalent_radius()? }))
            .collect()
    }
}

fn require_kind(model: &dyn EmissionModel, expected: EmissionKind) -> Result<(), ModelError> {
    let actual = model.kind();
    if actual == expected {
        Ok(())
    } else {
        Err(ModelError::WrongKind { model: model.slug(), actual, expected })
    }
}

/// Straight-line distance from the measurement point to phase `i`.
pub fn phase_distance(geometry: &LineGeometry, phase: usize) -> Result<f64, PropagationError> {
    let p = geometry
        .phases
        .get(phase)
        .ok_or_else(|| PropagationError::Geometry(format!("no phase {phase}")))?;
    let m = geometry.mic;
    let distance = ((m.x - p.x).powi(2) + (m.h - p.h).powi(2)).sqrt();
    if distance < 0.1 {
        return Err(PropagationError::CoincidentPoint { phase, distance });
    }
    Ok(distance)
}
