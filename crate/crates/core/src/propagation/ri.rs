use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::an::energy_sum;
use super::line::{build_line_model, modal_decompose, Conductor, LineElectricalModel, ModalDecomposition};
use super::{require_kind, LineGeometry, PropagationError, DEFAULT_CONDUCTIVITY, EPS0};
use crate::models::{EmissionKind, EmissionModel};

pub const DEFAULT_F_RI: f64 = 0.5e6;
pub const DEFAULT_RHO: f64 = 100.0;
/// Free-space wave impedance, Ω.
pub const Z0: f64 = 120.0 * PI;

/// dB re 1 µA/√m to A/√m.
pub fn gamma_linear(gamma_db: f64) -> f64 {
    10f64.powf(gamma_db / 20.0) * 1e-6
}

/// `I = N·g·N⁻¹·CΓ/(2πε₀)` with modal gain `g_m = 1/√(4α_m)`.
pub fn corona_currents(
    model: &LineElectricalModel,
    modes: &ModalDecomposition,
    gamma: &[f64],
) -> Result<Vec<Complex64>, PropagationError> {
    let k = model.conductors.len();
    if gamma.len() != k || modes.alpha.len() != k {
        return Err(PropagationError::Geometry(format!(
            "excitation has {} entries for {k} conductors",
            gamma.len()
        )));
    }
    if let Some((mode, &alpha)) = modes.alpha.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
        return Err(PropagationError::ZeroAttenuation { mode, alpha });
    }
    let g = DVector::from_vec(gamma.to_vec());
    let j = (&model.c * g / (2.0 * PI * EPS0)).map(|v| Complex64::new(v, 0.0));
    let jm = modes
        .n
        .clone()
        .lu()
        .solve(&j)
        .ok_or_else(|| PropagationError::DefectiveMatrix("current mode matrix is singular".into()))?;
    let im = DVector::from_iterator(
        k,
        jm.iter().zip(&modes.alpha).map(|(v, a)| v / (4.0 * a).sqrt()),
    );
    Ok((&modes.n * im).iter().copied().collect())
}

/// Horizontal magnetic field at ground level, lateral position `x`, and
/// `E_y = Z₀·H_x`.
pub fn ground_field(conductors: &[Conductor], currents: &[Complex64], p: Complex64, x: f64) -> (Complex64, Complex64) {
    assert_eq!(conductors.len(), currents.len(), "one current per conductor");
    let mut h = Complex64::new(0.0, 0.0);
    for (c, i) in conductors.iter().zip(currents) {
        let dx2 = (x - c.x).powi(2);
        let up = c.h + p;
        let down = c.h - p;
        h += i / (2.0 * PI) * (up / (dx2 + up * up) - down / (dx2 + down * down));
    }
    (h, h * Z0)
}

/// `20·log10(|E_y| / 1 µV/m)`.
pub fn ri_level(e_y: Complex64) -> Result<f64, PropagationError> {
    let mag = e_y.norm();
    if !(mag > 0.0) {
        return Err(PropagationError::ZeroField);
    }
    Ok(20.0 * (mag / 1e-6).log10())
}

/// Merges independently propagated single-phase levels into one figure.
pub trait PhaseCombination: Send + Sync {
    fn name(&self) -> &str;
    fn combine(&self, levels: &[f64]) -> f64;
}

/// The largest level if it leads the runner-up by 3 dB or more, else the
/// mean of the two largest plus 1.5 dB.
pub struct DominantPhase;

impl PhaseCombination for DominantPhase {
    fn name(&self) -> &str {
        "dominant-phase"
    }

    fn combine(&self, levels: &[f64]) -> f64 {
        let mut sorted = levels.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        match sorted.as_slice() {
            [] => f64::NEG_INFINITY,
            [only] => *only,
            [first, second, ..] if first - second >= 3.0 => *first,
            [first, second, ..] => (first + second) / 2.0 + 1.5,
        }
    }
}

pub struct PowerSum;

impl PhaseCombination for PowerSum {
    fn name(&self) -> &str {
        "power-sum"
    }

    fn combine(&self, levels: &[f64]) -> f64 {
        energy_sum(levels)
    }
}

pub struct PhaseCombinationRegistry {
    rules: Vec<Box<dyn PhaseCombination>>,
}

impl PhaseCombinationRegistry {
    pub fn empty() -> PhaseCombinationRegistry {
        PhaseCombinationRegistry { rules: Vec::new() }
    }

    pub fn with_builtins() -> PhaseCombinationRegistry {
        let mut r = PhaseCombinationRegistry::empty();
        r.register(Box::new(DominantPhase));
        r.register(Box::new(PowerSum));
        r
    }

    pub fn builtin() -> &'static PhaseCombinationRegistry {
        static REGISTRY: OnceLock<PhaseCombinationRegistry> = OnceLock::new();
        REGISTRY.get_or_init(PhaseCombinationRegistry::with_builtins)
    }

    /// Adds a rule, replacing one with the same name.
    pub fn register(&mut self, rule: Box<dyn PhaseCombination>) {
        self.rules.retain(|r| r.name() != rule.name());
        self.rules.push(rule);
    }

    pub fn get(&self, name: &str) -> Option<&dyn PhaseCombination> {
        self.rules.iter().find(|r| r.name() == name).map(|r| r.as_ref())
    }

    pub fn names(&self) -> Vec<String> {
        self.rules.iter().map(|r| r.name().to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRi {
    /// Excitation, dB re 1 µA/√m.
    pub gamma_db: f64,
    pub currents: Vec<Complex64>,
    pub h_x: Complex64,
    pub e_y: Complex64,
    /// dB re 1 µV/m.
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiPrediction {
    pub x: f64,
    pub frequency: f64,
    pub rho: f64,
    pub penetration_depth: Complex64,
    pub phases: Vec<PhaseRi>,
    pub combination: String,
    pub level: f64,
}

/// Full RI chain. Each phase is excited alone; the resulting single-phase
/// levels are merged by `combination`. A phase's `gamma_ri` overrides the
/// model. The field is taken at ground level below the measurement point.
pub fn ri_line_prediction(
    geometry: &LineGeometry,
    model: &dyn EmissionModel,
    combination: &dyn PhaseCombination,
) -> Result<RiPrediction, PropagationError> {
    geometry.validate()?;
    require_kind(model, EmissionKind::Ri)?;
    let gammas = geometry
        .phases
        .iter()
        .map(|p| match p.gamma_ri {
            Some(v) => Ok(v),
            None => Ok(model.evaluate(&p.bundle()?)?),
        })
        .collect::<Result<Vec<f64>, PropagationError>>()?;

    let conductors = geometry.conductors()?;
    let line = build_line_model(&conductors, geometry.frequency(), geometry.resistivity(), DEFAULT_CONDUCTIVITY)?;
    let modes = modal_decompose(&line)?;
    let x = geometry.mic.x;

    let mut phases = Vec::with_capacity(gammas.len());
    for (k, &gamma_db) in gammas.iter().enumerate() {
        let mut excitation = vec![0.0; gammas.len()];
        excitation[k] = gamma_linear(gamma_db);
        let currents = corona_currents(&line, &modes, &excitation)?;
        let (h_x, e_y) = ground_field(&conductors, &currents, line.p, x);
        phases.push(PhaseRi { gamma_db, currents, h_x, e_y, level: ri_level(e_y)? });
    }
    let levels: Vec<f64> = phases.iter().map(|p| p.level).collect();
    Ok(RiPrediction {
        x,
        frequency: line.frequency,
        rho: line.rho,
        penetration_depth: line.p,
        level: combination.combine(&levels),
        combination: combination.name().to_string(),
        phases,
    })
}
