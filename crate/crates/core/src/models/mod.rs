//! Closed-form corona emission models.
//!
//! Audible-noise (AN) models give the generated acoustic power level
//! `L_AN` in dB(A) re 1 µW/m; radio-interference (RI) models give the
//! excitation function `Γ_RI` in dB. Each bundle is described by the surface
//! gradient `E` (kV/cm), the subconductor count `n` and diameter `d` (cm).
//!
//! Every model is an [`EmissionModel`] trait object in a [`ModelRegistry`],
//! looked up by its kebab-case slug.

mod formulas;
mod graphs;

pub use formulas::ireq_k;
pub use graphs::law_graph;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, ExprGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{model}: outside the formula's domain: {reason}")]
    Domain { model: String, reason: String },
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("{model} is an {actual} model, expected {expected}")]
    WrongKind { model: String, actual: EmissionKind, expected: EmissionKind },
    #[error("unknown model `{0}`")]
    Unknown(String),
    #[error("{model}: {source}")]
    Graph {
        model: String,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    #[serde(rename = "E")]
    pub e: f64,
    pub n: f64,
    pub d: f64,
}

impl BundleConfig {
    /// `n` may be non-integer so that laws can be swept continuously.
    pub fn new(e: f64, n: f64, d: f64) -> Result<BundleConfig, ModelError> {
        let b = BundleConfig { e, n, d };
        b.check()?;
        Ok(b)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.e > 0.0 && self.e.is_finite()) {
            return Err(ModelError::InvalidBundle(format!("E must be positive, got {}", self.e)));
        }
        if !(self.n >= 1.0 && self.n.is_finite()) {
            return Err(ModelError::InvalidBundle(format!("n must be at least 1, got {}", self.n)));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(ModelError::InvalidBundle(format!("d must be positive, got {}", self.d)));
        }
        Ok(())
    }

    pub fn assignment(&self) -> BTreeMap<String, f64> {
        [("E".to_string(), self.e), ("n".to_string(), self.n), ("d".to_string(), self.d)].into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmissionKind {
    An,
    Ri,
}

impl fmt::Display for EmissionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmissionKind::An => "AN",
            EmissionKind::Ri => "RI",
        })
    }
}

impl EmissionKind {
    pub fn unit(self) -> &'static str {
        match self {
            EmissionKind::An => "dB(µW/m)",
            EmissionKind::Ri => "dB",
        }
    }
}

macro_rules! model_ids {
    ($($variant:ident => $slug:literal, $kind:ident, $terms:literal, $piecewise:literal, $f:path, $source:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum ModelId {
            $($variant,)*
        }

        impl ModelId {
            pub const ALL: &'static [ModelId] = &[$(ModelId::$variant,)*];

            pub fn slug(self) -> String {
                self.as_str().to_string()
            }

            pub fn as_str(self) -> &'static str {
                match self {
                    $(ModelId::$variant => $slug,)*
                }
            }

            pub fn kind(self) -> EmissionKind {
                match self {
                    $(ModelId::$variant => EmissionKind::$kind,)*
                }
            }

            pub fn info(self) -> ModelInfo {
                match self {
                    $(ModelId::$variant => ModelInfo {
                        slug: $slug.to_string(),
                        kind: EmissionKind::$kind,
                        terms: $terms,
                        piecewise: $piecewise,
                        source: $source.to_string(),
                    },)*
                }
            }

            fn closed_form(self) -> fn(&BundleConfig) -> Result<f64, ModelError> {
                match self {
                    $(ModelId::$variant => $f,)*
                }
            }
        }
    };
}

model_ids! {
    AnDiscovered3 => "an-discovered-3", An, 3, false, formulas::an_discovered_3, "graph search, best three-term law";
    AnDiscovered4 => "an-discovered-4", An, 4, false, formulas::an_discovered_4, "graph search, best four-term law";
    AnDiscovered5 => "an-discovered-5", An, 5, false, formulas::an_discovered_5, "graph search, best five-term law";
    AnPolyBaseline => "an-poly-baseline", An, 4, false, formulas::an_poly_baseline, "tuned polynomial regression";
    AnBpa => "an-bpa", An, 4, false, formulas::an_bpa, "BPA empirical";
    AnEnel => "an-enel", An, 4, false, formulas::an_enel, "ENEL empirical";
    AnIreq => "an-ireq", An, 4, false, formulas::an_ireq, "IREQ empirical";
    AnFgh => "an-fgh", An, 4, false, formulas::an_fgh, "FGH empirical";
    AnGe => "an-ge", An, 4, false, formulas::an_ge, "GE empirical";
    AnEpri => "an-epri", An, 4, false, formulas::an_epri, "EPRI empirical";
    AnPysr => "an-pysr", An, 4, false, formulas::an_pysr, "PySR symbolic regression";
    AnDso => "an-dso", An, 5, false, formulas::an_dso, "DSO symbolic regression";
    RiDiscovered3 => "ri-discovered-3", Ri, 3, false, formulas::ri_discovered_3, "graph search, best three-term law";
    RiDiscovered4 => "ri-discovered-4", Ri, 4, false, formulas::ri_discovered_4, "graph search, best four-term law";
    RiDiscovered5 => "ri-discovered-5", Ri, 5, false, formulas::ri_discovered_5, "graph search, best five-term law";
    RiPolyBaseline => "ri-poly-baseline", Ri, 4, false, formulas::ri_poly_baseline, "tuned polynomial regression";
    RiBpa => "ri-bpa", Ri, 3, false, formulas::ri_bpa, "BPA empirical";
    RiCigre => "ri-cigre", Ri, 3, false, formulas::ri_cigre, "CIGRE empirical";
    RiEpri => "ri-epri", Ri, 3, true, formulas::ri_epri, "EPRI empirical, branch on n <= 8";
    RiCispr => "ri-cispr", Ri, 4, false, formulas::ri_cispr, "CISPR empirical";
    RiIreq => "ri-ireq", Ri, 4, false, formulas::ri_ireq, "IREQ empirical with bundle correction K(n)";
    RiPysr => "ri-pysr", Ri, 2, false, formulas::ri_pysr, "PySR symbolic regression";
    RiDso => "ri-dso", Ri, 5, false, formulas::ri_dso, "DSO symbolic regression";
}

impl ModelId {
    /// Discovered laws get the 11.4 propagation coefficient; all others 10.
    pub fn is_discovered(self) -> bool {
        matches!(
            self,
            ModelId::AnDiscovered3
                | ModelId::AnDiscovered4
                | ModelId::AnDiscovered5
                | ModelId::RiDiscovered3
                | ModelId::RiDiscovered4
                | ModelId::RiDiscovered5
        )
    }

    /// Evaluates the closed form after checking the bundle.
    pub fn evaluate(self, bundle: &BundleConfig) -> Result<f64, ModelError> {
        bundle.check()?;
        let v = (self.closed_form())(bundle)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::Domain { model: self.slug(), reason: "non-finite result".into() })
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<ModelId, ModelError> {
        ModelId::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ModelError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub slug: String,
    pub kind: EmissionKind,
    pub terms: usize,
    pub piecewise: bool,
    pub source: String,
}

/// A named emission model. Built-in closed forms and fitted graphs share it.
pub trait EmissionModel: Send + Sync {
    fn info(&self) -> ModelInfo;
    fn evaluate(&self, bundle: &BundleConfig) -> Result<f64, ModelError>;

    fn slug(&self) -> String {
        self.info().slug
    }

    fn kind(&self) -> EmissionKind {
        self.info().kind
    }

    /// Whether ground-level AN propagation uses the 11.4 coefficient.
    fn discovered(&self) -> bool {
        false
    }
}

pub struct ClosedForm(pub ModelId);

impl EmissionModel for ClosedForm {
    fn info(&self) -> ModelInfo {
        self.0.info()
    }

    fn evaluate(&self, bundle: &BundleConfig) -> Result<f64, ModelError> {
        self.0.evaluate(bundle)
    }

    fn discovered(&self) -> bool {
        self.0.is_discovered()
    }
}

/// An equation graph over the variables `E`, `n`, `d`.
pub struct GraphModel {
    pub slug: String,
    pub kind: EmissionKind,
    pub graph: ExprGraph,
    pub source: String,
}

impl EmissionModel for GraphModel {
    fn info(&self) -> ModelInfo {
        ModelInfo {
            slug: self.slug.clone(),
            kind: self.kind,
            terms: self.graph.term_count(),
            piecewise: false,
            source: self.source.clone(),
        }
    }

    fn evaluate(&self, bundle: &BundleConfig) -> Result<f64, ModelError> {
        bundle.check()?;
        self.graph.evaluate(&bundle.assignment()).map_err(|e| match e {
            EvalError::NonFinite => ModelError::Domain { model: self.slug.clone(), reason: "non-finite value".into() },
            other => ModelError::Graph { model: self.slug.clone(), source: other },
        })
    }

    fn discovered(&self) -> bool {
        true
    }
}

#[derive(Default)]
pub struct ModelRegistry {
    models: Vec<Box<dyn EmissionModel>>,
}

impl ModelRegistry {
    pub fn new() -> ModelRegistry {
        ModelRegistry::default()
    }

    /// All 23 closed forms.
    pub fn with_builtins() -> ModelRegistry {
        let mut r = ModelRegistry::new();
        for id in ModelId::ALL {
            r.register(Box::new(ClosedForm(*id)));
        }
        r
    }

    /// Shared read-only registry of the built-in closed forms.
    pub fn builtin() -> &'static ModelRegistry {
        static REG: OnceLock<ModelRegistry> = OnceLock::new();
        REG.get_or_init(ModelRegistry::with_builtins)
    }

    /// Adds a model, replacing any with the same slug.
    pub fn register(&mut self, model: Box<dyn EmissionModel>) {
        let slug = model.slug();
        self.models.retain(|m| m.slug() != slug);
        self.models.push(model);
    }

    pub fn get(&self, slug: &str) -> Result<&dyn EmissionModel, ModelError> {
        self.models
            .iter()
            .find(|m| m.slug() == slug)
            .map(|m| m.as_ref())
            .ok_or_else(|| ModelError::Unknown(slug.to_string()))
    }

    pub fn slugs(&self) -> Vec<String> {
        self.models.iter().map(|m| m.slug()).collect()
    }

    pub fn catalog(&self) -> Vec<ModelInfo> {
        self.models.iter().map(|m| m.info()).collect()
    }
}

fn expect_kind(id: ModelId, kind: EmissionKind) -> Result<(), ModelError> {
    if id.kind() == kind {
        Ok(())
    } else {
        Err(ModelError::WrongKind { model: id.slug(), actual: id.kind(), expected: kind })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reference {
    /// dB re 1 µW/m.
    MicroWattPerMeter,
    /// dB re 1 pW/m.
    PicoWattPerMeter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub value: f64,
    pub reference: Reference,
}

impl NoiseLevel {
    pub fn micro(value: f64) -> NoiseLevel {
        NoiseLevel { value, reference: Reference::MicroWattPerMeter }
    }

    pub fn pico(value: f64) -> NoiseLevel {
        NoiseLevel { value, reference: Reference::PicoWattPerMeter }
    }
}

/// 1 µW = 10⁶ pW, so the two references differ by exactly 60 dB.
pub fn convert_reference(level: NoiseLevel, to: Reference) -> NoiseLevel {
    let value = match (level.reference, to) {
        (a, b) if a == b => level.value,
        (Reference::PicoWattPerMeter, Reference::MicroWattPerMeter) => level.value - 60.0,
        (Reference::MicroWattPerMeter, Reference::PicoWattPerMeter) => level.value + 60.0,
        _ => unreachable!(),
    };
    NoiseLevel { value, reference: to }
}

/// AN generation level in dB re 1 µW/m.
pub fn an_level(model: ModelId, bundle: &BundleConfig) -> Result<NoiseLevel, ModelError> {
    expect_kind(model, EmissionKind::An)?;
    Ok(NoiseLevel::micro(model.evaluate(bundle)?))
}

/// RI excitation function Γ in dB.
pub fn ri_excitation(model: ModelId, bundle: &BundleConfig) -> Result<f64, ModelError> {
    expect_kind(model, EmissionKind::Ri)?;
    model.evaluate(bundle)
}

pub fn model_catalog() -> Vec<ModelInfo> {
    ModelId::ALL.iter().map(|m| m.info()).collect()
}
