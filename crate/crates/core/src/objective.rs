//! Coefficient fitting and the loss that ranks candidate graphs.
//!
//! The total loss is `l_acc + λ·l_mono` where `l_acc = 1 − R²` of the
//! least-squares fit and `l_mono` is a squared-hinge penalty on trend
//! violations along one-dimensional sweeps of each constrained variable.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::expr::{EvalError, ExprGraph, TermMatrix, VarColumns};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("target is constant; R² is undefined")]
    Degenerate,
    #[error("candidate produces non-finite term values")]
    Rejected,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid monotonicity constraint: {0}")]
    InvalidSpec(String),
    #[error("lambda_mono must be positive and finite, got {0}")]
    InvalidLambda(f64),
}

/// Expected direction of the response along one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Increasing,
    #[serde(rename = "-1")]
    Decreasing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Increasing => 1.0,
            Sign::Decreasing => -1.0,
        }
    }
}

pub const DEFAULT_GRID: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicitySpec {
    pub variable: String,
    pub sign: Sign,
    pub domain: (f64, f64),
    pub grid: usize,
    /// Values held fixed for every other variable during the sweep.
    pub nominal: BTreeMap<String, f64>,
}

impl MonotonicitySpec {
    pub fn new(
        variable: impl Into<String>,
        sign: Sign,
        domain: (f64, f64),
        grid: usize,
        nominal: BTreeMap<String, f64>,
    ) -> Result<MonotonicitySpec, ObjectiveError> {
        let spec = MonotonicitySpec {
            variable: variable.into(),
            sign,
            domain,
            grid,
            nominal,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Defaults drawn from the data: medians as nominals, 20 grid points,
    /// and the domain `[0.8·min, 1.5·max]` with the lower end kept positive.
    pub fn from_data(variable: &str, sign: Sign, data: &Dataset) -> Result<MonotonicitySpec, ObjectiveError> {
        let (lo, hi) = data
            .range(variable)
            .ok_or_else(|| ObjectiveError::InvalidSpec(format!("no column `{variable}`")))?;
        let domain = default_domain(lo, hi);
        let nominal = data
            .variables()
            .iter()
            .filter(|v| v.as_str() != variable)
            .map(|v| (v.clone(), data.median(v).expect("column exists")))
            .collect();
        MonotonicitySpec::new(variable, sign, domain, DEFAULT_GRID, nominal)
    }

    pub fn check(&self) -> Result<(), ObjectiveError> {
        let (lo, hi) = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ObjectiveError::InvalidSpec(format!(
                "`{}`: domain [{lo}, {hi}] must satisfy lo < hi",
                self.variable
            )));
        }
        if self.grid < 2 {
            return Err(ObjectiveError::InvalidSpec(format!(
                "`{}`: grid needs at least 2 points",
                self.variable
            )));
        }
        if self.nominal.contains_key(&self.variable) {
            return Err(ObjectiveError::InvalidSpec(format!(
                "`{}` is swept and cannot also have a nominal value",
                self.variable
            )));
        }
        Ok(())
    }

    /// Evenly spaced sweep including both domain ends.
    pub fn grid_points(&self) -> Vec<f64> {
        let (lo, hi) = self.domain;
        let last = (self.grid - 1) as f64;
        (0..self.grid)
            .map(|l| if l + 1 == self.grid { hi } else { lo + (hi - lo) * l as f64 / last })
            .collect()
    }

    fn sweep_columns(&self) -> BTreeMap<String, Vec<f64>> {
        let mut cols: BTreeMap<String, Vec<f64>> = self
            .nominal
            .iter()
            .map(|(k, v)| (k.clone(), vec![*v; self.grid]))
            .collect();
        cols.insert(self.variable.clone(), self.grid_points());
        cols
    }
}

pub fn default_domain(min: f64, max: f64) -> (f64, f64) {
    let hi = 1.5 * max;
    let mut lo = 0.8 * min;
    if lo <= 0.0 {
        lo = 1e-6 * hi.abs().max(1.0);
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    #[serde(with = "crate::float_serde::pos_inf")]
    pub l_acc: f64,
    #[serde(with = "crate::float_serde::pos_inf")]
    pub l_mono: f64,
    #[serde(with = "crate::float_serde::pos_inf")]
    pub total: f64,
    #[serde(with = "crate::float_serde::neg_inf")]
    pub r2: f64,
}

impl LossBreakdown {
    pub fn new(l_acc: f64, l_mono: f64, lambda_mono: f64, r2: f64) -> LossBreakdown {
        let total = if l_acc.is_finite() && l_mono.is_finite() {
            l_acc + lambda_mono * l_mono
        } else {
            f64::INFINITY
        };
        LossBreakdown { l_acc, l_mono, total, r2 }
    }

    /// Loss carried by a candidate that cannot be scored.
    pub fn rejected() -> LossBreakdown {
        LossBreakdown {
            l_acc: f64::INFINITY,
            l_mono: f64::INFINITY,
            total: f64::INFINITY,
            r2: f64::NEG_INFINITY,
        }
    }
}

/// Minimum-norm least-squares solution of `A·c ≈ y` via SVD.
pub fn least_squares(design: &TermMatrix, y: &[f64]) -> Vec<f64> {
    assert_eq!(design.rows, y.len(), "design rows must match targets");
    if design.cols == 0 {
        return Vec::new();
    }
    let a = DMatrix::from_row_slice(design.rows, design.cols, &design.values);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (design.rows.max(design.cols) as f64) * f64::EPSILON;
    let x = svd
        .solve(&b, eps)
        .expect("U and Vᵀ were requested");
    x.iter().copied().collect()
}

/// `1 − SS_res/SS_tot`, with `SS_tot` taken about the mean of `y`.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Result<f64, ObjectiveError> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(ObjectiveError::Degenerate);
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Replaces the root coefficients with their least-squares values and returns
/// the fitted graph together with its R².
pub fn fit_coefficients(graph: &ExprGraph, data: &Dataset) -> Result<(ExprGraph, f64), ObjectiveError> {
    let design = graph.term_values(data)?;
    if !design.all_finite() {
        return Err(ObjectiveError::Rejected);
    }
    let coefs = least_squares(&design, data.target());
    if coefs.iter().any(|c| !c.is_finite()) {
        return Err(ObjectiveError::Rejected);
    }
    let y_hat: Vec<f64> = (0..design.rows)
        .map(|r| design.row(r).iter().zip(&coefs).map(|(a, c)| a * c).sum())
        .collect();
    let r2 = r_squared(data.target(), &y_hat)?;
    Ok((graph.with_coefficients(&coefs), r2))
}

/// `1 − R²` of the graph as it stands (no refit). Non-finite predictions give +∞.
pub fn accuracy_loss(graph: &ExprGraph, data: &Dataset) -> Result<f64, ObjectiveError> {
    let y_hat = graph.predict(data)?;
    if y_hat.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 - r_squared(data.target(), &y_hat)?)
}

/// Squared-hinge trend penalty for one response sequence.
pub fn hinge_penalty(values: &[f64], sign: Sign) -> f64 {
    if values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let s = sign.value();
    values
        .windows(2)
        .map(|w| (-s * (w[1] - w[0])).max(0.0).powi(2))
        .sum()
}

/// Sum of the per-variable penalties. Non-finite responses give +∞.
pub fn monotonicity_loss(graph: &ExprGraph, specs: &[MonotonicitySpec]) -> Result<f64, ObjectiveError> {
    let mut total = 0.0;
    for spec in specs {
        spec.check()?;
        let cols = spec.sweep_columns();
        let values = graph.predict(&cols)?;
        let p = hinge_penalty(&values, spec.sign);
        if !p.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += p;
    }
    Ok(total)
}

/// Scores the graph as given (coefficients are not refit).
pub fn total_loss(
    graph: &ExprGraph,
    data: &Dataset,
    specs: &[MonotonicitySpec],
    lambda_mono: f64,
) -> Result<LossBreakdown, ObjectiveError> {
    if !(lambda_mono > 0.0 && lambda_mono.is_finite()) {
        return Err(ObjectiveError::InvalidLambda(lambda_mono));
    }
    let l_acc = accuracy_loss(graph, data)?;
    let l_mono = monotonicity_loss(graph, specs)?;
    Ok(LossBreakdown::new(l_acc, l_mono, lambda_mono, 1.0 - l_acc))
}

/// Fit then score; candidates that cannot be fit are scored as rejected.
pub fn fit_and_score(
    graph: &ExprGraph,
    data: &Dataset,
    specs: &[MonotonicitySpec],
    lambda_mono: f64,
) -> Result<(ExprGraph, LossBreakdown), ObjectiveError> {
    match fit_coefficients(graph, data) {
        Ok((fitted, r2)) => {
            let l_mono = match monotonicity_loss(&fitted, specs) {
                Ok(v) => v,
                Err(ObjectiveError::Eval(EvalError::UnboundVariable(v))) => {
                    return Err(ObjectiveError::Eval(EvalError::UnboundVariable(v)))
                }
                Err(_) => f64::INFINITY,
            };
            Ok((fitted, LossBreakdown::new(1.0 - r2, l_mono, lambda_mono, r2)))
        }
        Err(ObjectiveError::Rejected) => Ok((graph.clone(), LossBreakdown::rejected())),
        Err(e) => Err(e),
    }
}

/// Convenience for evaluating sweeps outside the loss.
pub fn sweep<C: VarColumns>(graph: &ExprGraph, cols: &C) -> Result<Vec<f64>, ObjectiveError> {
    Ok(graph.predict(cols)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, LogBase};

    fn ds(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::new(vec![("x".into(), x.to_vec())], "y", y.to_vec()).unwrap()
    }

    fn x_spec(sign: Sign) -> MonotonicitySpec {
        MonotonicitySpec::new("x", sign, (1.0, 3.0), 3, BTreeMap::new()).unwrap()
    }

    #[test]
    fn exact_linear_fit() {
        let g = ExprGraph::from_terms(&[(0.0, Expr::power_product(&[("x", 1.0)])), (0.0, Expr::Const)]);
        let (fitted, r2) = fit_coefficients(&g, &ds(&[0.0, 1.0, 2.0], &[5.0, 8.0, 11.0])).unwrap();
        let c = fitted.coefficients();
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] - 5.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_fit() {
        let g = ExprGraph::from_terms(&[(0.0, Expr::Mul(vec![Expr::log(Expr::var("x"), LogBase::Ten)]))]);
        let (fitted, _) = fit_coefficients(&g, &ds(&[1.0, 10.0, 100.0], &[0.0, 2.0, 4.0])).unwrap();
        assert!((fitted.coefficients()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_terms_split_evenly() {
        let t = Expr::power_product(&[("x", 1.0)]);
        let g = ExprGraph::from_terms(&[(0.0, t.clone()), (0.0, t)]);
        let (fitted, _) = fit_coefficients(&g, &ds(&[1.0, 2.0, 3.0], &[4.0, 8.0, 12.0])).unwrap();
        let c = fitted.coefficients();
        assert!((c[0] - 2.0).abs() < 1e-10 && (c[1] - 2.0).abs() < 1e-10, "{c:?}");
    }

    #[test]
    fn constant_target_is_degenerate() {
        let g = ExprGraph::from_terms(&[(0.0, Expr::power_product(&[("x", 1.0)]))]);
        assert_eq!(
            fit_coefficients(&g, &ds(&[1.0, 2.0], &[3.0, 3.0])).unwrap_err(),
            ObjectiveError::Degenerate
        );
    }

    #[test]
    fn non_finite_terms_reject() {
        let g = ExprGraph::from_terms(&[(0.0, Expr::power_product(&[("x", -1.0)]))]);
        assert_eq!(
            fit_coefficients(&g, &ds(&[0.0, 2.0], &[1.0, 3.0])).unwrap_err(),
            ObjectiveError::Rejected
        );
        let (_, loss) = fit_and_score(&g, &ds(&[0.0, 2.0], &[1.0, 3.0]), &[], 0.1).unwrap();
        assert_eq!(loss.total, f64::INFINITY);
    }

    #[test]
    fn accuracy_loss_values() {
        let x = Expr::power_product(&[("x", 1.0)]);
        let perfect = ExprGraph::from_terms(&[(1.0, x.clone())]);
        assert_eq!(accuracy_loss(&perfect, &ds(&[1.0, 2.0], &[1.0, 2.0])).unwrap(), 0.0);
        let mean = ExprGraph::from_terms(&[(1.5, Expr::Const)]);
        assert_eq!(accuracy_loss(&mean, &ds(&[1.0, 2.0], &[1.0, 2.0])).unwrap(), 1.0);
        // y = {0, 1}, ŷ = {2, −1}: SS_res = 8, SS_tot = 0.5.
        let bad = ExprGraph::from_terms(&[(-3.0, x), (2.0, Expr::Const)]);
        assert_eq!(accuracy_loss(&bad, &ds(&[0.0, 1.0], &[0.0, 1.0])).unwrap(), 16.0);
    }

    #[test]
    fn hinge_cases() {
        let sq = ExprGraph::from_terms(&[(1.0, Expr::power_product(&[("x", 2.0)]))]);
        let neg = ExprGraph::from_terms(&[(-1.0, Expr::power_product(&[("x", 1.0)]))]);
        let pos = ExprGraph::from_terms(&[(1.0, Expr::power_product(&[("x", 1.0)]))]);
        assert_eq!(monotonicity_loss(&sq, &[x_spec(Sign::Increasing)]).unwrap(), 0.0);
        assert_eq!(monotonicity_loss(&neg, &[x_spec(Sign::Increasing)]).unwrap(), 2.0);
        assert_eq!(monotonicity_loss(&pos, &[x_spec(Sign::Decreasing)]).unwrap(), 2.0);
        assert_eq!(monotonicity_loss(&neg, &[x_spec(Sign::Decreasing)]).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_sweep_is_infinite() {
        let g = ExprGraph::from_terms(&[(1.0, Expr::Mul(vec![Expr::log(Expr::var("x"), LogBase::Ten)]))]);
        let spec = MonotonicitySpec::new("x", Sign::Increasing, (-1.0, 1.0), 5, BTreeMap::new()).unwrap();
        assert_eq!(monotonicity_loss(&g, &[spec]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn total_loss_arithmetic() {
        let b = LossBreakdown::new(0.2, 3.0, 0.01, 0.8);
        assert!((b.total - 0.23).abs() < 1e-15);
        assert_eq!(LossBreakdown::new(f64::INFINITY, 0.0, 0.01, 0.0).total, f64::INFINITY);
        let g = ExprGraph::from_terms(&[(1.0, Expr::power_product(&[("x", 1.0)]))]);
        let l = total_loss(&g, &ds(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), &[x_spec(Sign::Increasing)], 0.5).unwrap();
        assert_eq!(l.total, 0.0);
        assert!(total_loss(&g, &ds(&[1.0, 2.0], &[1.0, 2.0]), &[], 0.0).is_err());
    }

    #[test]
    fn spec_checks() {
        assert!(MonotonicitySpec::new("x", Sign::Increasing, (2.0, 1.0), 5, BTreeMap::new()).is_err());
        assert!(MonotonicitySpec::new("x", Sign::Increasing, (1.0, 2.0), 1, BTreeMap::new()).is_err());
        let d = Dataset::new(
            vec![("x".into(), vec![1.0, 2.0, 4.0]), ("z".into(), vec![5.0, 6.0, 9.0])],
            "y",
            vec![0.0, 1.0, 2.0],
        )
        .unwrap();
        let s = MonotonicitySpec::from_data("x", Sign::Increasing, &d).unwrap();
        assert_eq!(s.domain, (0.8, 6.0));
        assert_eq!(s.grid, 20);
        assert_eq!(s.nominal.get("z"), Some(&6.0));
        let pts = s.grid_points();
        assert_eq!(pts.len(), 20);
        assert_eq!((pts[0], pts[19]), (0.8, 6.0));
    }
}
