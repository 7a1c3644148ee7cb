use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Edge, ExprGraph, NodeId, OperatorKind, DENOMINATOR_GUARD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("non-finite intermediate value")]
    NonFinite,
    #[error("graph is not evaluable: {0}")]
    InvalidGraph(String),
}

/// Column-oriented variable source. Every column has `rows()` entries.
pub trait VarColumns {
    fn column(&self, name: &str) -> Option<&[f64]>;
    fn rows(&self) -> usize;
}

impl VarColumns for HashMap<String, f64> {
    fn column(&self, name: &str) -> Option<&[f64]> {
        self.get(name).map(std::slice::from_ref)
    }
    fn rows(&self) -> usize {
        1
    }
}

impl VarColumns for BTreeMap<String, f64> {
    fn column(&self, name: &str) -> Option<&[f64]> {
        self.get(name).map(std::slice::from_ref)
    }
    fn rows(&self) -> usize {
        1
    }
}

impl VarColumns for [(&str, f64)] {
    fn column(&self, name: &str) -> Option<&[f64]> {
        self.iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| std::slice::from_ref(v))
    }
    fn rows(&self) -> usize {
        1
    }
}

impl VarColumns for BTreeMap<String, Vec<f64>> {
    fn column(&self, name: &str) -> Option<&[f64]> {
        self.get(name).map(Vec::as_slice)
    }
    fn rows(&self) -> usize {
        self.values().next().map(Vec::len).unwrap_or(0)
    }
}

/// Per-row term values; `finite[r]` is false when any term in row `r` is non-finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TermMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `rows * cols` entries; non-finite entries are NaN.
    pub values: Vec<f64>,
    pub finite: Vec<bool>,
}

impl TermMatrix {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn all_finite(&self) -> bool {
        self.finite.iter().all(|&f| f)
    }
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NAN
    }
}

#[inline]
pub(crate) fn guarded_pow(base: f64, exponent: f64) -> f64 {
    if base.is_nan() {
        return f64::NAN;
    }
    if exponent < 0.0 && base.abs() < DENOMINATOR_GUARD {
        return f64::NAN;
    }
    if exponent == 0.0 {
        return 1.0;
    }
    let r = if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    };
    sanitize(r)
}

#[inline]
pub(crate) fn guarded_log(arg: f64, base: f64) -> f64 {
    if !(arg > 0.0) {
        return f64::NAN;
    }
    let r = if base == 10.0 {
        arg.log10()
    } else if base == std::f64::consts::E {
        arg.ln()
    } else {
        arg.ln() / base.ln()
    };
    sanitize(r)
}

#[derive(Clone, Copy, PartialEq)]
enum Visit {
    Fresh,
    Active,
    Done,
}

struct Evaluator<'a, C: VarColumns + ?Sized> {
    graph: &'a ExprGraph,
    data: &'a C,
    rows: usize,
    memo: Vec<Option<Vec<f64>>>,
    state: Vec<Visit>,
}

impl<'a, C: VarColumns + ?Sized> Evaluator<'a, C> {
    fn new(graph: &'a ExprGraph, data: &'a C) -> Self {
        let n = graph.nodes.len();
        Evaluator {
            graph,
            data,
            rows: data.rows(),
            memo: vec![None; n],
            state: vec![Visit::Fresh; n],
        }
    }

    fn node(&mut self, id: NodeId) -> Result<(), EvalError> {
        let Some(node) = self.graph.nodes.get(id) else {
            return Err(EvalError::InvalidGraph(format!("dangling node id {id}")));
        };
        match self.state[id] {
            Visit::Done => return Ok(()),
            Visit::Active => {
                return Err(EvalError::InvalidGraph(format!("cycle through node {id}")))
            }
            Visit::Fresh => {}
        }
        self.state[id] = Visit::Active;
        for e in &node.children {
            self.node(e.child)?;
        }
        let rows = self.rows;
        let values = match &node.kind {
            OperatorKind::Var(name) => {
                let col = self
                    .data
                    .column(name)
                    .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
                if col.len() != rows {
                    return Err(EvalError::InvalidGraph(format!(
                        "column `{name}` has {} rows, expected {rows}",
                        col.len()
                    )));
                }
                col.iter().map(|&v| sanitize(v)).collect()
            }
            OperatorKind::Const => vec![1.0; rows],
            OperatorKind::Add => {
                let mut acc = vec![0.0; rows];
                for e in &node.children {
                    self.accumulate(&mut acc, e, true, |a, b| a + b);
                }
                acc.iter_mut().for_each(|v| *v = sanitize(*v));
                acc
            }
            OperatorKind::Mul => {
                let mut acc = vec![1.0; rows];
                for e in &node.children {
                    self.accumulate(&mut acc, e, false, |a, b| a * b);
                }
                acc.iter_mut().for_each(|v| *v = sanitize(*v));
                acc
            }
            OperatorKind::Pow | OperatorKind::Log => {
                let [edge] = node.children.as_slice() else {
                    return Err(EvalError::InvalidGraph(format!(
                        "node {id} needs exactly one operand"
                    )));
                };
                let mut acc = vec![0.0; rows];
                self.accumulate(&mut acc, edge, false, |_, b| b);
                acc
            }
        };
        self.memo[id] = Some(values);
        self.state[id] = Visit::Done;
        Ok(())
    }

    /// Folds the value carried by `edge` into `acc`.
    fn accumulate(&self, acc: &mut [f64], edge: &Edge, additive_parent: bool, op: fn(f64, f64) -> f64) {
        let child = &self.graph.nodes[edge.child];
        let vals = self.memo[edge.child].as_ref().expect("child evaluated");
        let f = edge.feature;
        match child.kind {
            OperatorKind::Pow => {
                for (a, &v) in acc.iter_mut().zip(vals) {
                    *a = op(*a, guarded_pow(v, f));
                }
            }
            OperatorKind::Log => {
                for (a, &v) in acc.iter_mut().zip(vals) {
                    *a = op(*a, guarded_log(v, f));
                }
            }
            _ if additive_parent => {
                for (a, &v) in acc.iter_mut().zip(vals) {
                    *a = op(*a, sanitize(f * v));
                }
            }
            _ => {
                for (a, &v) in acc.iter_mut().zip(vals) {
                    *a = op(*a, v);
                }
            }
        }
    }
}

impl ExprGraph {
    fn run<'a, C: VarColumns + ?Sized>(&'a self, data: &'a C) -> Result<Evaluator<'a, C>, EvalError> {
        let mut ev = Evaluator::new(self, data);
        ev.node(self.root)?;
        Ok(ev)
    }

    /// Per-row predictions; NaN marks a row whose evaluation hit a non-finite value.
    pub fn predict<C: VarColumns + ?Sized>(&self, data: &C) -> Result<Vec<f64>, EvalError> {
        let mut ev = self.run(data)?;
        Ok(ev.memo[self.root].take().unwrap_or_default())
    }

    /// Evaluates on a single assignment of variables.
    pub fn evaluate<C: VarColumns + ?Sized>(&self, assignment: &C) -> Result<f64, EvalError> {
        if assignment.rows() != 1 {
            return Err(EvalError::InvalidGraph(
                "single evaluation needs exactly one row".into(),
            ));
        }
        let v = self.predict(assignment)?[0];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Row-wise evaluation; `None` flags a non-finite row.
    pub fn evaluate_batch<C: VarColumns + ?Sized>(&self, data: &C) -> Result<Vec<Option<f64>>, EvalError> {
        Ok(self
            .predict(data)?
            .into_iter()
            .map(|v| v.is_finite().then_some(v))
            .collect())
    }

    /// Design matrix: column `j` is root term `j` with its coefficient forced to 1.
    pub fn term_values<C: VarColumns + ?Sized>(&self, data: &C) -> Result<TermMatrix, EvalError> {
        let ev = self.run(data)?;
        let rows = ev.rows;
        let root = &self.nodes[self.root];
        let cols = root.children.len();
        let mut values = vec![0.0; rows * cols];
        for (j, e) in root.children.iter().enumerate() {
            let mut col = vec![0.0; rows];
            ev.accumulate(&mut col, &Edge { child: e.child, feature: 1.0 }, true, |_, b| b);
            for (r, v) in col.into_iter().enumerate() {
                values[r * cols + j] = v;
            }
        }
        let finite = (0..rows)
            .map(|r| values[r * cols..(r + 1) * cols].iter().all(|v| v.is_finite()))
            .collect();
        Ok(TermMatrix {
            rows,
            cols,
            values,
            finite,
        })
    }
}
