//! Candidate equations as attributed directed acyclic graphs.
//!
//! A graph has an additive root whose children are the terms of the equation.
//! Operators are n-ary (`Add`, `Mul`) or unary (`Pow`, `Log`), and every edge
//! carries a scalar feature whose meaning depends on where the edge points:
//!
//! * edge into a `Pow` node: the exponent,
//! * edge into a `Log` node: the logarithm base (10 or e),
//! * any other edge leaving an `Add` node: a multiplicative coefficient,
//! * every other edge: fixed to 1.
//!
//! Graphs are usually built from [`Expr`] trees via [`ExprGraph::from_terms`]
//! and taken apart again with [`ExprGraph::terms`]; the variation operators in
//! `evolve` work on that term list.

mod eval;
mod json;
mod render;
mod template;
mod validate;

pub use eval::{EvalError, TermMatrix, VarColumns};
pub use json::GraphJsonError;
pub use render::format_sig6;
pub use template::{ExponentAlphabet, TemplateKind, TemplateSampler};
pub use validate::Violation;

use std::collections::BTreeSet;

pub type NodeId = usize;

/// Guard applied before taking a reciprocal (any negative power).
pub const DENOMINATOR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Add,
    Mul,
    Pow,
    Log,
    Var(String),
    Const,
}

impl OperatorKind {
    pub fn is_leaf(&self) -> bool {
        matches!(self, OperatorKind::Var(_) | OperatorKind::Const)
    }

    pub(crate) fn tag(&self) -> &'static str {
        match self {
            OperatorKind::Add => "add",
            OperatorKind::Mul => "mul",
            OperatorKind::Pow => "pow",
            OperatorKind::Log => "log",
            OperatorKind::Var(_) => "var",
            OperatorKind::Const => "const",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub child: NodeId,
    pub feature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: OperatorKind,
    pub children: Vec<Edge>,
}

/// Logarithm bases admitted on edges into `Log` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogBase {
    Ten,
    Natural,
}

impl LogBase {
    pub fn value(self) -> f64 {
        match self {
            LogBase::Ten => 10.0,
            LogBase::Natural => std::f64::consts::E,
        }
    }

    pub fn from_value(v: f64) -> Option<LogBase> {
        if v == 10.0 {
            Some(LogBase::Ten)
        } else if v == std::f64::consts::E {
            Some(LogBase::Natural)
        } else {
            None
        }
    }

    pub fn other(self) -> LogBase {
        match self {
            LogBase::Ten => LogBase::Natural,
            LogBase::Natural => LogBase::Ten,
        }
    }
}

/// Tree form of an expression, used to build and edit graphs.
///
/// Edge features are carried by the enclosing variant: `Pow` holds its
/// exponent, `Log` its base, `Add` a coefficient per summand.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Const,
    Add(Vec<(f64, Expr)>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, f64),
    Log(Box<Expr>, LogBase),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    pub fn log(arg: Expr, base: LogBase) -> Expr {
        Expr::Log(Box::new(arg), base)
    }

    /// Product of powers of variables, `Π name^p`.
    pub fn power_product(factors: &[(&str, f64)]) -> Expr {
        Expr::Mul(
            factors
                .iter()
                .map(|(name, p)| Expr::pow(Expr::var(name), *p))
                .collect(),
        )
    }

    /// `Mul(numerator..., Pow(denominator, -1))`.
    pub fn ratio(numerator: Vec<Expr>, denominator: Expr) -> Expr {
        let mut factors = numerator;
        factors.push(Expr::pow(denominator, -1.0));
        Expr::Mul(factors)
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const => 1,
            Expr::Add(items) => 1 + items.iter().map(|(_, e)| e.node_count()).sum::<usize>(),
            Expr::Mul(items) => 1 + items.iter().map(Expr::node_count).sum::<usize>(),
            Expr::Pow(inner, _) | Expr::Log(inner, _) => 1 + inner.node_count(),
        }
    }

    pub fn variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Const => {}
            Expr::Add(items) => items.iter().for_each(|(_, e)| e.variables(out)),
            Expr::Mul(items) => items.iter().for_each(|e| e.variables(out)),
            Expr::Pow(inner, _) | Expr::Log(inner, _) => inner.variables(out),
        }
    }
}

/// An equation graph. Node ids are indices into the node arena.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprGraph {
    nodes: Vec<Node>,
    root: NodeId,
}

impl ExprGraph {
    /// Raw constructor. No checks are made; run [`ExprGraph::validate`].
    pub fn from_parts(nodes: Vec<Node>, root: NodeId) -> ExprGraph {
        ExprGraph { nodes, root }
    }

    /// Builds a graph whose additive root has one child per `(coefficient, term)`.
    pub fn from_terms(terms: &[(f64, Expr)]) -> ExprGraph {
        let mut nodes = vec![Node {
            kind: OperatorKind::Add,
            children: Vec::with_capacity(terms.len()),
        }];
        let mut root_edges = Vec::with_capacity(terms.len());
        for (coef, term) in terms {
            let child = push_expr(&mut nodes, term);
            root_edges.push(Edge {
                child,
                feature: *coef,
            });
        }
        nodes[0].children = root_edges;
        ExprGraph { nodes, root: 0 }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn term_count(&self) -> usize {
        self.nodes
            .get(self.root)
            .map(|n| n.children.len())
            .unwrap_or(0)
    }

    /// Coefficients on the root's outgoing edges, in term order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.nodes[self.root]
            .children
            .iter()
            .map(|e| e.feature)
            .collect()
    }

    /// Returns a copy with the root coefficients replaced.
    ///
    /// Panics if `coefs.len()` differs from the term count.
    pub fn with_coefficients(&self, coefs: &[f64]) -> ExprGraph {
        assert_eq!(coefs.len(), self.term_count(), "coefficient count mismatch");
        let mut g = self.clone();
        for (edge, c) in g.nodes[g.root].children.iter_mut().zip(coefs) {
            edge.feature = *c;
        }
        g
    }

    /// Root terms as expression trees. Shared subgraphs are duplicated.
    pub fn terms(&self) -> Vec<(f64, Expr)> {
        self.nodes[self.root]
            .children
            .iter()
            .map(|e| (e.feature, self.expr_at(e.child)))
            .collect()
    }

    fn expr_at(&self, id: NodeId) -> Expr {
        let node = &self.nodes[id];
        match &node.kind {
            OperatorKind::Var(name) => Expr::Var(name.clone()),
            OperatorKind::Const => Expr::Const,
            OperatorKind::Add => Expr::Add(
                node.children
                    .iter()
                    .map(|e| (e.feature, self.expr_at(e.child)))
                    .collect(),
            ),
            OperatorKind::Mul => Expr::Mul(
                node.children
                    .iter()
                    .map(|e| self.edge_expr(e))
                    .collect(),
            ),
            OperatorKind::Pow | OperatorKind::Log => {
                // The transform itself lives on the incoming edge; this is the operand.
                self.edge_expr(&node.children[0])
            }
        }
    }

    /// Expression for the value flowing along `edge` (excluding Add coefficients).
    fn edge_expr(&self, edge: &Edge) -> Expr {
        let child = &self.nodes[edge.child];
        match child.kind {
            OperatorKind::Pow => Expr::pow(self.expr_at(edge.child), edge.feature),
            OperatorKind::Log => Expr::log(
                self.expr_at(edge.child),
                LogBase::from_value(edge.feature).unwrap_or(LogBase::Ten),
            ),
            _ => self.expr_at(edge.child),
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.kind {
                OperatorKind::Var(name) => Some(name.clone()),
                _ => None,
            })
            .collect()
    }

    /// Structurally canonical copy: terms and operands sorted by the render key.
    pub fn canonical(&self) -> ExprGraph {
        ExprGraph::from_terms(&render::canonical_terms(&self.terms()))
    }
}

fn push_expr(nodes: &mut Vec<Node>, expr: &Expr) -> NodeId {
    let id = nodes.len();
    match expr {
        Expr::Var(name) => {
            nodes.push(Node {
                kind: OperatorKind::Var(name.clone()),
                children: vec![],
            });
        }
        Expr::Const => {
            nodes.push(Node {
                kind: OperatorKind::Const,
                children: vec![],
            });
        }
        Expr::Add(items) => {
            nodes.push(Node {
                kind: OperatorKind::Add,
                children: vec![],
            });
            let edges = items
                .iter()
                .map(|(c, e)| Edge {
                    child: push_expr(nodes, e),
                    feature: *c,
                })
                .collect();
            nodes[id].children = edges;
        }
        Expr::Mul(items) => {
            nodes.push(Node {
                kind: OperatorKind::Mul,
                children: vec![],
            });
            let edges = items.iter().map(|e| push_edge(nodes, e)).collect();
            nodes[id].children = edges;
        }
        Expr::Pow(inner, _) | Expr::Log(inner, _) => {
            let kind = if matches!(expr, Expr::Pow(..)) {
                OperatorKind::Pow
            } else {
                OperatorKind::Log
            };
            nodes.push(Node {
                kind,
                children: vec![],
            });
            let edge = push_edge(nodes, inner);
            nodes[id].children = vec![edge];
        }
    }
    id
}

/// Pushes `expr` as the child of a non-additive parent and returns the edge.
fn push_edge(nodes: &mut Vec<Node>, expr: &Expr) -> Edge {
    let feature = match expr {
        Expr::Pow(_, p) => *p,
        Expr::Log(_, b) => b.value(),
        _ => 1.0,
    };
    Edge {
        child: push_expr(nodes, expr),
        feature,
    }
}
