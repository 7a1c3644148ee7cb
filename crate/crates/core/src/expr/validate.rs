use std::fmt;

use super::{ExprGraph, LogBase, NodeId, OperatorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyGraph,
    DanglingEdge { from: NodeId, to: NodeId },
    CycleViolation { node: NodeId },
    Unreachable { node: NodeId },
    ArityViolation { node: NodeId, kind: &'static str, children: usize },
    RootKindViolation { kind: &'static str },
    TermCountViolation { terms: usize, max_terms: usize },
    /// A `Pow`/`Log` hangs directly off an `Add`, leaving no edge for its coefficient.
    AdditiveChildViolation { parent: NodeId, child: NodeId },
    LogBaseViolation { from: NodeId, to: NodeId, base: f64 },
    FeatureViolation { from: NodeId, to: NodeId, feature: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "graph has no nodes"),
            Violation::DanglingEdge { from, to } => write!(f, "edge {from}->{to} points at a missing node"),
            Violation::CycleViolation { node } => write!(f, "cycle through node {node}"),
            Violation::Unreachable { node } => write!(f, "node {node} is unreachable from the root"),
            Violation::ArityViolation { node, kind, children } => {
                write!(f, "{kind} node {node} has {children} children")
            }
            Violation::RootKindViolation { kind } => write!(f, "root is {kind}, expected add"),
            Violation::TermCountViolation { terms, max_terms } => {
                write!(f, "{terms} terms exceed the maximum of {max_terms}")
            }
            Violation::AdditiveChildViolation { parent, child } => {
                write!(f, "add node {parent} has pow/log child {child} without a coefficient slot")
            }
            Violation::LogBaseViolation { from, to, base } => {
                write!(f, "edge {from}->{to} has log base {base}, expected 10 or e")
            }
            Violation::FeatureViolation { from, to, feature } => {
                write!(f, "edge {from}->{to} has invalid feature {feature}")
            }
        }
    }
}

impl ExprGraph {
    /// Structural checks. Returns every violation found, never panics.
    pub fn validate(&self, max_terms: usize) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let n = self.nodes.len();
        if n == 0 || self.root >= n {
            out.push(Violation::EmptyGraph);
            return Err(out);
        }

        let mut dangling = false;
        for (id, node) in self.nodes.iter().enumerate() {
            for e in &node.children {
                if e.child >= n {
                    out.push(Violation::DanglingEdge { from: id, to: e.child });
                    dangling = true;
                }
            }
        }

        // Cycle detection over every node, not just the reachable part.
        if !dangling {
            let mut state = vec![0u8; n];
            for start in 0..n {
                if state[start] == 0 {
                    self.find_cycles(start, &mut state, &mut out);
                }
            }
        }

        let mut reached = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if reached[id] {
                continue;
            }
            reached[id] = true;
            for e in &self.nodes[id].children {
                if e.child < n && !reached[e.child] {
                    stack.push(e.child);
                }
            }
        }
        for (id, r) in reached.iter().enumerate() {
            if !r {
                out.push(Violation::Unreachable { node: id });
            }
        }

        for (id, node) in self.nodes.iter().enumerate() {
            let k = node.children.len();
            let ok = match node.kind {
                OperatorKind::Add | OperatorKind::Mul => k >= 1,
                OperatorKind::Pow | OperatorKind::Log => k == 1,
                OperatorKind::Var(_) | OperatorKind::Const => k == 0,
            };
            if !ok {
                out.push(Violation::ArityViolation {
                    node: id,
                    kind: node.kind.tag(),
                    children: k,
                });
            }
            for e in &node.children {
                let Some(child) = self.nodes.get(e.child) else { continue };
                match (&node.kind, &child.kind) {
                    (OperatorKind::Add, OperatorKind::Pow | OperatorKind::Log) => {
                        out.push(Violation::AdditiveChildViolation { parent: id, child: e.child });
                    }
                    (_, OperatorKind::Log) => {
                        if LogBase::from_value(e.feature).is_none() {
                            out.push(Violation::LogBaseViolation {
                                from: id,
                                to: e.child,
                                base: e.feature,
                            });
                        }
                    }
                    (OperatorKind::Add, _) | (_, OperatorKind::Pow) => {
                        if !e.feature.is_finite() {
                            out.push(Violation::FeatureViolation {
                                from: id,
                                to: e.child,
                                feature: e.feature,
                            });
                        }
                    }
                    _ => {
                        if e.feature != 1.0 {
                            out.push(Violation::FeatureViolation {
                                from: id,
                                to: e.child,
                                feature: e.feature,
                            });
                        }
                    }
                }
            }
        }

        let root = &self.nodes[self.root];
        if root.kind != OperatorKind::Add {
            out.push(Violation::RootKindViolation { kind: root.kind.tag() });
        } else if root.children.len() > max_terms {
            out.push(Violation::TermCountViolation {
                terms: root.children.len(),
                max_terms,
            });
        }

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn find_cycles(&self, id: NodeId, state: &mut [u8], out: &mut Vec<Violation>) {
        state[id] = 1;
        for e in &self.nodes[id].children {
            match state[e.child] {
                0 => self.find_cycles(e.child, state, out),
                1 => out.push(Violation::CycleViolation { node: e.child }),
                _ => {}
            }
        }
        state[id] = 2;
    }
}
