use std::collections::HashMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::{Edge, ExprGraph, Node, OperatorKind};

#[derive(Debug, Error)]
pub enum GraphJsonError {
    #[error("duplicate node id {0}")]
    DuplicateId(u64),
    #[error("edge references unknown node id {0}")]
    UnknownId(u64),
    #[error("node {id}: kind `{kind}` {problem}")]
    BadNode { id: u64, kind: String, problem: &'static str },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u64,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: u64,
    to: u64,
    feature: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
    root: u64,
}

impl GraphDoc {
    fn from_graph(g: &ExprGraph) -> GraphDoc {
        let nodes = g
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| NodeDoc {
                id: id as u64,
                kind: n.kind.tag().to_string(),
                name: match &n.kind {
                    OperatorKind::Var(name) => Some(name.clone()),
                    _ => None,
                },
            })
            .collect();
        let edges = g
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(id, n)| {
                n.children.iter().map(move |e| EdgeDoc {
                    from: id as u64,
                    to: e.child as u64,
                    feature: e.feature,
                })
            })
            .collect();
        GraphDoc {
            nodes,
            edges,
            root: g.root as u64,
        }
    }

    fn into_graph(self) -> Result<ExprGraph, GraphJsonError> {
        let mut index = HashMap::with_capacity(self.nodes.len());
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for doc in self.nodes {
            if index.insert(doc.id, nodes.len()).is_some() {
                return Err(GraphJsonError::DuplicateId(doc.id));
            }
            let kind = match (doc.kind.as_str(), doc.name) {
                ("add", None) => OperatorKind::Add,
                ("mul", None) => OperatorKind::Mul,
                ("pow", None) => OperatorKind::Pow,
                ("log", None) => OperatorKind::Log,
                ("const", None) => OperatorKind::Const,
                ("var", Some(name)) => OperatorKind::Var(name),
                ("var", None) => {
                    return Err(GraphJsonError::BadNode { id: doc.id, kind: doc.kind, problem: "needs a name" })
                }
                ("add" | "mul" | "pow" | "log" | "const", Some(_)) => {
                    return Err(GraphJsonError::BadNode { id: doc.id, kind: doc.kind, problem: "takes no name" })
                }
                _ => {
                    return Err(GraphJsonError::BadNode { id: doc.id, kind: doc.kind, problem: "is unknown" })
                }
            };
            nodes.push(Node { kind, children: vec![] });
        }
        let lookup = |id: u64| index.get(&id).copied().ok_or(GraphJsonError::UnknownId(id));
        for e in self.edges {
            let from = lookup(e.from)?;
            let to = lookup(e.to)?;
            nodes[from].children.push(Edge {
                child: to,
                feature: e.feature,
            });
        }
        let root = lookup(self.root)?;
        Ok(ExprGraph { nodes, root })
    }
}

impl Serialize for ExprGraph {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphDoc::from_graph(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExprGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        GraphDoc::deserialize(d)?.into_graph().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, LogBase};

    #[test]
    fn document_shape() {
        let g = ExprGraph::from_terms(&[(2.0, Expr::power_product(&[("x", 2.0)]))]);
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(v["root"], 0);
        assert_eq!(v["nodes"][3]["kind"], "var");
        assert_eq!(v["nodes"][3]["name"], "x");
        assert_eq!(v["edges"][0]["feature"], 2.0);
        assert_eq!(v["edges"][1]["feature"], 2.0);
    }

    #[test]
    fn natural_log_base_survives_round_trip() {
        let g = ExprGraph::from_terms(&[(
            0.3,
            Expr::Mul(vec![Expr::log(Expr::var("n"), LogBase::Natural)]),
        )]);
        let s = serde_json::to_string(&g).unwrap();
        let back: ExprGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_documents() {
        let dup = r#"{"nodes":[{"id":1,"kind":"add"},{"id":1,"kind":"const"}],"edges":[],"root":1}"#;
        assert!(serde_json::from_str::<ExprGraph>(dup).is_err());
        let unknown = r#"{"nodes":[{"id":1,"kind":"add"}],"edges":[{"from":1,"to":9,"feature":1}],"root":1}"#;
        assert!(serde_json::from_str::<ExprGraph>(unknown).is_err());
        let kind = r#"{"nodes":[{"id":1,"kind":"sin"}],"edges":[],"root":1}"#;
        assert!(serde_json::from_str::<ExprGraph>(kind).is_err());
        let extra = r#"{"nodes":[],"edges":[],"root":0,"x":1}"#;
        assert!(serde_json::from_str::<ExprGraph>(extra).is_err());
    }

    #[test]
    fn arbitrary_ids_are_remapped() {
        let doc = r#"{"nodes":[{"id":40,"kind":"var","name":"x"},{"id":7,"kind":"add"},{"id":9,"kind":"mul"}],
            "edges":[{"from":7,"to":9,"feature":3.0},{"from":9,"to":40,"feature":1.0}],"root":7}"#;
        let g: ExprGraph = serde_json::from_str(doc).unwrap();
        assert!(g.validate(5).is_ok());
        let mut a = std::collections::BTreeMap::new();
        a.insert("x".to_string(), 2.0);
        assert_eq!(g.evaluate(&a).unwrap(), 6.0);
    }
}
