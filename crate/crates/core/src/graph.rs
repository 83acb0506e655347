//! Feature dependency graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{EntityType, Identifier, OpKind, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeReason {
    QueryReference,
    BodyConsumption,
    PlaneReference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepEdge {
    pub consumer: Identifier,
    pub producer: Identifier,
    pub reason: EdgeReason,
}

/// Nodes are feature ids in program order; edges point from consumer to producer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepGraph {
    pub nodes: Vec<Identifier>,
    pub edges: Vec<DepEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("feature {feature}: unresolved identifier {identifier}")]
    Unresolved { feature: Identifier, identifier: Identifier },
    #[error("feature {feature}: forward reference to {identifier}")]
    ForwardReference { feature: Identifier, identifier: Identifier },
}

/// Parameters through which these kinds consume whole bodies.
pub fn consumes_bodies(kind: OpKind, param: &str) -> bool {
    match kind {
        OpKind::Boolean(_) => param == "targets" || param == "tools",
        OpKind::DeleteBody | OpKind::CircularPattern | OpKind::Mirror | OpKind::Transform => {
            param == "entities"
        }
        _ => false,
    }
}

pub fn dependency_graph(program: &Program) -> Result<DepGraph, AnalysisError> {
    let owners = program.entity_owners();
    let positions: BTreeMap<&Identifier, usize> =
        program.features.iter().enumerate().map(|(i, f)| (&f.id, i)).collect();
    let mut edges: BTreeMap<(usize, usize), EdgeReason> = BTreeMap::new();

    for (i, f) in program.features.iter().enumerate() {
        for (param, top) in f.param_queries() {
            let mut nested = Vec::new();
            top.walk(&mut |q| nested.push(q));
            for (depth, q) in nested.into_iter().enumerate() {
                let j = positions
                    .get(&q.op_id)
                    .copied()
                    .or_else(|| owners.get(&q.op_id).copied())
                    .ok_or_else(|| AnalysisError::Unresolved {
                        feature: f.id.clone(),
                        identifier: q.op_id.clone(),
                    })?;
                if j >= i {
                    return Err(AnalysisError::ForwardReference {
                        feature: f.id.clone(),
                        identifier: q.op_id.clone(),
                    });
                }
                let reason = if depth > 0 {
                    EdgeReason::QueryReference
                } else if f.kind == OpKind::Sketch && param == "plane" {
                    EdgeReason::PlaneReference
                } else if consumes_bodies(f.kind, param) && q.entity_type == EntityType::Body {
                    EdgeReason::BodyConsumption
                } else {
                    EdgeReason::QueryReference
                };
                let slot = edges.entry((i, j)).or_insert(reason);
                *slot = (*slot).max(reason);
            }
        }
    }

    Ok(DepGraph {
        nodes: program.features.iter().map(|f| f.id.clone()).collect(),
        edges: edges
            .into_iter()
            .map(|((i, j), reason)| DepEdge {
                consumer: program.features[i].id.clone(),
                producer: program.features[j].id.clone(),
                reason,
            })
            .collect(),
    })
}

impl DepGraph {
    pub fn edge_set(&self) -> BTreeSet<(Identifier, Identifier)> {
        self.edges.iter().map(|e| (e.consumer.clone(), e.producer.clone())).collect()
    }

    pub fn has_edge(&self, consumer: &Identifier, producer: &Identifier) -> bool {
        self.edges.iter().any(|e| &e.consumer == consumer && &e.producer == producer)
    }

    pub fn producers_of<'a>(&'a self, id: &'a Identifier) -> impl Iterator<Item = &'a Identifier> {
        self.edges.iter().filter(move |e| &e.consumer == id).map(|e| &e.producer)
    }

    /// Every node reachable from `roots` by following consumer→producer edges.
    pub fn backward_closure(&self, roots: impl IntoIterator<Item = Identifier>) -> BTreeSet<Identifier> {
        let mut adj: BTreeMap<&Identifier, Vec<&Identifier>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(&e.consumer).or_default().push(&e.producer);
        }
        let mut seen: BTreeSet<Identifier> = BTreeSet::new();
        let mut stack: Vec<Identifier> = roots.into_iter().collect();
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            for p in adj.get(&n).into_iter().flatten() {
                if !seen.contains(*p) {
                    stack.push((*p).clone());
                }
            }
        }
        seen
    }

    /// Kahn's algorithm over all nodes.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: BTreeMap<&Identifier, usize> = self.nodes.iter().map(|n| (n, 0)).collect();
        for e in &self.edges {
            *indeg.entry(&e.producer).or_insert(0) += 1;
        }
        let mut ready: Vec<&Identifier> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut visited = 0;
        while let Some(n) = ready.pop() {
            visited += 1;
            for e in self.edges.iter().filter(|e| &e.consumer == n) {
                let d = indeg.get_mut(&e.producer).expect("node present");
                *d -= 1;
                if *d == 0 {
                    ready.push(&e.producer);
                }
            }
        }
        visited == indeg.len()
    }
}
