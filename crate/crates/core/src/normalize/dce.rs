use std::collections::BTreeSet;

use super::queries::AxisCandidate;
use super::{PassError, PassName};
use crate::ast::{BoolMode, Disambiguation, Identifier, OpKind, Program, Query};
use crate::graph::dependency_graph;

/// A body alive at some point of the history.
#[derive(Debug, Clone)]
struct BodyToken {
    /// Features whose BODY (or sub-entity) queries designate this body.
    aliases: BTreeSet<usize>,
    /// Features that shaped this body.
    contributors: BTreeSet<usize>,
}

/// Body lineage: which features shaped the bodies that survive, and which
/// deletions removed bodies with a surviving contributor.
fn body_lineage(program: &Program) -> (BTreeSet<usize>, Vec<(usize, Vec<BodyToken>)>) {
    let mut alive: Vec<BodyToken> = Vec::new();
    let mut deletions = Vec::new();
    let selected = |alive: &[BodyToken], qs: &[&Query]| -> Vec<usize> {
        let ids: BTreeSet<usize> = qs.iter().filter_map(|q| program.position(&q.op_id)).collect();
        (0..alive.len()).filter(|&t| alive[t].aliases.iter().any(|a| ids.contains(a))).collect()
    };
    for (i, f) in program.features.iter().enumerate() {
        let all: Vec<&Query> = f.param_queries().map(|(_, q)| q).collect();
        let param = |name: &str| f.param(name).map(|v| v.queries().iter().collect::<Vec<_>>()).unwrap_or_default();
        let fresh = |contributors: BTreeSet<usize>| BodyToken { aliases: BTreeSet::from([i]), contributors };
        match f.kind {
            OpKind::Sketch | OpKind::ConstructionPlane => {}
            OpKind::Extrude | OpKind::Revolve | OpKind::Sweep | OpKind::Loft => {
                alive.push(fresh(BTreeSet::from([i])));
            }
            OpKind::Fillet | OpKind::Chamfer | OpKind::Shell | OpKind::Hole => {
                for t in selected(&alive, &all) {
                    alive[t].aliases.insert(i);
                    alive[t].contributors.insert(i);
                }
            }
            OpKind::Transform if !f.flag("copy").unwrap_or(false) => {
                for t in selected(&alive, &param("entities")) {
                    alive[t].aliases.insert(i);
                    alive[t].contributors.insert(i);
                }
            }
            OpKind::Transform | OpKind::Mirror | OpKind::CircularPattern => {
                let copies: Vec<BodyToken> = selected(&alive, &param("entities"))
                    .into_iter()
                    .map(|t| {
                        let mut c = alive[t].contributors.clone();
                        c.insert(i);
                        fresh(c)
                    })
                    .collect();
                alive.extend(copies);
            }
            OpKind::Boolean(mode) => {
                let targets = selected(&alive, &param("targets"));
                let tools = selected(&alive, &param("tools"));
                let keep_tools = f.flag("keepTools").unwrap_or(false);
                let mut contributors = BTreeSet::from([i]);
                let mut aliases = BTreeSet::from([i]);
                for &t in targets.iter().chain(&tools) {
                    contributors.extend(alive[t].contributors.iter().copied());
                }
                let consumed: BTreeSet<usize> = match mode {
                    BoolMode::Union => targets.iter().chain(&tools).copied().collect(),
                    _ if keep_tools => targets.iter().copied().collect(),
                    _ => targets.iter().chain(&tools).copied().collect(),
                };
                for &t in &targets {
                    aliases.extend(alive[t].aliases.iter().copied());
                }
                if mode == BoolMode::Union {
                    for &t in &tools {
                        aliases.extend(alive[t].aliases.iter().copied());
                    }
                }
                let mut k = 0;
                alive.retain(|_| {
                    k += 1;
                    !consumed.contains(&(k - 1))
                });
                alive.push(BodyToken { aliases, contributors });
            }
            OpKind::DeleteBody => {
                let doomed: BTreeSet<usize> = selected(&alive, &all).into_iter().collect();
                let mut removed = Vec::new();
                let mut k = 0;
                alive.retain(|t| {
                    k += 1;
                    if doomed.contains(&(k - 1)) {
                        removed.push(t.clone());
                        false
                    } else {
                        true
                    }
                });
                deletions.push((i, removed));
            }
        }
    }
    let roots = alive.iter().flat_map(|t| t.contributors.iter().copied()).collect();
    (roots, deletions)
}

/// Removes features and sketch entities that do not influence any surviving body.
pub fn eliminate_dead_code(program: &Program) -> Result<Program, PassError> {
    let graph = dependency_graph(program).map_err(|e| {
        let feature = match &e {
            crate::graph::AnalysisError::Unresolved { feature, .. }
            | crate::graph::AnalysisError::ForwardReference { feature, .. } => feature.clone(),
        };
        PassError::new(PassName::EliminateDeadCode, Some(&feature), e.to_string())
    })?;
    let (roots, deletions) = body_lineage(program);
    let id_of = |i: usize| program.features[i].id.clone();
    let mut live = graph.backward_closure(roots.iter().map(|&i| id_of(i)));
    let mut kept_deletes = Vec::new();
    for (d, removed) in &deletions {
        let needed = removed.iter().any(|t| t.contributors.iter().any(|&c| live.contains(&id_of(c))));
        if needed {
            kept_deletes.push(id_of(*d));
        }
    }
    live.extend(graph.backward_closure(kept_deletes));

    let mut out = program.clone();
    out.features.retain(|f| live.contains(&f.id));

    // Sketch entities: kept when named by a live query, or when a live query
    // selects the whole sketch.
    let mut named: BTreeSet<Identifier> = BTreeSet::new();
    let mut whole: BTreeSet<Identifier> = BTreeSet::new();
    for f in &out.features {
        for (param, top) in f.param_queries() {
            if let AxisCandidate::Unique(line) = AxisCandidate::of(&out, f, param, top) {
                named.insert(line);
                continue;
            }
            top.walk(&mut |q| {
                named.insert(q.op_id.clone());
                let mentions_entity = q.disambiguation.iter().any(|d| {
                    matches!(d, Disambiguation::OriginalSet(_))
                        && d.queries().iter().any(|n| program.feature(&n.op_id).is_none())
                });
                if !mentions_entity {
                    whole.insert(q.op_id.clone());
                }
            });
        }
    }
    for f in &mut out.features {
        let keep_all = whole.contains(&f.id);
        if let Some(entities) = f.sketch_entities_mut() {
            if !keep_all {
                entities.retain(|e| named.contains(&e.id));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{emit, parse, Dialect};

    fn ids(p: &Program) -> Vec<&str> {
        p.features.iter().map(|f| f.id.as_str()).collect()
    }

    #[test]
    fn unreferenced_sketch_is_removed() {
        let src = "opSketch(F0, entities = [circle(S0, center = (0.00, 0.00), radius = 1.00)]);\n\
                   opSketch(F1, entities = [circle(S1, center = (0.00, 0.00), radius = 2.00)]);\n\
                   opExtrude(F2, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 1.00);\n";
        let out = eliminate_dead_code(&parse(src, Dialect::Canonical).unwrap()).unwrap();
        assert_eq!(ids(&out), ["F0", "F2"]);
    }

    #[test]
    fn unreached_entity_is_removed() {
        let src = "opSketch(F0, entities = [\n\
                   line(S0, start = (0.00, 0.00), end = (1.00, 0.00)),\n\
                   line(S1, start = (1.00, 0.00), end = (0.00, 1.00)),\n\
                   line(S2, start = (0.00, 1.00), end = (0.00, 0.00)),\n\
                   circle(S3, center = (5.00, 5.00), radius = 1.00),\n]);\n\
                   opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [original([makeQuery(S0, SKETCH_EDGE, EDGE, []), makeQuery(S1, SKETCH_EDGE, EDGE, []), makeQuery(S2, SKETCH_EDGE, EDGE, [])])])], depth = 1.00);\n";
        let out = eliminate_dead_code(&parse(src, Dialect::Canonical).unwrap()).unwrap();
        assert_eq!(out.features[0].sketch_entities().len(), 3);
        assert!(!emit(&out).contains("S3"));
    }

    #[test]
    fn deleted_intermediate_feeding_a_loft_is_kept() {
        let src = "opSketch(F0, entities = [circle(S0, center = (0.00, 0.00), radius = 1.00)]);\n\
                   opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 1.00);\n\
                   opPlane(F2, base = \"XY\", offset = 10.00);\n\
                   opSketch(F3, plane = makeQuery(F2, PLANE, FACE, []), entities = [circle(S1, center = (0.00, 0.00), radius = 2.00)]);\n\
                   opLoft(F4, profiles = [makeQuery(F1, CAP_FACE, FACE, []), makeQuery(F3, SKETCH_REGION, FACE, [])]);\n\
                   opDeleteBodies(F5, entities = [makeQuery(F1, SWEPT_BODY, BODY, [])]);\n";
        let p = parse(src, Dialect::Canonical).unwrap();
        let out = eliminate_dead_code(&p).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn deleted_body_without_dependents_is_dead() {
        let src = "opSketch(F0, entities = [circle(S0, center = (0.00, 0.00), radius = 1.00)]);\n\
                   opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 1.00);\n\
                   opFillet(F2, entities = [makeQuery(F1, SWEPT_EDGE, EDGE, [])], radius = 0.10);\n\
                   opDeleteBodies(F3, entities = [makeQuery(F1, SWEPT_BODY, BODY, [])]);\n\
                   opSketch(F4, entities = [circle(S1, center = (0.00, 0.00), radius = 3.00)]);\n\
                   opExtrude(F5, profile = [makeQuery(F4, SKETCH_REGION, FACE, [])], depth = 1.00);\n";
        let out = eliminate_dead_code(&parse(src, Dialect::Canonical).unwrap()).unwrap();
        assert_eq!(ids(&out), ["F4", "F5"]);
    }
}
