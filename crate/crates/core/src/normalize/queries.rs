use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::ast::{Disambiguation, EntityType, Feature, Identifier, OpKind, PrimitiveFamily, Program, Query};
use crate::parser::emit_query;

/// Renames features to `F0..` and sketch entities to `S0..` in program order.
/// The returned map is total over the old identifiers.
pub fn rename_identifiers(program: &Program) -> (Program, BTreeMap<Identifier, Identifier>) {
    let mut map = BTreeMap::new();
    let mut next_entity = 0u64;
    for (i, f) in program.features.iter().enumerate() {
        map.insert(f.id.clone(), Identifier::feature(i as u64));
        for e in f.sketch_entities() {
            map.insert(e.id.clone(), Identifier::entity(next_entity));
            next_entity += 1;
        }
    }
    let mut out = program.clone();
    for f in &mut out.features {
        f.id = map[&f.id].clone();
        if let Some(entities) = f.sketch_entities_mut() {
            for e in entities {
                e.id = map[&e.id].clone();
            }
        }
        f.for_each_query_mut(&mut |q| {
            if let Some(new) = map.get(&q.op_id) {
                q.op_id = new.clone();
            }
        });
    }
    (out, map)
}

/// How an axis query with no disambiguation resolves against its sketch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxisCandidate {
    NotApplicable,
    /// Exactly one line in a sketch with several entities.
    Unique(Identifier),
    /// Number of candidate lines, when not exactly one.
    Ambiguous(usize),
}

impl AxisCandidate {
    /// Revolve and circular-pattern axes must name a single sketch line.
    pub fn of(program: &Program, feature: &Feature, param: &str, q: &Query) -> AxisCandidate {
        if !matches!(feature.kind, OpKind::Revolve | OpKind::CircularPattern)
            || param != "axis"
            || !q.disambiguation.is_empty()
        {
            return AxisCandidate::NotApplicable;
        }
        let Some(sketch) = program.feature(&q.op_id).filter(|f| f.kind == OpKind::Sketch) else {
            return AxisCandidate::NotApplicable;
        };
        let entities = sketch.sketch_entities();
        if entities.len() < 2 {
            return AxisCandidate::NotApplicable;
        }
        let lines: Vec<_> = entities.iter().filter(|e| e.geom.family() == PrimitiveFamily::Line).collect();
        match lines.as_slice() {
            [only] => AxisCandidate::Unique(only.id.clone()),
            other => AxisCandidate::Ambiguous(other.len()),
        }
    }
}

pub(crate) fn query_order(a: &Query, b: &Query) -> Ordering {
    (a.op_id.sort_key(), &a.query_type, a.entity_type.token())
        .cmp(&(b.op_id.sort_key(), &b.query_type, b.entity_type.token()))
        .then_with(|| emit_query(a).cmp(&emit_query(b)))
}

fn tidy(q: &mut Query) {
    for d in &mut q.disambiguation {
        let list = d.queries_mut();
        for inner in list.iter_mut() {
            tidy(inner);
        }
        list.sort_by(query_order);
        list.dedup();
    }
    let mut seen: Vec<Disambiguation> = Vec::new();
    for d in q.disambiguation.drain(..) {
        if !seen.contains(&d) {
            seen.push(d);
        }
    }
    seen.sort_by_key(|d| matches!(d, Disambiguation::Topology(_)));
    q.disambiguation = seen;
}

/// Sorts and deduplicates disambiguation data and gives single-line axis
/// queries an explicit original-set reference. Ambiguous axes are noted.
pub fn canonicalize_queries(program: &Program) -> (Program, Vec<String>) {
    let mut out = program.clone();
    let mut notes = Vec::new();
    for i in 0..out.features.len() {
        let mut augment: Vec<(String, Identifier)> = Vec::new();
        let f = &out.features[i];
        for (param, q) in f.param_queries() {
            match AxisCandidate::of(&out, f, param, q) {
                AxisCandidate::Unique(line) => augment.push((param.to_string(), line)),
                AxisCandidate::Ambiguous(n) => notes.push(format!(
                    "warning: feature {}: `{param}` query on {} matches {n} sketch lines; left unchanged",
                    f.id, q.op_id
                )),
                AxisCandidate::NotApplicable => {}
            }
        }
        let f = &mut out.features[i];
        for (param, line) in augment {
            if let Some(v) = f.params.get_mut(&param) {
                for q in v.queries_mut() {
                    let nested = Query::new(line.clone(), "SKETCH_EDGE", EntityType::Edge);
                    q.disambiguation = vec![Disambiguation::OriginalSet(vec![nested])];
                }
            }
        }
        for v in f.params.values_mut() {
            for q in v.queries_mut() {
                tidy(q);
            }
        }
    }
    (out, notes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{emit, parse, Dialect};

    #[test]
    fn rename_numbers_entities_across_sketches() {
        let src = "opSketch(a, entities = [circle(c1, center = (0, 0), radius = 1), circle(c2, center = (5, 0), radius = 1)]);\n\
                   opSketch(b, entities = [circle(c3, center = (0, 0), radius = 1), circle(c4, center = (5, 0), radius = 1)]);\n\
                   opSketch(c, entities = [circle(c5, center = (0, 0), radius = 1), circle(c6, center = (5, 0), radius = 1)]);\n\
                   opExtrude(x, profile = [makeQuery(c, SKETCH_REGION, FACE, [original([makeQuery(c6, SKETCH_ENTITY, EDGE, [])])])], depth = 1);\n";
        let p = parse(src, Dialect::Raw).unwrap();
        let (out, map) = rename_identifiers(&p);
        // Oracle: enumerate entities in traversal order.
        let mut expected = Vec::new();
        for f in &p.features {
            for e in f.sketch_entities() {
                expected.push(e.id.clone());
            }
        }
        for (k, old) in expected.iter().enumerate() {
            assert_eq!(map[old], Identifier::entity(k as u64));
        }
        assert_eq!(map.len(), 4 + 6);
        let text = emit(&out);
        assert!(text.contains("makeQuery(F2, SKETCH_REGION, FACE, [original([makeQuery(S5, SKETCH_ENTITY, EDGE, [])])])"));
        assert_eq!(rename_identifiers(&out).1.iter().filter(|(o, n)| o != n).count(), 0);
    }

    #[test]
    fn disambiguation_is_sorted_and_deduplicated() {
        let src = "opSketch(F0, entities = [circle(S0, center = (0.00, 0.00), radius = 1.00)]);\n\
                   opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 1.00);\n\
                   opExtrude(F2, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 2.00);\n\
                   opExtrude(F3, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 3.00);\n\
                   opFillet(F4, entities = [makeQuery(F3, SWEPT_EDGE, EDGE, [original([makeQuery(F3, CAP_FACE, FACE, []), makeQuery(F1, CAP_FACE, FACE, [])]), original([makeQuery(F1, CAP_FACE, FACE, []), makeQuery(F3, CAP_FACE, FACE, [])])])], radius = 0.50);\n";
        let p = parse(src, Dialect::Canonical).unwrap();
        let (out, notes) = canonicalize_queries(&p);
        assert!(notes.is_empty());
        assert!(emit(&out).contains(
            "makeQuery(F3, SWEPT_EDGE, EDGE, [original([makeQuery(F1, CAP_FACE, FACE, []), makeQuery(F3, CAP_FACE, FACE, [])])])"
        ));
        assert_eq!(canonicalize_queries(&out).0, out);
    }

    #[test]
    fn single_line_axis_gets_original_set() {
        let src = "opSketch(F0, entities = [\n    line(S0, start = (0.00, 0.00), end = (0.00, 10.00)),\n    circle(S1, center = (5.00, 5.00), radius = 1.00),\n]);\n\
                   opRevolve(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], axis = makeQuery(F0, SKETCH_EDGE, EDGE, []));\n";
        let (out, notes) = canonicalize_queries(&parse(src, Dialect::Canonical).unwrap());
        assert!(notes.is_empty());
        assert!(emit(&out)
            .contains("axis = makeQuery(F0, SKETCH_EDGE, EDGE, [original([makeQuery(S0, SKETCH_EDGE, EDGE, [])])])"));
    }
}
