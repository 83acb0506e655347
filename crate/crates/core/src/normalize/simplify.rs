use rust_decimal::Decimal;

use super::values::round_decimal;
use crate::ast::{BoolMode, EntityType, Feature, Number, OpKind, ParamValue, Program, Query, Scalar};
use crate::schema::schema;

/// Elides defaults and rewrites redundant operation encodings. Numbers are
/// compared at the output precision so the result is stable under rounding.
pub fn simplify_operations(program: &Program, decimals: u32) -> Program {
    let mut out = program.clone();
    loop {
        let before = out.clone();
        for f in &mut out.features {
            symmetric_extrude(f, decimals);
            drop_defaults(f, decimals);
        }
        merge_opposite_extrudes(&mut out, decimals);
        drop_single_unions(&mut out);
        if out == before {
            return out;
        }
    }
}

fn rounded(s: &Scalar, decimals: u32) -> Option<Decimal> {
    match s.value {
        Number::Lit(d) if s.unit.is_canonical() => Some(round_decimal(d, decimals)),
        _ => None,
    }
}

fn same_value(a: &ParamValue, b: &ParamValue, decimals: u32) -> bool {
    match (a, b) {
        (ParamValue::Scalar(x), ParamValue::Scalar(y)) => {
            x.unit == y.unit && rounded(x, decimals).is_some() && rounded(x, decimals) == rounded(y, decimals)
        }
        (ParamValue::Vec3(x), ParamValue::Vec3(y)) => x.0.iter().zip(&y.0).all(|(p, q)| {
            p.unit == q.unit && rounded(p, decimals).is_some() && rounded(p, decimals) == rounded(q, decimals)
        }),
        _ => a == b,
    }
}

fn drop_defaults(f: &mut Feature, decimals: u32) {
    for spec in schema(f.kind).params {
        let Some(default) = spec.default_value() else { continue };
        if f.params.get(spec.name).is_some_and(|v| same_value(v, &default, decimals)) {
            f.params.remove(spec.name);
        }
    }
}

fn lit(f: &Feature, name: &str, decimals: u32) -> Option<Decimal> {
    f.scalar(name).and_then(|s| rounded(s, decimals))
}

fn is_plain_extrude(f: &Feature, decimals: u32) -> bool {
    f.kind == OpKind::Extrude
        && !f.flag("midplane").unwrap_or(false)
        && lit(f, "secondDepth", decimals).unwrap_or(Decimal::ZERO).is_zero()
        && lit(f, "draft", decimals).unwrap_or(Decimal::ZERO).is_zero()
}

/// `secondDepth == depth` is a midplane extrude of twice the depth.
fn symmetric_extrude(f: &mut Feature, decimals: u32) {
    if f.kind != OpKind::Extrude || f.flag("midplane").unwrap_or(false) {
        return;
    }
    let (Some(d), Some(second)) = (lit(f, "depth", decimals), lit(f, "secondDepth", decimals)) else { return };
    if d != second || d.is_zero() {
        return;
    }
    let Some(ParamValue::Scalar(depth)) = f.params.get("depth").cloned() else { return };
    let Number::Lit(raw) = depth.value else { return };
    f.params.insert("depth".into(), ParamValue::Scalar(Scalar { value: Number::Lit(raw * Decimal::TWO), ..depth }));
    f.params.insert("midplane".into(), ParamValue::Boolean(true));
    f.params.remove("secondDepth");
    f.params.remove("opposite");
}

/// Every reference to `id` in features after `from`: (feature index, top-level BODY query?).
fn references(program: &Program, id: &crate::ast::Identifier) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    for (i, f) in program.features.iter().enumerate() {
        for (_, q) in f.param_queries() {
            if &q.op_id == id {
                out.push((i, q.entity_type == EntityType::Body));
            }
            let mut nested = Vec::new();
            for d in &q.disambiguation {
                for inner in d.queries() {
                    inner.walk(&mut |n| nested.push(n.op_id.clone()));
                }
            }
            out.extend(nested.into_iter().filter(|n| n == id).map(|_| (i, false)));
        }
    }
    out
}

fn rewrite_body_refs(program: &mut Program, id: &crate::ast::Identifier, replacement: &Query) {
    for f in &mut program.features {
        for v in f.params.values_mut() {
            for q in v.queries_mut() {
                if &q.op_id == id {
                    *q = replacement.clone();
                }
            }
        }
    }
}

fn union_targets(f: &Feature) -> Option<&[Query]> {
    if f.kind != OpKind::Boolean(BoolMode::Union) || f.flag("keepTools").unwrap_or(false) {
        return None;
    }
    if f.param("tools").is_some_and(|t| !t.queries().is_empty()) {
        return None;
    }
    Some(f.param("targets")?.queries())
}

/// A union of a single body is that body.
fn drop_single_unions(program: &mut Program) {
    let mut i = 0;
    while i < program.features.len() {
        let f = &program.features[i];
        let target = match union_targets(f) {
            Some([t]) if t.entity_type == EntityType::Body => t.clone(),
            _ => {
                i += 1;
                continue;
            }
        };
        let id = f.id.clone();
        if references(program, &id).iter().all(|(_, body)| *body) {
            program.features.remove(i);
            rewrite_body_refs(program, &id, &target);
        } else {
            i += 1;
        }
    }
}

/// `Extrude A; Extrude B (same profile and depth, other side); Union(A, B)`
/// becomes one midplane extrude of twice the depth.
fn merge_opposite_extrudes(program: &mut Program, decimals: u32) {
    for u in 0..program.features.len() {
        let Some(targets) = union_targets(&program.features[u]) else { continue };
        let [ta, tb] = targets else { continue };
        if ta.entity_type != EntityType::Body || tb.entity_type != EntityType::Body {
            continue;
        }
        let (Some(a), Some(b)) = (program.position(&ta.op_id), program.position(&tb.op_id)) else { continue };
        let (a, b) = (a.min(b), a.max(b));
        let (fa, fb) = (&program.features[a], &program.features[b]);
        let matches = a != b
            && is_plain_extrude(fa, decimals)
            && is_plain_extrude(fb, decimals)
            && fa.param("profile") == fb.param("profile")
            && lit(fa, "depth", decimals).is_some()
            && lit(fa, "depth", decimals) == lit(fb, "depth", decimals)
            && fa.flag("opposite").unwrap_or(false) != fb.flag("opposite").unwrap_or(false);
        if !matches {
            continue;
        }
        let (id_a, id_b, id_u) = (fa.id.clone(), fb.id.clone(), program.features[u].id.clone());
        let only_union = |id| references(program, id).iter().all(|(i, _)| *i == u);
        if !only_union(&id_a) || !only_union(&id_b) || !references(program, &id_u).iter().all(|(_, body)| *body) {
            continue;
        }
        let keep = Query::new(id_a.clone(), "SWEPT_BODY", EntityType::Body);
        let fa = &mut program.features[a];
        if let Some(ParamValue::Scalar(depth)) = fa.params.get("depth").cloned() {
            if let Number::Lit(raw) = depth.value {
                fa.params.insert(
                    "depth".into(),
                    ParamValue::Scalar(Scalar { value: Number::Lit(raw * Decimal::TWO), ..depth }),
                );
            }
        }
        fa.params.insert("midplane".into(), ParamValue::Boolean(true));
        fa.params.remove("opposite");
        program.features.retain(|f| f.id != id_b && f.id != id_u);
        rewrite_body_refs(program, &id_u, &keep);
        return;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{emit, parse, Dialect};

    const SKETCH: &str = "opSketch(F0, entities = [circle(S0, center = (0.00, 0.00), radius = 5.00)]);\n";

    fn run(src: &str) -> String {
        emit(&simplify_operations(&parse(src, Dialect::Canonical).unwrap(), 2))
    }

    #[test]
    fn defaults_are_dropped() {
        let src = format!(
            "{SKETCH}opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 5.00, opposite = false, draft = 0.00);\n"
        );
        assert!(run(&src).ends_with("opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 5.00);\n"));
        let plane = "opSketch(F0, plane = \"XY\", entities = [circle(S0, center = (0.00, 0.00), radius = 5.00)]);\n";
        assert!(run(plane).starts_with("opSketch(F0, entities = ["));
    }

    #[test]
    fn equal_second_depth_becomes_midplane() {
        let src = format!(
            "{SKETCH}opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 5.00, secondDepth = 5.00);\n"
        );
        assert!(run(&src).contains("depth = 10.00, midplane = true);"));
    }

    #[test]
    fn single_target_union_is_removed() {
        let src = format!(
            "{SKETCH}opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 5.00);\n\
             opBoolean(F2, mode = \"UNION\", targets = [makeQuery(F1, SWEPT_BODY, BODY, [])]);\n\
             opDeleteBodies(F3, entities = [makeQuery(F2, BODY, BODY, [])]);\n"
        );
        let out = run(&src);
        assert!(!out.contains("opBoolean"));
        assert!(out.contains("opDeleteBodies(F3, entities = [makeQuery(F1, SWEPT_BODY, BODY, [])]);"));
    }

    #[test]
    fn union_referenced_by_face_query_is_kept() {
        let src = format!(
            "{SKETCH}opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 5.00);\n\
             opBoolean(F2, mode = \"UNION\", targets = [makeQuery(F1, SWEPT_BODY, BODY, [])]);\n\
             opFillet(F3, entities = [makeQuery(F2, SWEPT_EDGE, EDGE, [])], radius = 1.00);\n"
        );
        assert!(run(&src).contains("opBoolean"));
    }

    #[test]
    fn opposite_extrude_pair_merges() {
        let src = format!(
            "{SKETCH}opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 5.00);\n\
             opExtrude(F2, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 5.00, opposite = true);\n\
             opBoolean(F3, mode = \"UNION\", targets = [makeQuery(F1, SWEPT_BODY, BODY, []), makeQuery(F2, SWEPT_BODY, BODY, [])]);\n"
        );
        let out = run(&src);
        assert_eq!(
            out,
            format!("{SKETCH}opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 10.00, midplane = true);\n")
                .replace("[circle", "[\n    circle")
                .replace("5.00)]);\nopExtrude", "5.00),\n]);\nopExtrude")
        );
    }
}
