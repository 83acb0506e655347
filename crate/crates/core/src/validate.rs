//! Structural checks of the type invariants of a [`Program`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::ast::{Dimension, Feature, Identifier, ParamValue, Program, SketchGeom, Vec2};
use crate::schema::{schema, SlotType, PRINCIPAL_PLANES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub feature: Option<Identifier>,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(feature: Option<&Identifier>, message: impl Into<String>) -> Self {
        Diagnostic { feature: feature.cloned(), severity: Severity::Error, message: message.into() }
    }

    pub fn warning(feature: Option<&Identifier>, message: impl Into<String>) -> Self {
        Diagnostic { feature: feature.cloned(), severity: Severity::Warning, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.feature {
            Some(id) => write!(f, "{sev} [{id}]: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

/// Checks every type invariant; an empty result means the program is well formed.
pub fn validate_structure(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut seen: BTreeSet<&Identifier> = BTreeSet::new();
    for f in &program.features {
        if !seen.insert(&f.id) {
            out.push(Diagnostic::error(Some(&f.id), format!("duplicate identifier {}", f.id)));
        }
    }
    for f in &program.features {
        for e in f.sketch_entities() {
            if !seen.insert(&e.id) {
                out.push(Diagnostic::error(Some(&f.id), format!("duplicate identifier {}", e.id)));
            }
        }
    }

    // First definition wins so duplicates do not mask reference errors.
    let mut defined_at: BTreeMap<&Identifier, usize> = BTreeMap::new();
    for (i, f) in program.features.iter().enumerate() {
        defined_at.entry(&f.id).or_insert(i);
        for e in f.sketch_entities() {
            defined_at.entry(&e.id).or_insert(i);
        }
    }

    for (i, f) in program.features.iter().enumerate() {
        for q in f.all_queries() {
            match defined_at.get(&q.op_id) {
                None => out.push(Diagnostic::error(
                    Some(&f.id),
                    format!("unresolved identifier {}", q.op_id),
                )),
                Some(&j) if j >= i => out.push(Diagnostic::error(
                    Some(&f.id),
                    format!("forward reference to {}", q.op_id),
                )),
                Some(_) => {}
            }
        }
        check_params(f, &mut out);
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

fn check_params(f: &Feature, out: &mut Vec<Diagnostic>) {
    let s = schema(f.kind);
    for name in f.params.keys() {
        if s.param(name).is_none() {
            out.push(Diagnostic::error(Some(&f.id), format!("unknown parameter `{name}` for {}", f.kind)));
        }
    }
    for spec in s.params {
        match f.params.get(spec.name) {
            None if spec.required() => out.push(Diagnostic::error(
                Some(&f.id),
                format!("missing required parameter `{}`", spec.name),
            )),
            None => {}
            Some(v) => {
                if let Err(msg) = check_value(spec.ty, v, spec.required()) {
                    out.push(Diagnostic::error(Some(&f.id), format!("parameter `{}`: {msg}", spec.name)));
                }
            }
        }
    }
    if let Some(ParamValue::SketchBody(entities)) = f.params.get("entities") {
        for e in entities {
            if let Err(msg) = check_entity(&e.geom) {
                out.push(Diagnostic::error(Some(&f.id), format!("entity {}: {msg}", e.id)));
            }
        }
    }
}

/// Checks that a value fits a slot type.
pub fn check_value(ty: SlotType, v: &ParamValue, required: bool) -> Result<(), String> {
    let dim_ok = |s: &crate::ast::Scalar, d: Dimension| s.unit.dimension() == d;
    match (ty, v) {
        (SlotType::Length, ParamValue::Scalar(s)) if dim_ok(s, Dimension::Length) => Ok(()),
        (SlotType::Angle, ParamValue::Scalar(s)) if dim_ok(s, Dimension::Angle) => Ok(()),
        (SlotType::Count, ParamValue::Integer(n)) if *n >= 1 => Ok(()),
        (SlotType::Count, ParamValue::Integer(n)) => Err(format!("count must be at least 1, got {n}")),
        (SlotType::Flag, ParamValue::Boolean(_)) => Ok(()),
        (SlotType::Choice(choices), ParamValue::Text(t)) if choices.contains(&t.as_str()) => Ok(()),
        (SlotType::Choice(choices), ParamValue::Text(t)) => {
            Err(format!("`{t}` is not one of {}", choices.join(", ")))
        }
        (SlotType::PlaneRef, ParamValue::Text(t)) if PRINCIPAL_PLANES.contains(&t.as_str()) => Ok(()),
        (SlotType::PlaneRef, ParamValue::Text(t)) => Err(format!("unsupported plane `{t}`")),
        (SlotType::PlaneRef | SlotType::Query, ParamValue::Query(_)) => Ok(()),
        (SlotType::QueryList, ParamValue::EntityList(qs)) if required && qs.is_empty() => {
            Err("expected at least one query".into())
        }
        (SlotType::QueryList, ParamValue::EntityList(_)) => Ok(()),
        (SlotType::Point3, ParamValue::Vec3(v)) if v.0.iter().all(|s| dim_ok(s, Dimension::Length)) => {
            Ok(())
        }
        (SlotType::Direction3, ParamValue::Vec3(v))
            if v.0.iter().all(|s| dim_ok(s, Dimension::Dimensionless)) =>
        {
            Ok(())
        }
        (SlotType::Sketch, ParamValue::SketchBody(_)) => Ok(()),
        (ty, _) => Err(format!("expected {}", ty.describe())),
    }
}

fn lit2(v: &Vec2) -> Option<[Decimal; 2]> {
    Some([v.0[0].literal()?, v.0[1].literal()?])
}

/// Geometric invariants of a sketch entity, checked on literal values only.
pub fn check_entity(g: &SketchGeom) -> Result<(), String> {
    let positive = |s: &crate::ast::Scalar, what: &str| match s.literal() {
        Some(d) if d <= Decimal::ZERO => Err(format!("{what} must be strictly positive")),
        _ => Ok(()),
    };
    match g {
        SketchGeom::Line { start, end } => {
            if let (Some(a), Some(b)) = (lit2(start), lit2(end)) {
                if a == b {
                    return Err("zero-length line".into());
                }
            }
            Ok(())
        }
        SketchGeom::Circle { radius, .. } => positive(radius, "radius"),
        SketchGeom::Arc { start, mid, end } => {
            if let (Some(a), Some(m), Some(b)) = (lit2(start), lit2(mid), lit2(end)) {
                let cross = (m[0] - a[0]) * (b[1] - a[1]) - (m[1] - a[1]) * (b[0] - a[0]);
                if cross.is_zero() {
                    return Err("arc points are collinear".into());
                }
            }
            Ok(())
        }
        SketchGeom::Ellipse { major_radius, minor_radius, .. }
        | SketchGeom::EllipticalArc { major_radius, minor_radius, .. } => {
            positive(major_radius, "major radius")?;
            positive(minor_radius, "minor radius")
        }
        SketchGeom::Bezier { points } | SketchGeom::Spline { points } => {
            if points.len() < 2 {
                Err("needs at least two points".into())
            } else {
                Ok(())
            }
        }
        SketchGeom::Text { height, .. } => positive(height, "text height"),
        SketchGeom::LineByDirection { direction, length, .. } => {
            if let Some([dx, dy]) = lit2(direction) {
                if dx.is_zero() && dy.is_zero() {
                    return Err("zero direction".into());
                }
            }
            positive(length, "length")
        }
        SketchGeom::ArcByAngles { radius, start_angle, end_angle, .. } => {
            positive(radius, "radius")?;
            match (start_angle.literal(), end_angle.literal()) {
                (Some(a), Some(b)) if a == b => Err("arc spans zero angle".into()),
                _ => Ok(()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{EntityType, OpKind, Query, Scalar, SketchEntity};

    fn d(n: i64) -> Decimal {
        Decimal::from(n)
    }

    fn square_sketch(id: &str) -> Feature {
        let pts = [(0, 0), (1, 0), (1, 1), (0, 1)];
        let entities = (0..4)
            .map(|i| SketchEntity {
                id: Identifier::new(format!("{id}_S{i}")),
                geom: SketchGeom::Line {
                    start: Vec2::mm(d(pts[i].0), d(pts[i].1)),
                    end: Vec2::mm(d(pts[(i + 1) % 4].0), d(pts[(i + 1) % 4].1)),
                },
            })
            .collect();
        Feature::new(Identifier::new(id), OpKind::Sketch).with("entities", ParamValue::SketchBody(entities))
    }

    fn extrude(id: &str, of: &str) -> Feature {
        Feature::new(Identifier::new(id), OpKind::Extrude)
            .with(
                "profile",
                ParamValue::EntityList(vec![Query::new(Identifier::new(of), "SKETCH_REGION", EntityType::Face)]),
            )
            .with("depth", ParamValue::Scalar(Scalar::mm(d(1))))
    }

    fn fillet(id: &str, of: &str) -> Feature {
        Feature::new(Identifier::new(id), OpKind::Fillet)
            .with(
                "entities",
                ParamValue::EntityList(vec![Query::new(Identifier::new(of), "SWEPT_EDGE", EntityType::Edge)]),
            )
            .with("radius", ParamValue::Scalar(Scalar::mm(d(1))))
    }

    #[test]
    fn well_formed_program_has_no_diagnostics() {
        let p = Program::new("t", vec![square_sketch("F0"), extrude("F1", "F0"), fillet("F2", "F1")]);
        assert!(validate_structure(&p).is_empty(), "{:?}", validate_structure(&p));
    }

    #[test]
    fn duplicate_identifier_is_reported_once() {
        let p = Program::new("t", vec![square_sketch("F0"), extrude("F0", "F0")]);
        let diags = validate_structure(&p);
        let dups: Vec<_> = diags.iter().filter(|d| d.message.contains("duplicate identifier")).collect();
        assert_eq!(dups.len(), 1, "{diags:?}");
    }

    #[test]
    fn forward_reference_is_reported() {
        let mut features = vec![square_sketch("F0"), extrude("F1", "F0"), fillet("F2", "F5")];
        features.extend([square_sketch("F3"), extrude("F4", "F3"), square_sketch("F6"), extrude("F5", "F6")]);
        let p = Program::new("t", features);
        let diags = validate_structure(&p);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(diags[0].message.contains("forward reference"));
        assert_eq!(diags[0].feature, Some(Identifier::new("F2")));
    }

    #[test]
    fn missing_parameter_and_bad_type() {
        let mut e = extrude("F1", "F0");
        e.params.remove("depth");
        e.params.insert("midplane".into(), ParamValue::Scalar(Scalar::mm(d(1))));
        let p = Program::new("t", vec![square_sketch("F0"), e]);
        let msgs: Vec<_> = validate_structure(&p).into_iter().map(|d| d.message).collect();
        assert!(msgs.iter().any(|m| m.contains("missing required parameter `depth`")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("parameter `midplane`")), "{msgs:?}");
    }

    #[test]
    fn entity_invariants() {
        let z = Vec2::mm(d(0), d(0));
        assert!(check_entity(&SketchGeom::Line { start: z.clone(), end: z.clone() }).is_err());
        assert!(check_entity(&SketchGeom::Circle { center: z.clone(), radius: Scalar::mm(d(0)) }).is_err());
        let arc = SketchGeom::Arc { start: z.clone(), mid: Vec2::mm(d(1), d(1)), end: Vec2::mm(d(2), d(2)) };
        assert!(check_entity(&arc).is_err());
        let arc = SketchGeom::Arc { start: z, mid: Vec2::mm(d(1), d(1)), end: Vec2::mm(d(2), d(0)) };
        assert!(check_entity(&arc).is_ok());
    }
}
