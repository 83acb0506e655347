//! Per-operation parameter schemas.
//!
//! This table is the single source of truth for which parameters each
//! [`OpKind`] takes, their types, canonical units and defaults. The parser,
//! emitter, validator and the default-elision pass all read it.

use rust_decimal::Decimal;

use crate::ast::{Dimension, OpKind, ParamValue, PrimitiveFamily, Scalar, Unit, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotType {
    Length,
    Angle,
    Count,
    Flag,
    /// Text restricted to the listed tokens.
    Choice(&'static [&'static str]),
    /// A principal plane name (`"XY"`, `"XZ"`, `"YZ"`) or a query.
    PlaneRef,
    Query,
    QueryList,
    /// Point or offset in millimeters.
    Point3,
    /// Unitless direction.
    Direction3,
    Sketch,
}

impl SlotType {
    pub fn dimension(self) -> Option<Dimension> {
        match self {
            SlotType::Length | SlotType::Point3 => Some(Dimension::Length),
            SlotType::Angle => Some(Dimension::Angle),
            SlotType::Direction3 => Some(Dimension::Dimensionless),
            _ => None,
        }
    }

    pub fn describe(self) -> String {
        match self {
            SlotType::Length => "length (mm)".into(),
            SlotType::Angle => "angle (deg)".into(),
            SlotType::Count => "integer".into(),
            SlotType::Flag => "boolean".into(),
            SlotType::Choice(c) => format!("one of {}", c.join(" | ")),
            SlotType::PlaneRef => "plane: \"XY\" | \"XZ\" | \"YZ\" | query".into(),
            SlotType::Query => "query".into(),
            SlotType::QueryList => "list of queries".into(),
            SlotType::Point3 => "3D vector (mm)".into(),
            SlotType::Direction3 => "3D direction".into(),
            SlotType::Sketch => "list of sketch entities".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultValue {
    Number(i64),
    Flag(bool),
    Text(&'static str),
    EmptyList,
    Vector([i64; 3]),
}

impl DefaultValue {
    pub fn to_value(self, ty: SlotType) -> ParamValue {
        match self {
            DefaultValue::Number(n) => {
                let unit = ty.dimension().map(Unit::canonical_for).unwrap_or(Unit::None);
                ParamValue::Scalar(Scalar::new(Decimal::from(n), unit))
            }
            DefaultValue::Flag(b) => ParamValue::Boolean(b),
            DefaultValue::Text(t) => ParamValue::Text(t.to_string()),
            DefaultValue::EmptyList => ParamValue::EntityList(Vec::new()),
            DefaultValue::Vector(v) => {
                let unit = ty.dimension().map(Unit::canonical_for).unwrap_or(Unit::None);
                ParamValue::Vec3(Vec3(v.map(|c| Scalar::new(Decimal::from(c), unit))))
            }
        }
    }

    pub fn render(self) -> String {
        match self {
            DefaultValue::Number(n) => n.to_string(),
            DefaultValue::Flag(b) => b.to_string(),
            DefaultValue::Text(t) => format!("\"{t}\""),
            DefaultValue::EmptyList => "[]".into(),
            DefaultValue::Vector([x, y, z]) => format!("({x}, {y}, {z})"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub ty: SlotType,
    /// `None` marks a required parameter.
    pub default: Option<DefaultValue>,
    pub doc: &'static str,
}

impl ParamSpec {
    pub fn required(&self) -> bool {
        self.default.is_none()
    }

    pub fn default_value(&self) -> Option<ParamValue> {
        self.default.map(|d| d.to_value(self.ty))
    }
}

#[derive(Debug)]
pub struct OpSchema {
    pub kind_label: &'static str,
    pub keyword: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
}

impl OpSchema {
    pub fn param(&self, name: &str) -> Option<&'static ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }
}

const fn req(name: &'static str, ty: SlotType, doc: &'static str) -> ParamSpec {
    ParamSpec { name, ty, default: None, doc }
}

const fn opt(name: &'static str, ty: SlotType, default: DefaultValue, doc: &'static str) -> ParamSpec {
    ParamSpec { name, ty, default: Some(default), doc }
}

pub const PRINCIPAL_PLANES: &[&str] = &["XY", "XZ", "YZ"];

static SKETCH: OpSchema = OpSchema {
    kind_label: "Sketch",
    keyword: "opSketch",
    summary: "Planar 2D profile made of lines, circles, arcs, ellipses, elliptical arcs, Bezier curves, splines and text.",
    params: &[
        opt("plane", SlotType::PlaneRef, DefaultValue::Text("XY"), "Sketch plane: a principal plane or a construction plane query."),
        req("entities", SlotType::Sketch, "Sketch entities in drawing order."),
    ],
};

static EXTRUDE: OpSchema = OpSchema {
    kind_label: "Extrude",
    keyword: "opExtrude",
    summary: "Linear extrusion of sketch regions into a new solid body.",
    params: &[
        req("profile", SlotType::QueryList, "Sketch regions to extrude."),
        req("depth", SlotType::Length, "Extrusion depth along the sketch normal."),
        opt("secondDepth", SlotType::Length, DefaultValue::Number(0), "Additional depth in the opposite direction."),
        opt("midplane", SlotType::Flag, DefaultValue::Flag(false), "Center the solid on the sketch plane."),
        opt("opposite", SlotType::Flag, DefaultValue::Flag(false), "Extrude against the sketch normal."),
        opt("draft", SlotType::Angle, DefaultValue::Number(0), "Draft angle of the side walls."),
    ],
};

static REVOLVE: OpSchema = OpSchema {
    kind_label: "Revolve",
    keyword: "opRevolve",
    summary: "Rotation of sketch regions around an axis.",
    params: &[
        req("profile", SlotType::QueryList, "Sketch regions to revolve."),
        req("axis", SlotType::Query, "Line entity used as the rotation axis."),
        opt("angle", SlotType::Angle, DefaultValue::Number(360), "Sweep angle."),
        opt("opposite", SlotType::Flag, DefaultValue::Flag(false), "Revolve clockwise."),
    ],
};

static SWEEP: OpSchema = OpSchema {
    kind_label: "Sweep",
    keyword: "opSweep",
    summary: "Profile moved along a path curve.",
    params: &[
        req("profile", SlotType::QueryList, "Regions to sweep."),
        req("path", SlotType::QueryList, "Connected edges forming the path."),
    ],
};

static LOFT: OpSchema = OpSchema {
    kind_label: "Loft",
    keyword: "opLoft",
    summary: "Smooth transition solid between two or more profiles.",
    params: &[req("profiles", SlotType::QueryList, "Profiles in loft order.")],
};

static PLANE: OpSchema = OpSchema {
    kind_label: "ConstructionPlane",
    keyword: "opPlane",
    summary: "Reference plane offset and tilted from a principal plane.",
    params: &[
        req("base", SlotType::Choice(PRINCIPAL_PLANES), "Principal plane the construction starts from."),
        opt("offset", SlotType::Length, DefaultValue::Number(0), "Distance along the (tilted) normal."),
        opt("angle", SlotType::Angle, DefaultValue::Number(0), "Tilt about the base plane's first axis."),
    ],
};

static FILLET: OpSchema = OpSchema {
    kind_label: "Fillet",
    keyword: "opFillet",
    summary: "Rounds the selected edges.",
    params: &[
        req("entities", SlotType::QueryList, "Edges or faces to round."),
        req("radius", SlotType::Length, "Fillet radius."),
    ],
};

static CHAMFER: OpSchema = OpSchema {
    kind_label: "Chamfer",
    keyword: "opChamfer",
    summary: "Replaces the selected edges with straight bevels.",
    params: &[
        req("entities", SlotType::QueryList, "Edges or faces to bevel."),
        req("distance", SlotType::Length, "Bevel distance."),
    ],
};

static SHELL: OpSchema = OpSchema {
    kind_label: "Shell",
    keyword: "opShell",
    summary: "Hollows a solid, removing the selected faces.",
    params: &[
        req("faces", SlotType::QueryList, "Faces removed to open the shell."),
        req("thickness", SlotType::Length, "Wall thickness."),
    ],
};

static HOLE: OpSchema = OpSchema {
    kind_label: "Hole",
    keyword: "opHole",
    summary: "Parametric drilled holes at sketch points.",
    params: &[
        req("locations", SlotType::QueryList, "Sketch points where holes start."),
        req("scope", SlotType::QueryList, "Bodies the holes cut."),
        req("diameter", SlotType::Length, "Hole diameter."),
        req("depth", SlotType::Length, "Hole depth."),
        opt("countersinkDiameter", SlotType::Length, DefaultValue::Number(0), "Countersink diameter, zero for none."),
        opt("countersinkAngle", SlotType::Angle, DefaultValue::Number(90), "Countersink included angle."),
    ],
};

static BOOLEAN: OpSchema = OpSchema {
    kind_label: "Boolean",
    keyword: "opBoolean",
    summary: "Union, subtraction or intersection of bodies. The mode is given as `mode = \"UNION\" | \"SUBTRACT\" | \"INTERSECT\"` right after the id.",
    params: &[
        req("targets", SlotType::QueryList, "Bodies combined (union) or modified (subtract, intersect)."),
        opt("tools", SlotType::QueryList, DefaultValue::EmptyList, "Bodies removed from or intersected with the targets."),
        opt("keepTools", SlotType::Flag, DefaultValue::Flag(false), "Keep tool bodies after the operation."),
    ],
};

static DELETE_BODY: OpSchema = OpSchema {
    kind_label: "DeleteBody",
    keyword: "opDeleteBodies",
    summary: "Removes construction intermediates.",
    params: &[req("entities", SlotType::QueryList, "Bodies to delete.")],
};

static CIRCULAR_PATTERN: OpSchema = OpSchema {
    kind_label: "CircularPattern",
    keyword: "opCircularPattern",
    summary: "Copies bodies radially around an axis.",
    params: &[
        req("entities", SlotType::QueryList, "Bodies to replicate."),
        req("axis", SlotType::Query, "Line entity used as the pattern axis."),
        req("count", SlotType::Count, "Number of instances including the seed."),
        opt("angle", SlotType::Angle, DefaultValue::Number(360), "Total angular span."),
    ],
};

static MIRROR: OpSchema = OpSchema {
    kind_label: "Mirror",
    keyword: "opMirror",
    summary: "Reflected copies of bodies across a plane.",
    params: &[
        req("entities", SlotType::QueryList, "Bodies to mirror."),
        req("plane", SlotType::PlaneRef, "Mirror plane."),
    ],
};

static TRANSFORM: OpSchema = OpSchema {
    kind_label: "Transform",
    keyword: "opTransform",
    summary: "Rigid translation and rotation of bodies, optionally as a copy.",
    params: &[
        req("entities", SlotType::QueryList, "Bodies to move."),
        opt("translation", SlotType::Point3, DefaultValue::Vector([0, 0, 0]), "Translation vector."),
        opt("axis", SlotType::Direction3, DefaultValue::Vector([0, 0, 1]), "Rotation axis through the origin."),
        opt("angle", SlotType::Angle, DefaultValue::Number(0), "Rotation angle."),
        opt("copy", SlotType::Flag, DefaultValue::Flag(false), "Transform a copy instead of the original."),
    ],
};

pub fn schema(kind: OpKind) -> &'static OpSchema {
    match kind {
        OpKind::Sketch => &SKETCH,
        OpKind::Extrude => &EXTRUDE,
        OpKind::Revolve => &REVOLVE,
        OpKind::Sweep => &SWEEP,
        OpKind::Loft => &LOFT,
        OpKind::ConstructionPlane => &PLANE,
        OpKind::Fillet => &FILLET,
        OpKind::Chamfer => &CHAMFER,
        OpKind::Shell => &SHELL,
        OpKind::Hole => &HOLE,
        OpKind::Boolean(_) => &BOOLEAN,
        OpKind::DeleteBody => &DELETE_BODY,
        OpKind::CircularPattern => &CIRCULAR_PATTERN,
        OpKind::Mirror => &MIRROR,
        OpKind::Transform => &TRANSFORM,
    }
}

/// Parameter types that sketch entity constructors use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldType {
    Point,
    Direction,
    Length,
    Angle,
    Points,
    Text,
}

#[derive(Debug)]
pub struct EntitySchema {
    pub keyword: &'static str,
    pub family: PrimitiveFamily,
    /// Raw-only implicit form.
    pub implicit: bool,
    pub fields: &'static [(&'static str, FieldType)],
}

use FieldType as FT;

pub static ENTITY_SCHEMAS: &[EntitySchema] = &[
    EntitySchema { keyword: "line", family: PrimitiveFamily::Line, implicit: false, fields: &[("start", FT::Point), ("end", FT::Point)] },
    EntitySchema { keyword: "line", family: PrimitiveFamily::Line, implicit: true, fields: &[("origin", FT::Point), ("direction", FT::Direction), ("length", FT::Length)] },
    EntitySchema { keyword: "circle", family: PrimitiveFamily::Circle, implicit: false, fields: &[("center", FT::Point), ("radius", FT::Length)] },
    EntitySchema { keyword: "arc", family: PrimitiveFamily::Arc, implicit: false, fields: &[("start", FT::Point), ("mid", FT::Point), ("end", FT::Point)] },
    EntitySchema { keyword: "arc", family: PrimitiveFamily::Arc, implicit: true, fields: &[("center", FT::Point), ("radius", FT::Length), ("startAngle", FT::Angle), ("endAngle", FT::Angle)] },
    EntitySchema { keyword: "ellipse", family: PrimitiveFamily::Ellipse, implicit: false, fields: &[("center", FT::Point), ("majorRadius", FT::Length), ("minorRadius", FT::Length), ("rotation", FT::Angle)] },
    EntitySchema { keyword: "ellipticalArc", family: PrimitiveFamily::EllipticalArc, implicit: false, fields: &[("center", FT::Point), ("majorRadius", FT::Length), ("minorRadius", FT::Length), ("rotation", FT::Angle), ("startAngle", FT::Angle), ("endAngle", FT::Angle)] },
    EntitySchema { keyword: "bezier", family: PrimitiveFamily::Bezier, implicit: false, fields: &[("points", FT::Points)] },
    EntitySchema { keyword: "spline", family: PrimitiveFamily::Spline, implicit: false, fields: &[("points", FT::Points)] },
    EntitySchema { keyword: "text", family: PrimitiveFamily::Text, implicit: false, fields: &[("value", FT::Text), ("anchor", FT::Point), ("height", FT::Length)] },
];

pub fn entity_schemas(keyword: &str) -> impl Iterator<Item = &'static EntitySchema> + '_ {
    ENTITY_SCHEMAS.iter().filter(move |s| s.keyword == keyword)
}

/// Markdown reference of every operation and sketch primitive.
pub fn operations_markdown() -> String {
    let mut out = String::from(
        "# Operations\n\n\
         Generated from `crates/core/src/schema.rs`; `cargo test` fails if this file drifts.\n\n\
         Lengths are millimeters and angles degrees in canonical files. Parameters are\n\
         emitted in the order listed. Optional parameters equal to their default are\n\
         dropped by normalization.\n",
    );
    for kind in OpKind::ALL {
        out.push_str(&operation_section(kind));
    }
    out.push_str("\n## Sketch entities\n\n| constructor | family | form | fields |\n|---|---|---|---|\n");
    for e in ENTITY_SCHEMAS {
        let fields: Vec<String> =
            e.fields.iter().map(|(n, t)| format!("`{n}`: {}", field_type_doc(*t))).collect();
        out.push_str(&format!(
            "| `{}` | {:?} | {} | {} |\n",
            e.keyword,
            e.family,
            if e.implicit { "raw only" } else { "canonical" },
            fields.join(", ")
        ));
    }
    out
}

/// Markdown section documenting one operation.
pub fn operation_section(kind: OpKind) -> String {
    let s = schema(kind);
    let mut out = format!("\n## {} (`{}`)\n\n{}\n\n", s.kind_label, s.keyword, s.summary);
    out.push_str("| parameter | type | required | default | meaning |\n|---|---|---|---|---|\n");
    for p in s.params {
        out.push_str(&format!(
            "| `{}` | {} | {} | {} | {} |\n",
            p.name,
            p.ty.describe().replace('|', "\\|"),
            if p.required() { "yes" } else { "no" },
            p.default.map(|d| format!("`{}`", d.render())).unwrap_or_else(|| "-".into()),
            p.doc
        ));
    }
    out
}

fn field_type_doc(t: FieldType) -> &'static str {
    match t {
        FieldType::Point => "point (mm)",
        FieldType::Direction => "direction",
        FieldType::Length => "length (mm)",
        FieldType::Angle => "angle (deg)",
        FieldType::Points => "list of points (mm)",
        FieldType::Text => "string",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_has_a_schema_with_unique_params() {
        for kind in OpKind::ALL {
            let s = schema(kind);
            assert_eq!(s.keyword, kind.keyword());
            assert_eq!(s.kind_label, kind.label());
            let mut names: Vec<_> = s.params.iter().map(|p| p.name).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), s.params.len(), "{kind}");
            assert!(s.params.iter().any(|p| p.required()), "{kind} has no required param");
        }
    }

    #[test]
    fn all_primitive_families_have_a_canonical_constructor() {
        for fam in PrimitiveFamily::ALL {
            assert!(ENTITY_SCHEMAS.iter().any(|e| e.family == fam && !e.implicit), "{fam:?}");
        }
    }

    #[test]
    fn operations_doc_is_current() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/operations.md");
        if std::env::var_os("FSCAD_REGEN_DOCS").is_some() {
            std::fs::write(path, operations_markdown()).unwrap();
        }
        let on_disk = std::fs::read_to_string(path).unwrap_or_default();
        assert_eq!(on_disk, operations_markdown(), "regenerate docs/operations.md");
    }
}
