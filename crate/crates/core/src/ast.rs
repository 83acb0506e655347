//! Typed design-history model.
//!
//! A [`Program`] is an ordered list of [`Feature`]s. Each feature is one
//! modeling operation with a parameter map whose shape is fixed per
//! [`OpKind`] by the [`crate::schema`] table. Geometric entities produced by
//! earlier features are addressed with four-part [`Query`] values.
//!
//! Numbers are exact decimals. Raw (pre-normalization) programs may hold
//! unevaluated arithmetic ([`Expr`]) and non-canonical units; canonical
//! programs hold only literals in millimeters and degrees.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

static CANONICAL_ID: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([FSEV])(0|[1-9][0-9]*)$").expect("valid pattern"));

/// Name of a feature or sketch entity.
///
/// Canonical identifiers belong to one of the families `F<n>`, `S<n>`,
/// `E<n>`, `V<n>`; anything else is an opaque raw token that only survives
/// until identifier renaming.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Identifier(String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdFamily {
    Feature,
    SketchEntity,
    Edge,
    Vertex,
}

impl IdFamily {
    pub fn prefix(self) -> char {
        match self {
            IdFamily::Feature => 'F',
            IdFamily::SketchEntity => 'S',
            IdFamily::Edge => 'E',
            IdFamily::Vertex => 'V',
        }
    }
}

impl Identifier {
    pub fn new(text: impl Into<String>) -> Self {
        Identifier(text.into())
    }

    pub fn canonical(family: IdFamily, index: u64) -> Self {
        Identifier(format!("{}{}", family.prefix(), index))
    }

    pub fn feature(index: u64) -> Self {
        Self::canonical(IdFamily::Feature, index)
    }

    pub fn entity(index: u64) -> Self {
        Self::canonical(IdFamily::SketchEntity, index)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Family and index when the identifier is canonical.
    pub fn canonical_parts(&self) -> Option<(IdFamily, u64)> {
        let caps = CANONICAL_ID.captures(&self.0)?;
        let family = match &caps[1] {
            "F" => IdFamily::Feature,
            "S" => IdFamily::SketchEntity,
            "E" => IdFamily::Edge,
            _ => IdFamily::Vertex,
        };
        caps[2].parse().ok().map(|n| (family, n))
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical_parts().is_some()
    }

    /// Ordering key: canonical ids sort by family then numeric index, raw ids
    /// after them lexically.
    pub fn sort_key(&self) -> (u8, u64, &str) {
        match self.canonical_parts() {
            Some((family, n)) => (family as u8, n, ""),
            None => (u8::MAX, 0, self.as_str()),
        }
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoolMode {
    Union,
    Subtract,
    Intersect,
}

impl BoolMode {
    pub fn token(self) -> &'static str {
        match self {
            BoolMode::Union => "UNION",
            BoolMode::Subtract => "SUBTRACT",
            BoolMode::Intersect => "INTERSECT",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "UNION" => Some(BoolMode::Union),
            "SUBTRACT" => Some(BoolMode::Subtract),
            "INTERSECT" => Some(BoolMode::Intersect),
            _ => None,
        }
    }
}

/// The fifteen supported modeling operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Sketch,
    Extrude,
    Revolve,
    Sweep,
    Loft,
    ConstructionPlane,
    Fillet,
    Chamfer,
    Shell,
    Hole,
    Boolean(BoolMode),
    DeleteBody,
    CircularPattern,
    Mirror,
    Transform,
}

impl OpKind {
    /// One representative per kind; Boolean is listed once.
    pub const ALL: [OpKind; 15] = [
        OpKind::Sketch,
        OpKind::Extrude,
        OpKind::Revolve,
        OpKind::Sweep,
        OpKind::Loft,
        OpKind::ConstructionPlane,
        OpKind::Fillet,
        OpKind::Chamfer,
        OpKind::Shell,
        OpKind::Hole,
        OpKind::Boolean(BoolMode::Union),
        OpKind::DeleteBody,
        OpKind::CircularPattern,
        OpKind::Mirror,
        OpKind::Transform,
    ];

    /// Kind name without the Boolean sub-mode.
    pub fn label(self) -> &'static str {
        match self {
            OpKind::Sketch => "Sketch",
            OpKind::Extrude => "Extrude",
            OpKind::Revolve => "Revolve",
            OpKind::Sweep => "Sweep",
            OpKind::Loft => "Loft",
            OpKind::ConstructionPlane => "ConstructionPlane",
            OpKind::Fillet => "Fillet",
            OpKind::Chamfer => "Chamfer",
            OpKind::Shell => "Shell",
            OpKind::Hole => "Hole",
            OpKind::Boolean(_) => "Boolean",
            OpKind::DeleteBody => "DeleteBody",
            OpKind::CircularPattern => "CircularPattern",
            OpKind::Mirror => "Mirror",
            OpKind::Transform => "Transform",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.label() == label)
    }

    /// Statement keyword in source text.
    pub fn keyword(self) -> &'static str {
        match self {
            OpKind::Sketch => "opSketch",
            OpKind::Extrude => "opExtrude",
            OpKind::Revolve => "opRevolve",
            OpKind::Sweep => "opSweep",
            OpKind::Loft => "opLoft",
            OpKind::ConstructionPlane => "opPlane",
            OpKind::Fillet => "opFillet",
            OpKind::Chamfer => "opChamfer",
            OpKind::Shell => "opShell",
            OpKind::Hole => "opHole",
            OpKind::Boolean(_) => "opBoolean",
            OpKind::DeleteBody => "opDeleteBodies",
            OpKind::CircularPattern => "opCircularPattern",
            OpKind::Mirror => "opMirror",
            OpKind::Transform => "opTransform",
        }
    }

    /// Kind for a statement keyword. Boolean resolves with a placeholder mode
    /// that the parser replaces from the `mode` argument.
    pub fn from_keyword(keyword: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.keyword() == keyword)
    }

    /// Operations that create a new body from profiles.
    pub fn creates_body(self) -> bool {
        matches!(self, OpKind::Extrude | OpKind::Revolve | OpKind::Sweep | OpKind::Loft)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpKind::Boolean(mode) => write!(f, "Boolean({})", mode.token()),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Length,
    Angle,
    Dimensionless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    Millimeter,
    Centimeter,
    Meter,
    Inch,
    Foot,
    Degree,
    Radian,
    None,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Millimeter | Unit::Centimeter | Unit::Meter | Unit::Inch | Unit::Foot => {
                Dimension::Length
            }
            Unit::Degree | Unit::Radian => Dimension::Angle,
            Unit::None => Dimension::Dimensionless,
        }
    }

    pub fn canonical_for(dimension: Dimension) -> Unit {
        match dimension {
            Dimension::Length => Unit::Millimeter,
            Dimension::Angle => Unit::Degree,
            Dimension::Dimensionless => Unit::None,
        }
    }

    pub fn is_canonical(self) -> bool {
        Unit::canonical_for(self.dimension()) == self
    }

    /// Unit for a suffix token of the raw dialect.
    pub fn from_token(token: &str) -> Option<Unit> {
        Some(match token {
            "mm" | "millimeter" => Unit::Millimeter,
            "cm" | "centimeter" => Unit::Centimeter,
            "m" | "meter" => Unit::Meter,
            "in" | "inch" => Unit::Inch,
            "ft" | "foot" => Unit::Foot,
            "deg" | "degree" => Unit::Degree,
            "rad" | "radian" => Unit::Radian,
            _ => return None,
        })
    }

    pub fn token(self) -> &'static str {
        match self {
            Unit::Millimeter => "millimeter",
            Unit::Centimeter => "centimeter",
            Unit::Meter => "meter",
            Unit::Inch => "inch",
            Unit::Foot => "foot",
            Unit::Degree => "degree",
            Unit::Radian => "radian",
            Unit::None => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Unevaluated raw-dialect arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(Decimal),
    Pi,
    /// A unit atom such as `inch`, standing for one of that unit.
    Unit(Unit),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn contains_unit(&self) -> bool {
        match self {
            Expr::Unit(_) => true,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(e) => e.contains_unit(),
            Expr::Bin(_, a, b) => a.contains_unit() || b.contains_unit(),
        }
    }

    pub fn units(&self, out: &mut Vec<Unit>) {
        match self {
            Expr::Unit(u) => out.push(*u),
            Expr::Num(_) | Expr::Pi => {}
            Expr::Neg(e) => e.units(out),
            Expr::Bin(_, a, b) => {
                a.units(out);
                b.units(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Number {
    Lit(Decimal),
    Expr(Expr),
}

impl Number {
    pub fn literal(&self) -> Option<Decimal> {
        match self {
            Number::Lit(d) => Some(*d),
            Number::Expr(_) => None,
        }
    }
}

/// A number together with the unit it is expressed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub value: Number,
    pub unit: Unit,
}

impl Scalar {
    pub fn new(value: Decimal, unit: Unit) -> Self {
        Scalar { value: Number::Lit(value), unit }
    }

    pub fn mm(value: Decimal) -> Self {
        Self::new(value, Unit::Millimeter)
    }

    pub fn deg(value: Decimal) -> Self {
        Self::new(value, Unit::Degree)
    }

    pub fn plain(value: Decimal) -> Self {
        Self::new(value, Unit::None)
    }

    pub fn literal(&self) -> Option<Decimal> {
        self.value.literal()
    }

    /// Literal in a canonical unit.
    pub fn is_canonical(&self) -> bool {
        self.unit.is_canonical() && matches!(self.value, Number::Lit(_))
    }

    pub fn to_f64(&self) -> Option<f64> {
        use rust_decimal::prelude::ToPrimitive;
        self.literal().and_then(|d| d.to_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vec2(pub [Scalar; 2]);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [Scalar; 3]);

impl Vec2 {
    pub fn mm(x: Decimal, y: Decimal) -> Self {
        Vec2([Scalar::mm(x), Scalar::mm(y)])
    }

    pub fn to_f64(&self) -> Option<[f64; 2]> {
        Some([self.0[0].to_f64()?, self.0[1].to_f64()?])
    }
}

impl Vec3 {
    pub fn to_f64(&self) -> Option<[f64; 3]> {
        Some([self.0[0].to_f64()?, self.0[1].to_f64()?, self.0[2].to_f64()?])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    Vertex,
    Edge,
    Face,
    Body,
}

impl EntityType {
    pub fn token(self) -> &'static str {
        match self {
            EntityType::Vertex => "VERTEX",
            EntityType::Edge => "EDGE",
            EntityType::Face => "FACE",
            EntityType::Body => "BODY",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "VERTEX" => Some(EntityType::Vertex),
            "EDGE" => Some(EntityType::Edge),
            "FACE" => Some(EntityType::Face),
            "BODY" => Some(EntityType::Body),
            _ => None,
        }
    }
}

/// Reference to geometric entities produced by an earlier operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    /// Producing feature, or a sketch entity of an earlier sketch.
    pub op_id: Identifier,
    pub query_type: String,
    pub entity_type: EntityType,
    pub disambiguation: Vec<Disambiguation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Disambiguation {
    /// Entities descending from the listed ancestors.
    OriginalSet(Vec<Query>),
    /// Entities adjacent to the listed neighbors.
    Topology(Vec<Query>),
}

impl Disambiguation {
    pub fn queries(&self) -> &[Query] {
        match self {
            Disambiguation::OriginalSet(q) | Disambiguation::Topology(q) => q,
        }
    }

    pub fn queries_mut(&mut self) -> &mut Vec<Query> {
        match self {
            Disambiguation::OriginalSet(q) | Disambiguation::Topology(q) => q,
        }
    }
}

impl Query {
    pub fn new(op_id: Identifier, query_type: &str, entity_type: EntityType) -> Self {
        Query { op_id, query_type: query_type.to_string(), entity_type, disambiguation: Vec::new() }
    }

    /// Visits this query and every nested disambiguation query, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Query)) {
        f(self);
        for d in &self.disambiguation {
            for q in d.queries() {
                q.walk(f);
            }
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Query)) {
        f(self);
        for d in &mut self.disambiguation {
            for q in d.queries_mut() {
                q.walk_mut(f);
            }
        }
    }
}

/// One curve or annotation inside a sketch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchEntity {
    pub id: Identifier,
    pub geom: SketchGeom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SketchGeom {
    Line { start: Vec2, end: Vec2 },
    Circle { center: Vec2, radius: Scalar },
    Arc { start: Vec2, mid: Vec2, end: Vec2 },
    Ellipse { center: Vec2, major_radius: Scalar, minor_radius: Scalar, rotation: Scalar },
    EllipticalArc {
        center: Vec2,
        major_radius: Scalar,
        minor_radius: Scalar,
        rotation: Scalar,
        start_angle: Scalar,
        end_angle: Scalar,
    },
    Bezier { points: Vec<Vec2> },
    Spline { points: Vec<Vec2> },
    Text { value: String, anchor: Vec2, height: Scalar },
    /// Raw-only: line given by origin, direction and length.
    LineByDirection { origin: Vec2, direction: Vec2, length: Scalar },
    /// Raw-only: arc given by center, radius and counter-clockwise angles.
    ArcByAngles { center: Vec2, radius: Scalar, start_angle: Scalar, end_angle: Scalar },
}

/// The eight sketch-primitive families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PrimitiveFamily {
    Line,
    Circle,
    Arc,
    Ellipse,
    EllipticalArc,
    Bezier,
    Spline,
    Text,
}

impl PrimitiveFamily {
    pub const ALL: [PrimitiveFamily; 8] = [
        PrimitiveFamily::Line,
        PrimitiveFamily::Circle,
        PrimitiveFamily::Arc,
        PrimitiveFamily::Ellipse,
        PrimitiveFamily::EllipticalArc,
        PrimitiveFamily::Bezier,
        PrimitiveFamily::Spline,
        PrimitiveFamily::Text,
    ];
}

impl SketchGeom {
    pub fn family(&self) -> PrimitiveFamily {
        match self {
            SketchGeom::Line { .. } | SketchGeom::LineByDirection { .. } => PrimitiveFamily::Line,
            SketchGeom::Circle { .. } => PrimitiveFamily::Circle,
            SketchGeom::Arc { .. } | SketchGeom::ArcByAngles { .. } => PrimitiveFamily::Arc,
            SketchGeom::Ellipse { .. } => PrimitiveFamily::Ellipse,
            SketchGeom::EllipticalArc { .. } => PrimitiveFamily::EllipticalArc,
            SketchGeom::Bezier { .. } => PrimitiveFamily::Bezier,
            SketchGeom::Spline { .. } => PrimitiveFamily::Spline,
            SketchGeom::Text { .. } => PrimitiveFamily::Text,
        }
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self, SketchGeom::LineByDirection { .. } | SketchGeom::ArcByAngles { .. })
    }

    /// Visits every scalar, including vector components.
    pub fn for_each_scalar_mut(&mut self, f: &mut impl FnMut(&mut Scalar)) {
        fn v2(v: &mut Vec2, f: &mut impl FnMut(&mut Scalar)) {
            v.0.iter_mut().for_each(&mut *f);
        }
        match self {
            SketchGeom::Line { start, end } => {
                v2(start, f);
                v2(end, f);
            }
            SketchGeom::Circle { center, radius } => {
                v2(center, f);
                f(radius);
            }
            SketchGeom::Arc { start, mid, end } => {
                v2(start, f);
                v2(mid, f);
                v2(end, f);
            }
            SketchGeom::Ellipse { center, major_radius, minor_radius, rotation } => {
                v2(center, f);
                f(major_radius);
                f(minor_radius);
                f(rotation);
            }
            SketchGeom::EllipticalArc {
                center,
                major_radius,
                minor_radius,
                rotation,
                start_angle,
                end_angle,
            } => {
                v2(center, f);
                f(major_radius);
                f(minor_radius);
                f(rotation);
                f(start_angle);
                f(end_angle);
            }
            SketchGeom::Bezier { points } | SketchGeom::Spline { points } => {
                points.iter_mut().for_each(|p| v2(p, f));
            }
            SketchGeom::Text { anchor, height, .. } => {
                v2(anchor, f);
                f(height);
            }
            SketchGeom::LineByDirection { origin, direction, length } => {
                v2(origin, f);
                v2(direction, f);
                f(length);
            }
            SketchGeom::ArcByAngles { center, radius, start_angle, end_angle } => {
                v2(center, f);
                f(radius);
                f(start_angle);
                f(end_angle);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Scalar(Scalar),
    Integer(i64),
    Vec2(Vec2),
    Vec3(Vec3),
    Boolean(bool),
    Text(String),
    Query(Query),
    EntityList(Vec<Query>),
    SketchBody(Vec<SketchEntity>),
}

impl ParamValue {
    pub fn queries(&self) -> &[Query] {
        match self {
            ParamValue::Query(q) => std::slice::from_ref(q),
            ParamValue::EntityList(qs) => qs,
            _ => &[],
        }
    }

    pub fn queries_mut(&mut self) -> &mut [Query] {
        match self {
            ParamValue::Query(q) => std::slice::from_mut(q),
            ParamValue::EntityList(qs) => qs,
            _ => &mut [],
        }
    }

    pub fn for_each_scalar_mut(&mut self, f: &mut impl FnMut(&mut Scalar)) {
        match self {
            ParamValue::Scalar(s) => f(s),
            ParamValue::Vec2(v) => v.0.iter_mut().for_each(f),
            ParamValue::Vec3(v) => v.0.iter_mut().for_each(f),
            ParamValue::SketchBody(entities) => {
                entities.iter_mut().for_each(|e| e.geom.for_each_scalar_mut(f))
            }
            _ => {}
        }
    }
}

/// One modeling operation of the history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub id: Identifier,
    pub kind: OpKind,
    pub params: BTreeMap<String, ParamValue>,
}

impl Feature {
    pub fn new(id: Identifier, kind: OpKind) -> Self {
        Feature { id, kind, params: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, value: ParamValue) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn param(&self, name: &str) -> Option<&ParamValue> {
        self.params.get(name)
    }

    pub fn scalar(&self, name: &str) -> Option<&Scalar> {
        match self.params.get(name) {
            Some(ParamValue::Scalar(s)) => Some(s),
            _ => None,
        }
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        match self.params.get(name) {
            Some(ParamValue::Boolean(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.params.get(name) {
            Some(ParamValue::Text(t)) => Some(t),
            _ => None,
        }
    }

    pub fn sketch_entities(&self) -> &[SketchEntity] {
        match self.params.get("entities") {
            Some(ParamValue::SketchBody(e)) => e,
            _ => &[],
        }
    }

    pub fn sketch_entities_mut(&mut self) -> Option<&mut Vec<SketchEntity>> {
        match self.params.get_mut("entities") {
            Some(ParamValue::SketchBody(e)) => Some(e),
            _ => None,
        }
    }

    /// Top-level queries with the parameter they sit in.
    pub fn param_queries(&self) -> impl Iterator<Item = (&str, &Query)> {
        self.params
            .iter()
            .flat_map(|(name, v)| v.queries().iter().map(move |q| (name.as_str(), q)))
    }

    /// Every query at any nesting depth.
    pub fn all_queries(&self) -> Vec<&Query> {
        let mut out = Vec::new();
        for (_, q) in self.param_queries() {
            q.walk(&mut |q| out.push(q));
        }
        out
    }

    pub fn for_each_query_mut(&mut self, f: &mut impl FnMut(&mut Query)) {
        for v in self.params.values_mut() {
            for q in v.queries_mut() {
                q.walk_mut(f);
            }
        }
    }

    pub fn for_each_scalar_mut(&mut self, f: &mut impl FnMut(&mut Scalar)) {
        for v in self.params.values_mut() {
            v.for_each_scalar_mut(f);
        }
    }
}

/// An ordered design history.
///
/// Equality is structural over the feature list; `source_name` is a label.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Program {
    pub source_name: String,
    pub features: Vec<Feature>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.features == other.features
    }
}

impl Program {
    pub fn new(source_name: impl Into<String>, features: Vec<Feature>) -> Self {
        Program { source_name: source_name.into(), features }
    }

    pub fn position(&self, id: &Identifier) -> Option<usize> {
        self.features.iter().position(|f| &f.id == id)
    }

    pub fn feature(&self, id: &Identifier) -> Option<&Feature> {
        self.features.iter().find(|f| &f.id == id)
    }

    /// Maps every sketch entity id to the position of its sketch.
    pub fn entity_owners(&self) -> BTreeMap<Identifier, usize> {
        let mut out = BTreeMap::new();
        for (i, f) in self.features.iter().enumerate() {
            for e in f.sketch_entities() {
                out.entry(e.id.clone()).or_insert(i);
            }
        }
        out
    }

    pub fn entity(&self, id: &Identifier) -> Option<(&Feature, &SketchEntity)> {
        self.features
            .iter()
            .find_map(|f| f.sketch_entities().iter().find(|e| &e.id == id).map(|e| (f, e)))
    }

    /// Position of the feature a query's `op_id` designates: the feature itself
    /// or the sketch owning the entity.
    pub fn resolve(&self, id: &Identifier) -> Option<usize> {
        self.position(id).or_else(|| {
            self.features
                .iter()
                .position(|f| f.sketch_entities().iter().any(|e| &e.id == id))
        })
    }

    pub fn kinds(&self) -> impl Iterator<Item = OpKind> + '_ {
        self.features.iter().map(|f| f.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_identifier_families() {
        assert_eq!(Identifier::new("F12").canonical_parts(), Some((IdFamily::Feature, 12)));
        assert_eq!(Identifier::new("S0").canonical_parts(), Some((IdFamily::SketchEntity, 0)));
        assert_eq!(Identifier::new("E3").canonical_parts(), Some((IdFamily::Edge, 3)));
        assert_eq!(Identifier::new("V7").canonical_parts(), Some((IdFamily::Vertex, 7)));
        for raw in ["F01", "F", "FqX9z", "f1", "S-1", "F1a", ""] {
            assert!(!Identifier::new(raw).is_canonical(), "{raw}");
        }
    }

    #[test]
    fn kind_keywords_are_distinct() {
        let mut kws: Vec<_> = OpKind::ALL.iter().map(|k| k.keyword()).collect();
        kws.sort();
        kws.dedup();
        assert_eq!(kws.len(), 15);
        for k in OpKind::ALL {
            assert_eq!(OpKind::from_keyword(k.keyword()), Some(k));
            assert_eq!(OpKind::from_label(k.label()), Some(k));
        }
    }

    #[test]
    fn unit_tokens() {
        assert_eq!(Unit::from_token("inch"), Some(Unit::Inch));
        assert_eq!(Unit::from_token("in"), Some(Unit::Inch));
        assert_eq!(Unit::from_token("rad").map(Unit::dimension), Some(Dimension::Angle));
        assert_eq!(Unit::from_token("parsec"), None);
    }

    proptest::proptest! {
        #[test]
        fn canonical_ids_round_trip(n in 0u64..1_000_000, fam in 0usize..4) {
            let family = [IdFamily::Feature, IdFamily::SketchEntity, IdFamily::Edge, IdFamily::Vertex][fam];
            let id = Identifier::canonical(family, n);
            proptest::prop_assert_eq!(id.canonical_parts(), Some((family, n)));
            proptest::prop_assert_eq!(Identifier::new(id.to_string()), id);
        }
    }
}
