use std::fmt::Write;

use rust_decimal::{Decimal, RoundingStrategy};

use super::lexer::escape;
use crate::ast::{
    BinOp, Disambiguation, Expr, Feature, Number, OpKind, ParamValue, Program, Query, Scalar, SketchEntity,
    SketchGeom, Vec2, Vec3,
};
use crate::schema::schema;

/// Canonical text with two-decimal numbers.
pub fn emit(program: &Program) -> String {
    emit_with_precision(program, Some(2))
}

/// `precision = None` prints literals at full precision.
pub fn emit_with_precision(program: &Program, precision: Option<u32>) -> String {
    let e = Emitter { precision };
    let mut out = String::new();
    for f in &program.features {
        e.feature(f, &mut out);
    }
    out
}

/// Text of a single query literal.
pub fn emit_query(q: &Query) -> String {
    let mut out = String::new();
    Emitter { precision: Some(2) }.query(q, &mut out);
    out
}

/// Rounds half away from zero and prints exactly `dp` decimals; never `-0`.
pub fn format_decimal(d: Decimal, dp: u32) -> String {
    let mut r = d.round_dp_with_strategy(dp, RoundingStrategy::MidpointAwayFromZero);
    if r.is_zero() {
        r = Decimal::ZERO;
    }
    r.rescale(dp);
    r.to_string()
}

struct Emitter {
    precision: Option<u32>,
}

impl Emitter {
    fn feature(&self, f: &Feature, out: &mut String) {
        let s = schema(f.kind);
        write!(out, "{}({}", s.keyword, f.id).unwrap();
        if let OpKind::Boolean(mode) = f.kind {
            write!(out, ", mode = \"{}\"", mode.token()).unwrap();
        }
        let known = s.params.iter().filter_map(|p| f.params.get_key_value(p.name));
        let extra = f.params.iter().filter(|(k, _)| s.param(k).is_none());
        for (name, value) in known.chain(extra) {
            write!(out, ", {name} = ").unwrap();
            self.value(value, out);
        }
        out.push_str(");\n");
    }

    fn value(&self, v: &ParamValue, out: &mut String) {
        match v {
            ParamValue::Scalar(s) => self.scalar(s, out),
            ParamValue::Integer(n) => write!(out, "{n}").unwrap(),
            ParamValue::Vec2(v) => self.vec2(v, out),
            ParamValue::Vec3(v) => self.vec3(v, out),
            ParamValue::Boolean(b) => write!(out, "{b}").unwrap(),
            ParamValue::Text(t) => out.push_str(&escape(t)),
            ParamValue::Query(q) => self.query(q, out),
            ParamValue::EntityList(qs) => self.query_list(qs, out),
            ParamValue::SketchBody(es) if es.is_empty() => out.push_str("[]"),
            ParamValue::SketchBody(es) => {
                out.push_str("[\n");
                for e in es {
                    out.push_str("    ");
                    self.entity(e, out);
                    out.push_str(",\n");
                }
                out.push(']');
            }
        }
    }

    fn query_list(&self, qs: &[Query], out: &mut String) {
        out.push('[');
        for (i, q) in qs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.query(q, out);
        }
        out.push(']');
    }

    fn query(&self, q: &Query, out: &mut String) {
        write!(out, "makeQuery({}, {}, {}, [", q.op_id, q.query_type, q.entity_type.token()).unwrap();
        for (i, d) in q.disambiguation.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(match d {
                Disambiguation::OriginalSet(_) => "original(",
                Disambiguation::Topology(_) => "adjacent(",
            });
            self.query_list(d.queries(), out);
            out.push(')');
        }
        out.push_str("])");
    }

    fn entity(&self, e: &SketchEntity, out: &mut String) {
        let mut fields: Vec<(&str, Field)> = Vec::new();
        let keyword = match &e.geom {
            SketchGeom::Line { start, end } => {
                fields.extend([("start", Field::P(start)), ("end", Field::P(end))]);
                "line"
            }
            SketchGeom::LineByDirection { origin, direction, length } => {
                fields.extend([("origin", Field::P(origin)), ("direction", Field::P(direction)), ("length", Field::S(length))]);
                "line"
            }
            SketchGeom::Circle { center, radius } => {
                fields.extend([("center", Field::P(center)), ("radius", Field::S(radius))]);
                "circle"
            }
            SketchGeom::Arc { start, mid, end } => {
                fields.extend([("start", Field::P(start)), ("mid", Field::P(mid)), ("end", Field::P(end))]);
                "arc"
            }
            SketchGeom::ArcByAngles { center, radius, start_angle, end_angle } => {
                fields.extend([
                    ("center", Field::P(center)),
                    ("radius", Field::S(radius)),
                    ("startAngle", Field::S(start_angle)),
                    ("endAngle", Field::S(end_angle)),
                ]);
                "arc"
            }
            SketchGeom::Ellipse { center, major_radius, minor_radius, rotation } => {
                fields.extend([
                    ("center", Field::P(center)),
                    ("majorRadius", Field::S(major_radius)),
                    ("minorRadius", Field::S(minor_radius)),
                    ("rotation", Field::S(rotation)),
                ]);
                "ellipse"
            }
            SketchGeom::EllipticalArc { center, major_radius, minor_radius, rotation, start_angle, end_angle } => {
                fields.extend([
                    ("center", Field::P(center)),
                    ("majorRadius", Field::S(major_radius)),
                    ("minorRadius", Field::S(minor_radius)),
                    ("rotation", Field::S(rotation)),
                    ("startAngle", Field::S(start_angle)),
                    ("endAngle", Field::S(end_angle)),
                ]);
                "ellipticalArc"
            }
            SketchGeom::Bezier { points } => {
                fields.push(("points", Field::Ps(points)));
                "bezier"
            }
            SketchGeom::Spline { points } => {
                fields.push(("points", Field::Ps(points)));
                "spline"
            }
            SketchGeom::Text { value, anchor, height } => {
                fields.extend([("value", Field::T(value)), ("anchor", Field::P(anchor)), ("height", Field::S(height))]);
                "text"
            }
        };
        write!(out, "{keyword}({}", e.id).unwrap();
        for (name, field) in fields {
            write!(out, ", {name} = ").unwrap();
            match field {
                Field::P(p) => self.vec2(p, out),
                Field::S(s) => self.scalar(s, out),
                Field::T(t) => out.push_str(&escape(t)),
                Field::Ps(ps) => {
                    out.push('[');
                    for (i, p) in ps.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        self.vec2(p, out);
                    }
                    out.push(']');
                }
            }
        }
        out.push(')');
    }

    fn vec2(&self, v: &Vec2, out: &mut String) {
        out.push('(');
        self.scalar(&v.0[0], out);
        out.push_str(", ");
        self.scalar(&v.0[1], out);
        out.push(')');
    }

    fn vec3(&self, v: &Vec3, out: &mut String) {
        out.push('(');
        for (i, s) in v.0.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.scalar(s, out);
        }
        out.push(')');
    }

    fn scalar(&self, s: &Scalar, out: &mut String) {
        let suffix = !s.unit.is_canonical();
        match &s.value {
            Number::Lit(d) => out.push_str(&self.decimal(*d)),
            Number::Expr(e) if suffix => {
                out.push('(');
                self.expr(e, 0, out);
                out.push(')');
            }
            Number::Expr(e) => self.expr(e, 0, out),
        }
        if suffix {
            write!(out, " * {}", s.unit.token()).unwrap();
        }
    }

    fn decimal(&self, d: Decimal) -> String {
        match self.precision {
            Some(dp) => format_decimal(d, dp),
            None => d.normalize().to_string(),
        }
    }

    /// `ctx` is the binding strength required by the surrounding context.
    fn expr(&self, e: &Expr, ctx: u8, out: &mut String) {
        let (prec, body): (u8, Box<dyn Fn(&mut String) + '_>) = match e {
            Expr::Num(d) if d.is_sign_negative() && !d.is_zero() => {
                (3, Box::new(move |o: &mut String| o.push_str(&self.decimal(*d))))
            }
            Expr::Num(d) => (4, Box::new(move |o: &mut String| o.push_str(&self.decimal(*d)))),
            Expr::Pi => (4, Box::new(|o: &mut String| o.push_str("PI"))),
            Expr::Unit(u) => (4, Box::new(move |o: &mut String| o.push_str(u.token()))),
            Expr::Neg(inner) => (
                3,
                Box::new(move |o: &mut String| {
                    o.push('-');
                    self.expr(inner, 3, o);
                }),
            ),
            Expr::Bin(op, a, b) => {
                let p = match op {
                    BinOp::Add | BinOp::Sub => 1,
                    BinOp::Mul | BinOp::Div => 2,
                };
                (
                    p,
                    Box::new(move |o: &mut String| {
                        self.expr(a, p, o);
                        write!(o, " {} ", op.symbol()).unwrap();
                        self.expr(b, p + 1, o);
                    }),
                )
            }
        };
        if prec < ctx {
            out.push('(');
            body(out);
            out.push(')');
        } else {
            body(out);
        }
    }
}

enum Field<'a> {
    P(&'a Vec2),
    S(&'a Scalar),
    T(&'a str),
    Ps(&'a [Vec2]),
}
