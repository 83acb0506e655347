use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;

use super::lexer::{tokenize, unescape, Token, TokenKind};
use super::{Dialect, ParseError};
use crate::ast::{
    BinOp, BoolMode, Dimension, Disambiguation, EntityType, Expr, Feature, IdFamily, Identifier, Number,
    OpKind, ParamValue, Program, Query, Scalar, SketchEntity, SketchGeom, Unit, Vec2, Vec3,
};
use crate::schema::{entity_schemas, schema, SlotType};
use crate::validate::{check_entity, check_value, validate_structure, Severity};

/// Parses a program. Canonical results satisfy `validate_structure`; raw
/// results defer reference checks to normalization.
pub fn parse(text: &str, dialect: Dialect) -> Result<Program, ParseError> {
    parse_named(text, dialect, "<input>")
}

pub fn parse_named(text: &str, dialect: Dialect, source_name: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text, dialect)?;
    let eof = eof_position(text);
    let mut p = Parser { toks: &tokens, pos: 0, dialect, eof };
    let mut features = Vec::new();
    let mut positions: BTreeMap<Identifier, Pos> = BTreeMap::new();
    let mut ids: BTreeSet<Identifier> = BTreeSet::new();
    while p.peek().is_some() {
        let (feature, pos) = p.statement()?;
        if !ids.insert(feature.id.clone()) {
            return Err(pos.error(format!("duplicate identifier {}", feature.id)));
        }
        for e in feature.sketch_entities() {
            if !ids.insert(e.id.clone()) {
                return Err(pos.error(format!("duplicate identifier {}", e.id)));
            }
        }
        positions.insert(feature.id.clone(), pos);
        features.push(feature);
    }
    let program = Program::new(source_name, features);
    if dialect == Dialect::Canonical {
        if let Some(d) = validate_structure(&program).into_iter().find(|d| d.severity == Severity::Error) {
            let pos = d.feature.as_ref().and_then(|id| positions.get(id)).copied().unwrap_or(Pos { line: 1, column: 1 });
            return Err(pos.error(d.message));
        }
    }
    Ok(program)
}

fn eof_position(text: &str) -> Pos {
    let line = text.matches('\n').count() + 1;
    let column = text.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
    Pos { line, column }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    fn of(t: &Token) -> Self {
        Pos { line: t.line, column: t.column }
    }

    fn error(self, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.line, self.column, msg)
    }
}

struct Syn {
    kind: SynKind,
    pos: Pos,
}

enum SynKind {
    /// `integer` is set for a bare (possibly negated) integer literal.
    Number { expr: Expr, integer: Option<i64> },
    Str(String),
    Bool(bool),
    Query(Query),
    List(Vec<Syn>),
    Tuple(Vec<Syn>),
    Entity { keyword: String, id: Identifier, args: Vec<(String, Syn)> },
}

impl SynKind {
    fn describe(&self) -> &'static str {
        match self {
            SynKind::Number { .. } => "number",
            SynKind::Str(_) => "string",
            SynKind::Bool(_) => "boolean",
            SynKind::Query(_) => "query",
            SynKind::List(_) => "list",
            SynKind::Tuple(_) => "vector",
            SynKind::Entity { .. } => "sketch entity",
        }
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    dialect: Dialect,
    eof: Pos,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + k)
    }

    fn here(&self) -> Pos {
        self.peek().map(Pos::of).unwrap_or(self.eof)
    }

    fn error(&self, msg: impl Into<String>, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!("found `{}`", t.lexeme),
            None => "found end of input".to_string(),
        };
        self.here().error(format!("{}, {found}", msg.into())).expecting(expected)
    }

    fn is_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Punct && t.lexeme == p)
    }

    fn is_keyword(&self, k: &str) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Keyword && t.lexeme == k)
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.is_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`"), &[p]))
        }
    }

    fn expect_keyword(&mut self, k: &str) -> Result<(), ParseError> {
        if self.is_keyword(k) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{k}`"), &[k]))
        }
    }

    fn expect_word(&mut self, what: &str) -> Result<&'a Token, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.error(format!("expected {what}"), &[what])),
        }
    }

    fn identifier(&mut self, what: &str, family: Option<IdFamily>) -> Result<Identifier, ParseError> {
        let t = self.expect_word(what)?;
        let id = Identifier::new(&t.lexeme);
        if self.dialect == Dialect::Canonical {
            let ok = match (id.canonical_parts(), family) {
                (Some((f, _)), Some(want)) => f == want,
                (Some((f, _)), None) => matches!(f, IdFamily::Feature | IdFamily::SketchEntity),
                (None, _) => false,
            };
            if !ok {
                return Err(Pos::of(t).error(format!("non-canonical identifier `{}`", t.lexeme)));
            }
        }
        Ok(id)
    }

    fn statement(&mut self) -> Result<(Feature, Pos), ParseError> {
        let head = self.expect_word("operation name")?;
        let pos = Pos::of(head);
        let mut kind = OpKind::from_keyword(&head.lexeme)
            .ok_or_else(|| pos.error(format!("unknown operation `{}`", head.lexeme)))?;
        self.expect_punct("(")?;
        let id = self.identifier("feature identifier", Some(IdFamily::Feature))?;
        let mut args = Vec::new();
        while self.is_punct(",") {
            self.pos += 1;
            args.push(self.named_arg()?);
        }
        self.expect_punct(")")?;
        if self.dialect == Dialect::Canonical || self.is_punct(";") {
            self.expect_punct(";")?;
        }

        let op_schema = schema(kind);
        let mut feature = Feature::new(id, kind);
        let mut mode = None;
        for (name, name_pos, value) in args {
            if matches!(kind, OpKind::Boolean(_)) && name == "mode" {
                let token = match &value.kind {
                    SynKind::Str(s) => BoolMode::from_token(s),
                    _ => None,
                };
                let m = token.ok_or_else(|| {
                    value.pos.error("`mode` must be \"UNION\", \"SUBTRACT\" or \"INTERSECT\"")
                })?;
                if mode.replace(m).is_some() {
                    return Err(name_pos.error("duplicate parameter `mode`"));
                }
                continue;
            }
            let spec = op_schema
                .param(&name)
                .ok_or_else(|| name_pos.error(format!("unknown parameter `{name}` for {}", kind.label())))?;
            if feature.params.contains_key(&name) {
                return Err(name_pos.error(format!("duplicate parameter `{name}`")));
            }
            let v = self.to_param(spec.ty, spec.required(), value)?;
            feature.params.insert(name, v);
        }
        if let OpKind::Boolean(_) = kind {
            kind = OpKind::Boolean(mode.ok_or_else(|| pos.error("missing required parameter `mode`"))?);
            feature.kind = kind;
        }
        let missing: Vec<String> = op_schema
            .params
            .iter()
            .filter(|s| s.required() && !feature.params.contains_key(s.name))
            .map(|s| format!("`{}`", s.name))
            .collect();
        match missing.len() {
            0 => {}
            1 => return Err(pos.error(format!("missing required parameter {}", missing[0]))),
            _ => return Err(pos.error(format!("missing required parameters {}", missing.join(", ")))),
        }
        Ok((feature, pos))
    }

    fn named_arg(&mut self) -> Result<(String, Pos, Syn), ParseError> {
        let name = self.expect_word("parameter name")?;
        self.expect_punct("=")?;
        let value = self.value()?;
        Ok((name.lexeme.clone(), Pos::of(name), value))
    }

    fn value(&mut self) -> Result<Syn, ParseError> {
        let pos = self.here();
        let Some(t) = self.peek() else {
            return Err(self.error("expected value", &["value"]));
        };
        let kind = match (t.kind, t.lexeme.as_str()) {
            (TokenKind::String, _) => {
                self.pos += 1;
                SynKind::Str(unescape(&t.lexeme))
            }
            (TokenKind::Keyword, "true") => {
                self.pos += 1;
                SynKind::Bool(true)
            }
            (TokenKind::Keyword, "false") => {
                self.pos += 1;
                SynKind::Bool(false)
            }
            (TokenKind::Keyword, "makeQuery") => SynKind::Query(self.query()?),
            (TokenKind::Punct, "[") => {
                self.pos += 1;
                let mut items = Vec::new();
                while !self.is_punct("]") {
                    items.push(self.value()?);
                    if !self.is_punct(",") {
                        break;
                    }
                    self.pos += 1;
                }
                self.expect_punct("]")?;
                SynKind::List(items)
            }
            (TokenKind::Identifier, _) if self.peek_at(1).is_some_and(|n| n.lexeme == "(") => self.entity()?,
            (TokenKind::Punct, "(") if self.dialect == Dialect::Canonical || self.paren_is_tuple() => {
                self.pos += 1;
                let mut items = vec![self.number()?];
                while self.is_punct(",") {
                    self.pos += 1;
                    items.push(self.number()?);
                }
                self.expect_punct(")")?;
                SynKind::Tuple(items)
            }
            _ => return self.number(),
        };
        Ok(Syn { kind, pos })
    }

    /// Whether the parenthesis at the cursor has a comma at its own nesting level.
    fn paren_is_tuple(&self) -> bool {
        let mut depth = 0usize;
        for t in &self.toks[self.pos..] {
            if t.kind != TokenKind::Punct {
                continue;
            }
            match t.lexeme.as_str() {
                "(" | "[" => depth += 1,
                ")" | "]" => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                "," if depth == 1 => return true,
                _ => {}
            }
        }
        false
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.expect_keyword("makeQuery")?;
        self.expect_punct("(")?;
        let op_id = self.identifier("operation identifier", None)?;
        self.expect_punct(",")?;
        let query_type = self.expect_word("query type")?.lexeme.clone();
        self.expect_punct(",")?;
        let et = self.expect_word("entity type")?;
        let entity_type = EntityType::from_token(&et.lexeme).ok_or_else(|| {
            Pos::of(et)
                .error(format!("unknown entity type `{}`", et.lexeme))
                .expecting(&["VERTEX", "EDGE", "FACE", "BODY"])
        })?;
        self.expect_punct(",")?;
        self.expect_punct("[")?;
        let mut disambiguation = Vec::new();
        while !self.is_punct("]") {
            let which = match self.peek() {
                Some(t) if t.kind == TokenKind::Keyword && (t.lexeme == "original" || t.lexeme == "adjacent") => {
                    self.pos += 1;
                    t.lexeme.as_str()
                }
                _ => return Err(self.error("expected disambiguation", &["original", "adjacent"])),
            };
            self.expect_punct("(")?;
            self.expect_punct("[")?;
            let mut qs = Vec::new();
            while !self.is_punct("]") {
                qs.push(self.query()?);
                if !self.is_punct(",") {
                    break;
                }
                self.pos += 1;
            }
            self.expect_punct("]")?;
            self.expect_punct(")")?;
            disambiguation.push(if which == "original" {
                Disambiguation::OriginalSet(qs)
            } else {
                Disambiguation::Topology(qs)
            });
            if !self.is_punct(",") {
                break;
            }
            self.pos += 1;
        }
        self.expect_punct("]")?;
        self.expect_punct(")")?;
        Ok(Query { op_id, query_type, entity_type, disambiguation })
    }

    fn entity(&mut self) -> Result<SynKind, ParseError> {
        let keyword = self.expect_word("sketch entity")?.lexeme.clone();
        self.expect_punct("(")?;
        let id = self.identifier("entity identifier", Some(IdFamily::SketchEntity))?;
        let mut args = Vec::new();
        while self.is_punct(",") {
            self.pos += 1;
            let (name, _, v) = self.named_arg()?;
            args.push((name, v));
        }
        self.expect_punct(")")?;
        Ok(SynKind::Entity { keyword, id, args })
    }

    fn number(&mut self) -> Result<Syn, ParseError> {
        let pos = self.here();
        let start = self.pos;
        let expr = match self.dialect {
            Dialect::Canonical => {
                let neg = self.is_punct("-");
                if neg {
                    self.pos += 1;
                }
                let t = match self.peek() {
                    Some(t) if t.kind == TokenKind::Number => t,
                    _ => return Err(self.error("expected number", &["number"])),
                };
                self.pos += 1;
                if self.peek().is_some_and(|t| {
                    t.kind == TokenKind::Punct && matches!(t.lexeme.as_str(), "+" | "-" | "*" | "/")
                }) {
                    return Err(self.here().error("arithmetic expressions not allowed in canonical dialect"));
                }
                let d = parse_decimal(t)?;
                Expr::Num(if neg { -d } else { d })
            }
            Dialect::Raw => self.expr()?,
        };
        let consumed = &self.toks[start..self.pos];
        let integer = match consumed {
            [t] if t.kind == TokenKind::Number && !t.lexeme.contains('.') => t.lexeme.parse().ok(),
            [m, t] if m.lexeme == "-" && t.kind == TokenKind::Number && !t.lexeme.contains('.') => {
                t.lexeme.parse::<i64>().ok().map(|n| -n)
            }
            _ => None,
        };
        Ok(Syn { kind: SynKind::Number { expr, integer }, pos })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_punct("+") {
                BinOp::Add
            } else if self.is_punct("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if let Some(t) = self.peek().filter(|t| t.kind == TokenKind::UnitSuffix) {
                self.pos += 1;
                let unit = Unit::from_token(&t.lexeme).expect("lexer checked unit");
                lhs = Expr::bin(BinOp::Mul, lhs, Expr::Unit(unit));
                continue;
            }
            let op = if self.is_punct("*") {
                BinOp::Mul
            } else if self.is_punct("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_punct("-") {
            self.pos += 1;
            return Ok(match self.unary()? {
                Expr::Num(d) => Expr::Num(-d),
                e => Expr::Neg(Box::new(e)),
            });
        }
        let Some(t) = self.peek() else {
            return Err(self.error("expected number", &["number", "PI", "unit", "("]));
        };
        match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                Ok(Expr::Num(parse_decimal(t)?))
            }
            TokenKind::Keyword if t.lexeme == "PI" => {
                self.pos += 1;
                Ok(Expr::Pi)
            }
            TokenKind::UnitSuffix => {
                self.pos += 1;
                Ok(Expr::Unit(Unit::from_token(&t.lexeme).expect("lexer checked unit")))
            }
            TokenKind::Punct if t.lexeme == "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.error("expected number", &["number", "PI", "unit", "("])),
        }
    }

    fn scalar(&self, syn: Syn, dim: Dimension) -> Result<Scalar, ParseError> {
        let pos = syn.pos;
        let SynKind::Number { expr, .. } = syn.kind else {
            return Err(pos.error(format!("expected number, found {}", syn.kind.describe())));
        };
        let canonical = Unit::canonical_for(dim);
        let mut atoms = Vec::new();
        expr.units(&mut atoms);
        if let Some(bad) = atoms.iter().find(|u| u.dimension() != dim) {
            return Err(pos.error(format!("unit `{}` does not fit a {dim:?} parameter", bad.token())));
        }
        let scalar = match expr {
            Expr::Unit(u) => Scalar::new(Decimal::ONE, u),
            Expr::Bin(BinOp::Mul, a, b) if matches!(*b, Expr::Unit(_)) && !a.contains_unit() => {
                let Expr::Unit(u) = *b else { unreachable!() };
                Scalar { value: to_number(*a), unit: u }
            }
            Expr::Bin(BinOp::Mul, a, b) if matches!(*a, Expr::Unit(_)) && !b.contains_unit() => {
                let Expr::Unit(u) = *a else { unreachable!() };
                Scalar { value: to_number(*b), unit: u }
            }
            e => Scalar { value: to_number(e), unit: canonical },
        };
        Ok(scalar)
    }

    fn vec2(&self, syn: Syn, dim: Dimension) -> Result<Vec2, ParseError> {
        let pos = syn.pos;
        match syn.kind {
            SynKind::Tuple(items) if items.len() == 2 => {
                let mut it = items.into_iter();
                let x = self.scalar(it.next().unwrap(), dim)?;
                let y = self.scalar(it.next().unwrap(), dim)?;
                Ok(Vec2([x, y]))
            }
            other => Err(pos.error(format!("expected 2D vector, found {}", other.describe()))),
        }
    }

    fn to_param(&self, ty: SlotType, required: bool, syn: Syn) -> Result<ParamValue, ParseError> {
        let pos = syn.pos;
        let mismatch = |found: &SynKind| pos.error(format!("expected {}, found {}", ty.describe(), found.describe()));
        let value = match ty {
            SlotType::Length => ParamValue::Scalar(self.scalar(syn, Dimension::Length)?),
            SlotType::Angle => ParamValue::Scalar(self.scalar(syn, Dimension::Angle)?),
            SlotType::Count => match syn.kind {
                SynKind::Number { integer: Some(n), .. } => ParamValue::Integer(n),
                ref other => return Err(mismatch(other)),
            },
            SlotType::Flag => match syn.kind {
                SynKind::Bool(b) => ParamValue::Boolean(b),
                ref other => return Err(mismatch(other)),
            },
            SlotType::Choice(_) => match syn.kind {
                SynKind::Str(s) => ParamValue::Text(s),
                ref other => return Err(mismatch(other)),
            },
            SlotType::PlaneRef => match syn.kind {
                SynKind::Str(s) => ParamValue::Text(s),
                SynKind::Query(q) => ParamValue::Query(q),
                ref other => return Err(mismatch(other)),
            },
            SlotType::Query => match syn.kind {
                SynKind::Query(q) => ParamValue::Query(q),
                ref other => return Err(mismatch(other)),
            },
            SlotType::QueryList => match syn.kind {
                SynKind::List(items) => {
                    let mut qs = Vec::with_capacity(items.len());
                    for item in items {
                        match item.kind {
                            SynKind::Query(q) => qs.push(q),
                            other => {
                                return Err(item.pos.error(format!("expected query, found {}", other.describe())))
                            }
                        }
                    }
                    ParamValue::EntityList(qs)
                }
                ref other => return Err(mismatch(other)),
            },
            SlotType::Point3 | SlotType::Direction3 => {
                let dim = ty.dimension().expect("vector slots have a dimension");
                match syn.kind {
                    SynKind::Tuple(items) if items.len() == 3 => {
                        let mut out = Vec::with_capacity(3);
                        for item in items {
                            out.push(self.scalar(item, dim)?);
                        }
                        let [x, y, z]: [Scalar; 3] = out.try_into().expect("three items");
                        ParamValue::Vec3(Vec3([x, y, z]))
                    }
                    ref other => return Err(mismatch(other)),
                }
            }
            SlotType::Sketch => match syn.kind {
                SynKind::List(items) => {
                    let mut entities = Vec::with_capacity(items.len());
                    for item in items {
                        entities.push(self.sketch_entity(item)?);
                    }
                    ParamValue::SketchBody(entities)
                }
                ref other => return Err(mismatch(other)),
            },
        };
        check_value(ty, &value, required).map_err(|m| pos.error(m))?;
        Ok(value)
    }

    fn sketch_entity(&self, syn: Syn) -> Result<SketchEntity, ParseError> {
        let pos = syn.pos;
        let SynKind::Entity { keyword, id, args } = syn.kind else {
            return Err(pos.error(format!("expected sketch entity, found {}", syn.kind.describe())));
        };
        let mut given: Vec<&str> = args.iter().map(|(n, _)| n.as_str()).collect();
        given.sort_unstable();
        let mut candidates = entity_schemas(&keyword).peekable();
        if candidates.peek().is_none() {
            return Err(pos.error(format!("unknown sketch entity `{keyword}`")));
        }
        let es = candidates
            .find(|s| {
                let mut names: Vec<&str> = s.fields.iter().map(|(n, _)| *n).collect();
                names.sort_unstable();
                names == given
            })
            .ok_or_else(|| pos.error(format!("no `{keyword}` form takes parameters ({})", given.join(", "))))?;
        if es.implicit && self.dialect == Dialect::Canonical {
            return Err(pos.error(format!("implicit `{keyword}` parameterization not allowed in canonical dialect")));
        }

        let mut fields: BTreeMap<String, Syn> = args.into_iter().collect();
        let mut take = |name: &str| fields.remove(name).expect("field set matched schema");
        let point = |s| self.vec2(s, Dimension::Length);
        let length = |s| self.scalar(s, Dimension::Length);
        let angle = |s| self.scalar(s, Dimension::Angle);
        let geom = match (keyword.as_str(), es.implicit) {
            ("line", false) => SketchGeom::Line { start: point(take("start"))?, end: point(take("end"))? },
            ("line", true) => SketchGeom::LineByDirection {
                origin: point(take("origin"))?,
                direction: self.vec2(take("direction"), Dimension::Dimensionless)?,
                length: length(take("length"))?,
            },
            ("circle", _) => SketchGeom::Circle { center: point(take("center"))?, radius: length(take("radius"))? },
            ("arc", false) => SketchGeom::Arc {
                start: point(take("start"))?,
                mid: point(take("mid"))?,
                end: point(take("end"))?,
            },
            ("arc", true) => SketchGeom::ArcByAngles {
                center: point(take("center"))?,
                radius: length(take("radius"))?,
                start_angle: angle(take("startAngle"))?,
                end_angle: angle(take("endAngle"))?,
            },
            ("ellipse", _) => SketchGeom::Ellipse {
                center: point(take("center"))?,
                major_radius: length(take("majorRadius"))?,
                minor_radius: length(take("minorRadius"))?,
                rotation: angle(take("rotation"))?,
            },
            ("ellipticalArc", _) => SketchGeom::EllipticalArc {
                center: point(take("center"))?,
                major_radius: length(take("majorRadius"))?,
                minor_radius: length(take("minorRadius"))?,
                rotation: angle(take("rotation"))?,
                start_angle: angle(take("startAngle"))?,
                end_angle: angle(take("endAngle"))?,
            },
            ("bezier" | "spline", _) => {
                let list = take("points");
                let lpos = list.pos;
                let SynKind::List(items) = list.kind else {
                    return Err(lpos.error("expected list of points"));
                };
                let points = items.into_iter().map(point).collect::<Result<Vec<_>, _>>()?;
                if keyword == "bezier" {
                    SketchGeom::Bezier { points }
                } else {
                    SketchGeom::Spline { points }
                }
            }
            ("text", _) => {
                let v = take("value");
                let value = match v.kind {
                    SynKind::Str(s) => s,
                    other => return Err(v.pos.error(format!("expected string, found {}", other.describe()))),
                };
                SketchGeom::Text { value, anchor: point(take("anchor"))?, height: length(take("height"))? }
            }
            _ => unreachable!("entity schema table and parser agree"),
        };
        check_entity(&geom).map_err(|m| pos.error(format!("entity {id}: {m}")))?;
        Ok(SketchEntity { id, geom })
    }
}

fn to_number(e: Expr) -> Number {
    match e {
        Expr::Num(d) => Number::Lit(d),
        e => Number::Expr(e),
    }
}

fn parse_decimal(t: &Token) -> Result<Decimal, ParseError> {
    t.lexeme
        .parse::<Decimal>()
        .map_err(|_| Pos::of(t).error(format!("number `{}` out of range", t.lexeme)))
}
