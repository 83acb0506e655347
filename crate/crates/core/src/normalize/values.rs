use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, MathematicalOps, RoundingStrategy};

use super::{PassError, PassName};
use crate::ast::{BinOp, Expr, Feature, Number, ParamValue, Program, Scalar, SketchGeom, Unit, Vec2};
use crate::eval::{eval_canonical, eval_expr, unit_factor, unit_factor_expr, EvalError, Value};

/// Applies `g` to every scalar of `f`, stopping at the first error and
/// reporting where it happened.
fn try_scalars(
    f: &mut Feature,
    mut g: impl FnMut(&mut Scalar) -> Result<(), String>,
) -> Result<(), (String, String)> {
    for (name, v) in f.params.iter_mut() {
        let mut visit = |location: String, each: &mut dyn FnMut(&mut dyn FnMut(&mut Scalar))| {
            let mut err = None;
            each(&mut |s: &mut Scalar| {
                if err.is_none() {
                    if let Err(m) = g(s) {
                        err = Some(m);
                    }
                }
            });
            err.map_or(Ok(()), |m| Err((location, m)))
        };
        match v {
            ParamValue::SketchBody(entities) => {
                for e in entities.iter_mut() {
                    visit(format!("entity {}", e.id), &mut |cb| e.geom.for_each_scalar_mut(&mut |s| cb(s)))?;
                }
            }
            other => visit(format!("parameter `{name}`"), &mut |cb| other.for_each_scalar_mut(&mut |s| cb(s)))?,
        }
    }
    Ok(())
}

fn per_feature(
    program: &Program,
    pass: PassName,
    g: impl Fn(&mut Scalar) -> Result<(), String>,
) -> Result<Program, PassError> {
    let mut out = program.clone();
    for f in &mut out.features {
        let id = f.id.clone();
        try_scalars(f, &g).map_err(|(loc, msg)| PassError::new(pass, Some(&id), msg).at(loc))?;
    }
    Ok(out)
}

fn value_of(s: &Scalar) -> Result<Value, String> {
    eval_canonical(s).map_err(|e| e.to_string())
}

fn decimal_of(v: Value) -> Result<Decimal, String> {
    v.to_decimal().map_err(|_| "derived coordinate is not a finite number".to_string())
}

fn op(a: Value, o: BinOp, b: Value) -> Result<Value, String> {
    a.binary(o, b).map_err(|e| e.to_string())
}

/// Cosine and sine of an angle in degrees, exact at multiples of 90.
fn cos_sin(deg: Value) -> (Value, Value) {
    if let Value::Exact(d) = deg {
        let q = d / Decimal::from(90);
        if q.fract().is_zero() {
            let k = ((q % Decimal::from(4)).to_i64().unwrap_or(0) + 4) % 4;
            let (c, s) = [(1, 0), (0, 1), (-1, 0), (0, -1)][k as usize];
            return (Value::Exact(Decimal::from(c)), Value::Exact(Decimal::from(s)));
        }
    }
    let r = deg.to_f64().to_radians();
    (Value::Approx(r.cos()), Value::Approx(r.sin()))
}

fn point(v: &Vec2) -> Result<[Value; 2], String> {
    Ok([value_of(&v.0[0])?, value_of(&v.0[1])?])
}

fn mm_point(p: [Value; 2]) -> Result<Vec2, String> {
    Ok(Vec2::mm(decimal_of(p[0])?, decimal_of(p[1])?))
}

fn polar(c: [Value; 2], r: Value, deg: Value) -> Result<[Value; 2], String> {
    let (cos, sin) = cos_sin(deg);
    Ok([op(c[0], BinOp::Add, op(r, BinOp::Mul, cos)?)?, op(c[1], BinOp::Add, op(r, BinOp::Mul, sin)?)?])
}

fn explicit_geom(g: &SketchGeom) -> Result<Option<SketchGeom>, String> {
    match g {
        SketchGeom::LineByDirection { origin, direction, length } => {
            let o = point(origin)?;
            let d = point(direction)?;
            let len = value_of(length)?;
            let norm2 = op(op(d[0], BinOp::Mul, d[0])?, BinOp::Add, op(d[1], BinOp::Mul, d[1])?)?;
            let norm = match norm2 {
                Value::Exact(n) if n.is_zero() => return Err("zero direction vector".into()),
                Value::Exact(n) => match n.sqrt() {
                    Some(r) if r * r == n => Value::Exact(r),
                    _ => Value::Approx(n.to_f64().unwrap_or(f64::NAN).sqrt()),
                },
                other => Value::Approx(other.to_f64().sqrt()),
            };
            if norm.to_f64() == 0.0 {
                return Err("zero direction vector".into());
            }
            let scale = if norm == Value::Exact(Decimal::ONE) { len } else { op(len, BinOp::Div, norm)? };
            let end = [
                op(o[0], BinOp::Add, op(d[0], BinOp::Mul, scale)?)?,
                op(o[1], BinOp::Add, op(d[1], BinOp::Mul, scale)?)?,
            ];
            Ok(Some(SketchGeom::Line { start: mm_point(o)?, end: mm_point(end)? }))
        }
        SketchGeom::ArcByAngles { center, radius, start_angle, end_angle } => {
            let c = point(center)?;
            let r = value_of(radius)?;
            let a0 = value_of(start_angle)?;
            let a1 = value_of(end_angle)?;
            // Counter-clockwise sweep in (0, 360).
            let mut sweep = op(a1, BinOp::Sub, a0)?;
            sweep = match sweep {
                Value::Exact(s) => Value::Exact(((s % Decimal::from(360)) + Decimal::from(360)) % Decimal::from(360)),
                Value::Approx(s) => Value::Approx(s.rem_euclid(360.0)),
            };
            if sweep.to_f64() == 0.0 {
                return Err("arc sweep is zero or a full turn".into());
            }
            let mid = op(a0, BinOp::Add, op(sweep, BinOp::Div, Value::Exact(Decimal::TWO))?)?;
            let end = op(a0, BinOp::Add, sweep)?;
            Ok(Some(SketchGeom::Arc {
                start: mm_point(polar(c, r, a0)?)?,
                mid: mm_point(polar(c, r, mid)?)?,
                end: mm_point(polar(c, r, end)?)?,
            }))
        }
        _ => Ok(None),
    }
}

/// Rewrites implicit line and arc forms to start/end and start/mid/end points.
pub fn explicit_sketch_params(program: &Program) -> Result<Program, PassError> {
    let mut out = program.clone();
    for f in &mut out.features {
        let id = f.id.clone();
        if let Some(entities) = f.sketch_entities_mut() {
            for e in entities {
                let explicit = explicit_geom(&e.geom).map_err(|m| {
                    PassError::new(PassName::ExplicitSketchParams, Some(&id), m).at(format!("entity {}", e.id))
                })?;
                if let Some(g) = explicit {
                    e.geom = g;
                }
            }
        }
    }
    Ok(out)
}

fn replace_unit_atoms(e: &mut Expr, dim: crate::ast::Dimension) -> Result<(), String> {
    match e {
        Expr::Unit(u) => {
            if u.dimension() != dim {
                return Err(format!("unit `{}` does not fit a {dim:?} value", u.token()));
            }
            *e = unit_factor_expr(*u);
            Ok(())
        }
        Expr::Num(_) | Expr::Pi => Ok(()),
        Expr::Neg(inner) => replace_unit_atoms(inner, dim),
        Expr::Bin(_, a, b) => {
            replace_unit_atoms(a, dim)?;
            replace_unit_atoms(b, dim)
        }
    }
}

/// Converts every scalar to millimeters or degrees.
pub fn standardize_units(program: &Program) -> Result<Program, PassError> {
    per_feature(program, PassName::StandardizeUnits, |s| {
        let dim = s.unit.dimension();
        if let Number::Expr(e) = &mut s.value {
            replace_unit_atoms(e, dim)?;
        }
        if s.unit.is_canonical() {
            return Ok(());
        }
        let converted = match (&s.value, unit_factor(s.unit)) {
            (Number::Lit(d), Value::Exact(k)) => d.checked_mul(k).map(Number::Lit),
            _ => None,
        };
        s.value = match converted {
            Some(n) => n,
            None => {
                let base = match std::mem::replace(&mut s.value, Number::Lit(Decimal::ZERO)) {
                    Number::Lit(d) => Expr::Num(d),
                    Number::Expr(e) => e,
                };
                Number::Expr(Expr::bin(BinOp::Mul, base, unit_factor_expr(s.unit)))
            }
        };
        s.unit = Unit::canonical_for(dim);
        Ok(())
    })
}

/// Evaluates arithmetic to literals.
pub fn fold_numeric_expressions(program: &Program) -> Result<Program, PassError> {
    per_feature(program, PassName::FoldNumericExpressions, |s| {
        if let Number::Expr(e) = &s.value {
            let v = eval_expr(e, false).map_err(|err| match err {
                EvalError::UnexpectedUnit(u) => format!("unit `{u}` left in expression"),
                other => other.to_string(),
            })?;
            s.value = Number::Lit(decimal_of(v)?);
        }
        Ok(())
    })
}

/// Half-away-from-zero rounding that never yields negative zero.
pub fn round_decimal(d: Decimal, decimals: u32) -> Decimal {
    let mut r = d.round_dp_with_strategy(decimals, RoundingStrategy::MidpointAwayFromZero);
    if r.is_zero() {
        r = Decimal::ZERO;
    }
    r.rescale(decimals);
    r
}

/// Rounds every literal to `decimals` places.
pub fn round_precision(program: &Program, decimals: u32) -> Program {
    let mut out = program.clone();
    for f in &mut out.features {
        f.for_each_scalar_mut(&mut |s| {
            if let Number::Lit(d) = &mut s.value {
                *d = round_decimal(*d, decimals);
            }
        });
    }
    out
}
