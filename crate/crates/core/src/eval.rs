//! Evaluation of raw-dialect arithmetic.
//!
//! Arithmetic stays in exact decimal while every operand is exact; `PI` and
//! radian conversions switch to `f64`.

use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::Decimal;
use thiserror::Error;

use crate::ast::{BinOp, Expr, Number, Scalar, Unit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Exact(Decimal),
    Approx(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("result is not a finite number")]
    NonFinite,
    #[error("unit `{0}` inside an expression that must be unit-free")]
    UnexpectedUnit(&'static str),
}

impl Value {
    pub fn to_f64(self) -> f64 {
        match self {
            Value::Exact(d) => d.to_f64().unwrap_or(f64::NAN),
            Value::Approx(f) => f,
        }
    }

    pub fn to_decimal(self) -> Result<Decimal, EvalError> {
        match self {
            Value::Exact(d) => Ok(d),
            Value::Approx(f) if f.is_finite() => Decimal::from_f64(f).ok_or(EvalError::NonFinite),
            Value::Approx(_) => Err(EvalError::NonFinite),
        }
    }

    pub fn binary(self, op: BinOp, rhs: Value) -> Result<Value, EvalError> {
        if let (Value::Exact(a), Value::Exact(b)) = (self, rhs) {
            let exact = match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                BinOp::Div if b.is_zero() => return Err(EvalError::DivisionByZero),
                BinOp::Div => a.checked_div(b),
            };
            if let Some(v) = exact {
                return Ok(Value::Exact(v));
            }
        }
        let (a, b) = (self.to_f64(), rhs.to_f64());
        let v = match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div if b == 0.0 => return Err(EvalError::DivisionByZero),
            BinOp::Div => a / b,
        };
        if v.is_finite() {
            Ok(Value::Approx(v))
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

/// Multiplier taking a value in `unit` to the canonical unit of its dimension.
pub fn unit_factor(unit: Unit) -> Value {
    match unit {
        Unit::Millimeter | Unit::Degree | Unit::None => Value::Exact(Decimal::ONE),
        Unit::Centimeter => Value::Exact(Decimal::from(10)),
        Unit::Meter => Value::Exact(Decimal::from(1000)),
        Unit::Inch => Value::Exact(Decimal::new(254, 1)),
        Unit::Foot => Value::Exact(Decimal::new(3048, 1)),
        Unit::Radian => Value::Approx(180.0 / std::f64::consts::PI),
    }
}

/// Expression form of [`unit_factor`], used when rewriting unit atoms.
pub fn unit_factor_expr(unit: Unit) -> Expr {
    match unit {
        Unit::Radian => Expr::bin(BinOp::Div, Expr::Num(Decimal::from(180)), Expr::Pi),
        other => match unit_factor(other) {
            Value::Exact(d) => Expr::Num(d),
            Value::Approx(_) => unreachable!("only radians convert inexactly"),
        },
    }
}

/// Evaluates an expression. Unit atoms are an error unless `convert_units`
/// is set, in which case each atom contributes its canonical factor.
pub fn eval_expr(expr: &Expr, convert_units: bool) -> Result<Value, EvalError> {
    match expr {
        Expr::Num(d) => Ok(Value::Exact(*d)),
        Expr::Pi => Ok(Value::Approx(std::f64::consts::PI)),
        Expr::Unit(u) if convert_units => Ok(unit_factor(*u)),
        Expr::Unit(u) => Err(EvalError::UnexpectedUnit(u.token())),
        Expr::Neg(e) => Ok(match eval_expr(e, convert_units)? {
            Value::Exact(d) => Value::Exact(-d),
            Value::Approx(f) => Value::Approx(-f),
        }),
        Expr::Bin(op, a, b) => {
            let lhs = eval_expr(a, convert_units)?;
            let rhs = eval_expr(b, convert_units)?;
            lhs.binary(*op, rhs)
        }
    }
}

pub fn eval_number(n: &Number, convert_units: bool) -> Result<Value, EvalError> {
    match n {
        Number::Lit(d) => Ok(Value::Exact(*d)),
        Number::Expr(e) => eval_expr(e, convert_units),
    }
}

/// Value of a scalar expressed in the canonical unit of its dimension.
pub fn eval_canonical(s: &Scalar) -> Result<Value, EvalError> {
    let v = eval_number(&s.value, true)?;
    v.binary(BinOp::Mul, unit_factor(s.unit))
}
