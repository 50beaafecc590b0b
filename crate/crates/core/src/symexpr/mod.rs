//! Symbolic expressions for the drift and input fields, with parsing,
//! symbolic differentiation and interval evaluation.

mod diff;
mod parse;
mod system;

use std::fmt;

use thiserror::Error;

use crate::interval::{Interval, IntervalError};

pub use parse::{parse, parse_in, ParseError};
pub use system::{compute_bounds, BoundsConfig, HessianNorm, InputAffineSystem, InputBounds, InputChannel, StepErrorBounds, SystemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("variable x{} is out of range for dimension {dim}", .index + 1)]
    VariableOutOfRange { index: usize, dim: usize },
}

/// A numeric literal. `exact` records whether `value` is the literal itself
/// or only its nearest double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub exact: bool,
}

impl Constant {
    pub fn exact(value: f64) -> Self {
        Self { value, exact: true }
    }

    pub fn enclosure(&self) -> Interval {
        if self.exact {
            Interval::point(self.value)
        } else {
            Interval::around(self.value)
        }
    }
}

/// Expression tree. Variables are zero-based: `x1` in the text grammar is
/// `Var(0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(usize),
    Const(Constant),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

fn exact_sum(a: f64, b: f64) -> Option<f64> {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s.is_finite() && err == 0.0).then_some(s)
}

fn exact_product(a: f64, b: f64) -> Option<f64> {
    let p = a * b;
    (p.is_finite() && (p == 0.0 || p.abs() > 1e-290) && a.mul_add(b, -p) == 0.0).then_some(p)
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(Constant::exact(v))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    fn exact_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) if c.exact => Some(c.value),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.exact_value() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.exact_value() == Some(1.0)
    }

    /// True when the expression contains no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Var(_) => false,
            Expr::Const(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Largest variable index plus one (0 for constant expressions).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Var(i) => i + 1,
            Expr::Const(_) => 0,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
        }
    }

    // Smart constructors: fold exact constants and drop additive/multiplicative
    // identities so that derivative trees stay small.

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(Constant { value: -c.value, exact: c.exact }),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.exact_value(), b.exact_value()) {
            if let Some(s) = exact_sum(x, y) {
                return Expr::constant(s);
            }
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.exact_value(), b.exact_value()) {
            if let Some(s) = exact_sum(x, -y) {
                return Expr::constant(s);
            }
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.exact_value(), b.exact_value()) {
            if let Some(p) = exact_product(x, y) {
                return Expr::constant(p);
            }
        }
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return Expr::zero();
        }
        if b.is_one() {
            return a;
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::one(),
            1 => a,
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::Sin(Box::new(a))
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::Cos(Box::new(a))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }

    /// Exact symbolic partial derivative with respect to variable `j`.
    pub fn diff(&self, j: usize) -> Expr {
        diff::diff(self, j)
    }

    /// Plain floating-point evaluation (not validated).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Var(i) => x[*i],
            Expr::Const(c) => c.value,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, n) => a.eval(x).powi(*n),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
        }
    }

    /// Natural interval extension over the box `x`.
    pub fn eval_interval(&self, x: &[Interval]) -> Result<Interval, ExprError> {
        Ok(match self {
            Expr::Var(i) => *x.get(*i).ok_or(ExprError::VariableOutOfRange { index: *i, dim: x.len() })?,
            Expr::Const(c) => c.enclosure(),
            Expr::Neg(a) => -a.eval_interval(x)?,
            Expr::Add(a, b) => a.eval_interval(x)? + b.eval_interval(x)?,
            Expr::Sub(a, b) => a.eval_interval(x)? - b.eval_interval(x)?,
            Expr::Mul(a, b) => {
                // Same operand: use the square rule to avoid the dependency problem.
                if a == b {
                    a.eval_interval(x)?.sqr()
                } else {
                    a.eval_interval(x)? * b.eval_interval(x)?
                }
            }
            Expr::Div(a, b) => a.eval_interval(x)?.checked_div(b.eval_interval(x)?)?,
            Expr::Pow(a, n) => a.eval_interval(x)?.powi(*n)?,
            Expr::Sin(a) => a.eval_interval(x)?.sin(),
            Expr::Cos(a) => a.eval_interval(x)?.cos(),
            Expr::Exp(a) => a.eval_interval(x)?.exp(),
        })
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Const(c) if c.value < 0.0 || (c.value == 0.0 && c.value.is_sign_negative()) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Const(c) => write!(f, "{}", c.value),
            Expr::Neg(a) => write!(f, "-{}", Wrapped(a, precedence(a) < 4)),
            Expr::Add(a, b) => write!(f, "{} + {}", a, Wrapped(b, precedence(b) <= 1)),
            Expr::Sub(a, b) => write!(f, "{} - {}", a, Wrapped(b, precedence(b) <= 1)),
            Expr::Mul(a, b) => write!(f, "{}*{}", Wrapped(a, precedence(a) < 2), Wrapped(b, precedence(b) <= 2)),
            Expr::Div(a, b) => write!(f, "{}/{}", Wrapped(a, precedence(a) < 2), Wrapped(b, precedence(b) <= 2)),
            Expr::Pow(a, n) => {
                if *n < 0 {
                    write!(f, "{}^({})", Wrapped(a, precedence(a) < 5), n)
                } else {
                    write!(f, "{}^{}", Wrapped(a, precedence(a) < 5), n)
                }
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
