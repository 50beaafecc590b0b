//! Evaluation of expressions over polynomial models.

use super::{ModelConfig, ModelError, PolynomialModel};
use crate::interval::{Interval, IntervalError};
use crate::symexpr::Expr;

/// Model enclosing `expr(args_1(z), ..., args_n(z))`.
pub fn compose(expr: &Expr, args: &[PolynomialModel], cfg: &ModelConfig) -> Result<PolynomialModel, ModelError> {
    if expr.arity() > args.len() {
        return Err(ModelError::Arguments { needed: expr.arity(), got: args.len() });
    }
    let arity = args.first().map_or(0, PolynomialModel::arity);
    if let Some(bad) = args.iter().find(|a| a.arity() != arity) {
        return Err(ModelError::Arity { left: arity, right: bad.arity() });
    }
    let out = eval(expr, args, arity, cfg)?;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(ModelError::Overflow)
    }
}

fn eval(e: &Expr, args: &[PolynomialModel], arity: usize, cfg: &ModelConfig) -> Result<PolynomialModel, ModelError> {
    Ok(match e {
        Expr::Var(i) => args[*i].clone(),
        Expr::Const(c) => {
            if c.exact {
                PolynomialModel::constant(arity, c.value)
            } else {
                PolynomialModel::from_interval(arity, c.enclosure())
            }
        }
        Expr::Neg(a) => eval(a, args, arity, cfg)?.neg(),
        Expr::Add(a, b) => eval(a, args, arity, cfg)?.add(&eval(b, args, arity, cfg)?)?,
        Expr::Sub(a, b) => eval(a, args, arity, cfg)?.sub(&eval(b, args, arity, cfg)?)?,
        Expr::Mul(a, b) => {
            let x = eval(a, args, arity, cfg)?;
            if a == b {
                x.sqr(cfg)
            } else {
                x.mul(&eval(b, args, arity, cfg)?, cfg)?
            }
        }
        Expr::Div(a, b) => {
            let num = eval(a, args, arity, cfg)?;
            let den = recip(&eval(b, args, arity, cfg)?, cfg)?;
            num.mul(&den, cfg)?
        }
        Expr::Pow(a, n) => {
            let base = eval(a, args, arity, cfg)?;
            let p = base.powi(n.unsigned_abs(), cfg);
            if *n < 0 {
                recip(&p, cfg)?
            } else {
                p
            }
        }
        Expr::Sin(a) => series(&eval(a, args, arity, cfg)?, Elementary::Sin, cfg)?,
        Expr::Cos(a) => series(&eval(a, args, arity, cfg)?, Elementary::Cos, cfg)?,
        Expr::Exp(a) => series(&eval(a, args, arity, cfg)?, Elementary::Exp, cfg)?,
    })
}

#[derive(Clone, Copy)]
enum Elementary {
    Exp,
    Sin,
    Cos,
    Recip,
}

impl Elementary {
    /// `f^{(k)}(x)` as an interval for `x` in `x`.
    fn derivative(self, k: usize, x: Interval) -> Result<Interval, IntervalError> {
        Ok(match self {
            Elementary::Exp => x.exp(),
            Elementary::Sin | Elementary::Cos => {
                let shift = k + if matches!(self, Elementary::Cos) { 1 } else { 0 };
                match shift % 4 {
                    0 => x.sin(),
                    1 => x.cos(),
                    2 => -x.sin(),
                    _ => -x.cos(),
                }
            }
            Elementary::Recip => {
                // (-1)^k k! / x^{k+1}
                let mut fact = Interval::ONE;
                for j in 2..=k {
                    fact = fact * Interval::point(j as f64);
                }
                let v = fact.checked_div(x.powi(k as i32 + 1)?)?;
                if k % 2 == 1 {
                    -v
                } else {
                    v
                }
            }
        })
    }
}

fn recip(x: &PolynomialModel, cfg: &ModelConfig) -> Result<PolynomialModel, ModelError> {
    series(x, Elementary::Recip, cfg)
}

/// Taylor expansion of `f` around the midpoint of the argument's range with a
/// Lagrange remainder over the whole range.
fn series(x: &PolynomialModel, f: Elementary, cfg: &ModelConfig) -> Result<PolynomialModel, ModelError> {
    let arity = x.arity();
    let r = x.range();
    if !r.is_finite() {
        return Err(ModelError::Overflow);
    }
    if let Elementary::Recip = f {
        if r.contains_zero() {
            return Err(IntervalError::DivisionByZero(r).into());
        }
    }
    let c = r.midpoint();
    let ci = Interval::point(c);
    let y = x.add_constant(-c);
    let yr = r - ci;
    if y.term_count() == 0 && y.error() == 0.0 {
        return Ok(PolynomialModel::from_interval(arity, f.derivative(0, ci)?));
    }
    let d = cfg.max_degree.max(1) as usize;
    let mut inv_fact = Interval::ONE;
    let mut coeffs = Vec::with_capacity(d + 1);
    for k in 0..=d {
        if k > 0 {
            inv_fact = inv_fact.checked_div(Interval::point(k as f64))?;
        }
        coeffs.push(f.derivative(k, ci)? * inv_fact);
    }
    let inv_fact_next = inv_fact.checked_div(Interval::point((d + 1) as f64))?;
    let remainder = f.derivative(d + 1, r)? * inv_fact_next * yr.powi(d as i32 + 1)?;

    let mut acc = PolynomialModel::from_interval(arity, coeffs[d]);
    for k in (0..d).rev() {
        acc = acc.mul(&y, cfg)?.add(&PolynomialModel::from_interval(arity, coeffs[k]))?;
    }
    Ok(acc.inflate(remainder.mag()))
}
