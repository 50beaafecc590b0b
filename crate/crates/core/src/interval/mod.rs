//! Outward-rounded interval arithmetic, boxes, interval matrices and the
//! supremum-norm matrix bounds (norm and logarithmic norm) used by the local
//! error formulas.

mod elementary;
pub mod round;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use round::{add_down, add_up, div_down, div_up, mul_down, mul_up, sub_down, sub_up};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero: {0}")]
    DivisionByZero(Interval),
    #[error("unbounded interval where a compact one is required: {0}")]
    Unbounded(Interval),
    #[error("invalid interval bounds [{0}, {1}]")]
    InvalidBounds(f64, f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// A closed real interval `[lo, hi]`. Endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = IntervalError;
    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        Interval::try_new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const PI: Interval = Interval {
        lo: std::f64::consts::PI,
        hi: 3.141_592_653_589_793_6,
    };
    pub const FRAC_PI_2: Interval = Interval {
        lo: std::f64::consts::FRAC_PI_2,
        hi: 1.570_796_326_794_896_8,
    };
    pub const LN_2: Interval = Interval {
        lo: std::f64::consts::LN_2,
        hi: 0.693_147_180_559_945_4,
    };

    /// Panics on `lo > hi` or NaN endpoints.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).expect("invalid interval")
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(IntervalError::InvalidBounds(lo, hi));
        }
        Ok(Self { lo, hi })
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Smallest interval certainly containing the real number denoted by
    /// `x` when `x` itself may carry one rounding error.
    pub fn around(x: f64) -> Self {
        Self { lo: x.next_down(), hi: x.next_up() }
    }

    /// `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: f64) -> Self {
        let r = r.abs();
        Self { lo: -r, hi: r }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn ensure_finite(self) -> Result<Self, IntervalError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(IntervalError::Unbounded(self))
        }
    }

    /// Upper bound of the width.
    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    pub fn radius(&self) -> f64 {
        self.width() / 2.0
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo == f64::NEG_INFINITY || self.hi == f64::INFINITY {
            if self.lo.is_finite() {
                return self.lo;
            }
            if self.hi.is_finite() {
                return self.hi;
            }
            return 0.0;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Magnitude `max |x|`.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude `min |x|`.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn hull_point(&self, x: f64) -> Interval {
        Interval { lo: self.lo.min(x), hi: self.hi.max(x) }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Widen symmetrically by `r >= 0`.
    pub fn inflate(&self, r: f64) -> Interval {
        Interval { lo: sub_down(self.lo, r), hi: add_up(self.hi, r) }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZero(rhs));
        }
        let c = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = c.iter().map(|&(a, b)| div_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| div_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { lo, hi })
    }

    pub fn recip(self) -> Result<Interval, IntervalError> {
        Interval::ONE.checked_div(self)
    }

    pub fn sqr(self) -> Interval {
        let a = self.abs();
        Interval { lo: mul_down(a.lo, a.lo), hi: mul_up(a.hi, a.hi) }
    }

    /// Integer power. Even powers use `|x|^n`, so `[-1, 2]^2 = [0, 4]`.
    pub fn powi(self, n: i32) -> Result<Interval, IntervalError> {
        if n == 0 {
            return Ok(Interval::ONE);
        }
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let n = n as u32;
        let pos_pow = |x: Interval| {
            // x >= 0: monotone, exponentiate each endpoint with directed rounding.
            let mut lo = 1.0f64;
            let mut hi = 1.0f64;
            for _ in 0..n {
                lo = mul_down(lo, x.lo);
                hi = mul_up(hi, x.hi);
            }
            Interval { lo, hi }
        };
        if n.is_multiple_of(2) {
            Ok(pos_pow(self.abs()))
        } else if self.lo >= 0.0 {
            Ok(pos_pow(self))
        } else if self.hi <= 0.0 {
            Ok(-pos_pow(-self))
        } else {
            let neg = pos_pow(Interval { lo: 0.0, hi: -self.lo });
            let pos = pos_pow(Interval { lo: 0.0, hi: self.hi });
            Ok(Interval { lo: -neg.hi, hi: pos.hi })
        }
    }

    pub fn exp(self) -> Interval {
        let lo = elementary::exp_point(self.lo).lo;
        let hi = elementary::exp_point(self.hi).hi;
        Interval { lo: lo.max(0.0), hi }
    }

    pub fn sin(self) -> Interval {
        elementary::sin_interval(self)
    }

    pub fn cos(self) -> Interval {
        elementary::cos_interval(self)
    }

    /// Multiply by a non-negative scalar with outward rounding.
    pub fn scale(self, c: f64) -> Interval {
        self * Interval::point(c)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval { lo: sub_down(self.lo, rhs.hi), hi: sub_up(self.hi, rhs.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let lo = c.iter().map(|&(a, b)| mul_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

/// Upper-rounded sum of non-negative terms.
pub fn sum_up<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, add_up)
}

/// Cartesian product of intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(components: Vec<Interval>) -> Self {
        assert!(!components.is_empty(), "a box needs at least one component");
        Self(components)
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Self {
        Self::new(bounds.iter().map(|&(l, h)| Interval::new(l, h)).collect())
    }

    pub fn point(x: &[f64]) -> Self {
        Self::new(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Interval] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Interval::is_finite)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.0.iter().zip(x).all(|(i, &v)| i.contains(v))
    }

    pub fn is_subset(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset(b))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        assert_eq!(self.dim(), other.dim());
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn inflate(&self, r: f64) -> IntervalBox {
        IntervalBox(self.0.iter().map(|c| c.inflate(r)).collect())
    }

    pub fn intersect(&self, other: &IntervalBox) -> Option<IntervalBox> {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a.intersect(b)).collect::<Option<Vec<_>>>().map(IntervalBox)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.0.iter().map(Interval::midpoint).collect()
    }

    /// Largest component width (sup-norm diameter).
    pub fn diameter(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn radius(&self) -> f64 {
        self.diameter() / 2.0
    }

    /// Hausdorff distance in the supremum norm between two boxes, which for
    /// axis-aligned boxes is the largest endpoint discrepancy.
    pub fn hausdorff(&self, other: &IntervalBox) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a.lo - b.lo).abs().max((a.hi - b.hi).abs()))
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalBox {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Square matrix of intervals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    n: usize,
    entries: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![Interval::ZERO; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<Interval>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "interval matrix must be square");
        Self { n, entries: rows.into_iter().flatten().collect() }
    }

    pub fn from_points(rows: &[&[f64]]) -> Self {
        Self::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| Interval::point(v)).collect()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, k: usize) -> &[Interval] {
        &self.entries[k * self.n..(k + 1) * self.n]
    }

    /// Upper bound of `max_k sum_i |m_ki|` over all point matrices inside.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|k| sum_up(self.row(k).iter().map(Interval::mag)))
            .fold(0.0, f64::max)
    }

    /// Upper bound of the sup-norm logarithmic norm
    /// `max_k (m_kk + sum_{i != k} |m_ki|)`.
    pub fn log_norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|k| {
                let row = self.row(k);
                let off = sum_up(row.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, m)| m.mag()));
                add_up(row[k].hi(), off)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Index<(usize, usize)> for IntervalMatrix {
    type Output = Interval;
    fn index(&self, (r, c): (usize, usize)) -> &Interval {
        &self.entries[r * self.n + c]
    }
}

impl IndexMut<(usize, usize)> for IntervalMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Interval {
        &mut self.entries[r * self.n + c]
    }
}
