use std::fmt;

use smallvec::SmallVec;

use crate::interval::Interval;

/// Sparse exponent vector: `(variable, power)` pairs sorted by variable,
/// powers positive. The empty monomial is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(SmallVec<[(u16, u16); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Self(SmallVec::new())
    }

    pub fn var(var: usize, power: u32) -> Self {
        let mut v = SmallVec::new();
        if power > 0 {
            v.push((var as u16, power as u16));
        }
        Self(v)
    }

    /// Builds from `(variable, power)` pairs in any order.
    pub fn from_powers(pairs: &[(usize, u32)]) -> Self {
        pairs.iter().fold(Self::one(), |m, &(v, p)| m.mul(&Self::var(v, p)))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, p)| p as u32).sum()
    }

    pub fn power_of(&self, var: usize) -> u32 {
        self.0.iter().find(|&&(v, _)| v as usize == var).map_or(0, |&(_, p)| p as u32)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&(v, _)| v as usize)
    }

    pub fn powers(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(v, p)| (v as usize, p as u32))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }

    pub fn without(&self, var: usize) -> Self {
        Self(self.0.iter().copied().filter(|&(v, _)| v as usize != var).collect())
    }

    pub fn renumber(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut v: SmallVec<[(u16, u16); 4]> = self.0.iter().map(|&(var, p)| (f(var as usize) as u16, p)).collect();
        v.sort_unstable();
        Self(v)
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.0.iter().map(|&(v, p)| z[v as usize].powi(p as i32)).product()
    }

    pub fn eval_interval(&self, z: &[Interval]) -> Interval {
        let mut acc = Interval::ONE;
        for &(v, p) in &self.0 {
            acc = acc * z[v as usize].powi(p as i32).expect("nonnegative power");
        }
        acc
    }

    /// Exact range over the unit box: `[1,1]`, `[0,1]` or `[-1,1]`.
    pub fn unit_range(&self) -> Interval {
        if self.is_one() {
            Interval::ONE
        } else if self.0.iter().all(|&(_, p)| p % 2 == 0) {
            Interval::new(0.0, 1.0)
        } else {
            Interval::UNIT
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (i, &(v, p)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "z{}", v + 1)?;
            if p > 1 {
                write!(f, "^{p}")?;
            }
        }
        Ok(())
    }
}
