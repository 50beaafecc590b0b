//! Polynomial models on the unit box: a sparse polynomial `p` in variables
//! `z_1..z_v` ranging over `[-1, 1]` together with a uniform error `e`,
//! standing for every function `z -> p(z) + d(z)` with `|d(z)| <= e`.
//!
//! Coefficients are plain doubles; every rounding error committed while
//! computing them is bounded exactly (TwoSum / FMA residuals) and added to
//! `e`, so the enclosure is rigorous.

mod compose;
mod monomial;
mod vector;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::interval::{round, Interval, IntervalError};
use crate::symexpr::ExprError;

pub use compose::compose;
pub use monomial::Monomial;
pub use vector::{VarInfo, VarRole, VectorModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("arity mismatch: {left} vs {right}")]
    Arity { left: usize, right: usize },
    #[error("argument count mismatch: expression needs {needed}, got {got}")]
    Arguments { needed: usize, got: usize },
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("model error bound overflowed")]
    Overflow,
}

/// Truncation and cleanup settings shared by model operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Terms of higher total degree are bounded and moved into the error.
    pub max_degree: u32,
    /// Coefficients with magnitude at or below this are moved into the error.
    pub sweep_threshold: f64,
    /// Use the half-box subdivision bounder in `range_refined`.
    pub refine_range: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { max_degree: 5, sweep_threshold: 1e-15, refine_range: false }
    }
}

/// Accumulates an upper bound on the rounding errors of a sequence of
/// floating-point operations.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Slack(pub f64);

impl Slack {
    fn note(&mut self, err: f64) {
        self.0 = round::add_up(self.0, err.abs());
    }

    pub(crate) fn add(&mut self, a: f64, b: f64) -> f64 {
        let s = a + b;
        if !s.is_finite() {
            self.0 = f64::INFINITY;
            return s;
        }
        let bb = s - a;
        self.note((a - (s - bb)) + (b - bb));
        s
    }

    pub(crate) fn mul(&mut self, a: f64, b: f64) -> f64 {
        let p = a * b;
        if !p.is_finite() {
            self.0 = f64::INFINITY;
        } else if p != 0.0 && p.abs() < 1e-290 {
            // FMA residual is not exact near the subnormal range.
            self.note(1e-290);
        } else if p == 0.0 && a != 0.0 && b != 0.0 {
            self.note(1e-290);
        } else {
            self.note(a.mul_add(b, -p));
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialModel {
    arity: usize,
    /// Sorted by monomial, no zero coefficients.
    terms: Vec<(Monomial, f64)>,
    error: f64,
}

impl PolynomialModel {
    pub fn zero(arity: usize) -> Self {
        Self { arity, terms: Vec::new(), error: 0.0 }
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        Self::from_terms(arity, vec![(Monomial::one(), c)], 0.0)
    }

    /// Model enclosing every value of `x`.
    pub fn from_interval(arity: usize, x: Interval) -> Self {
        let mid = x.midpoint();
        let rad = round::sub_up(x.hi(), mid).max(round::sub_up(mid, x.lo()));
        Self::from_terms(arity, vec![(Monomial::one(), mid)], rad)
    }

    /// The unit variable `z_var` itself.
    pub fn variable(arity: usize, var: usize) -> Self {
        assert!(var < arity, "variable {var} out of arity {arity}");
        Self::from_terms(arity, vec![(Monomial::var(var, 1), 1.0)], 0.0)
    }

    /// `center + radius * z_var`.
    pub fn affine_variable(arity: usize, var: usize, center: f64, radius: f64) -> Self {
        assert!(var < arity, "variable {var} out of arity {arity}");
        Self::from_terms(arity, vec![(Monomial::one(), center), (Monomial::var(var, 1), radius)], 0.0)
    }

    pub fn from_terms(arity: usize, terms: Vec<(Monomial, f64)>, error: f64) -> Self {
        let mut map = BTreeMap::new();
        let mut slack = Slack::default();
        for (m, c) in terms {
            debug_assert!(m.max_var().is_none_or(|v| v < arity));
            let slot = map.entry(m).or_insert(0.0);
            *slot = slack.add(*slot, c);
        }
        Self::from_map(arity, map, round::add_up(error, slack.0))
    }

    fn from_map(arity: usize, map: BTreeMap<Monomial, f64>, error: f64) -> Self {
        let terms = map.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Self { arity, terms, error }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn terms(&self) -> &[(Monomial, f64)] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_finite(&self) -> bool {
        self.error.is_finite() && self.terms.iter().all(|(_, c)| c.is_finite())
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.binary_search_by(|(k, _)| k.cmp(m)).map(|i| self.terms[i].1).unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&Monomial::one())
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Does any term involve `var`?
    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.iter().any(|(m, _)| m.power_of(var) > 0)
    }

    /// Widen the error bound.
    pub fn inflate(&self, by: f64) -> Self {
        Self { error: round::add_up(self.error, by.abs()), ..self.clone() }
    }

    /// Same polynomial with error set to `e`.
    pub fn with_error(&self, e: f64) -> Self {
        Self { error: e, ..self.clone() }
    }

    /// Enlarge the arity without changing the represented functions.
    pub fn extend_arity(&self, arity: usize) -> Self {
        assert!(arity >= self.arity);
        Self { arity, ..self.clone() }
    }

    /// Polynomial part evaluated in plain floating point (no error term).
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(z)).sum()
    }

    /// Enclosure of `{p(z) + d : z in z_box, |d| <= e}`.
    pub fn eval_interval(&self, z: &[Interval]) -> Interval {
        let mut acc = Interval::ZERO;
        for (m, c) in &self.terms {
            acc = acc + m.eval_interval(z) * *c;
        }
        acc + Interval::symmetric(self.error)
    }

    /// Enclosure of the polynomial part over the unit box.
    pub fn poly_range(&self) -> Interval {
        let mut acc = Interval::ZERO;
        for (m, c) in &self.terms {
            acc = acc + m.unit_range() * *c;
        }
        acc
    }

    /// Enclosure of the represented function set over the unit box.
    pub fn range(&self) -> Interval {
        self.poly_range() + Interval::symmetric(self.error)
    }

    /// Range bound refined by splitting every variable in half (used for
    /// arities up to 10; falls back to `range` beyond that).
    pub fn range_refined(&self) -> Interval {
        let vars: Vec<usize> = (0..self.arity).filter(|&v| self.depends_on(v)).collect();
        if vars.is_empty() || vars.len() > 10 {
            return self.range();
        }
        let halves = [Interval::new(-1.0, 0.0), Interval::new(0.0, 1.0)];
        let mut z = vec![Interval::UNIT; self.arity];
        let mut out: Option<Interval> = None;
        for mask in 0u32..(1 << vars.len()) {
            for (bit, &v) in vars.iter().enumerate() {
                z[v] = halves[((mask >> bit) & 1) as usize];
            }
            let r = self.eval_interval(&z);
            out = Some(out.map_or(r, |o| o.hull(&r)));
        }
        let coarse = self.range();
        out.and_then(|o| o.intersect(&coarse)).unwrap_or(coarse)
    }

    /// Upper bound on `sup |p(z)| + e`.
    pub fn norm(&self) -> f64 {
        self.range().mag()
    }

    fn check_arity(&self, other: &Self) -> Result<(), ModelError> {
        if self.arity == other.arity {
            Ok(())
        } else {
            Err(ModelError::Arity { left: self.arity, right: other.arity })
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self, ModelError> {
        self.check_arity(other)?;
        let mut slack = Slack::default();
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    let (m, c) = &other.terms[j];
                    out.push((m.clone(), sign * c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = slack.add(self.terms[i].1, sign * other.terms[j].1);
                    if c != 0.0 {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        let error = round::add_up(round::add_up(self.error, other.error), slack.0);
        Ok(Self { arity: self.arity, terms: out, error })
    }

    pub fn add(&self, other: &Self) -> Result<Self, ModelError> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ModelError> {
        self.combine(other, -1.0)
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(), ..self.clone() }
    }

    pub fn add_constant(&self, c: f64) -> Self {
        self.add(&Self::constant(self.arity, c)).expect("same arity")
    }

    /// Multiply by an interval constant: midpoint scales the polynomial, the
    /// radius goes into the error.
    pub fn scale_interval(&self, c: Interval) -> Self {
        let mid = c.midpoint();
        let rad = round::sub_up(c.hi(), mid).max(round::sub_up(mid, c.lo()));
        let scaled = self.scale(mid);
        scaled.inflate(round::mul_up(rad, self.norm()))
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero(self.arity);
        }
        let mut slack = Slack::default();
        let terms = self
            .terms
            .iter()
            .map(|(m, k)| (m.clone(), slack.mul(*k, c)))
            .filter(|(_, k)| *k != 0.0)
            .collect();
        let error = round::add_up(round::mul_up(self.error, c.abs()), slack.0);
        Self { arity: self.arity, terms, error }
    }

    pub fn mul(&self, other: &Self, cfg: &ModelConfig) -> Result<Self, ModelError> {
        self.check_arity(other)?;
        let mut slack = Slack::default();
        let mut truncated = 0.0;
        let deg_b: Vec<u32> = other.terms.iter().map(|(m, _)| m.degree()).collect();
        let mut prods: Vec<(Monomial, f64)> = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            for ((mb, cb), db) in other.terms.iter().zip(&deg_b) {
                if da + db > cfg.max_degree {
                    truncated = round::add_up(truncated, round::mul_up(ca.abs(), cb.abs()));
                    continue;
                }
                let mag = round::mul_up(ca.abs(), cb.abs());
                if mag <= cfg.sweep_threshold {
                    truncated = round::add_up(truncated, mag);
                    continue;
                }
                prods.push((ma.mul(mb), slack.mul(*ca, *cb)));
            }
        }
        prods.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut terms: Vec<(Monomial, f64)> = Vec::with_capacity(prods.len());
        for (m, c) in prods {
            match terms.last_mut() {
                Some(last) if last.0 == m => last.1 = slack.add(last.1, c),
                _ => terms.push((m, c)),
            }
        }
        terms.retain(|t| t.1 != 0.0);
        let ra = self.poly_range().mag();
        let rb = other.poly_range().mag();
        let cross = round::add_up(
            round::add_up(round::mul_up(ra, other.error), round::mul_up(rb, self.error)),
            round::mul_up(self.error, other.error),
        );
        let error = round::add_up(round::add_up(cross, truncated), slack.0);
        Ok(Self { arity: self.arity, terms, error }.cleanup(cfg))
    }

    pub fn sqr(&self, cfg: &ModelConfig) -> Self {
        self.mul(self, cfg).expect("same arity")
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: u32, cfg: &ModelConfig) -> Self {
        let mut result = Self::constant(self.arity, 1.0);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base, cfg).expect("same arity");
            }
            k >>= 1;
            if k > 0 {
                base = base.sqr(cfg);
            }
        }
        result
    }

    /// Move terms of degree above `max_degree` and terms with tiny
    /// coefficients into the error.
    pub fn cleanup(self, cfg: &ModelConfig) -> Self {
        if self
            .terms
            .iter()
            .all(|(m, c)| m.degree() <= cfg.max_degree && (c.abs() > cfg.sweep_threshold || m.is_one()))
        {
            return self;
        }
        let mut error = self.error;
        let mut kept = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms {
            if m.degree() > cfg.max_degree || (c.abs() <= cfg.sweep_threshold && !m.is_one()) {
                error = round::add_up(error, c.abs());
            } else {
                kept.push((m, c));
            }
        }
        Self { arity: self.arity, terms: kept, error }
    }

    /// Remove every term involving any of `vars`, adding its magnitude to the
    /// error. The variables stay in the arity but become inert.
    pub fn sweep(&self, vars: &[usize]) -> Self {
        if vars.is_empty() {
            return self.clone();
        }
        let mut error = self.error;
        let mut kept = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            if vars.iter().any(|&v| m.power_of(v) > 0) {
                error = round::add_up(error, m.unit_range().scale(*c).mag());
            } else {
                kept.push((m.clone(), *c));
            }
        }
        Self { arity: self.arity, terms: kept, error }
    }

    /// Substitute `z_var := a + b z_var`. With `b = 0` this fixes the
    /// variable at `a`.
    pub fn substitute_affine(&self, var: usize, a: f64, b: f64, cfg: &ModelConfig) -> Self {
        let mut map: BTreeMap<Monomial, f64> = BTreeMap::new();
        let mut slack = Slack::default();
        let mut max_pow = 0;
        for (m, _) in &self.terms {
            max_pow = max_pow.max(m.power_of(var));
        }
        // Coefficients of (a + b z)^k for k = 0..=max_pow.
        let mut expansions: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 1..=max_pow as usize {
            let prev = &expansions[k - 1];
            let mut next = vec![0.0; k + 1];
            for (i, &c) in prev.iter().enumerate() {
                let t = slack.mul(c, a);
                next[i] = slack.add(next[i], t);
                let t = slack.mul(c, b);
                next[i + 1] = slack.add(next[i + 1], t);
            }
            expansions.push(next);
        }
        // `slack` so far bounds errors in the expansion coefficients; each
        // coefficient error multiplies at most |c| of the term, so scale it.
        let coef_slack = slack.0;
        let mut slack = Slack::default();
        let mut extra = 0.0;
        for (m, c) in &self.terms {
            let k = m.power_of(var) as usize;
            if k == 0 {
                let slot = map.entry(m.clone()).or_insert(0.0);
                *slot = slack.add(*slot, *c);
                continue;
            }
            extra = round::add_up(extra, round::mul_up(round::mul_up(coef_slack, c.abs()), k as f64 + 1.0));
            let rest = m.without(var);
            for (i, &e) in expansions[k].iter().enumerate() {
                if e == 0.0 {
                    continue;
                }
                let mono = rest.mul(&Monomial::var(var, i as u32));
                let t = slack.mul(*c, e);
                let slot = map.entry(mono).or_insert(0.0);
                *slot = slack.add(*slot, t);
            }
        }
        let error = round::add_up(round::add_up(self.error, slack.0), extra);
        Self::from_map(self.arity, map, error).cleanup(cfg)
    }

    /// Antiderivative in the time variable `t_var`, where physical time is
    /// `t_k + half_step * (tau + 1)`: returns a model of
    /// `int_{t_k}^{t} p dt'`, which vanishes at `tau = -1`.
    pub fn antiderivative(&self, t_var: usize, half_step: f64, cfg: &ModelConfig) -> Self {
        let mut map: BTreeMap<Monomial, f64> = BTreeMap::new();
        let mut slack = Slack::default();
        for (m, c) in &self.terms {
            let k = m.power_of(t_var);
            // `q` appears in two coefficients, each bounded by 1 on the box.
            let mut qs = Slack::default();
            let scaled = qs.mul(*c, half_step);
            let q = qs.div(scaled, (k + 1) as f64);
            slack.note(round::mul_up(2.0, qs.0));
            let rest = m.without(t_var);
            let up = rest.mul(&Monomial::var(t_var, k + 1));
            let slot = map.entry(up).or_insert(0.0);
            *slot = slack.add(*slot, q);
            // Lower limit: tau = -1 contributes -(-1)^{k+1} q.
            let low = if (k + 1) % 2 == 0 { -q } else { q };
            let slot = map.entry(rest).or_insert(0.0);
            *slot = slack.add(*slot, low);
        }
        let width = round::mul_up(2.0, half_step.abs());
        let error = round::add_up(round::mul_up(self.error, width), slack.0);
        Self::from_map(self.arity, map, error).cleanup(cfg)
    }

    /// Renumber variables: `map[old] = Some(new)`; terms in dropped variables
    /// are swept first.
    pub fn reindex(&self, map: &[Option<usize>], new_arity: usize) -> Self {
        let dropped: Vec<usize> = (0..self.arity).filter(|&v| map.get(v).copied().flatten().is_none()).collect();
        let swept = self.sweep(&dropped);
        let terms = swept
            .terms
            .into_iter()
            .map(|(m, c)| (m.renumber(|v| map[v].expect("kept variable")), c))
            .collect();
        Self::from_terms(new_arity, terms, swept.error)
    }
}

impl Slack {
    pub(crate) fn div(&mut self, a: f64, b: f64) -> f64 {
        let q = a / b;
        if !q.is_finite() {
            self.0 = f64::INFINITY;
        } else if q != 0.0 && q.abs() < 1e-290 || (q == 0.0 && a != 0.0) {
            self.note(1e-290);
        } else {
            // a - q b exactly; the quotient error is that over |b|.
            let r = (-q).mul_add(b, a);
            self.note(round::div_up(r.abs(), b.abs()));
        }
        q
    }
}

impl fmt::Display for PolynomialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            if m.is_one() {
                write!(f, "{}", c.abs())?;
            } else {
                write!(f, "{}*{}", c.abs(), m)?;
            }
        }
        write!(f, " +/- {:e}", self.error)
    }
}
