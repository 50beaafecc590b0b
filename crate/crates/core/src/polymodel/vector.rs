use serde::{Deserialize, Serialize};

use super::{Monomial, ModelConfig, ModelError, PolynomialModel};
use crate::interval::{round, Interval, IntervalBox};

/// What a unit-box variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "kebab-case")]
pub enum VarRole {
    /// Coordinate of the initial set.
    State { coord: usize },
    /// Coefficient of an approximate input introduced at `step`.
    Input { step: usize, channel: usize, index: usize },
    /// Former uniform error turned into a parameter at `step`.
    Error { step: usize, coord: usize },
    /// Scaled time within the current step.
    Time,
}

impl VarRole {
    pub fn step(&self) -> Option<usize> {
        match *self {
            VarRole::Input { step, .. } | VarRole::Error { step, .. } => Some(step),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarInfo {
    pub role: VarRole,
}

/// A vector of polynomial models over a common set of unit variables.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorModel {
    vars: Vec<VarInfo>,
    comps: Vec<PolynomialModel>,
}

impl VectorModel {
    pub fn new(vars: Vec<VarInfo>, comps: Vec<PolynomialModel>) -> Result<Self, ModelError> {
        for c in &comps {
            if c.arity() != vars.len() {
                return Err(ModelError::Arity { left: vars.len(), right: c.arity() });
            }
        }
        Ok(Self { vars, comps })
    }

    /// One state variable per coordinate: `x_i = mid_i + rad_i z_i`.
    pub fn from_box(b: &IntervalBox) -> Self {
        let n = b.dim();
        let vars = (0..n).map(|coord| VarInfo { role: VarRole::State { coord } }).collect();
        let comps = b
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mid = x.midpoint();
                let rad = round::sub_up(x.hi(), mid).max(round::sub_up(mid, x.lo()));
                PolynomialModel::affine_variable(n, i, mid, rad)
            })
            .collect();
        Self { vars, comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn comps(&self) -> &[PolynomialModel] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &PolynomialModel {
        &self.comps[i]
    }

    pub fn into_parts(self) -> (Vec<VarInfo>, Vec<PolynomialModel>) {
        (self.vars, self.comps)
    }

    pub fn max_error(&self) -> f64 {
        self.comps.iter().map(PolynomialModel::error).fold(0.0, f64::max)
    }

    pub fn term_count(&self) -> usize {
        self.comps.iter().map(PolynomialModel::term_count).sum()
    }

    /// Indices of variables with the given predicate on their role.
    pub fn vars_where(&self, pred: impl Fn(&VarRole) -> bool) -> Vec<usize> {
        (0..self.arity()).filter(|&v| pred(&self.vars[v].role)).collect()
    }

    /// Variables some component still depends on.
    pub fn active_vars(&self) -> Vec<usize> {
        (0..self.arity()).filter(|&v| self.comps.iter().any(|c| c.depends_on(v))).collect()
    }

    /// Append a variable; returns its index.
    pub fn add_var(&mut self, info: VarInfo) -> usize {
        self.vars.push(info);
        let a = self.vars.len();
        for c in &mut self.comps {
            *c = c.extend_arity(a);
        }
        a - 1
    }

    pub fn map_components(&self, f: impl Fn(&PolynomialModel) -> PolynomialModel) -> Self {
        Self { vars: self.vars.clone(), comps: self.comps.iter().map(f).collect() }
    }

    pub fn with_components(&self, comps: Vec<PolynomialModel>) -> Result<Self, ModelError> {
        Self::new(self.vars.clone(), comps)
    }

    /// Enclosing box of the represented set.
    pub fn range_box(&self, cfg: &ModelConfig) -> IntervalBox {
        IntervalBox::new(
            self.comps
                .iter()
                .map(|c| if cfg.refine_range { c.range_refined() } else { c.range() })
                .collect(),
        )
    }

    /// Enclosure with some variables restricted to sub-intervals.
    pub fn eval_interval(&self, z: &[Interval]) -> IntervalBox {
        IntervalBox::new(self.comps.iter().map(|c| c.eval_interval(z)).collect())
    }

    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(z)).collect()
    }

    pub fn sweep(&self, vars: &[usize]) -> Self {
        self.map_components(|c| c.sweep(vars))
    }

    pub fn substitute_affine(&self, var: usize, a: f64, b: f64, cfg: &ModelConfig) -> Self {
        self.map_components(|c| c.substitute_affine(var, a, b, cfg))
    }

    /// Drop the listed variables (sweeping their terms first) and renumber
    /// the rest.
    pub fn remove_vars(&self, drop: &[usize]) -> Self {
        let mut map = vec![None; self.arity()];
        let mut vars = Vec::new();
        for v in 0..self.arity() {
            if !drop.contains(&v) {
                map[v] = Some(vars.len());
                vars.push(self.vars[v]);
            }
        }
        let comps = self.comps.iter().map(|c| c.reindex(&map, vars.len())).collect();
        Self { vars, comps }
    }

    /// Turn each nonzero component error into a fresh parameter: the
    /// represented set is unchanged, but later steps keep the correlation.
    pub fn errors_to_parameters(&self, step: usize) -> Self {
        let mut out = self.clone();
        for coord in 0..self.dim() {
            let e = out.comps[coord].error();
            if e > 0.0 {
                let v = out.add_var(VarInfo { role: VarRole::Error { step, coord } });
                let c = &out.comps[coord];
                let t = PolynomialModel::from_terms(c.arity(), vec![(Monomial::var(v, 1), e)], 0.0);
                out.comps[coord] = c.with_error(0.0).add(&t).expect("same arity");
            }
        }
        out
    }
}
