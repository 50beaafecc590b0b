//! Input-affine systems and the uniform constants over a bounding box.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Expr, ExprError};
use crate::interval::{round, sum_up, Interval, IntervalBox, IntervalMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("system dimension must be positive")]
    EmptySystem,
    #[error("{what} has {found} components, expected {expected}")]
    Dimension { what: String, expected: usize, found: usize },
    #[error("input bound V{index} = {value} must be positive and finite")]
    InputBound { index: usize, value: f64 },
    #[error("expression `{expr}` uses variable x{var} but the system has dimension {dim}")]
    VariableOutOfRange { expr: String, var: usize, dim: usize },
    #[error("bounding box is not compact: {0}")]
    Unbounded(IntervalBox),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// One disturbance channel `g_i(x) v_i` with `|v_i| <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputChannel {
    pub field: Vec<Expr>,
    pub bound: f64,
}

#[derive(Debug, Clone)]
struct Derivatives {
    jacobian: Vec<Vec<Expr>>,
    /// `hessian[i][j][k]` for `j <= k` only.
    hessian: Vec<Vec<Vec<Expr>>>,
}

impl Derivatives {
    fn of(field: &[Expr]) -> Self {
        let n = field.len();
        let jacobian: Vec<Vec<Expr>> = field.iter().map(|e| (0..n).map(|j| e.diff(j)).collect()).collect();
        let hessian = jacobian
            .iter()
            .map(|row| (0..n).map(|j| (j..n).map(|k| row[j].diff(k)).collect()).collect())
            .collect();
        Self { jacobian, hessian }
    }
}

/// `x' = f(x) + sum_i g_i(x) v_i` with `|v_i| <= V_i`.
#[derive(Debug, Clone)]
pub struct InputAffineSystem {
    dim: usize,
    drift: Vec<Expr>,
    inputs: Vec<InputChannel>,
    drift_derivs: Derivatives,
    input_derivs: Vec<Derivatives>,
}

impl InputAffineSystem {
    pub fn new(drift: Vec<Expr>, inputs: Vec<InputChannel>) -> Result<Self, SystemError> {
        let dim = drift.len();
        if dim == 0 {
            return Err(SystemError::EmptySystem);
        }
        let check = |e: &Expr| {
            if e.arity() > dim {
                Err(SystemError::VariableOutOfRange { expr: e.to_string(), var: e.arity(), dim })
            } else {
                Ok(())
            }
        };
        drift.iter().try_for_each(check)?;
        for (i, ch) in inputs.iter().enumerate() {
            if ch.field.len() != dim {
                return Err(SystemError::Dimension {
                    what: format!("input field g{}", i + 1),
                    expected: dim,
                    found: ch.field.len(),
                });
            }
            if !(ch.bound > 0.0 && ch.bound.is_finite()) {
                return Err(SystemError::InputBound { index: i + 1, value: ch.bound });
            }
            ch.field.iter().try_for_each(check)?;
        }
        let drift_derivs = Derivatives::of(&drift);
        let input_derivs = inputs.iter().map(|c| Derivatives::of(&c.field)).collect();
        Ok(Self { dim, drift, inputs, drift_derivs, input_derivs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &[Expr] {
        &self.drift
    }

    pub fn inputs(&self) -> &[InputChannel] {
        &self.inputs
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    /// Every input field is a constant vector, so the noise enters additively.
    pub fn is_additive(&self) -> bool {
        self.inputs.iter().all(|c| c.field.iter().all(Expr::is_constant))
    }

    /// Plain evaluation of `f(x) + sum_i g_i(x) v_i`.
    pub fn rhs(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        for (c, f) in self.drift.iter().enumerate() {
            let mut acc = f.eval(x);
            for (ch, vi) in self.inputs.iter().zip(v) {
                acc += ch.field[c].eval(x) * vi;
            }
            out[c] = acc;
        }
    }

    /// Plain evaluation of `g_i(x)`.
    pub fn input_field(&self, i: usize, x: &[f64], out: &mut [f64]) {
        for (c, g) in self.inputs[i].field.iter().enumerate() {
            out[c] = g.eval(x);
        }
    }

    /// Interval enclosure of `f(B) + sum_i g_i(B) [-V_i, V_i]`.
    pub fn rhs_enclosure(&self, b: &[Interval]) -> Result<Vec<Interval>, ExprError> {
        self.drift
            .iter()
            .enumerate()
            .map(|(c, f)| {
                let mut acc = f.eval_interval(b)?;
                for ch in &self.inputs {
                    acc = acc + ch.field[c].eval_interval(b)? * Interval::symmetric(ch.bound);
                }
                Ok(acc)
            })
            .collect()
    }
}

/// How `||D^2 f||` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianNorm {
    /// `max_{i,j,k} sup |d^2 f_i / dx_j dx_k|`.
    #[default]
    MaxEntry,
    /// `max_{i,j} sum_k sup |d^2 f_i / dx_j dx_k|`.
    MaxRowSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundsConfig {
    pub hessian: HessianNorm,
}

/// Per-input constants `K_i, L_i, H_i`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InputBounds {
    pub k: f64,
    pub l: f64,
    pub h: f64,
}

/// Uniform bounds over a box, all rounded upward.
///
/// `k_prime`, `l_prime`, `h_prime` are the weighted sums `sum_i V_i K_i` etc.
/// `noise_sup` bounds `||sum_i g_i(x) v_i||_inf` directly, i.e.
/// `max_c sum_i V_i sup|g_ic|`; it never exceeds `k_prime` and is the value
/// used wherever the error formulas need the size of the disturbance term.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepErrorBounds {
    pub k: f64,
    pub k_prime: f64,
    pub noise_sup: f64,
    pub l: f64,
    pub l_prime: f64,
    pub h: f64,
    pub h_prime: f64,
    pub lambda: f64,
    pub per_input: Vec<InputBounds>,
}

impl StepErrorBounds {
    /// Copy with the disturbance size taken as `k_prime` (no sup-norm refinement).
    pub fn with_summed_noise(&self) -> Self {
        Self { noise_sup: self.k_prime, ..self.clone() }
    }
}

fn eval_all(exprs: &[Expr], b: &[Interval]) -> Result<Vec<Interval>, ExprError> {
    exprs.iter().map(|e| e.eval_interval(b)).collect()
}

fn jacobian_matrix(d: &Derivatives, b: &[Interval]) -> Result<IntervalMatrix, ExprError> {
    let rows = d.jacobian.iter().map(|r| eval_all(r, b)).collect::<Result<Vec<_>, _>>()?;
    Ok(IntervalMatrix::from_rows(rows))
}

fn hessian_bound(d: &Derivatives, b: &[Interval], norm: HessianNorm) -> Result<f64, ExprError> {
    let n = d.jacobian.len();
    let mut best = 0.0f64;
    for comp in &d.hessian {
        let mut mags = vec![vec![0.0; n]; n];
        for (j, row) in comp.iter().enumerate() {
            for (off, e) in row.iter().enumerate() {
                let k = j + off;
                let m = if e.is_zero() { 0.0 } else { e.eval_interval(b)?.mag() };
                mags[j][k] = m;
                mags[k][j] = m;
            }
        }
        for row in &mags {
            let v = match norm {
                HessianNorm::MaxEntry => row.iter().cloned().fold(0.0, f64::max),
                HessianNorm::MaxRowSum => sum_up(row.iter().cloned()),
            };
            best = best.max(v);
        }
    }
    Ok(best)
}

fn sup_norm(v: &[Interval]) -> f64 {
    v.iter().map(Interval::mag).fold(0.0, f64::max)
}

/// Constants `K, K_i, K', L, L_i, L', H, H_i, H', Lambda` over `b`.
pub fn compute_bounds(
    sys: &InputAffineSystem,
    b: &IntervalBox,
    config: BoundsConfig,
) -> Result<StepErrorBounds, SystemError> {
    if b.dim() != sys.dim() {
        return Err(SystemError::Dimension { what: "bounding box".into(), expected: sys.dim(), found: b.dim() });
    }
    if !b.is_finite() {
        return Err(SystemError::Unbounded(b.clone()));
    }
    let x = b.components();
    let k = sup_norm(&eval_all(&sys.drift, x)?);
    let jac = jacobian_matrix(&sys.drift_derivs, x)?;
    let l = jac.inf_norm();
    let lambda = jac.log_norm_inf();
    let h = hessian_bound(&sys.drift_derivs, x, config.hessian)?;

    let mut per_input = Vec::with_capacity(sys.input_count());
    let mut noise_rows = vec![Vec::new(); sys.dim()];
    for (ch, d) in sys.inputs.iter().zip(&sys.input_derivs) {
        let g = eval_all(&ch.field, x)?;
        for (c, gc) in g.iter().enumerate() {
            noise_rows[c].push(round::mul_up(gc.mag(), ch.bound));
        }
        per_input.push(InputBounds {
            k: sup_norm(&g),
            l: jacobian_matrix(d, x)?.inf_norm(),
            h: hessian_bound(d, x, config.hessian)?,
        });
    }
    let weighted = |f: fn(&InputBounds) -> f64| {
        sum_up(per_input.iter().zip(&sys.inputs).map(|(p, ch)| round::mul_up(f(p), ch.bound)))
    };
    let k_prime = weighted(|p| p.k);
    let l_prime = weighted(|p| p.l);
    let h_prime = weighted(|p| p.h);
    let noise_sup = noise_rows.into_iter().map(sum_up).fold(0.0, f64::max).min(k_prime);
    Ok(StepErrorBounds { k, k_prime, noise_sup, l, l_prime, h, h_prime, lambda, per_input })
}
