//! Finitely parameterised approximations `w(a, t)` of the disturbance inputs.
//!
//! Parameters are always normalised to `[-1, 1]`; the physical scaling by
//! `V_i` is applied when a scheme is realised as a polynomial model. Time
//! enters through `tau in [-1, 1]`, the step (or half-step) rescaled.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polymodel::{Monomial, PolynomialModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown input scheme `{0}` (expected zero, constant, affine, affine-reduced or step)")]
pub struct UnknownScheme(String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputScheme {
    /// `w = 0`.
    Zero,
    /// `w = V a0`.
    Constant,
    /// `w = a0 + a1 (t - t_mid)/h` with `a0 in [-V, V]`, `a1 in [-3V, 3V]`.
    Affine,
    /// Affine with the slope limited by the quadratic envelope
    /// `|a1| <= 3V (1 - (a0/V)^2)`: `w = V(a0 + 3(1 - a0^2) b1 (t - t_mid)/h)`.
    AffineReduced,
    /// Constant on each half step, each value in `[-2V, 2V]`.
    Step,
}

impl InputScheme {
    pub const ALL: [InputScheme; 5] =
        [InputScheme::Zero, InputScheme::Constant, InputScheme::Affine, InputScheme::AffineReduced, InputScheme::Step];

    /// Normalised parameters per input channel.
    pub fn params_per_input(self) -> usize {
        match self {
            InputScheme::Zero => 0,
            InputScheme::Constant => 1,
            InputScheme::Affine | InputScheme::AffineReduced | InputScheme::Step => 2,
        }
    }

    /// `sup |w|` over the parameter domain and the step, for bound `v`.
    pub fn w_bound(self, v: f64) -> f64 {
        match self {
            InputScheme::Zero => 0.0,
            InputScheme::Constant => v,
            InputScheme::Affine => 2.5 * v,
            InputScheme::AffineReduced => v * (5.0 / 3.0),
            InputScheme::Step => 2.0 * v,
        }
    }

    /// Number of sub-steps the step is split into.
    pub fn segments(self) -> usize {
        match self {
            InputScheme::Step => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InputScheme::Zero => "zero",
            InputScheme::Constant => "constant",
            InputScheme::Affine => "affine",
            InputScheme::AffineReduced => "affine-reduced",
            InputScheme::Step => "step",
        }
    }

    /// Model of `w_i` for one segment.
    ///
    /// `params` are the channel's parameter variables (length
    /// `params_per_input`), `time` the variable for `tau` on the segment.
    pub fn realize(self, v: f64, params: &[usize], time: usize, segment: usize, arity: usize) -> PolynomialModel {
        assert_eq!(params.len(), self.params_per_input());
        let m = Monomial::from_powers;
        let terms = match self {
            InputScheme::Zero => vec![],
            InputScheme::Constant => vec![(m(&[(params[0], 1)]), v)],
            // (t - t_mid)/h = tau/2, so a1 (t - t_mid)/h = 3V alpha1 tau / 2.
            InputScheme::Affine => vec![(m(&[(params[0], 1)]), v), (m(&[(params[1], 1), (time, 1)]), 1.5 * v)],
            InputScheme::AffineReduced => vec![
                (m(&[(params[0], 1)]), v),
                (m(&[(params[1], 1), (time, 1)]), 1.5 * v),
                (m(&[(params[0], 2), (params[1], 1), (time, 1)]), -1.5 * v),
            ],
            InputScheme::Step => vec![(m(&[(params[segment], 1)]), 2.0 * v)],
        };
        PolynomialModel::from_terms(arity, terms, 0.0)
    }

    /// Evaluate `w` at normalised parameters and physical offset `s = t - t_k`
    /// within a step of length `h`.
    pub fn eval(self, v: f64, alpha: &[f64], s: f64, h: f64) -> f64 {
        let u = (s - h / 2.0) / h;
        match self {
            InputScheme::Zero => 0.0,
            InputScheme::Constant => v * alpha[0],
            InputScheme::Affine => v * alpha[0] + 3.0 * v * alpha[1] * u,
            InputScheme::AffineReduced => v * (alpha[0] + 3.0 * (1.0 - alpha[0] * alpha[0]) * alpha[1] * u),
            InputScheme::Step => 2.0 * v * if s < h / 2.0 { alpha[0] } else { alpha[1] },
        }
    }

    /// Normalised parameters whose `w` matches the mean (and, for two-parameter
    /// schemes, the first moment about the midpoint) of `trace` on
    /// `[t_k, t_k + h]`.
    pub fn match_parameters(self, trace: &InputTrace, v: f64, t_k: f64, h: f64) -> Vec<f64> {
        let mid = t_k + h / 2.0;
        let m0 = trace.integral(t_k, t_k + h) / h;
        let m1 = trace.moment(t_k, t_k + h, mid);
        let a1 = 12.0 * m1 / (h * h);
        match self {
            InputScheme::Zero => vec![],
            InputScheme::Constant => vec![m0 / v],
            InputScheme::Affine => vec![m0 / v, a1 / (3.0 * v)],
            InputScheme::AffineReduced => {
                let a0 = m0 / v;
                let env = 3.0 * v * (1.0 - a0 * a0);
                vec![a0, if env > 0.0 { a1 / env } else { 0.0 }]
            }
            InputScheme::Step => {
                // c1 + c2 = 2 m0 and (h^2/8)(c2 - c1) = m1.
                let d = 8.0 * m1 / (h * h);
                vec![(m0 - d / 2.0) / (2.0 * v), (m0 + d / 2.0) / (2.0 * v)]
            }
        }
    }
}

impl fmt::Display for InputScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InputScheme {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InputScheme::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| UnknownScheme(s.to_string()))
    }
}

/// Physical affine coefficients `(a0, a1)` of `w = a0 + a1 (t - t_mid)/h`
/// obtained by moment matching.
pub fn affine_coefficients(trace: &InputTrace, t_k: f64, h: f64) -> (f64, f64) {
    let a0 = trace.integral(t_k, t_k + h) / h;
    let a1 = 12.0 * trace.moment(t_k, t_k + h, t_k + h / 2.0) / (h * h);
    (a0, a1)
}

/// `|a1| <= 3V (1 - (a0/V)^2)` up to `1e-12`.
pub fn quadratic_envelope_check(a0: f64, a1: f64, v: f64) -> bool {
    let r = a0 / v;
    a1.abs() <= 3.0 * v * (1.0 - r * r) + 1e-12
}

/// Piecewise-constant signal: `values[j]` on `[times[j], times[j+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputTrace {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl InputTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(times.len(), values.len() + 1, "one value per segment");
        assert!(times.windows(2).all(|w| w[0] <= w[1]), "times must be sorted");
        Self { times, values }
    }

    pub fn constant(t0: f64, t1: f64, v: f64) -> Self {
        Self::new(vec![t0, t1], vec![v])
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let j = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        self.values[j.min(self.values.len() - 1)]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn pieces(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().filter_map(move |(j, &v)| {
            let lo = self.times[j].max(a);
            let hi = self.times[j + 1].min(b);
            (hi > lo).then_some((lo, hi, v))
        })
    }

    /// `int_a^b v(t) dt`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.pieces(a, b).map(|(lo, hi, v)| v * (hi - lo)).sum()
    }

    /// `int_a^b (t - c) v(t) dt`.
    pub fn moment(&self, a: f64, b: f64, c: f64) -> f64 {
        self.pieces(a, b).map(|(lo, hi, v)| v * ((hi - c).powi(2) - (lo - c).powi(2)) / 2.0).sum()
    }
}
