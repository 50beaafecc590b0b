//! Uniform single-step bounds on the distance between solutions of the
//! inclusion and of the approximate system started at the same point.
//!
//! Every formula is evaluated in interval arithmetic and the upper endpoint
//! is returned, so the computed value never undercuts the exact one. The
//! size of the disturbance term `||sum_i g_i v_i||` is taken from
//! `StepErrorBounds::noise_sup`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inputs::InputScheme;
use crate::interval::{Interval, IntervalError};
use crate::symexpr::StepErrorBounds;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalErrorError {
    #[error("input count must be at least 1, got {0}")]
    NoInputs(usize),
    #[error("unknown error order `{0}`")]
    UnknownOrder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorOrder {
    O1Zero,
    O2Constant,
    O2ConstantC2,
    O2Affine,
    O3Additive,
    O3SingleInput,
}

impl ErrorOrder {
    pub const ALL: [ErrorOrder; 6] = [
        ErrorOrder::O1Zero,
        ErrorOrder::O2Constant,
        ErrorOrder::O2ConstantC2,
        ErrorOrder::O2Affine,
        ErrorOrder::O3Additive,
        ErrorOrder::O3SingleInput,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorOrder::O1Zero => "o1-zero",
            ErrorOrder::O2Constant => "o2-constant",
            ErrorOrder::O2ConstantC2 => "o2-constant-c2",
            ErrorOrder::O2Affine => "o2-affine",
            ErrorOrder::O3Additive => "o3-additive",
            ErrorOrder::O3SingleInput => "o3-single-input",
        }
    }

    /// Asymptotic order in `h`.
    pub fn order(self) -> u32 {
        match self {
            ErrorOrder::O1Zero => 1,
            ErrorOrder::O2Constant | ErrorOrder::O2ConstantC2 | ErrorOrder::O2Affine => 2,
            ErrorOrder::O3Additive | ErrorOrder::O3SingleInput => 3,
        }
    }
}

impl fmt::Display for ErrorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorOrder {
    type Err = LocalErrorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorOrder::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| LocalErrorError::UnknownOrder(s.into()))
    }
}

/// Structural facts about the system that decide which bounds apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemTraits {
    pub inputs: usize,
    /// Every `g_i` is a constant vector.
    pub additive: bool,
}

fn pt(x: f64) -> Interval {
    Interval::point(x)
}

fn frac(num: f64, den: f64) -> Interval {
    pt(num).checked_div(pt(den)).expect("nonzero denominator")
}

fn div(a: Interval, b: Interval) -> Result<Interval, IntervalError> {
    a.checked_div(b)
}

/// Upper bound of `phi(u) = (e^u - 1)/u`, `phi(0) = 1`.
pub fn phi_upper(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        // phi(u) = 1 + u/2 + u^2/6 + ..., and |u| is tiny.
        return (Interval::ONE + pt(u) * 0.5 + pt(u * u)).hi();
    }
    if u.abs() < 0.5 {
        // sum_k u^k/(k+1)! avoids the cancellation in e^u - 1.
        const N: usize = 20;
        let x = pt(u);
        let mut term = Interval::ONE;
        let mut sum = Interval::ONE;
        for k in 1..=N {
            term = div(term * x, pt((k + 1) as f64)).expect("nonzero");
            sum = sum + term;
        }
        // |R| <= |u|^{N+1}/(N+2)! e^{|u|} < term * |u| * 2.
        let r = (term.abs() * u.abs() * 2.0).hi();
        return sum.inflate(r).hi();
    }
    let e = Interval::point(u).exp() - Interval::ONE;
    e.checked_div(pt(u)).map(|v| v.hi()).unwrap_or(f64::INFINITY)
}

/// `phi(Lambda h)` as a point interval at its upper bound. `phi` is
/// increasing, so the product is taken rounded upward first.
fn phi(b: &StepErrorBounds, h: f64) -> Interval {
    pt(phi_upper((pt(b.lambda) * h).hi()))
}

/// `1 - h c` as an interval, or `None` unless it is certainly positive.
fn prefactor(h: f64, c: Interval) -> Option<Interval> {
    let p = Interval::ONE - pt(h) * c;
    (p.lo() > 0.0).then_some(p)
}

struct Consts {
    k: Interval,
    kp: Interval,
    l: Interval,
    lp: Interval,
    hh: Interval,
    hp: Interval,
}

fn consts(b: &StepErrorBounds) -> Consts {
    Consts {
        k: pt(b.k),
        kp: pt(b.noise_sup),
        l: pt(b.l),
        lp: pt(b.l_prime),
        hh: pt(b.h),
        hp: pt(b.h_prime),
    }
}

/// Zero input: `min(h K' phi(Lambda h), h (2K + K'))`.
pub fn err_o1(b: &StepErrorBounds, h: f64) -> f64 {
    let c = consts(b);
    let first = pt(h) * c.kp * phi(b, h);
    let second = pt(h) * (c.k * 2.0 + c.kp);
    first.hi().min(second.hi())
}

/// Constant input equal to the mean:
/// `h^2 ((K + K') L'/3 + 2 K' (L + L') phi(Lambda h))`.
pub fn err_o2_constant(b: &StepErrorBounds, h: f64) -> f64 {
    let c = consts(b);
    let h2 = pt(h).sqr();
    let v = h2 * (div((c.k + c.kp) * c.lp, pt(3.0)).expect("nonzero") + c.kp * 2.0 * (c.l + c.lp) * phi(b, h));
    v.hi()
}

/// Constant input, `C^2` drift. `None` when `h L >= 2`.
pub fn err_o2_constant_c2(b: &StepErrorBounds, h: f64) -> Option<f64> {
    let c = consts(b);
    let pre = prefactor(h, c.l * 0.5)?;
    let ph = phi(b, h);
    let h2 = pt(h).sqr();
    let h3 = h2 * h;
    let t1 = div(h2, pt(3.0)).ok()? * (pt(3.0) * c.kp * c.lp * ph + c.lp * (c.k + c.kp));
    let t2 = div(h3, pt(4.0)).ok()? * c.kp * (c.l * c.lp + c.l.sqr() + c.hh * (c.k + c.kp)) * ph;
    let t3 = h3 * frac(11.0, 24.0) * (c.hh * c.kp + c.l * c.lp) * (c.k + c.kp);
    Some(div(t1 + t2 + t3, pre).ok()?.hi())
}

/// Affine inputs, general `C^2` fields. `None` unless `h (L/2 + L') < 1`.
pub fn err_o2_affine(b: &StepErrorBounds, h: f64) -> Option<f64> {
    let c = consts(b);
    let pre = prefactor(h, c.l * 0.5 + c.lp)?;
    let ph = phi(b, h);
    let h2 = pt(h).sqr();
    let h3 = h2 * h;
    let t1 = div(h2, pt(4.0)).ok()? * c.lp * (c.k * 11.0 + c.kp * 34.5);
    let inner = (c.hp * 4.0 + c.hh) * (c.k + c.kp * 2.5) + c.l.sqr() + (c.l * 4.5 + c.lp * 5.0) * c.lp;
    let t2 = h3 * frac(7.0, 8.0) * c.kp * inner * ph;
    let t3 = h3 * frac(7.0, 48.0) * (c.hh * c.kp + c.l * c.lp) * (c.k + c.kp);
    Some(div(t1 + t2 + t3, pre).ok()?.hi())
}

/// Affine inputs, additive noise. `None` when `h L >= 2`.
pub fn err_o3_additive(b: &StepErrorBounds, h: f64) -> Option<f64> {
    let c = consts(b);
    let pre = prefactor(h, c.l * 0.5)?;
    let ph = phi(b, h);
    let h3 = pt(h).sqr() * h;
    let t1 = h3 * frac(7.0, 48.0) * c.kp * c.hh * (c.k + c.kp);
    let t2 = h3 * frac(7.0, 8.0) * c.kp * (c.l.sqr() + c.hh * (c.k + c.kp * 2.5)) * ph;
    Some(div(t1 + t2, pre).ok()?.hi())
}

/// Affine input, single channel. `None` unless `h (L/2 + L') < 1`.
///
/// The `H K' + L L'` term carries the coefficient `7/48`, matching the
/// additive-noise bound it must reduce to when `L' = H' = 0`.
pub fn err_o3_single(b: &StepErrorBounds, h: f64) -> Option<f64> {
    let c = consts(b);
    let pre = prefactor(h, c.l * 0.5 + c.lp)?;
    let ph = phi(b, h);
    let h3 = pt(h).sqr() * h;
    let inner = (c.hh + c.hp * 10.0) * (c.k + c.kp * 2.5) + c.l.sqr() + c.l * c.lp * 12.5 + c.lp.sqr() * 25.0;
    let t1 = h3 * frac(7.0, 8.0) * c.kp * inner * ph;
    let bracket = (c.hh * c.kp + c.l * c.lp) * 7.0 + (c.hp * c.k + c.l * c.lp) * 28.0 + (c.hp * c.kp + c.lp.sqr()) * 29.0;
    let t2 = div(h3, pt(48.0)).ok()? * (c.k + c.kp) * bracket;
    Some(div(t1 + t2, pre).ok()?.hi())
}

/// Evaluate one bound; `None` when its step-size precondition fails.
pub fn evaluate(order: ErrorOrder, b: &StepErrorBounds, h: f64) -> Option<f64> {
    match order {
        ErrorOrder::O1Zero => Some(err_o1(b, h)),
        ErrorOrder::O2Constant => Some(err_o2_constant(b, h)),
        ErrorOrder::O2ConstantC2 => err_o2_constant_c2(b, h),
        ErrorOrder::O2Affine => err_o2_affine(b, h),
        ErrorOrder::O3Additive => err_o3_additive(b, h),
        ErrorOrder::O3SingleInput => err_o3_single(b, h),
    }
}

/// Bounds whose hypotheses hold for this system and input scheme. Each
/// theorem fixes the form of the approximate input, so the scheme decides
/// the family and the system structure decides the refinements.
pub fn applicable_orders(traits: SystemTraits, scheme: InputScheme) -> Vec<ErrorOrder> {
    match scheme {
        InputScheme::Zero => vec![ErrorOrder::O1Zero],
        InputScheme::Constant => vec![ErrorOrder::O2Constant, ErrorOrder::O2ConstantC2],
        InputScheme::Affine | InputScheme::AffineReduced | InputScheme::Step => {
            let mut v = vec![ErrorOrder::O2Affine];
            if traits.additive {
                v.push(ErrorOrder::O3Additive);
            }
            if traits.inputs == 1 {
                v.push(ErrorOrder::O3SingleInput);
            }
            v
        }
    }
}

/// Smallest bound among the applicable ones. `None` if none can be
/// evaluated at this step size.
pub fn select_error(
    traits: SystemTraits,
    scheme: InputScheme,
    b: &StepErrorBounds,
    h: f64,
) -> Option<(ErrorOrder, f64)> {
    // Ties go to the higher-order (more specific) bound.
    applicable_orders(traits, scheme)
        .into_iter()
        .rev()
        .filter_map(|o| evaluate(o, b, h).map(|e| (o, e)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

/// Equations, minimal polynomial degree and parameter count of an input
/// approximation with `O(h^3)` local error for `m` general inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRequirements {
    pub equations: usize,
    pub degree: usize,
    pub parameters: usize,
}

pub fn param_requirements(m: usize) -> Result<ParamRequirements, LocalErrorError> {
    if m < 1 {
        return Err(LocalErrorError::NoInputs(m));
    }
    let degree = (m + 2) / 2;
    Ok(ParamRequirements { equations: m * (m + 3) / 2, degree, parameters: m * (degree + 1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(k: f64, kp: f64, l: f64, lp: f64, h: f64, hp: f64, lambda: f64) -> StepErrorBounds {
        StepErrorBounds {
            k,
            k_prime: kp,
            noise_sup: kp,
            l,
            l_prime: lp,
            h,
            h_prime: hp,
            lambda,
            per_input: vec![],
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_upper(0.0), 1.0);
        assert!(phi_upper(1e-10) >= 1.0 + 5e-11);
        let v = phi_upper(0.027);
        let exact = (0.027f64.exp() - 1.0) / 0.027;
        assert!(v >= exact && v - exact < 1e-14);
        assert!(phi_upper(-2.0) < 1.0);
    }

    #[test]
    fn first_order() {
        assert!((err_o1(&bounds(100.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.1) - 0.1).abs() < 1e-16);
        let vdp = bounds(20.0, 0.08, 31.0, 0.0, 12.0, 0.0, 27.0);
        let expected = 0.08 * 0.001 * (0.027f64.exp() - 1.0) / 0.027;
        let e = err_o1(&vdp, 0.001);
        assert!(e >= expected && (e - expected) / expected < 1e-13);
        assert!((e - 8.109e-5).abs() < 1e-8);
        assert_eq!(err_o1(&bounds(5.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0), 0.1), 0.0);
    }

    #[test]
    fn constant_input_bounds() {
        let b = bounds(1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0);
        let e = err_o2_constant(&b, 0.1);
        assert!((e - 0.01 * (2.0 / 3.0 + 4.0)).abs() < 1e-15);
        let additive = bounds(3.0, 0.5, 2.0, 0.0, 0.0, 0.0, 0.0);
        assert!((err_o2_constant(&additive, 0.1) - 2.0 * 0.01 * 0.5 * 2.0).abs() < 1e-16);
        let c2 = err_o2_constant_c2(&bounds(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0), 0.1).unwrap();
        assert!((c2 - 0.00025 / 0.95).abs() < 1e-17);
        assert!(err_o2_constant_c2(&bounds(0.0, 1.0, 25.0, 0.0, 0.0, 0.0, 0.0), 0.1).is_none());
        assert_eq!(err_o2_constant(&bounds(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0), 0.1), 0.0);
    }

    #[test]
    fn affine_bounds() {
        let ones = bounds(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
        let h: f64 = 0.1;
        let num = h * h / 4.0 * (11.0 + 34.5)
            + 7.0 * h.powi(3) / 8.0 * (5.0 * 3.5 + 1.0 + 9.5)
            + 7.0 * h.powi(3) / 48.0 * 2.0 * 2.0;
        let expected = num / (1.0 - 0.05 - 0.1);
        let e = err_o2_affine(&ones, h).unwrap();
        assert!(e >= expected * (1.0 - 1e-15) && (e - expected).abs() < 1e-15);
        assert_eq!(err_o2_affine(&bounds(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0), h), Some(0.0));
    }

    #[test]
    fn harmonic_third_order() {
        // L = Lambda = 1, H = 0: 7 h^3 /(4 (2 - h)) phi(h) K'.
        let b = bounds(2.0, 0.1, 1.0, 0.0, 0.0, 0.0, 1.0);
        let h: f64 = 0.25;
        let expected = 7.0 * h.powi(3) / (4.0 * (2.0 - h)) * (h.exp() - 1.0) / h * 0.1;
        let e = err_o3_additive(&b, h).unwrap();
        assert!((e - expected).abs() < 1e-15 && e >= expected * (1.0 - 1e-15));
        assert!((e - 1.77516e-3).abs() < 1e-8);
    }

    #[test]
    fn single_input_collapses_to_additive() {
        let b = bounds(20.0, 0.08, 31.0, 0.0, 12.0, 0.0, 27.0);
        for h in [1e-1 / 31.0, 1e-3, 1e-4] {
            assert_eq!(err_o3_single(&b, h), err_o3_additive(&b, h));
        }
        let ones = bounds(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
        let h: f64 = 0.01;
        let t1 = 7.0 * h.powi(3) / 8.0 * (11.0 * 3.5 + 1.0 + 12.5 + 25.0);
        let t2 = h.powi(3) / 48.0 * 2.0 * (14.0 + 56.0 + 58.0);
        let expected = (t1 + t2) / (1.0 - 0.005 - 0.01);
        assert!((err_o3_single(&ones, h).unwrap() - expected).abs() < 1e-17);
        assert_eq!(err_o3_single(&bounds(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0), h), Some(0.0));
    }

    #[test]
    fn selection() {
        let additive = SystemTraits { inputs: 2, additive: true };
        let b = bounds(2.0, 0.1, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(select_error(additive, InputScheme::Affine, &b, 0.1).unwrap().0, ErrorOrder::O3Additive);
        let general = SystemTraits { inputs: 2, additive: false };
        let g = bounds(2.0, 0.1, 1.0, 0.5, 1.0, 0.2, 1.0);
        assert_eq!(select_error(general, InputScheme::Affine, &g, 0.01).unwrap().0, ErrorOrder::O2Affine);
        assert_eq!(select_error(general, InputScheme::Zero, &g, 0.01).unwrap().0, ErrorOrder::O1Zero);
    }

    #[test]
    fn table_of_parameter_counts() {
        let r = |m| param_requirements(m).unwrap();
        assert_eq!(r(1), ParamRequirements { equations: 2, degree: 1, parameters: 2 });
        assert_eq!(r(3), ParamRequirements { equations: 9, degree: 2, parameters: 9 });
        assert_eq!(r(10), ParamRequirements { equations: 65, degree: 6, parameters: 70 });
        assert!(param_requirements(0).is_err());
    }
}
