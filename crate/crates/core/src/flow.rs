//! Validated flow of the approximate system `y' = f(y) + sum_i g_i(y) w_i(a, t)`
//! over one step.
//!
//! An a-priori enclosure `B` of all trajectories is certified first. The
//! constant model `B` is then an enclosure of the solution, and every Picard
//! iterate `y -> x_k + int (f(y) + sum g_i(y) w_i)` of an enclosure is again
//! an enclosure, so a fixed number of iterations sharpens `B` into a
//! polynomial model in the state, input and time parameters.

use thiserror::Error;

use crate::inputs::InputScheme;
use crate::interval::{round, Interval, IntervalBox};
use crate::polymodel::{compose, ModelConfig, ModelError, PolynomialModel, VarInfo, VarRole, VectorModel};
use crate::symexpr::{ExprError, InputAffineSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("step size {h} too large: {reason}")]
    StepTooLarge { h: f64, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGeometry {
    pub t: f64,
    pub h: f64,
}

impl StepGeometry {
    pub fn new(t: f64, h: f64) -> Self {
        assert!(h > 0.0, "step size must be positive");
        Self { t, h }
    }

    pub fn midpoint(&self) -> f64 {
        self.t + self.h / 2.0
    }

    pub fn end(&self) -> f64 {
        self.t + self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub model: ModelConfig,
    /// Minimal Picard iterations; `None` means `max_degree + 2`.
    pub iterations: Option<usize>,
    /// Iterations continue past the minimum while the error drops by at
    /// least a tenth, up to this many in total.
    pub max_iterations: usize,
    pub max_inflations: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { model: ModelConfig::default(), iterations: None, max_iterations: 100, max_inflations: 20 }
    }
}

impl FlowConfig {
    pub fn picard_iterations(&self) -> usize {
        self.iterations.unwrap_or(self.model.max_degree as usize + 2)
    }
}

/// Enclosure of `f(b) + sum_i g_i(b) [-w_i, w_i]`.
fn rhs_hull(sys: &InputAffineSystem, b: &[Interval], input_mag: &[f64]) -> Result<Vec<Interval>, ExprError> {
    sys.drift()
        .iter()
        .enumerate()
        .map(|(c, f)| {
            let mut acc = f.eval_interval(b)?;
            for (ch, &w) in sys.inputs().iter().zip(input_mag) {
                if w > 0.0 {
                    acc = acc + ch.field[c].eval_interval(b)? * Interval::symmetric(w);
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Certified box containing every solution from `x` over `[0, h]` with input
/// magnitudes at most `input_mag`.
pub fn apriori_bound(
    sys: &InputAffineSystem,
    x: &IntervalBox,
    input_mag: &[f64],
    h: f64,
    max_inflations: usize,
) -> Result<IntervalBox, FlowError> {
    let step = Interval::new(0.0, h);
    let too_large = |reason: String| FlowError::StepTooLarge { h, reason };
    let rhs0 = rhs_hull(sys, x.components(), input_mag)?;
    let mut b = IntervalBox::new(
        x.iter()
            .zip(&rhs0)
            .map(|(xi, fi)| {
                let r = round::mul_up(2.0 * h, fi.mag());
                Interval::new(round::sub_down(xi.lo(), r), round::add_up(xi.hi(), r))
            })
            .collect(),
    );
    for _ in 0..=max_inflations {
        let rhs = match rhs_hull(sys, b.components(), input_mag) {
            Ok(r) => r,
            Err(ExprError::Interval(e)) => return Err(too_large(format!("right-hand side undefined on bound: {e}"))),
            Err(e) => return Err(e.into()),
        };
        let candidate = IntervalBox::new(x.iter().zip(&rhs).map(|(xi, fi)| *xi + step * *fi).collect());
        if !candidate.is_finite() {
            return Err(too_large("a-priori bound diverged".into()));
        }
        if candidate.is_subset(&b) {
            return Ok(candidate);
        }
        let hull = b.hull(&candidate);
        b = IntervalBox::new(
            hull.iter()
                .map(|c| {
                    let mid = c.midpoint();
                    let r = round::mul_up(1.2, c.radius().max(f64::MIN_POSITIVE));
                    Interval::new(round::sub_down(mid, r), round::add_up(mid, r)).hull(c)
                })
                .collect(),
        );
    }
    Err(too_large(format!("a-priori bound not certified after {max_inflations} inflations")))
}

/// Picard iteration on models.
///
/// `x0` holds the initial state over the full variable set (including
/// `time`, on which it must not depend); `w` has one model per input
/// channel; `b` encloses every solution over the step. Returns the tube:
/// a model of the solution as a function of all variables, with `tau = time`
/// covering `[t, t + h]`.
pub fn picard_flow(
    sys: &InputAffineSystem,
    x0: &VectorModel,
    w: &[PolynomialModel],
    time: usize,
    h: f64,
    b: &IntervalBox,
    cfg: &FlowConfig,
) -> Result<VectorModel, FlowError> {
    let arity = x0.arity();
    let n = sys.dim();
    let mc = &cfg.model;
    let mut y: Vec<PolynomialModel> = b.iter().map(|bi| PolynomialModel::from_interval(arity, *bi)).collect();
    let max_error = |y: &[PolynomialModel]| y.iter().map(PolynomialModel::error).fold(0.0, f64::max);
    let initial_error = max_error(&y);
    let mut prev = initial_error;
    for it in 0..cfg.max_iterations.max(cfg.picard_iterations()) {
        let mut next = Vec::with_capacity(n);
        for c in 0..n {
            let mut rhs = compose(&sys.drift()[c], &y, mc)?;
            for (ch, wi) in sys.inputs().iter().zip(w) {
                if wi.term_count() == 0 && wi.error() == 0.0 {
                    continue;
                }
                let g = compose(&ch.field[c], &y, mc)?;
                rhs = rhs.add(&g.mul(wi, mc)?)?;
            }
            let integral = rhs.antiderivative(time, h / 2.0, mc);
            next.push(x0.component(c).add(&integral)?);
        }
        y = next;
        let e = max_error(&y);
        if it + 1 >= cfg.picard_iterations() && !(e < 0.9 * prev) {
            break;
        }
        prev = e;
    }
    let final_error = max_error(&y);
    if !final_error.is_finite() || (initial_error > 0.0 && final_error > initial_error) {
        return Err(FlowError::StepTooLarge {
            h,
            reason: format!("Picard iteration not contracting (error {final_error:e} vs a-priori {initial_error:e})"),
        });
    }
    Ok(x0.with_components(y)?)
}

/// One flowed segment: the solution tube over `[geom.t, geom.t + geom.h]`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub geom: StepGeometry,
    pub tube: VectorModel,
    pub time: usize,
    pub bound: IntervalBox,
}

/// Result of flowing the approximate system for one step.
#[derive(Debug, Clone)]
pub struct FlowStep {
    /// State at the end of the step, over state and input parameters.
    pub end: VectorModel,
    /// Tubes of the sub-steps (two for the step scheme). Their variable sets
    /// include a trailing time variable.
    pub segments: Vec<Segment>,
    /// Enclosure valid for both the original and the approximate system
    /// over the whole step.
    pub bound: IntervalBox,
    /// Indices of the input parameter variables introduced for this step.
    pub input_vars: Vec<usize>,
}

/// Flow `x` over one step with the approximate inputs of `scheme`.
pub fn flow_step(
    sys: &InputAffineSystem,
    x: &VectorModel,
    scheme: InputScheme,
    geom: StepGeometry,
    step_index: usize,
    cfg: &FlowConfig,
) -> Result<FlowStep, FlowError> {
    let mc = &cfg.model;
    let mut state = x.clone();
    let p = scheme.params_per_input();
    let mut params = Vec::with_capacity(sys.input_count());
    for channel in 0..sys.input_count() {
        let vars: Vec<usize> = (0..p)
            .map(|index| state.add_var(VarInfo { role: VarRole::Input { step: step_index, channel, index } }))
            .collect();
        params.push(vars);
    }
    let input_vars: Vec<usize> = params.iter().flatten().copied().collect();

    // One enclosure serving both systems: inputs bounded by max(V, sup|w|).
    let mags: Vec<f64> = sys.inputs().iter().map(|ch| ch.bound.max(scheme.w_bound(ch.bound))).collect();
    let x_box = x.range_box(mc);
    let bound = apriori_bound(sys, &x_box, &mags, geom.h, cfg.max_inflations)?;

    let segs = scheme.segments();
    let sub_h = geom.h / segs as f64;
    let mut segments = Vec::with_capacity(segs);
    for s in 0..segs {
        let sub = StepGeometry::new(geom.t + sub_h * s as f64, sub_h);
        let mut with_time = state.clone();
        let time = with_time.add_var(VarInfo { role: VarRole::Time });
        let w: Vec<PolynomialModel> = sys
            .inputs()
            .iter()
            .zip(&params)
            .map(|(ch, vars)| scheme.realize(ch.bound, vars, time, s, with_time.arity()))
            .collect();
        let seg_bound = if s == 0 {
            bound.clone()
        } else {
            let w_mags: Vec<f64> = sys.inputs().iter().map(|ch| scheme.w_bound(ch.bound)).collect();
            apriori_bound(sys, &state.range_box(mc), &w_mags, sub_h, cfg.max_inflations)?
        };
        let tube = picard_flow(sys, &with_time, &w, time, sub_h, &seg_bound, cfg)?;
        let end = tube.substitute_affine(time, 1.0, 0.0, mc).remove_vars(&[time]);
        segments.push(Segment { geom: sub, tube, time, bound: seg_bound });
        state = end;
    }
    Ok(FlowStep { end: state, segments, bound, input_vars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse, InputChannel};

    fn system(drift: &[&str], inputs: &[(&[&str], f64)]) -> InputAffineSystem {
        InputAffineSystem::new(
            drift.iter().map(|s| parse(s).unwrap()).collect(),
            inputs
                .iter()
                .map(|(g, v)| InputChannel { field: g.iter().map(|s| parse(s).unwrap()).collect(), bound: *v })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn apriori_examples() {
        let still = system(&["0"], &[]);
        let x = IntervalBox::from_bounds(&[(0.0, 1.0)]);
        assert_eq!(apriori_bound(&still, &x, &[], 0.3, 20).unwrap(), x);
        let drift = system(&["1"], &[]);
        let b = apriori_bound(&drift, &IntervalBox::point(&[0.0]), &[], 0.1, 20).unwrap();
        assert!(b[0].lo() <= 0.0 && b[0].hi() >= 0.1);
        let growth = system(&["x1"], &[]);
        let b = apriori_bound(&growth, &IntervalBox::point(&[1.0]), &[], 0.1, 20).unwrap();
        assert!(b[0].hi() >= 0.1f64.exp());
        let blowup = system(&["x1^2"], &[]);
        assert!(matches!(
            apriori_bound(&blowup, &IntervalBox::point(&[1.0]), &[], 2.0, 20),
            Err(FlowError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn unit_drift_flow() {
        let sys = system(&["1"], &[]);
        let x = VectorModel::from_box(&IntervalBox::point(&[0.0]));
        let step = flow_step(&sys, &x, InputScheme::Zero, StepGeometry::new(0.0, 0.1), 0, &FlowConfig::default()).unwrap();
        let r = step.end.component(0).range();
        assert!(r.contains(0.1) && r.width() < 1e-15);
    }

    #[test]
    fn exponential_flow() {
        let sys = system(&["x1"], &[]);
        let x = VectorModel::from_box(&IntervalBox::point(&[1.0]));
        let cfg = FlowConfig { iterations: Some(6), ..Default::default() };
        let step = flow_step(&sys, &x, InputScheme::Zero, StepGeometry::new(0.0, 0.1), 0, &cfg).unwrap();
        let e = step.end.component(0);
        assert!(e.range().contains(1.105_170_918_075_647_6));
        assert!(e.error() <= 1e-7, "error {}", e.error());
    }

    #[test]
    fn constant_input_flow() {
        let sys = system(&["0"], &[(&["1"], 1.0)]);
        let x = VectorModel::from_box(&IntervalBox::point(&[0.0]));
        let step =
            flow_step(&sys, &x, InputScheme::Constant, StepGeometry::new(0.0, 0.1), 0, &FlowConfig::default()).unwrap();
        let e = step.end.component(0);
        let a = step.input_vars[0];
        assert!((e.coefficient(&crate::polymodel::Monomial::var(a, 1)) - 0.1).abs() < 1e-16);
        assert!(e.error() < 1e-15);
    }
}
