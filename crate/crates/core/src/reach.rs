//! Evolution of reachable sets: flow, analytic error inflation, parameter
//! reduction, splitting and section crossings.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{flow_step, FlowConfig, FlowError, StepGeometry};
use crate::inputs::InputScheme;
use crate::interval::{round, Interval, IntervalBox};
use crate::localerr::{applicable_orders, evaluate, phi_upper, select_error, ErrorOrder, SystemTraits};
use crate::polymodel::{ModelError, VarRole, VectorModel};
use crate::symexpr::{compute_bounds, BoundsConfig, InputAffineSystem, StepErrorBounds, SystemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error("at t = {t}: {source}; try a smaller step size")]
    Flow { t: f64, source: FlowError },
    #[error(transparent)]
    Bounds(#[from] SystemError),
    #[error("at t = {t}: step bound {bound} leaves the region of computation {domain}; try a larger region")]
    DomainExceeded { t: f64, bound: IntervalBox, domain: IntervalBox },
    #[error("at t = {t}: no error bound of the requested order applies for h = {h}; try a smaller step size")]
    NoErrorBound { t: f64, h: f64 },
    #[error("error order {order} does not apply to the {scheme} input scheme")]
    OrderNotApplicable { order: ErrorOrder, scheme: InputScheme },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no crossing of coordinate {coord} found in the trace")]
    NoCrossing { coord: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Over-approximation of the reachable set at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachSet {
    pub model: VectorModel,
    pub t: f64,
}

impl ReachSet {
    pub fn from_box(x0: &IntervalBox, t: f64) -> Self {
        Self { model: VectorModel::from_box(x0), t }
    }

    pub fn param_count(&self) -> usize {
        self.model.arity()
    }

    /// Componentwise enclosure of the set.
    pub fn final_box(&self) -> IntervalBox {
        self.model.range_box(&Default::default())
    }
}

/// Time grid `t_0 < t_1 < ... < t_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grid {
    Uniform { t_end: f64, h: f64 },
    Partition(Vec<f64>),
}

impl Grid {
    /// Uniform grid with `steps` steps over `[0, t_end]`.
    pub fn steps(t_end: f64, steps: usize) -> Self {
        Grid::Partition((0..=steps).map(|k| t_end * k as f64 / steps as f64).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        match self {
            Grid::Uniform { t_end, h } => {
                let n = (t_end / h - 1e-9).ceil().max(0.0) as usize;
                let mut t: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
                if let Some(last) = t.last_mut() {
                    *last = last.min(*t_end);
                }
                t
            }
            Grid::Partition(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundingPolicy {
    /// Constants computed once on `D`; every step bound must stay inside.
    Fixed(IntervalBox),
    /// Constants recomputed on each step's a-priori bound.
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderPolicy {
    /// Smallest applicable bound.
    Auto,
    /// Smallest applicable bound of the given order.
    Order(u32),
    Forced(ErrorOrder),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepPolicy {
    /// Parameters introduced more than `age` steps ago first (oldest first),
    /// then the smallest.
    OldestFirst { age: usize },
    SmallestFirst,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        SweepPolicy::OldestFirst { age: 3 }
    }
}

/// Split every branch in half along state coordinate `axis` at the first
/// grid time `>= t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub t: f64,
    pub axis: usize,
}

/// Split a branch along its widest state coordinate whenever its diameter
/// exceeds `diameter`, at most `max_depth` times per branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoSplit {
    pub diameter: f64,
    pub max_depth: usize,
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub system: InputAffineSystem,
    pub initial: IntervalBox,
    pub grid: Grid,
    pub scheme: InputScheme,
    pub bounding: BoundingPolicy,
    /// Maximal number of parameters kept after each step.
    pub budget: Option<usize>,
    pub sweep: SweepPolicy,
    pub splits: Vec<Split>,
    pub auto_split: Option<AutoSplit>,
    pub order: OrderPolicy,
    pub flow: FlowConfig,
    pub bounds: BoundsConfig,
}

impl EvolutionConfig {
    pub fn new(system: InputAffineSystem, initial: IntervalBox, grid: Grid, scheme: InputScheme) -> Self {
        Self {
            system,
            initial,
            grid,
            scheme,
            bounding: BoundingPolicy::PerStep,
            budget: None,
            sweep: SweepPolicy::default(),
            splits: Vec::new(),
            auto_split: None,
            order: OrderPolicy::Auto,
            flow: FlowConfig::default(),
            bounds: BoundsConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ReachError> {
        let n = self.system.dim();
        let bad = |m: String| Err(ReachError::Config(m));
        if self.initial.dim() != n {
            return bad(format!("initial box has dimension {}, system has {n}", self.initial.dim()));
        }
        if !self.initial.is_finite() {
            return bad("initial box is unbounded".into());
        }
        let times = self.grid.times();
        if times.len() < 2 {
            return bad("time grid has no steps".into());
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("time grid must be finite and strictly increasing".into());
        }
        if let BoundingPolicy::Fixed(d) = &self.bounding {
            if d.dim() != n {
                return bad(format!("region has dimension {}, system has {n}", d.dim()));
            }
            if !self.initial.is_subset(d) {
                return bad(format!("initial box {} is not inside the region {d}", self.initial));
            }
        }
        if let Some(b) = self.budget {
            if b < n {
                return bad(format!("parameter budget {b} is below the state dimension {n}"));
            }
        }
        if let Some(s) = self.splits.iter().find(|s| s.axis >= n) {
            return bad(format!("split axis {} out of range for dimension {n}", s.axis));
        }
        if let OrderPolicy::Forced(order) = self.order {
            if !applicable_orders(self.traits(), self.scheme).contains(&order) {
                return Err(ReachError::OrderNotApplicable { order, scheme: self.scheme });
            }
        }
        Ok(())
    }

    pub fn traits(&self) -> SystemTraits {
        SystemTraits { inputs: self.system.input_count(), additive: self.system.is_additive() }
    }
}

/// Diagnostics of one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub index: usize,
    pub t: f64,
    pub h: f64,
    /// Analytic local error.
    pub eps: f64,
    pub order: ErrorOrder,
    /// Largest numerical error of the flow before inflation.
    pub numeric_error: f64,
    /// Parameter count after reduction.
    pub params: usize,
    /// A-priori bound of the step.
    pub bound: IntervalBox,
    /// Enclosure of every trajectory of the inclusion over the step.
    pub tube: IntervalBox,
}

#[derive(Debug, Clone)]
pub struct BranchTrace {
    /// Halves chosen at each split, 0 for lower and 1 for upper.
    pub path: Vec<u8>,
    /// One set per grid time, starting at `t_0`.
    pub sets: Vec<ReachSet>,
    pub steps: Vec<StepDiagnostics>,
}

impl BranchTrace {
    pub fn final_set(&self) -> &ReachSet {
        self.sets.last().expect("trace holds the initial set")
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub branches: Vec<BranchTrace>,
}

impl EvolutionTrace {
    pub fn final_boxes(&self) -> Vec<IntervalBox> {
        self.branches.iter().map(|b| b.final_set().final_box()).collect()
    }

    /// Hull of all branches at grid index `k`.
    pub fn hull_at(&self, k: usize) -> IntervalBox {
        let mut boxes = self.branches.iter().map(|b| b.sets[k].final_box());
        let first = boxes.next().expect("at least one branch");
        boxes.fold(first, |acc, b| acc.hull(&b))
    }

    pub fn final_hull(&self) -> IntervalBox {
        self.hull_at(self.times.len() - 1)
    }

    /// Whether `x` lies in the union of the branch boxes at grid index `k`.
    pub fn contains_at(&self, k: usize, x: &[f64]) -> bool {
        self.branches.iter().any(|b| b.sets[k].final_box().contains(x))
    }
}

struct Context<'a> {
    cfg: &'a EvolutionConfig,
    times: Vec<f64>,
    fixed: Option<(IntervalBox, StepErrorBounds)>,
    traits: SystemTraits,
    /// `1 + max_i sup|w_i| / V_i`.
    noise_factor: f64,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a EvolutionConfig, times: Vec<f64>) -> Result<Self, ReachError> {
    let fixed = match &cfg.bounding {
        BoundingPolicy::Fixed(d) => Some((d.clone(), compute_bounds(&cfg.system, d, cfg.bounds)?)),
        BoundingPolicy::PerStep => None,
    };
    let noise_factor = 1.0
        + cfg
            .system
            .inputs()
            .iter()
            .filter(|ch| ch.bound > 0.0)
            .map(|ch| round::div_up(cfg.scheme.w_bound(ch.bound), ch.bound))
            .fold(0.0, f64::max);
        Ok(Self { cfg, times, fixed, traits: cfg.traits(), noise_factor })
    }
}

/// Evolve the initial set over the grid.
pub fn evolve(cfg: &EvolutionConfig) -> Result<EvolutionTrace, ReachError> {
    cfg.validate()?;
    let mut splits = cfg.splits.clone();
    splits.sort_by(|a, b| a.t.total_cmp(&b.t));
    let ctx = Context::new(cfg, cfg.grid.times())?;
    let start = ReachSet::from_box(&cfg.initial, ctx.times[0]);
    let root = BranchTrace { path: Vec::new(), sets: vec![start], steps: Vec::new() };
    let branches = run_branch(&ctx, &splits, root, 0, 0)?;
    Ok(EvolutionTrace { times: ctx.times, branches })
}

fn run_branch(
    ctx: &Context,
    splits: &[Split],
    mut trace: BranchTrace,
    mut k: usize,
    mut next_split: usize,
) -> Result<Vec<BranchTrace>, ReachError> {
    let n_steps = ctx.times.len() - 1;
    loop {
        let t = ctx.times[k];
        let tol = 1e-9 * (ctx.times[k.max(1)] - ctx.times[k.max(1) - 1]);
        let mut axis = None;
        if next_split < splits.len() && splits[next_split].t <= t + tol {
            axis = Some(splits[next_split].axis);
            next_split += 1;
        } else if k > 0 {
            if let Some(auto) = ctx.cfg.auto_split {
                let b = trace.final_set().final_box();
                if trace.path.len() < auto.max_depth && b.diameter() > auto.diameter {
                    axis = widest_axis(&b);
                }
            }
        }
        if let Some(axis) = axis {
            let (lo, hi) = split(trace.final_set(), axis)?;
            let child = |set: ReachSet, half: u8| {
                let mut c = trace.clone();
                c.path.push(half);
                *c.sets.last_mut().expect("nonempty") = set;
                c
            };
            let (a, b) = (child(lo, 0), child(hi, 1));
            let (ra, rb) = rayon::join(
                || run_branch(ctx, splits, a, k, next_split),
                || run_branch(ctx, splits, b, k, next_split),
            );
            let mut out = ra?;
            out.extend(rb?);
            return Ok(out);
        }
        if k == n_steps {
            return Ok(vec![trace]);
        }
        let geom = StepGeometry::new(t, ctx.times[k + 1] - t);
        let (set, diag) = step_in(ctx, trace.final_set(), k, geom)?;
        trace.sets.push(set);
        trace.steps.push(diag);
        k += 1;
    }
}

fn widest_axis(b: &IntervalBox) -> Option<usize> {
    b.iter().enumerate().max_by(|x, y| x.1.width().total_cmp(&y.1.width())).map(|(i, _)| i)
}

/// One step of the algorithm with the configuration's policies.
pub fn step(cfg: &EvolutionConfig, r: &ReachSet, index: usize, h: f64) -> Result<(ReachSet, StepDiagnostics), ReachError> {
    cfg.validate()?;
    let ctx = Context::new(cfg, Vec::new())?;
    step_in(&ctx, r, index, StepGeometry::new(r.t, h))
}

fn choose_error(ctx: &Context, b: &StepErrorBounds, h: f64, t: f64) -> Result<(ErrorOrder, f64), ReachError> {
    let none = || ReachError::NoErrorBound { t, h };
    match ctx.cfg.order {
        OrderPolicy::Auto => select_error(ctx.traits, ctx.cfg.scheme, b, h).ok_or_else(none),
        OrderPolicy::Order(n) => applicable_orders(ctx.traits, ctx.cfg.scheme)
            .into_iter()
            .rev()
            .filter(|o| o.order() == n)
            .filter_map(|o| evaluate(o, b, h).map(|e| (o, e)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or_else(none),
        OrderPolicy::Forced(o) => evaluate(o, b, h).map(|e| (o, e)).ok_or_else(none),
    }
}

fn step_in(ctx: &Context, r: &ReachSet, index: usize, geom: StepGeometry) -> Result<(ReachSet, StepDiagnostics), ReachError> {
    let cfg = ctx.cfg;
    let sys = &cfg.system;
    let t = geom.t;
    let x = r.model.errors_to_parameters(index);
    let fs = flow_step(sys, &x, cfg.scheme, geom, index, &cfg.flow).map_err(|source| ReachError::Flow { t, source })?;
    let bounds = match &ctx.fixed {
        Some((d, b)) => {
            if !fs.bound.is_subset(d) {
                return Err(ReachError::DomainExceeded { t, bound: fs.bound.clone(), domain: d.clone() });
            }
            b.clone()
        }
        None => compute_bounds(sys, &fs.bound, cfg.bounds)?,
    };
    let (order, eps) = choose_error(ctx, &bounds, geom.h, t)?;
    let numeric_error = fs.end.max_error();

    // Over the step, original and approximate solutions differ by at most
    // int_0^s |sum g_i (v_i - w_i)| e^{Lambda (s - r)} dr <= h c K' Phi(Lambda h).
    let drift = round::mul_up(
        round::mul_up(geom.h, round::mul_up(ctx.noise_factor, bounds.noise_sup)),
        phi_upper(round::mul_up(bounds.lambda, geom.h)),
    );
    let mut tube: Option<IntervalBox> = None;
    for seg in &fs.segments {
        let b = seg.tube.range_box(&cfg.flow.model).inflate(drift);
        let b = b.intersect(&seg.bound).unwrap_or_else(|| seg.bound.clone());
        tube = Some(match tube {
            Some(acc) => acc.hull(&b),
            None => b,
        });
    }
    let tube = tube.expect("at least one segment");

    let inflated = fs.end.map_components(|c| c.inflate(eps));
    let model = match cfg.budget {
        Some(budget) => reduce_parameters(&inflated, budget, cfg.sweep, index),
        None => drop_inactive(&inflated),
    };
    let set = ReachSet { model, t: geom.end() };
    let diag = StepDiagnostics {
        index,
        t,
        h: geom.h,
        eps,
        order,
        numeric_error,
        params: set.param_count(),
        bound: fs.bound,
        tube,
    };
    Ok((set, diag))
}

/// Remove parameters no component depends on, keeping the state ones.
fn drop_inactive(m: &VectorModel) -> VectorModel {
    let active = m.active_vars();
    let drop: Vec<usize> = (0..m.arity())
        .filter(|v| !active.contains(v) && !matches!(m.vars()[*v].role, VarRole::State { .. }))
        .collect();
    if drop.is_empty() {
        m.clone()
    } else {
        m.remove_vars(&drop)
    }
}

/// Sum of coefficient magnitudes of the terms involving `var`.
fn impact(m: &VectorModel, var: usize) -> f64 {
    m.comps()
        .iter()
        .flat_map(|c| c.terms().iter())
        .filter(|(mono, _)| mono.power_of(var) > 0)
        .map(|(_, c)| c.abs())
        .sum()
}

/// Sweep parameters into the uniform errors until at most `budget` remain.
/// `current_step` is the index of the step that produced `m`.
pub fn reduce_parameters(m: &VectorModel, budget: usize, policy: SweepPolicy, current_step: usize) -> VectorModel {
    let m = drop_inactive(m);
    if m.arity() <= budget {
        return m;
    }
    let excess = m.arity() - budget;
    let mut candidates: Vec<(u8, usize, f64, usize)> = (0..m.arity())
        .map(|v| {
            let role = m.vars()[v].role;
            let class = match (policy, role) {
                (_, VarRole::State { .. }) => 2,
                (SweepPolicy::OldestFirst { age }, r) if r.step().is_some_and(|s| s + age < current_step) => 0,
                _ => 1,
            };
            let age_key = if class == 0 { role.step().unwrap_or(0) } else { 0 };
            (class, age_key, impact(&m, v), v)
        })
        .collect();
    candidates.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal))
            .then(a.3.cmp(&b.3))
    });
    let mut drop: Vec<usize> = candidates.iter().take(excess).map(|c| c.3).collect();
    drop.sort_unstable();
    m.sweep(&drop).remove_vars(&drop)
}

/// Halves of `r` along state coordinate `axis`, each re-parameterized over
/// the unit box.
pub fn split(r: &ReachSet, axis: usize) -> Result<(ReachSet, ReachSet), ReachError> {
    let var = r
        .model
        .vars_where(|role| *role == VarRole::State { coord: axis })
        .first()
        .copied()
        .ok_or_else(|| ReachError::Config(format!("no state parameter for axis {axis}")))?;
    let cfg = Default::default();
    let lo = r.model.substitute_affine(var, -0.5, 0.5, &cfg);
    let hi = r.model.substitute_affine(var, 0.5, 0.5, &cfg);
    Ok((ReachSet { model: lo, t: r.t }, ReachSet { model: hi, t: r.t }))
}

/// Time interval containing a section crossing and an enclosure of the
/// states over it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub time: Interval,
    pub hull: IntervalBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Negative,
    Positive,
    Mixed,
}

fn sign_of(x: Interval) -> Sign {
    if x.hi() < 0.0 {
        Sign::Negative
    } else if x.lo() > 0.0 {
        Sign::Positive
    } else {
        Sign::Mixed
    }
}

/// First crossing of `x_coord = 0` in direction `direction` (positive:
/// from negative to positive values), certified from grid-time signs.
pub fn poincare_crossing(trace: &EvolutionTrace, coord: usize, direction: f64) -> Result<Crossing, ReachError> {
    let (before, after) =
        if direction >= 0.0 { (Sign::Negative, Sign::Positive) } else { (Sign::Positive, Sign::Negative) };
    let mut time: Option<Interval> = None;
    let mut hull: Option<IntervalBox> = None;
    for branch in &trace.branches {
        let signs: Vec<Sign> = branch.sets.iter().map(|s| sign_of(s.final_box()[coord])).collect();
        let first_before = signs.iter().position(|&s| s == before).ok_or(ReachError::NoCrossing { coord })?;
        let b = (first_before + 1..signs.len())
            .find(|&k| signs[k] == after)
            .ok_or(ReachError::NoCrossing { coord })?;
        let a = (first_before..b).rev().find(|&k| signs[k] == before).expect("first_before qualifies");
        let span = Interval::new(trace.times[a], trace.times[b]);
        time = Some(time.map_or(span, |t| t.hull(&span)));
        let boxes = (a..b).map(|k| branch.steps[k].tube.clone()).chain((a..=b).map(|k| branch.sets[k].final_box()));
        for bx in boxes {
            hull = Some(match hull {
                Some(h) => h.hull(&bx),
                None => bx,
            });
        }
    }
    Ok(Crossing {
        time: time.ok_or(ReachError::NoCrossing { coord })?,
        hull: hull.ok_or(ReachError::NoCrossing { coord })?,
    })
}

/// Evolve several configurations in parallel.
pub fn evolve_all(cfgs: &[EvolutionConfig]) -> Vec<Result<EvolutionTrace, ReachError>> {
    cfgs.par_iter().map(evolve).collect()
}

impl std::str::FromStr for SweepPolicy {
    type Err = String;

    /// `smallest-first`, `oldest-first` or `oldest-first:<age>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().split_once(':') {
            None if s.trim() == "smallest-first" => Ok(SweepPolicy::SmallestFirst),
            None if s.trim() == "oldest-first" => Ok(SweepPolicy::default()),
            Some(("oldest-first", age)) => age
                .trim()
                .parse()
                .map(|age| SweepPolicy::OldestFirst { age })
                .map_err(|e| format!("sweep age `{age}`: {e}")),
            _ => Err(format!("unknown sweep policy `{s}` (expected smallest-first or oldest-first[:age])")),
        }
    }
}

impl std::str::FromStr for OrderPolicy {
    type Err = String;

    /// `auto`, an order `1`/`2`/`3`, or the name of a bound.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "auto" => Ok(OrderPolicy::Auto),
            "1" | "2" | "3" => Ok(OrderPolicy::Order(s.trim().parse().expect("digit"))),
            other => other
                .parse::<ErrorOrder>()
                .map(OrderPolicy::Forced)
                .map_err(|_| format!("unknown error order `{other}` (expected auto, 1, 2, 3 or a bound name)")),
        }
    }
}

impl std::fmt::Display for OrderPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderPolicy::Auto => f.write_str("auto"),
            OrderPolicy::Order(n) => write!(f, "{n}"),
            OrderPolicy::Forced(o) => write!(f, "{o}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymodel::{Monomial, PolynomialModel, VarInfo};
    use crate::symexpr::{parse, InputChannel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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
    fn still_system_keeps_its_set() {
        let x0 = IntervalBox::from_bounds(&[(0.0, 1.0)]);
        let cfg = EvolutionConfig::new(system(&["0"], &[]), x0.clone(), Grid::steps(1.0, 7), InputScheme::Zero);
        let tr = evolve(&cfg).unwrap();
        assert_eq!(tr.times.len(), 8);
        for k in 0..8 {
            assert_eq!(tr.hull_at(k), x0);
        }
        assert!(tr.branches[0].steps.iter().all(|d| d.eps == 0.0));
    }

    #[test]
    fn exponential_growth_step() {
        let cfg = EvolutionConfig::new(
            system(&["x1"], &[]),
            IntervalBox::point(&[1.0]),
            Grid::Uniform { t_end: 0.1, h: 0.1 },
            InputScheme::Zero,
        );
        let (r, d) = step(&cfg, &ReachSet::from_box(&cfg.initial, 0.0), 0, 0.1).unwrap();
        let exact: f64 = (0..20).map(|k| 0.1f64.powi(k) / (1..=k).map(f64::from).product::<f64>()).sum();
        let b = r.final_box();
        assert!(b[0].contains(exact), "{b} vs {exact}");
        assert!(b[0].width() <= 1e-6);
        assert_eq!(d.eps, 0.0);
        assert!((r.t - 0.1).abs() < 1e-15);
    }

    fn model_with_terms(n: usize, params: usize, rng: &mut ChaCha8Rng) -> VectorModel {
        let mut vars: Vec<VarInfo> = (0..n).map(|coord| VarInfo { role: VarRole::State { coord } }).collect();
        for index in 0..params {
            vars.push(VarInfo { role: VarRole::Input { step: index, channel: 0, index: 0 } });
        }
        let arity = vars.len();
        let comps = (0..n)
            .map(|_| {
                let mut terms = vec![(Monomial::one(), rng.gen_range(-1.0..1.0))];
                for v in 0..arity {
                    terms.push((Monomial::var(v, 1), rng.gen_range(-0.3..0.3)));
                }
                terms.push((Monomial::from_powers(&[(0, 1), (arity - 1, 1)]), rng.gen_range(-0.1..0.1)));
                terms.push((Monomial::var(1 % arity, 2), rng.gen_range(-0.1..0.1)));
                PolynomialModel::from_terms(arity, terms, rng.gen_range(0.0..0.01))
            })
            .collect();
        VectorModel::new(vars, comps).unwrap()
    }

    fn grid_points(arity: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..k).map(|_| (0..arity).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()
    }

    #[test]
    fn reduction_identity_and_exact_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = model_with_terms(2, 3, &mut rng);
        assert_eq!(reduce_parameters(&m, 5, SweepPolicy::default(), 0), m);
        assert_eq!(reduce_parameters(&m, 9, SweepPolicy::SmallestFirst, 0), m);

        let vars: Vec<VarInfo> = (0..5)
            .map(|i| VarInfo { role: if i == 0 { VarRole::State { coord: 0 } } else { VarRole::Time } })
            .collect();
        let mut vars = vars;
        vars[4] = VarInfo { role: VarRole::Input { step: 0, channel: 0, index: 0 } };
        for v in &mut vars[1..4] {
            *v = VarInfo { role: VarRole::Error { step: 0, coord: 0 } };
        }
        let terms = (0..5).map(|v| (Monomial::var(v, 1), if v == 4 { 0.1 } else { 1.0 })).collect();
        let m = VectorModel::new(vars, vec![PolynomialModel::from_terms(5, terms, 0.0)]).unwrap();
        let r = reduce_parameters(&m, 4, SweepPolicy::SmallestFirst, 0);
        assert_eq!(r.arity(), 4);
        assert_eq!(r.component(0).error(), 0.1);
    }

    #[test]
    fn reduction_preserves_enclosure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let m = model_with_terms(2, 6, &mut rng);
            let budget = 2 + trial % 5;
            let r = reduce_parameters(&m, budget, SweepPolicy::OldestFirst { age: 1 }, 5);
            assert!(r.arity() <= budget);
            let kept: Vec<usize> = (0..m.arity()).filter(|v| r.vars().contains(&m.vars()[*v])).collect();
            for z in grid_points(m.arity(), 1000, &mut rng) {
                let zr: Vec<f64> = kept.iter().map(|&v| z[v]).collect();
                for c in 0..2 {
                    let orig = m.component(c).eval(&z);
                    let red = r.component(c).eval(&zr);
                    let slack = m.component(c).error() + 1e-12;
                    assert!((orig - red).abs() <= r.component(c).error() + slack);
                }
            }
        }
    }

    #[test]
    fn splitting_identity() {
        let r = ReachSet::from_box(&IntervalBox::from_bounds(&[(-1.0, 1.0)]), 0.0);
        let (lo, hi) = split(&r, 0).unwrap();
        assert_eq!(lo.final_box(), IntervalBox::from_bounds(&[(-1.0, 0.0)]));
        assert_eq!(hi.final_box(), IntervalBox::from_bounds(&[(0.0, 1.0)]));
        assert!(split(&r, 1).is_err());
    }

    #[test]
    fn split_children_cover_parent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = model_with_terms(2, 2, &mut rng);
            let r = ReachSet { model: m.clone(), t: 0.0 };
            let axis = rng.gen_range(0..2);
            let (lo, hi) = split(&r, axis).unwrap();
            let hull = lo.final_box().hull(&hi.final_box());
            for z in grid_points(m.arity(), 1000, &mut rng) {
                assert!(hull.contains(&m.eval(&z)));
                let (child, s) = if z[axis] <= 0.0 { (&lo, 2.0 * z[axis] + 1.0) } else { (&hi, 2.0 * z[axis] - 1.0) };
                let mut zc = z.clone();
                zc[axis] = s;
                for c in 0..2 {
                    let d = (m.component(c).eval(&z) - child.model.component(c).eval(&zc)).abs();
                    assert!(d <= child.model.component(c).error() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn box_measures() {
        let r = ReachSet::from_box(&IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 3.0)]), 0.0);
        let b = r.final_box();
        assert_eq!((b.diameter(), b.radius()), (3.0, 1.5));
        let p = ReachSet::from_box(&IntervalBox::point(&[0.5, 2.0]), 0.0).final_box();
        assert_eq!(p.diameter(), 0.0);
    }

    fn crossing_run(h: f64) -> Crossing {
        let cfg = EvolutionConfig::new(
            system(&["1"], &[]),
            IntervalBox::point(&[-0.05]),
            Grid::Uniform { t_end: 0.1, h },
            InputScheme::Zero,
        );
        poincare_crossing(&evolve(&cfg).unwrap(), 0, 1.0).unwrap()
    }

    #[test]
    fn section_crossing() {
        let c = crossing_run(0.01);
        assert!(c.time.contains(0.05));
        assert!((c.time.lo() - 0.04).abs() < 1e-12 && (c.time.hi() - 0.06).abs() < 1e-12);
        assert!(c.hull[0].contains(0.0));
        let fine = crossing_run(0.005);
        assert!(fine.time.width() < c.time.width());
        let still = EvolutionConfig::new(
            system(&["0"], &[]),
            IntervalBox::point(&[-1.0]),
            Grid::steps(1.0, 4),
            InputScheme::Zero,
        );
        assert!(matches!(poincare_crossing(&evolve(&still).unwrap(), 0, 1.0), Err(ReachError::NoCrossing { .. })));
    }

    #[test]
    fn noisy_drift_tube_contains_samples() {
        let sys = system(&["1"], &[(&["1"], 0.5)]);
        let cfg = EvolutionConfig::new(sys, IntervalBox::point(&[0.0]), Grid::steps(1.0, 10), InputScheme::Affine);
        let tr = evolve(&cfg).unwrap();
        let b = tr.final_hull();
        assert!(b[0].contains(0.5) && b[0].contains(1.5));
        assert!(b[0].width() < 1.01);
        for d in &tr.branches[0].steps {
            assert!(d.tube[0].contains(d.t + 0.5 * d.h) && d.tube.is_subset(&d.bound));
        }
    }

    #[test]
    fn configuration_errors() {
        let base = EvolutionConfig::new(
            system(&["x2", "-x1"], &[(&["0", "1"], 0.1)]),
            IntervalBox::from_bounds(&[(0.9, 1.1), (-0.1, 0.1)]),
            Grid::steps(1.0, 10),
            InputScheme::Affine,
        );
        let mut c = base.clone();
        c.bounding = BoundingPolicy::Fixed(IntervalBox::from_bounds(&[(0.0, 1.0), (-1.0, 1.0)]));
        assert!(matches!(c.validate(), Err(ReachError::Config(_))));
        c.bounding = BoundingPolicy::Fixed(IntervalBox::from_bounds(&[(0.8, 1.2), (-0.2, 0.2)]));
        assert!(matches!(evolve(&c), Err(ReachError::DomainExceeded { .. })));
        let mut c = base.clone();
        c.order = OrderPolicy::Forced(ErrorOrder::O2Constant);
        assert!(matches!(c.validate(), Err(ReachError::OrderNotApplicable { .. })));
        let mut c = base.clone();
        c.budget = Some(1);
        assert!(c.validate().is_err());
        let mut c = base;
        c.budget = Some(6);
        let tr = evolve(&c).unwrap();
        assert!(tr.branches[0].steps.iter().all(|d| d.params <= 6));
    }

    #[test]
    fn scheduled_splits_make_branches() {
        let mut cfg = EvolutionConfig::new(
            system(&["x2", "-x1"], &[]),
            IntervalBox::from_bounds(&[(0.9, 1.1), (-0.1, 0.1)]),
            Grid::steps(1.0, 10),
            InputScheme::Zero,
        );
        cfg.splits = vec![Split { t: 0.3, axis: 0 }, Split { t: 0.6, axis: 1 }];
        let tr = evolve(&cfg).unwrap();
        assert_eq!(tr.branches.len(), 4);
        let mut plain = cfg.clone();
        plain.splits.clear();
        let whole = evolve(&plain).unwrap().final_hull();
        let union = tr.final_hull();
        assert!(union.hausdorff(&whole) < 1e-6);
        assert!(tr.branches.iter().all(|b| b.sets.len() == 11));
    }

    #[test]
    fn order_policy_parsing() {
        assert_eq!("auto".parse::<OrderPolicy>().unwrap(), OrderPolicy::Auto);
        assert_eq!("3".parse::<OrderPolicy>().unwrap(), OrderPolicy::Order(3));
        assert_eq!("o2-constant".parse::<OrderPolicy>().unwrap(), OrderPolicy::Forced(ErrorOrder::O2Constant));
        assert!("4".parse::<OrderPolicy>().is_err());
    }
}
