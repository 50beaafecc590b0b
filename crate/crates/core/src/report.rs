//! Results documents and plot data.

use serde::Serialize;

use crate::interval::IntervalBox;
use crate::localerr::ErrorOrder;
use crate::montecarlo::McReport;
use crate::polymodel::VectorModel;
use crate::reach::{BoundingPolicy, Crossing, EvolutionConfig, EvolutionTrace};
use crate::symexpr::{compute_bounds, StepErrorBounds};

pub fn box_bounds(b: &IntervalBox) -> Vec<[f64; 2]> {
    b.iter().map(|c| [c.lo(), c.hi()]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxReport {
    pub bounds: Vec<[f64; 2]>,
    pub diameter: f64,
    pub radius: f64,
}

impl From<&IntervalBox> for BoxReport {
    fn from(b: &IntervalBox) -> Self {
        Self { bounds: box_bounds(b), diameter: b.diameter(), radius: b.radius() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchReport {
    /// Halves taken at each split, `0` lower and `1` upper.
    pub path: String,
    pub final_box: BoxReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub branch: usize,
    pub index: usize,
    pub t: f64,
    pub h: f64,
    pub eps: f64,
    pub order: ErrorOrder,
    pub numeric_error: f64,
    pub params: usize,
}

/// Constants on the fixed region and the resulting first-step error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub region: Vec<[f64; 2]>,
    pub k: f64,
    pub k_prime: f64,
    pub noise_sup: f64,
    pub l: f64,
    pub l_prime: f64,
    pub h: f64,
    pub h_prime: f64,
    pub lambda: f64,
}

impl AnalyticReport {
    fn new(region: &IntervalBox, b: &StepErrorBounds) -> Self {
        Self {
            region: box_bounds(region),
            k: b.k,
            k_prime: b.k_prime,
            noise_sup: b.noise_sup,
            l: b.l,
            l_prime: b.l_prime,
            h: b.h,
            h_prime: b.h_prime,
            lambda: b.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Results {
    pub name: String,
    pub scheme: String,
    pub order_policy: String,
    pub steps: usize,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticReport>,
    /// Error and order of the first step.
    pub first_eps: f64,
    pub first_order: ErrorOrder,
    pub branches: Vec<BranchReport>,
    pub hull: BoxReport,
    pub step_log: Vec<StepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing: Option<Crossing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McReport>,
}

impl Results {
    pub fn new(name: &str, cfg: &EvolutionConfig, trace: &EvolutionTrace) -> Self {
        let analytic = match &cfg.bounding {
            BoundingPolicy::Fixed(d) => compute_bounds(&cfg.system, d, cfg.bounds).ok().map(|b| AnalyticReport::new(d, &b)),
            BoundingPolicy::PerStep => None,
        };
        let first = &trace.branches[0].steps[0];
        let step_log = trace
            .branches
            .iter()
            .enumerate()
            .flat_map(|(branch, b)| {
                b.steps.iter().map(move |d| StepRecord {
                    branch,
                    index: d.index,
                    t: d.t,
                    h: d.h,
                    eps: d.eps,
                    order: d.order,
                    numeric_error: d.numeric_error,
                    params: d.params,
                })
            })
            .collect();
        Self {
            name: name.to_string(),
            scheme: cfg.scheme.to_string(),
            order_policy: cfg.order.to_string(),
            steps: trace.times.len() - 1,
            t_start: trace.times[0],
            t_end: *trace.times.last().expect("nonempty grid"),
            analytic,
            first_eps: first.eps,
            first_order: first.order,
            branches: trace
                .branches
                .iter()
                .map(|b| BranchReport {
                    path: b.path.iter().map(|h| char::from(b'0' + h)).collect(),
                    final_box: BoxReport::from(&b.final_set().final_box()),
                })
                .collect(),
            hull: BoxReport::from(&trace.final_hull()),
            step_log,
            crossing: None,
            monte_carlo: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }
}

/// Polygon enclosing the projection of `m` onto coordinates `(i, j)`: the
/// zonotope of the affine part plus a box for higher-order terms and errors.
pub fn projection_polygon(m: &VectorModel, i: usize, j: usize) -> Vec<[f64; 2]> {
    let (pi, pj) = (m.component(i), m.component(j));
    let center = [pi.constant_term(), pj.constant_term()];
    let rest = |p: &crate::polymodel::PolynomialModel| -> f64 {
        let higher: f64 = p.terms().iter().filter(|(mono, _)| mono.degree() > 1).map(|(_, c)| c.abs()).sum();
        higher + p.error()
    };
    let mut gens: Vec<[f64; 2]> = (0..m.arity())
        .map(|v| {
            let mono = crate::polymodel::Monomial::var(v, 1);
            [pi.coefficient(&mono), pj.coefficient(&mono)]
        })
        .chain([[rest(pi), 0.0], [0.0, rest(pj)]])
        .filter(|g| g[0] != 0.0 || g[1] != 0.0)
        .map(|g| if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) { [-g[0], -g[1]] } else { g })
        .collect();
    if gens.is_empty() {
        return vec![center];
    }
    gens.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    let mut p = [center[0] - gens.iter().map(|g| g[0]).sum::<f64>(), center[1] - gens.iter().map(|g| g[1]).sum::<f64>()];
    let mut out = Vec::with_capacity(2 * gens.len());
    for g in gens.iter().chain(gens.iter()).enumerate().map(|(k, g)| if k < gens.len() { *g } else { [-g[0], -g[1]] })
    {
        out.push(p);
        p = [p[0] + 2.0 * g[0], p[1] + 2.0 * g[1]];
    }
    out
}

/// CSV text with columns `x,y`.
pub fn polygon_csv(poly: &[[f64; 2]]) -> String {
    let mut s = String::from("x,y\n");
    for p in poly {
        s.push_str(&format!("{},{}\n", p[0], p[1]));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_polygon() {
        let m = VectorModel::from_box(&IntervalBox::from_bounds(&[(0.0, 2.0), (1.0, 2.0)]));
        let poly = projection_polygon(&m, 0, 1);
        assert_eq!(poly.len(), 4);
        let xs: Vec<f64> = poly.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = poly.iter().map(|p| p[1]).collect();
        assert_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
        assert_eq!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 2.0);
        assert_eq!(ys.iter().cloned().fold(f64::INFINITY, f64::min), 1.0);
        assert_eq!(ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 2.0);
        assert!(polygon_csv(&poly).starts_with("x,y\n"));
    }
}
