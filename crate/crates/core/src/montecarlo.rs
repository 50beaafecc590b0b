//! Sampled trajectories of the inclusion for containment checks.
//!
//! Disturbances are piecewise constant on a grid `refine` times finer than
//! the evolution grid, each piece either bang-bang `+-V_i` or uniform in
//! `[-V_i, V_i]`; each piece is integrated with classical Runge-Kutta.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::interval::IntervalBox;
use crate::reach::EvolutionTrace;
use crate::symexpr::InputAffineSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Input pieces per grid step.
    pub refine: usize,
    /// Runge-Kutta steps per input piece.
    pub substeps: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 200, seed: 0, refine: 10, substeps: 4 }
    }
}

fn rk4(sys: &InputAffineSystem, x: &mut [f64], v: &[f64], h: f64) {
    let n = x.len();
    let mut k = vec![vec![0.0; n]; 4];
    let mut tmp = vec![0.0; n];
    sys.rhs(x, v, &mut k[0]);
    for stage in 1..4 {
        let c = if stage == 3 { h } else { h / 2.0 };
        for i in 0..n {
            tmp[i] = x[i] + c * k[stage - 1][i];
        }
        sys.rhs(&tmp, v, &mut k[stage]);
    }
    for i in 0..n {
        x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// States at every grid time of one trajectory.
pub fn trajectory(sys: &InputAffineSystem, x0: &[f64], times: &[f64], cfg: &McConfig, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut x = x0.to_vec();
    let mut out = Vec::with_capacity(times.len());
    out.push(x.clone());
    let mut v = vec![0.0; sys.input_count()];
    for w in times.windows(2) {
        let piece = (w[1] - w[0]) / cfg.refine as f64;
        for _ in 0..cfg.refine {
            for (vi, ch) in v.iter_mut().zip(sys.inputs()) {
                *vi = if rng.gen_bool(0.5) {
                    if rng.gen_bool(0.5) { ch.bound } else { -ch.bound }
                } else {
                    rng.gen_range(-ch.bound..=ch.bound)
                };
            }
            let h = piece / cfg.substeps as f64;
            for _ in 0..cfg.substeps {
                rk4(sys, &mut x, &v, h);
            }
        }
        out.push(x.clone());
    }
    out
}

/// Initial point of sample `k`: the corners first, then uniform points.
fn initial_point(x0: &IntervalBox, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let n = x0.dim();
    if n < usize::BITS as usize && k < (1usize << n) {
        return x0.iter().enumerate().map(|(i, c)| if k >> i & 1 == 1 { c.hi() } else { c.lo() }).collect();
    }
    x0.iter().map(|c| if c.lo() < c.hi() { rng.gen_range(c.lo()..=c.hi()) } else { c.lo() }).collect()
}

/// `cfg.samples` trajectories, indexed `[sample][grid time][coordinate]`.
pub fn sample(sys: &InputAffineSystem, x0: &IntervalBox, times: &[f64], cfg: &McConfig) -> Vec<Vec<Vec<f64>>> {
    (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let start = initial_point(x0, k, &mut rng);
            trajectory(sys, &start, times, cfg, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub samples: usize,
    pub points: usize,
    pub violations: usize,
    /// Largest sup-norm distance of a sample outside every enclosure.
    pub max_excess: f64,
}

impl McReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn excess(b: &IntervalBox, x: &[f64]) -> f64 {
    b.iter().zip(x).map(|(c, &xi)| (c.lo() - xi).max(xi - c.hi()).max(0.0)).fold(0.0, f64::max)
}

/// Check every sampled state against the branch union at its grid time.
pub fn check(trace: &EvolutionTrace, samples: &[Vec<Vec<f64>>]) -> McReport {
    let boxes: Vec<Vec<IntervalBox>> = (0..trace.times.len())
        .map(|k| trace.branches.iter().map(|b| b.sets[k].final_box()).collect())
        .collect();
    let mut report = McReport { samples: samples.len(), points: 0, violations: 0, max_excess: 0.0 };
    for traj in samples {
        for (k, x) in traj.iter().enumerate() {
            report.points += 1;
            let d = boxes[k].iter().map(|b| excess(b, x)).fold(f64::INFINITY, f64::min);
            if d > 0.0 {
                report.violations += 1;
                report.max_excess = report.max_excess.max(d);
            }
        }
    }
    report
}

/// Sample the configuration's inclusion and check it against `trace`.
pub fn sample_and_check(sys: &InputAffineSystem, x0: &IntervalBox, trace: &EvolutionTrace, cfg: &McConfig) -> McReport {
    check(trace, &sample(sys, x0, &trace.times, cfg))
}
