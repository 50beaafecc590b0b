//! Scenario descriptions and the built-in benchmarks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inputs::InputScheme;
use crate::interval::IntervalBox;
use crate::reach::{BoundingPolicy, EvolutionConfig, Grid, OrderPolicy, Split, SweepPolicy};
use crate::symexpr::{parse_in, InputAffineSystem, InputChannel, ParseError, SystemError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{what}: {source}")]
    Expr { what: String, source: ParseError },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// Expressions of `g_i`, one per state coordinate.
    pub field: Vec<String>,
    /// `V_i`; channels with bound 0 are dropped.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub drift: Vec<String>,
    #[serde(default)]
    pub inputs: Vec<ChannelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub system: SystemSpec,
    /// Initial box as `[lo, hi]` pairs.
    pub initial: Vec<[f64; 2]>,
    /// Final time.
    pub time: f64,
    /// Step size; ignored when `steps` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Number of uniform steps over `[0, time]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "default_scheme")]
    pub scheme: InputScheme,
    /// `auto`, `1`, `2`, `3` or a bound name such as `o3-additive`.
    #[serde(default = "default_order")]
    pub order: String,
    /// Fixed region of computation; constants are recomputed per step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub splits: Vec<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_params: Option<usize>,
    /// Which parameters are swept first when the budget is exceeded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<u32>,
    /// Coefficients at or below this magnitude are moved into the error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_threshold: Option<f64>,
    /// Coordinates of the plotted projection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project: Option<[usize; 2]>,
    /// Section whose first crossing is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<Section>,
}

/// The hyperplane `x_coord = 0`, crossed in the sign of `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub coord: usize,
    pub direction: f64,
}

fn default_scheme() -> InputScheme {
    InputScheme::Affine
}

fn default_order() -> String {
    "auto".into()
}

fn to_box(what: &str, b: &[[f64; 2]]) -> Result<IntervalBox, ScenarioError> {
    if let Some(p) = b.iter().find(|p| !(p[0] <= p[1]) || !p[0].is_finite() || !p[1].is_finite()) {
        return Err(ScenarioError::Invalid(format!("{what}: invalid interval [{}, {}]", p[0], p[1])));
    }
    Ok(IntervalBox::from_bounds(&b.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>()))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn system(&self) -> Result<InputAffineSystem, ScenarioError> {
        let dim = self.system.drift.len();
        let parse = |what: String, text: &str| {
            parse_in(text, dim).map_err(|source| ScenarioError::Expr { what, source })
        };
        let drift = self
            .system
            .drift
            .iter()
            .enumerate()
            .map(|(i, s)| parse(format!("drift component {}", i + 1), s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut inputs = Vec::new();
        for (i, ch) in self.system.inputs.iter().enumerate() {
            if ch.bound < 0.0 || !ch.bound.is_finite() {
                return Err(ScenarioError::Invalid(format!("input {} has invalid bound {}", i + 1, ch.bound)));
            }
            if ch.bound == 0.0 {
                continue;
            }
            let field = ch
                .field
                .iter()
                .enumerate()
                .map(|(c, s)| parse(format!("input {} component {}", i + 1, c + 1), s))
                .collect::<Result<Vec<_>, _>>()?;
            inputs.push(InputChannel { field, bound: ch.bound });
        }
        Ok(InputAffineSystem::new(drift, inputs)?)
    }

    pub fn grid(&self) -> Result<Grid, ScenarioError> {
        if !(self.time > 0.0 && self.time.is_finite()) {
            return Err(ScenarioError::Invalid(format!("final time {} must be positive", self.time)));
        }
        match (self.steps, self.step) {
            (Some(0), _) => Err(ScenarioError::Invalid("number of steps must be positive".into())),
            (Some(n), _) => Ok(Grid::steps(self.time, n)),
            (None, Some(h)) if h > 0.0 && h.is_finite() => Ok(Grid::Uniform { t_end: self.time, h }),
            (None, Some(h)) => Err(ScenarioError::Invalid(format!("step size {h} must be positive"))),
            (None, None) => Err(ScenarioError::Invalid("either `step` or `steps` is required".into())),
        }
    }

    pub fn to_config(&self) -> Result<EvolutionConfig, ScenarioError> {
        let system = self.system()?;
        let initial = to_box("initial box", &self.initial)?;
        let mut cfg = EvolutionConfig::new(system, initial, self.grid()?, self.scheme);
        if let Some(r) = &self.region {
            cfg.bounding = BoundingPolicy::Fixed(to_box("region", r)?);
        }
        cfg.order = self.order.parse::<OrderPolicy>().map_err(ScenarioError::Invalid)?;
        cfg.splits = self.splits.clone();
        cfg.budget = self.max_params;
        if let Some(p) = self.sweep {
            cfg.sweep = p;
        }
        if let Some(d) = self.max_degree {
            cfg.flow.model.max_degree = d;
        }
        if let Some(t) = self.sweep_threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(ScenarioError::Invalid(format!("sweep threshold {t} must be nonnegative")));
            }
            cfg.flow.model.sweep_threshold = t;
        }
        if let Some(sec) = self.section {
            if sec.coord >= self.initial.len() {
                return Err(ScenarioError::Invalid(format!("section coordinate {} out of range", sec.coord)));
            }
        }
        cfg.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

pub const BUILTINS: [&str; 4] = ["vdp", "vdp-nosplit", "harmonic", "rossler"];

fn strings(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

/// Perturbed Van der Pol oscillator with additive noise of size 0.08, split
/// along `x` at `t = 0.6` and along `y` at `t = 1.2`.
pub fn vdp() -> Scenario {
    Scenario {
        name: "vdp".into(),
        system: SystemSpec {
            drift: strings(&["x2", "-x1 + 2*(1 - x1^2)*x2"]),
            inputs: vec![ChannelSpec { field: strings(&["0", "1"]), bound: 0.08 }],
        },
        initial: vec![[0.1, 0.105], [1.5, 1.505]],
        time: 1.5,
        step: Some(0.001),
        steps: None,
        scheme: InputScheme::Affine,
        order: default_order(),
        region: Some(vec![[0.0, 2.0], [-1.0, 3.0]]),
        splits: vec![Split { t: 0.6, axis: 0 }, Split { t: 1.2, axis: 1 }],
        max_params: Some(12),
        sweep: None,
        max_degree: Some(4),
        sweep_threshold: Some(1e-9),
        project: Some([0, 1]),
        section: None,
    }
}

pub fn vdp_nosplit() -> Scenario {
    Scenario { name: "vdp-nosplit".into(), splits: Vec::new(), ..vdp() }
}

/// Harmonic oscillator `x' = y + v1, y' = -x + v2` over one period from
/// `(1, 0) + [-delta, delta]^2`.
pub fn harmonic(noise: [f64; 2], delta: f64, steps: usize) -> Scenario {
    Scenario {
        name: "harmonic".into(),
        system: SystemSpec {
            drift: strings(&["x2", "-x1"]),
            inputs: vec![
                ChannelSpec { field: strings(&["1", "0"]), bound: noise[0] },
                ChannelSpec { field: strings(&["0", "1"]), bound: noise[1] },
            ],
        },
        initial: vec![[1.0 - delta, 1.0 + delta], [-delta, delta]],
        time: 2.0 * PI,
        step: None,
        steps: Some(steps),
        scheme: InputScheme::Affine,
        order: default_order(),
        region: None,
        splits: Vec::new(),
        max_params: None,
        sweep: None,
        max_degree: None,
        sweep_threshold: None,
        project: Some([0, 1]),
        section: None,
    }
}

/// Rossler system with `a = 5.7` and noise `1e-4` on every coordinate,
/// started on the section `x = 0` near `(0, -10.3, 0.03)`.
pub fn rossler() -> Scenario {
    Scenario {
        name: "rossler".into(),
        system: SystemSpec {
            drift: strings(&["-(x2 + x3)", "x1 + 0.2*x2", "0.2 + x3*(x1 - 5.7)"]),
            inputs: vec![
                ChannelSpec { field: strings(&["1", "0", "0"]), bound: 1e-4 },
                ChannelSpec { field: strings(&["0", "1", "0"]), bound: 1e-4 },
                ChannelSpec { field: strings(&["0", "0", "1"]), bound: 1e-4 },
            ],
        },
        initial: vec![[0.0, 0.0], [-10.3 - 1e-4, -10.3 + 1e-4], [0.03 - 1e-4, 0.03 + 1e-4]],
        time: 11.1,
        step: Some(0.005),
        steps: None,
        scheme: InputScheme::Affine,
        order: default_order(),
        region: Some(vec![[-25.0, 25.0], [-25.0, 25.0], [-25.0, 35.0]]),
        splits: Vec::new(),
        max_params: Some(30),
        sweep: Some(SweepPolicy::SmallestFirst),
        max_degree: Some(4),
        sweep_threshold: Some(1e-12),
        project: Some([1, 2]),
        section: Some(Section { coord: 0, direction: 1.0 }),
    }
}

/// Built-in scenario by name (`harmonic` with its default parameters).
pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "vdp" => Some(vdp()),
        "vdp-nosplit" => Some(vdp_nosplit()),
        "harmonic" => Some(harmonic([0.0, 0.1], 0.01, 100)),
        "rossler" => Some(rossler()),
        _ => None,
    }
}
