//! Experiment configs: one JSON file describes one batch run.
//!
//! Shape: `{"name": ..., "mode": ..., "payload": {...}}` with a mode-specific
//! payload. Unknown fields anywhere are schema violations; all domain
//! invariants (probability sums, stochastic rows, parameter ranges) are
//! enforced during deserialization by the core types, before any computation
//! starts.

use perpetua::dist::ScalarDist;
use perpetua::markov::MarkovSpec;
use perpetua::perpetuity::JointMQ;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    #[serde(flatten)]
    pub mode: Mode,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", content = "payload", rename_all = "lowercase", deny_unknown_fields)]
pub enum Mode {
    Exponents(ExponentsPayload),
    Propagate(PropagatePayload),
    Certify(CertifyPayload),
    Metric(MetricPayload),
    Simulate(SimulatePayload),
    Markov(MarkovPayload),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exponents(_) => "exponents",
            Mode::Propagate(_) => "propagate",
            Mode::Certify(_) => "certify",
            Mode::Metric(_) => "metric",
            Mode::Simulate(_) => "simulate",
            Mode::Markov(_) => "markov",
        }
    }
}

fn default_r0() -> ScalarDist {
    ScalarDist::point(0.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsPayload {
    pub instance: JointMQ,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatePayload {
    pub instance: JointMQ,
    #[serde(default = "default_r0")]
    pub r0: ScalarDist,
    pub v_grid: Vec<f64>,
    pub depth: usize,
    /// Optional evaluation-point budget override.
    pub max_points: Option<usize>,
    pub max_entries: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyPayload {
    pub instance: JointMQ,
    #[serde(default = "default_r0")]
    pub r0: ScalarDist,
    pub v: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricPayload {
    pub instance: JointMQ,
    pub mu: ScalarDist,
    pub nu: ScalarDist,
    pub rho: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatePayload {
    pub instance: JointMQ,
    #[serde(default = "default_r0")]
    pub r0: ScalarDist,
    pub horizon: usize,
    pub trajectories: usize,
    pub seed: u64,
    /// Defaults to `[horizon]`.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    /// Exponents at which to estimate `E(e^{vR_n})` at the last checkpoint.
    #[serde(default)]
    pub laplace_vs: Vec<f64>,
    /// Number of survival-grid points spanning the sample range at the last
    /// checkpoint.
    #[serde(default = "default_survival_points")]
    pub survival_points: usize,
}

fn default_survival_points() -> usize {
    50
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovPayload {
    pub spec: MarkovSpec,
    #[serde(default = "default_r0")]
    pub r0: ScalarDist,
    pub horizon: usize,
    pub trajectories: usize,
    pub seed: u64,
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    /// When set, request an analytic divergence witness at this exponent.
    pub witness_v: Option<f64>,
    /// Exponent grid for the envelope sandwich table (enumerable envelopes).
    #[serde(default)]
    pub sandwich_grid: Vec<f64>,
}
