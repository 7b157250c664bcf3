//! Seeded, reproducibly parallel simulation of `R_{n+1} = M_n R_n + Q_n`,
//! with empirical Laplace-transform and survival-curve estimation.
//!
//! Determinism contract: the output is a pure function of the configuration.
//! Each trajectory draws from its own counter-based substream
//! ([`crate::rng::substream`]), so worker count and scheduling cannot change
//! a single bit of the result. Per step the draw order is fixed: one uniform
//! selects the `M`-branch, one drives the conditional `Q` sampler; the
//! initial value consumes one uniform up front.

use crate::dist::ScalarDist;
use crate::perpetuity::JointMQ;
use crate::rng::substream;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint {0} not present in the matrix")]
    UnknownCheckpoint(usize),
    #[error("grid must be sorted ascending")]
    UnsortedGrid,
}

/// One simulation request.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub instance: JointMQ,
    pub r0: ScalarDist,
    /// Number of recursion steps.
    pub horizon: usize,
    pub trajectories: usize,
    pub seed: u64,
    /// Steps at which `R` is recorded; sorted, unique, all `≤ horizon`.
    pub checkpoints: Vec<usize>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.trajectories == 0 {
            return Err(SimError::InvalidConfig("trajectories must be >= 1".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(SimError::InvalidConfig("no checkpoints requested".into()));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(SimError::InvalidConfig(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        if *self.checkpoints.last().unwrap() > self.horizon {
            return Err(SimError::InvalidConfig(format!(
                "checkpoint {} beyond horizon {}",
                self.checkpoints.last().unwrap(),
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Row-major `trajectories × checkpoints` matrix of recorded `R` values.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMatrix {
    checkpoints: Vec<usize>,
    trajectories: usize,
    data: Vec<f64>,
}

impl TrajectoryMatrix {
    pub(crate) fn from_rows(checkpoints: Vec<usize>, rows: Vec<Vec<f64>>) -> Self {
        let trajectories = rows.len();
        let width = checkpoints.len();
        let mut data = Vec::with_capacity(trajectories * width);
        for row in rows {
            debug_assert_eq!(row.len(), width);
            data.extend_from_slice(&row);
        }
        TrajectoryMatrix { checkpoints, trajectories, data }
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    pub fn row(&self, traj: usize) -> &[f64] {
        let w = self.checkpoints.len();
        &self.data[traj * w..(traj + 1) * w]
    }

    pub fn checkpoint_index(&self, step: usize) -> Option<usize> {
        self.checkpoints.iter().position(|&c| c == step)
    }

    /// All trajectory values at one recorded step.
    pub fn column(&self, step: usize) -> Result<Vec<f64>, SimError> {
        let idx = self
            .checkpoint_index(step)
            .ok_or(SimError::UnknownCheckpoint(step))?;
        let w = self.checkpoints.len();
        Ok((0..self.trajectories).map(|t| self.data[t * w + idx]).collect())
    }
}

/// Runs the recursion; trajectories are independent rayon work items and the
/// assembled matrix is identical for any worker count.
pub fn simulate(cfg: &SimConfig) -> Result<TrajectoryMatrix, SimError> {
    cfg.validate()?;
    let rows: Vec<Vec<f64>> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|t| run_trajectory(cfg, t as u64))
        .collect();
    Ok(TrajectoryMatrix::from_rows(cfg.checkpoints.clone(), rows))
}

fn run_trajectory(cfg: &SimConfig, traj: u64) -> Vec<f64> {
    let mut rng = substream(cfg.seed, traj);
    let mut r = cfg.r0.sample(rng.gen::<f64>());
    let mut out = Vec::with_capacity(cfg.checkpoints.len());
    let mut next = 0usize;
    if cfg.checkpoints[next] == 0 {
        out.push(r);
        next += 1;
    }
    for step in 1..=cfg.horizon {
        let u_branch = rng.gen::<f64>();
        let u_q = rng.gen::<f64>();
        let (m, q) = cfg.instance.draw_with(u_branch, u_q);
        r = m * r + q;
        if next < cfg.checkpoints.len() && cfg.checkpoints[next] == step {
            out.push(r);
            next += 1;
        }
    }
    out
}

/// Empirical estimate of `E(e^{vR_n})` at one checkpoint.
///
/// The point estimate is carried in log space; the half-width is a 95%
/// normal-approximation interval on the natural scale. `dominance` is the
/// largest summand over the total: past 0.5 a single trajectory carries the
/// estimate and [`LaplaceEstimate::is_reliable`] turns false (the second
/// moment of `e^{vR}` needs `2v < v_c`, so estimation degrades near
/// criticality long before the mean itself diverges).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LaplaceEstimate {
    pub v: f64,
    pub log_estimate: f64,
    pub half_width: f64,
    pub dominance: f64,
}

impl LaplaceEstimate {
    pub fn estimate(&self) -> f64 {
        self.log_estimate.exp()
    }

    pub fn is_reliable(&self) -> bool {
        self.dominance <= 0.5
    }
}

/// Stable log-sum-exp estimator over the checkpoint column, merged with
/// compensated summation in a fixed order.
pub fn estimate_laplace(
    matrix: &TrajectoryMatrix,
    v: f64,
    checkpoint: usize,
) -> Result<LaplaceEstimate, SimError> {
    let col = matrix.column(checkpoint)?;
    let n = col.len() as f64;
    let c = col
        .iter()
        .map(|&r| v * r)
        .fold(f64::NEG_INFINITY, f64::max);
    // v = 0 (or a constant column) gives c = max term exactly; exp(t - c) = 1.
    let weights: Vec<f64> = col.iter().map(|&r| (v * r - c).exp()).collect();
    let total = neumaier_sum(&weights);
    let mean_w = total / n;
    let var_w = if col.len() > 1 {
        neumaier_sum(
            &weights
                .iter()
                .map(|&w| (w - mean_w) * (w - mean_w))
                .collect::<Vec<_>>(),
        ) / (n - 1.0)
    } else {
        0.0
    };
    Ok(LaplaceEstimate {
        v,
        log_estimate: c + mean_w.ln(),
        half_width: 1.96 * c.exp() * (var_w / n).sqrt(),
        dominance: 1.0 / total,
    })
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// One point of an empirical survival curve with its
/// Dvoretzky–Kiefer–Wolfowitz confidence band.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SurvivalPoint {
    pub u: f64,
    pub survival: f64,
    pub band_low: f64,
    pub band_high: f64,
}

/// DKW confidence level for the survival band.
pub const DKW_CONFIDENCE: f64 = 0.99;

/// Empirical `P(R_n > u)` over a sorted grid, with the two-sided DKW band at
/// confidence [`DKW_CONFIDENCE`].
pub fn survival_curve(
    matrix: &TrajectoryMatrix,
    checkpoint: usize,
    grid: &[f64],
) -> Result<Vec<SurvivalPoint>, SimError> {
    if !grid.windows(2).all(|w| w[0] <= w[1]) {
        return Err(SimError::UnsortedGrid);
    }
    let mut col = matrix.column(checkpoint)?;
    col.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = col.len() as f64;
    let eps = ((2.0 / (1.0 - DKW_CONFIDENCE)).ln() / (2.0 * n)).sqrt();
    Ok(grid
        .iter()
        .map(|&u| {
            let above = col.len() - col.partition_point(|&x| x <= u);
            let s = above as f64 / n;
            SurvivalPoint {
                u,
                survival: s,
                band_low: (s - eps).max(0.0),
                band_high: (s + eps).min(1.0),
            }
        })
        .collect())
}

/// Least-squares slope of `ln(survival)` against `u`, over the points with
/// positive survival. `None` with fewer than two usable points.
pub fn log_survival_slope(points: &[(f64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, s)| s > 0.0)
        .map(|&(u, s)| (u, s.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let n = usable.len() as f64;
    let mean_u = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mean_u) * (p.0 - mean_u)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = usable
        .iter()
        .map(|p| (p.0 - mean_u) * (p.1 - mean_y))
        .sum();
    Some(sxy / sxx)
}

const QUANTILE_PROBS: [(&str, f64); 7] = [
    ("p10", 0.10),
    ("p25", 0.25),
    ("p50", 0.50),
    ("p75", 0.75),
    ("p90", 0.90),
    ("p99", 0.99),
    ("p999", 0.999),
];

/// Tidy CSV of per-checkpoint quantiles: one row per recorded step.
pub fn write_quantiles_csv<W: Write>(matrix: &TrajectoryMatrix, out: &mut W) -> io::Result<()> {
    write!(out, "checkpoint,min")?;
    for (name, _) in QUANTILE_PROBS {
        write!(out, ",{name}")?;
    }
    writeln!(out, ",max")?;
    for &step in matrix.checkpoints() {
        let mut col = matrix.column(step).expect("own checkpoint");
        col.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        write!(out, "{step},{}", col[0])?;
        for (_, p) in QUANTILE_PROBS {
            let idx = ((col.len() as f64 - 1.0) * p).round() as usize;
            write!(out, ",{}", col[idx])?;
        }
        writeln!(out, ",{}", col[col.len() - 1])?;
    }
    Ok(())
}

/// CSV of `(u, survival, band_low, band_high)` rows.
pub fn write_survival_csv<W: Write>(points: &[SurvivalPoint], out: &mut W) -> io::Result<()> {
    writeln!(out, "u,survival,band_low,band_high")?;
    for p in points {
        writeln!(out, "{},{},{},{}", p.u, p.survival, p.band_low, p.band_high)?;
    }
    Ok(())
}

/// CSV of `(v, estimate, half_width, dominance)` rows.
pub fn write_laplace_csv<W: Write>(rows: &[LaplaceEstimate], out: &mut W) -> io::Result<()> {
    writeln!(out, "v,estimate,half_width,dominance")?;
    for e in rows {
        writeln!(out, "{},{},{},{}", e.v, e.estimate(), e.half_width, e.dominance)?;
    }
    Ok(())
}
