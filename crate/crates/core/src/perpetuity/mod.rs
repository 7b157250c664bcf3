//! The scalar affine recursion `R_{n+1} = M_n R_n + Q_n`: joint `(M, Q)`
//! laws with `M` supported on finitely many points of `[0, 1]`, the critical
//! exponents of the exponential-moment dichotomy, exact Laplace propagation,
//! the T operator `μ ↦ law(Q + MX)`, and constructive boundedness/divergence
//! certificates.

mod certify;
mod exponents;
mod propagate;

pub use certify::{
    certify_bounded, certify_divergent, classify, gg_geometric_bound, BoundCertificate,
    Classification, DivergenceCertificate, DivergenceReason, BOUNDARY_BAND_REL,
};
pub use exponents::Exponents;
pub use propagate::{PropagationTable, DEFAULT_MAX_ENTRIES, DEFAULT_MAX_POINTS};

use crate::dist::{DistError, ScalarDist, ATOM_MERGE_TOL, PROB_SUM_TOL};
use crate::ext::ExtReal;
use crate::metric::MetricError;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerpetuityError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("out of regime: {0}")]
    Regime(String),
    #[error("exact pushforward requires finite-atom laws: {0}")]
    UnsupportedExact(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// One branch of the joint law: `P(M = m) = p` and `Q | {M = m} ~ q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub m: f64,
    pub p: f64,
    pub q: ScalarDist,
}

impl Branch {
    pub fn new(m: f64, p: f64, q: ScalarDist) -> Self {
        Branch { m, p, q }
    }
}

/// The joint law of the driving pair `(M, Q)`: finitely many atoms for `M`
/// in `[0, 1]`, each carrying a conditional law for `Q`.
///
/// Branches are kept sorted by `m` with distinct `m`-values; probabilities
/// sum to 1. Construct via [`JointMQ::new`] (or deserialize), which enforces
/// all of this.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointMQ {
    branches: Vec<Branch>,
}

impl JointMQ {
    pub fn new(mut branches: Vec<Branch>) -> Result<Self, PerpetuityError> {
        if branches.is_empty() {
            return Err(PerpetuityError::InvalidInstance("no branches".into()));
        }
        for (i, b) in branches.iter().enumerate() {
            if !b.m.is_finite() || !(0.0..=1.0).contains(&b.m) {
                return Err(PerpetuityError::InvalidInstance(format!(
                    "branch {i}: m = {} outside [0, 1]",
                    b.m
                )));
            }
            if !b.p.is_finite() || !(b.p > 0.0 && b.p <= 1.0 + PROB_SUM_TOL) {
                return Err(PerpetuityError::InvalidInstance(format!(
                    "branch {i}: p = {} outside (0, 1]",
                    b.p
                )));
            }
        }
        let sum: f64 = branches.iter().map(|b| b.p).sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(PerpetuityError::InvalidInstance(format!(
                "branch probabilities sum to {sum}, expected 1"
            )));
        }
        branches.sort_by(|a, b| a.m.partial_cmp(&b.m).expect("finite m"));
        for w in branches.windows(2) {
            if (w[1].m - w[0].m).abs() <= ATOM_MERGE_TOL {
                return Err(PerpetuityError::InvalidInstance(format!(
                    "duplicate m-value {} (branches must have distinct m)",
                    w[0].m
                )));
            }
        }
        Ok(JointMQ { branches })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// The branch carrying `M = 1` exactly, if any.
    pub fn m1_branch(&self) -> Option<&Branch> {
        self.branches.last().filter(|b| b.m == 1.0)
    }

    /// Whether the hypotheses of the dichotomy hold: `Q ≥ 0` a.s. and
    /// `P(M < 1) > 0`.
    pub fn theorem2_regime(&self) -> bool {
        self.branches.iter().all(|b| b.q.is_nonnegative())
            && self.branches.iter().any(|b| b.m < 1.0)
    }

    /// `E(e^{vQ} M)`, infinity absorbing. Branches with `m = 0` contribute
    /// nothing regardless of their transform (`0 · ∞ = 0`).
    pub fn ewm(&self, v: f64) -> ExtReal {
        let mut acc = ExtReal::finite(0.0);
        for b in &self.branches {
            let w = b.p * b.m;
            if w == 0.0 {
                continue;
            }
            acc = acc + b.q.laplace(v).scale(w);
        }
        acc
    }

    /// `E(e^{vQ} 1_{M=1})`: zero when no branch sits at `m = 1`.
    pub fn ewq_on_m1(&self, v: f64) -> ExtReal {
        match self.m1_branch() {
            Some(b) => b.q.laplace(v).scale(b.p),
            None => ExtReal::finite(0.0),
        }
    }

    /// `E(e^{vQ} 1_{1-ε < M ≤ 1})`: the contraction factor of the splitting
    /// argument behind the boundedness certificate.
    pub fn rho_eps(&self, v: f64, eps: f64) -> ExtReal {
        let mut acc = ExtReal::finite(0.0);
        for b in &self.branches {
            if b.m > 1.0 - eps {
                acc = acc + b.q.laplace(v).scale(b.p);
            }
        }
        acc
    }

    /// `L_Q(v) = E(e^{vQ})` of the `Q`-marginal (the `p`-mixture of the
    /// conditional laws).
    pub fn laplace_q(&self, v: f64) -> ExtReal {
        let mut acc = ExtReal::finite(0.0);
        for b in &self.branches {
            acc = acc + b.q.laplace(v).scale(b.p);
        }
        acc
    }

    /// Abscissa of convergence of the `Q`-marginal: the minimum of the
    /// conditional abscissas (each branch has positive weight).
    pub fn v_q(&self) -> ExtReal {
        self.branches
            .iter()
            .map(|b| b.q.abscissa())
            .fold(ExtReal::Infinity, ExtReal::min)
    }

    /// Inverse-CDF draw of one `(M, Q)` pair from two uniforms: the first
    /// selects the branch (branches are in sorted `m` order), the second is
    /// pushed through the conditional sampler. Pure and deterministic.
    pub fn draw_with(&self, u_branch: f64, u_q: f64) -> (f64, f64) {
        let mut cum = 0.0;
        for b in &self.branches {
            cum += b.p;
            if cum >= u_branch {
                return (b.m, b.q.sample(u_q));
            }
        }
        let b = self.branches.last().expect("non-empty");
        (b.m, b.q.sample(u_q))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointMqWire {
    branches: Vec<Branch>,
}

impl<'de> Deserialize<'de> for JointMQ {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = JointMqWire::deserialize(deserializer)?;
        JointMQ::new(wire.branches).map_err(serde::de::Error::custom)
    }
}

/// The T operator: the law of `Q + MX` for `X ~ mu` independent of `(M, Q)`.
///
/// Exact pushforward: `mu` and every conditional `Q` must be finite-atom or
/// point masses. Output atoms are merged within the standard tolerance.
pub fn t_operator(j: &JointMQ, mu: &ScalarDist) -> Result<ScalarDist, PerpetuityError> {
    let mu_atoms = mu.atom_list().ok_or_else(|| {
        PerpetuityError::UnsupportedExact(format!("T operator input must be atomic, got {mu:?}"))
    })?;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for b in j.branches() {
        let q_atoms = b.q.atom_list().ok_or_else(|| {
            PerpetuityError::UnsupportedExact(format!(
                "T operator requires atomic conditional Q, got {:?}",
                b.q
            ))
        })?;
        for &(qv, qp) in &q_atoms {
            for &(xv, xp) in &mu_atoms {
                out.push((qv + b.m * xv, b.p * qp * xp));
            }
        }
    }
    ScalarDist::atoms(out).map_err(PerpetuityError::from)
}

#[cfg(test)]
pub(crate) mod test_instances {
    use super::*;

    /// Two branches: `M = 1` w.p. ½ and `M = ½` w.p. ½, `Q ≡ 1` on both.
    pub fn i1() -> JointMQ {
        JointMQ::new(vec![
            Branch::new(1.0, 0.5, ScalarDist::point(1.0)),
            Branch::new(0.5, 0.5, ScalarDist::point(1.0)),
        ])
        .unwrap()
    }

    /// One branch: `M ≡ ½`, `Q ~ Exp(1)`.
    pub fn i2() -> JointMQ {
        JointMQ::new(vec![Branch::new(
            0.5,
            1.0,
            ScalarDist::exponential(1.0).unwrap(),
        )])
        .unwrap()
    }
}
