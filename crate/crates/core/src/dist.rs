//! One-dimensional probability laws with exact Laplace transforms, survival
//! functions, abscissas of convergence, and inverse-CDF samplers.
//!
//! Four families are supported: finite atom lists, the exponential law with
//! density `rate · e^{-rate·q}` on `q ≥ 0`, the lattice geometric law
//! `P(Q = k·step) = (1-p)·p^k`, and point masses. Every family knows the
//! closed form of `E(e^{vX})` and the boundary of its domain, so downstream
//! computations can stay exact instead of sampled.
//!
//! Values are immutable after construction and safe to share across threads.

use crate::ext::ExtReal;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

/// Atoms closer than this (absolute) are merged by the constructors;
/// pushforwards routinely create FP-coincident atoms.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Probability vectors must sum to 1 within this tolerance.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("atom list must be non-empty")]
    EmptyAtoms,
    #[error("atom value {0} is not finite")]
    NonFiniteAtom(f64),
    #[error("atom probability {prob} at value {value} is outside (0, 1]")]
    BadAtomProb { value: f64, prob: f64 },
    #[error("atom probabilities sum to {sum}, expected 1 within {PROB_SUM_TOL:e}")]
    ProbSum { sum: f64 },
    #[error("exponential rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("geometric success probability must lie strictly inside (0, 1), got {0}")]
    BadSuccess(f64),
    #[error("geometric step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("constant value must be finite, got {0}")]
    BadConstant(f64),
    #[error("|X| pushforward unsupported for {0}")]
    UnsupportedPushforward(String),
}

/// A probability law on ℝ.
///
/// Construct through the checked constructors ([`ScalarDist::atoms`] and
/// friends) or by deserializing; both enforce the family invariants
/// (atom probabilities in `(0, 1]` summing to 1, values strictly increasing,
/// parameters strictly inside their ranges).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScalarDist {
    /// Finite atom list, sorted by value, probabilities summing to 1.
    Atoms { atoms: Vec<(f64, f64)> },
    /// Density `rate · e^{-rate·q}` on `q ≥ 0`.
    Exponential { rate: f64 },
    /// `P(Q = k·step) = (1-p)·p^k` for `k = 0, 1, 2, …`.
    Geometric { p: f64, step: f64 },
    /// Point mass.
    Constant { value: f64 },
}

impl ScalarDist {
    /// Builds a finite-atom law: sorts by value, merges atoms within
    /// [`ATOM_MERGE_TOL`], and checks the probability invariants.
    pub fn atoms(pairs: Vec<(f64, f64)>) -> Result<Self, DistError> {
        if pairs.is_empty() {
            return Err(DistError::EmptyAtoms);
        }
        let mut pairs = pairs;
        for &(v, p) in &pairs {
            if !v.is_finite() {
                return Err(DistError::NonFiniteAtom(v));
            }
            if !(p > 0.0 && p <= 1.0 + PROB_SUM_TOL) || !p.is_finite() {
                return Err(DistError::BadAtomProb { value: v, prob: p });
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atom values"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match merged.last_mut() {
                Some(last) if (v - last.0).abs() <= ATOM_MERGE_TOL => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(DistError::ProbSum { sum });
        }
        Ok(ScalarDist::Atoms { atoms: merged })
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(DistError::BadRate(rate));
        }
        Ok(ScalarDist::Exponential { rate })
    }

    pub fn geometric(p: f64, step: f64) -> Result<Self, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::BadSuccess(p));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(DistError::BadStep(step));
        }
        Ok(ScalarDist::Geometric { p, step })
    }

    pub fn constant(value: f64) -> Result<Self, DistError> {
        if !value.is_finite() {
            return Err(DistError::BadConstant(value));
        }
        Ok(ScalarDist::Constant { value })
    }

    /// Point mass at `x`; panics on non-finite input.
    pub fn point(x: f64) -> Self {
        Self::constant(x).expect("finite point mass")
    }

    /// Exact `E(e^{vX})`.
    ///
    /// Results beyond `f64` range saturate to `Infinity`; genuine divergence
    /// (`v` at or past the abscissa of a parametric family) is `Infinity`.
    pub fn laplace(&self, v: f64) -> ExtReal {
        match self {
            ScalarDist::Atoms { atoms } => {
                ExtReal::new(atoms.iter().map(|&(x, p)| p * (v * x).exp()).sum())
            }
            ScalarDist::Exponential { rate } => {
                if v < *rate {
                    ExtReal::finite(rate / (rate - v))
                } else {
                    ExtReal::Infinity
                }
            }
            ScalarDist::Geometric { p, step } => {
                let g = p * (v * step).exp();
                if g < 1.0 {
                    ExtReal::finite((1.0 - p) / (1.0 - g))
                } else {
                    ExtReal::Infinity
                }
            }
            ScalarDist::Constant { value } => ExtReal::new((v * value).exp()),
        }
    }

    /// Abscissa of convergence `v_Q`: `laplace` is finite on `(-∞, v_Q)` and
    /// infinite on `(v_Q, ∞)`. Finiteness exactly at the abscissa is a
    /// per-family flag, see [`ScalarDist::finite_at_abscissa`].
    pub fn abscissa(&self) -> ExtReal {
        match self {
            ScalarDist::Atoms { .. } | ScalarDist::Constant { .. } => ExtReal::Infinity,
            ScalarDist::Exponential { rate } => ExtReal::finite(*rate),
            ScalarDist::Geometric { p, step } => ExtReal::finite((1.0 / p).ln() / step),
        }
    }

    /// Whether the transform is finite exactly at the abscissa. Diagnostics
    /// only; the theorems here never touch the boundary. For bounded-support
    /// families the abscissa is `+∞` and the flag is vacuously true.
    pub fn finite_at_abscissa(&self) -> bool {
        match self {
            ScalarDist::Atoms { .. } | ScalarDist::Constant { .. } => true,
            ScalarDist::Exponential { .. } | ScalarDist::Geometric { .. } => false,
        }
    }

    /// Strict survival `P(X > u)`.
    pub fn survival(&self, u: f64) -> f64 {
        match self {
            ScalarDist::Atoms { atoms } => atoms.iter().filter(|&&(x, _)| x > u).map(|&(_, p)| p).sum(),
            ScalarDist::Exponential { rate } => {
                if u < 0.0 {
                    1.0
                } else {
                    (-rate * u).exp()
                }
            }
            ScalarDist::Geometric { p, step } => {
                if u < 0.0 {
                    1.0
                } else {
                    // P(k·step > u) = p^{floor(u/step)+1}
                    p.powf((u / step).floor() + 1.0)
                }
            }
            ScalarDist::Constant { value } => {
                if u < *value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The law of `|X|`. Colliding atoms are merged and re-sorted.
    pub fn abs_pushforward(&self) -> Result<ScalarDist, DistError> {
        match self {
            ScalarDist::Atoms { atoms } => {
                ScalarDist::atoms(atoms.iter().map(|&(x, p)| (x.abs(), p)).collect())
            }
            ScalarDist::Constant { value } => ScalarDist::constant(value.abs()),
            ScalarDist::Exponential { .. } => Ok(self.clone()),
            ScalarDist::Geometric { step, .. } => {
                if *step > 0.0 {
                    Ok(self.clone())
                } else {
                    // Unreachable through the checked constructors; |X| of a
                    // negative-step lattice is not a supported composite.
                    Err(DistError::UnsupportedPushforward(format!(
                        "geometric with step {step}"
                    )))
                }
            }
        }
    }

    /// Inverse-CDF sample: deterministic given `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u), "uniform01 out of range: {u}");
        match self {
            ScalarDist::Atoms { atoms } => {
                let mut cum = 0.0;
                for &(x, p) in atoms {
                    cum += p;
                    if cum >= u {
                        return x;
                    }
                }
                atoms.last().expect("non-empty atoms").0
            }
            ScalarDist::Exponential { rate } => -f64::ln_1p(-u) / rate,
            ScalarDist::Geometric { p, step } => {
                let k = (f64::ln_1p(-u) / p.ln()).floor().max(0.0);
                k * step
            }
            ScalarDist::Constant { value } => *value,
        }
    }

    /// Infimum of the support.
    pub fn min_support(&self) -> f64 {
        match self {
            ScalarDist::Atoms { atoms } => atoms[0].0,
            ScalarDist::Exponential { .. } | ScalarDist::Geometric { .. } => 0.0,
            ScalarDist::Constant { value } => *value,
        }
    }

    /// Supremum of the support, `None` when unbounded.
    pub fn max_support(&self) -> Option<f64> {
        match self {
            ScalarDist::Atoms { atoms } => Some(atoms.last().expect("non-empty").0),
            ScalarDist::Exponential { .. } | ScalarDist::Geometric { .. } => None,
            ScalarDist::Constant { value } => Some(*value),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_support() >= 0.0
    }

    /// Whether the law is a finite atom list or point mass (the exact
    /// pushforward domain of the T operator and the d_ρ sweep).
    pub fn is_atomic(&self) -> bool {
        matches!(self, ScalarDist::Atoms { .. } | ScalarDist::Constant { .. })
    }

    /// The law as an explicit atom list, when atomic.
    pub fn atom_list(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            ScalarDist::Atoms { atoms } => Some(atoms.clone()),
            ScalarDist::Constant { value } => Some(vec![(*value, 1.0)]),
            _ => None,
        }
    }
}

// Deserialization funnels through the checked constructors so a decoded law
// always satisfies the same invariants as a constructed one.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DistWire {
    Atoms { atoms: Vec<(f64, f64)> },
    Exponential { rate: f64 },
    Geometric { p: f64, step: f64 },
    Constant { value: f64 },
}

impl<'de> Deserialize<'de> for ScalarDist {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = DistWire::deserialize(deserializer)?;
        let built = match wire {
            DistWire::Atoms { atoms } => ScalarDist::atoms(atoms),
            DistWire::Exponential { rate } => ScalarDist::exponential(rate),
            DistWire::Geometric { p, step } => ScalarDist::geometric(p, step),
            DistWire::Constant { value } => ScalarDist::constant(value),
        };
        built.map_err(serde::de::Error::custom)
    }
}
