//! Exact propagation of `L_n(v) = E(e^{vR_n})`.
//!
//! Conditioning on the first step gives the recursion
//!
//! ```text
//! L_0(w)     = E(e^{wR_0}),
//! L_{n+1}(w) = Σ_i p_i · L_{Q_i}(w) · L_n(w·m_i),
//! ```
//!
//! with infinity absorbing. Only arguments of the form `v·∏ m` ever appear,
//! and for `k` distinct `m`-values the number of distinct products grows
//! polynomially in `n`, so memoizing over the deduplicated point set makes
//! exact evaluation affordable at depths in the hundreds.

use super::{JointMQ, PerpetuityError};
use crate::dist::ScalarDist;
use crate::ext::ExtReal;
use std::collections::{HashMap, HashSet};

/// Default cap on distinct evaluation points.
pub const DEFAULT_MAX_POINTS: usize = 100_000;
/// Default cap on memoized `(depth, point)` entries.
pub const DEFAULT_MAX_ENTRIES: usize = 5_000_000;

/// Evaluation points within this relative tolerance are identified.
const POINT_TOL_REL: f64 = 1e-12;

/// Memoized table of exact `L_n(w)` values over the evaluation-point tree of
/// one instance and one initial law.
///
/// Single writer during a propagation pass; read freely afterwards.
pub struct PropagationTable {
    instance: JointMQ,
    r0: ScalarDist,
    /// Point registry: id → value.
    points: Vec<f64>,
    /// The same points sorted by value, for tolerance lookups.
    sorted: Vec<(f64, usize)>,
    cache: HashMap<(usize, usize), ExtReal>,
    max_points: usize,
    max_entries: usize,
}

impl PropagationTable {
    pub fn new(instance: JointMQ, r0: ScalarDist) -> Self {
        Self::with_budget(instance, r0, DEFAULT_MAX_POINTS, DEFAULT_MAX_ENTRIES)
    }

    /// Explicit resource caps; exceeding either is a hard error, never a
    /// silent truncation.
    pub fn with_budget(
        instance: JointMQ,
        r0: ScalarDist,
        max_points: usize,
        max_entries: usize,
    ) -> Self {
        PropagationTable {
            instance,
            r0,
            points: Vec::new(),
            sorted: Vec::new(),
            cache: HashMap::new(),
            max_points,
            max_entries,
        }
    }

    pub fn instance(&self) -> &JointMQ {
        &self.instance
    }

    pub fn r0(&self) -> &ScalarDist {
        &self.r0
    }

    /// Number of distinct evaluation points registered so far.
    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    /// Exact `L_n(v)`, deterministic and memoized.
    pub fn propagate(&mut self, n: usize, v: f64) -> Result<ExtReal, PerpetuityError> {
        if !v.is_finite() {
            return Err(PerpetuityError::InvalidInstance(format!(
                "evaluation point must be finite, got {v}"
            )));
        }
        let root = self.point_id(v)?;
        if let Some(&hit) = self.cache.get(&(n, root)) {
            return Ok(hit);
        }

        // Walk the dependency tree top-down, collecting the uncached
        // (depth, point) pairs each level needs from the one below.
        let mut needed: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        needed[n].push(root);
        let ms: Vec<f64> = self.instance.branches().iter().map(|b| b.m).collect();
        for depth in (1..=n).rev() {
            let current = needed[depth].clone();
            let mut next: HashSet<usize> = HashSet::new();
            for pid in current {
                let w = self.points[pid];
                for &m in &ms {
                    let child = self.point_id(w * m)?;
                    if !self.cache.contains_key(&(depth - 1, child)) {
                        next.insert(child);
                    }
                }
            }
            let mut next: Vec<usize> = next.into_iter().collect();
            next.sort_unstable();
            needed[depth - 1] = next;
        }

        // Fill bottom-up.
        for depth in 0..=n {
            for i in 0..needed[depth].len() {
                let pid = needed[depth][i];
                if self.cache.contains_key(&(depth, pid)) {
                    continue;
                }
                let w = self.points[pid];
                let value = if depth == 0 {
                    self.r0.laplace(w)
                } else {
                    let mut acc = ExtReal::finite(0.0);
                    for bi in 0..self.instance.branches().len() {
                        let (p, m, lq) = {
                            let b = &self.instance.branches()[bi];
                            (b.p, b.m, b.q.laplace(w))
                        };
                        let child = self.point_id(w * m)?;
                        let below = *self
                            .cache
                            .get(&(depth - 1, child))
                            .expect("dependency computed in previous level");
                        acc = acc + (lq * below).scale(p);
                    }
                    acc
                };
                if self.cache.len() >= self.max_entries {
                    return Err(PerpetuityError::Budget(format!(
                        "propagation cache exceeds {} entries (depth {n}, {} points)",
                        self.max_entries,
                        self.points.len()
                    )));
                }
                self.cache.insert((depth, pid), value);
            }
        }

        Ok(*self.cache.get(&(n, root)).expect("root computed"))
    }

    /// Registry id of `w`, deduplicating within [`POINT_TOL_REL`] relative.
    fn point_id(&mut self, w: f64) -> Result<usize, PerpetuityError> {
        let pos = self
            .sorted
            .partition_point(|&(x, _)| x < w);
        // Scan outwards from the insertion point; neighbors within tolerance
        // are adjacent in sorted order.
        for &(x, id) in self.sorted[pos..].iter() {
            if !points_close(x, w) {
                break;
            }
            return Ok(id);
        }
        for &(x, id) in self.sorted[..pos].iter().rev() {
            if !points_close(x, w) {
                break;
            }
            return Ok(id);
        }
        if self.points.len() >= self.max_points {
            return Err(PerpetuityError::Budget(format!(
                "evaluation points exceed {}",
                self.max_points
            )));
        }
        let id = self.points.len();
        self.points.push(w);
        self.sorted.insert(pos, (w, id));
        Ok(id)
    }
}

fn points_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= POINT_TOL_REL * a.abs().max(b.abs())
}
