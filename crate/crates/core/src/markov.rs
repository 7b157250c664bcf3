//! The Markov-modulated recursion `R_{n+1} = M_n(X_n) R_n + Q_n(X_n)` over a
//! finite irreducible chain, with every `M(x) < 1` almost surely and `Q(x)`
//! allowed signed.
//!
//! The per-step maxima `M̄_n = max_x M_n(x)` and `Q̄_n = max_x |Q_n(x)|` drive
//! an i.i.d. envelope recursion `R̄_{n+1} = M̄_n R̄_n + Q̄_n` that dominates the
//! modulated one pathwise: `|R_n| ≤ R̄_n`. Since `P(M̄ < 1) = 1`, the
//! envelope's critical exponent reduces to the abscissa of `Q̄`, which equals
//! `v̄ = min_x v_{|Q(x)|}`: exponential moments of `|R_n|` are uniformly
//! bounded strictly below `v̄` and divergent strictly above (along the visit
//! times of the worst state, which recurrence makes infinite).

use crate::dist::{DistError, ScalarDist, ATOM_MERGE_TOL, PROB_SUM_TOL};
use crate::ext::ExtReal;
use crate::perpetuity::{Branch, JointMQ, PerpetuityError};
use crate::rng::substream;
use rand::Rng;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Cap on the state count for exact envelope enumeration.
pub const MAX_ENVELOPE_STATES: usize = 8;
/// Cap on the product-support size for exact envelope enumeration.
pub const MAX_ENVELOPE_COMBINATIONS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("invalid Markov spec: {0}")]
    InvalidSpec(String),
    #[error("transition matrix is not irreducible (support graph is not strongly connected)")]
    NotIrreducible,
    #[error("envelope not exactly enumerable: {0}; the v̄ path still applies")]
    EnvelopeNotEnumerable(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("out of regime: {0}")]
    Regime(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Instance(#[from] PerpetuityError),
}

/// Cross-state dependence of the i.i.d. driving vectors
/// `((M_n(x), Q_n(x)))_{x}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Dependence {
    /// Coordinates drawn independently across states from the per-state laws.
    Independent,
    /// The vector law given explicitly as finite atoms: each entry carries
    /// one `(m, q)` value pair per state.
    JointVectors(Vec<VectorAtom>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorAtom {
    /// `(m, q)` per state, in state order.
    pub pairs: Vec<(f64, f64)>,
    pub prob: f64,
}

/// Finite-state modulation spec: chain, per-state driving laws, and the
/// cross-state dependence mode.
///
/// Validation (construction and deserialization): rows and the initial
/// distribution are stochastic within 1e-12, the support graph is strongly
/// connected (recurrence underpins the divergence argument, so failure is a
/// rejection rather than a warning), and every `m`-branch satisfies
/// `0 ≤ m < 1` strictly.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSpec {
    states: Vec<String>,
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    per_state: Vec<JointMQ>,
    dependence: Dependence,
}

impl MarkovSpec {
    /// Independent coordinates: one `JointMQ` per state, index-aligned with
    /// `states`.
    pub fn independent(
        states: Vec<String>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        per_state: Vec<JointMQ>,
    ) -> Result<Self, MarkovError> {
        validate_chain(&states, &transition, &initial)?;
        if per_state.len() != states.len() {
            return Err(MarkovError::InvalidSpec(format!(
                "{} per-state laws for {} states",
                per_state.len(),
                states.len()
            )));
        }
        for (s, j) in states.iter().zip(&per_state) {
            require_m_strictly_below_one(s, j)?;
        }
        Ok(MarkovSpec { states, transition, initial, per_state, dependence: Dependence::Independent })
    }

    /// Explicit joint vectors; the per-state laws are derived marginals.
    pub fn with_joint_vectors(
        states: Vec<String>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        vectors: Vec<VectorAtom>,
    ) -> Result<Self, MarkovError> {
        validate_chain(&states, &transition, &initial)?;
        if vectors.is_empty() {
            return Err(MarkovError::InvalidSpec("empty vector list".into()));
        }
        let mut prob_sum = 0.0;
        for (i, va) in vectors.iter().enumerate() {
            if va.pairs.len() != states.len() {
                return Err(MarkovError::InvalidSpec(format!(
                    "vector {i} has {} pairs for {} states",
                    va.pairs.len(),
                    states.len()
                )));
            }
            if !(va.prob > 0.0 && va.prob <= 1.0 + PROB_SUM_TOL) {
                return Err(MarkovError::InvalidSpec(format!(
                    "vector {i} probability {} outside (0, 1]",
                    va.prob
                )));
            }
            for (s, &(m, q)) in va.pairs.iter().enumerate() {
                if !m.is_finite() || !(0.0..1.0).contains(&m) {
                    return Err(MarkovError::InvalidSpec(format!(
                        "vector {i}, state {s}: m = {m} outside [0, 1)"
                    )));
                }
                if !q.is_finite() {
                    return Err(MarkovError::InvalidSpec(format!(
                        "vector {i}, state {s}: q = {q} not finite"
                    )));
                }
            }
            prob_sum += va.prob;
        }
        if (prob_sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(MarkovError::InvalidSpec(format!(
                "vector probabilities sum to {prob_sum}, expected 1"
            )));
        }
        let per_state = (0..states.len())
            .map(|s| marginal_of_state(&vectors, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MarkovSpec {
            states,
            transition,
            initial,
            per_state,
            dependence: Dependence::JointVectors(vectors),
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// The (possibly derived) marginal law of `(M(x), Q(x))`.
    pub fn per_state(&self, idx: usize) -> &JointMQ {
        &self.per_state[idx]
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    /// `v̄ = min_x v_{|Q(x)|}`: the minimum over states (and branches) of the
    /// abscissa of `|Q(x)|`. This equals the envelope's critical exponent,
    /// because `P(M̄ < 1) = 1` forces the envelope's `v_1` to `+∞`.
    pub fn v_bar(&self) -> ExtReal {
        self.per_state
            .iter()
            .flat_map(|j| j.branches())
            .map(|b| {
                b.q
                    .abs_pushforward()
                    .expect("validated laws support |Q|")
                    .abscissa()
            })
            .fold(ExtReal::Infinity, ExtReal::min)
    }

    /// Exact joint law of `(M̄, Q̄) = (max_x M(x), max_x |Q(x)|)`.
    ///
    /// Independent mode enumerates the product of the per-state supports
    /// (finite-atom `Q` only, `|E| ≤ 8`, bounded combination count); joint
    /// vectors are folded directly. Parametric `Q` is not exactly enumerable
    /// and routes to the `v̄`-only path via `EnvelopeNotEnumerable`.
    pub fn envelope(&self) -> Result<EnvelopeLaw, MarkovError> {
        let weighted: Vec<(f64, f64, f64)> = match &self.dependence {
            Dependence::JointVectors(vectors) => vectors
                .iter()
                .map(|va| {
                    let m_bar = va.pairs.iter().map(|p| p.0).fold(0.0, f64::max);
                    let q_bar = va.pairs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
                    (m_bar, q_bar, va.prob)
                })
                .collect(),
            Dependence::Independent => {
                if self.states.len() > MAX_ENVELOPE_STATES {
                    return Err(MarkovError::Budget(format!(
                        "{} states exceed the enumeration cap {MAX_ENVELOPE_STATES}",
                        self.states.len()
                    )));
                }
                let mut supports: Vec<Vec<(f64, f64, f64)>> = Vec::new();
                let mut combos: usize = 1;
                for (s, j) in self.per_state.iter().enumerate() {
                    let mut outcomes = Vec::new();
                    for b in j.branches() {
                        let atoms = b.q.atom_list().ok_or_else(|| {
                            MarkovError::EnvelopeNotEnumerable(format!(
                                "state {} has parametric Q ({:?})",
                                self.states[s], b.q
                            ))
                        })?;
                        for (qv, qp) in atoms {
                            outcomes.push((b.m, qv, b.p * qp));
                        }
                    }
                    combos = combos.saturating_mul(outcomes.len());
                    if combos > MAX_ENVELOPE_COMBINATIONS {
                        return Err(MarkovError::Budget(format!(
                            "product support exceeds {MAX_ENVELOPE_COMBINATIONS} outcomes"
                        )));
                    }
                    supports.push(outcomes);
                }
                let mut out = Vec::with_capacity(combos);
                let mut idx = vec![0usize; supports.len()];
                loop {
                    let mut m_bar: f64 = 0.0;
                    let mut q_bar: f64 = 0.0;
                    let mut prob = 1.0;
                    for (s, &i) in idx.iter().enumerate() {
                        let (m, q, p) = supports[s][i];
                        m_bar = m_bar.max(m);
                        q_bar = q_bar.max(q.abs());
                        prob *= p;
                    }
                    out.push((m_bar, q_bar, prob));
                    let mut pos = 0;
                    loop {
                        if pos == supports.len() {
                            return EnvelopeLaw::from_weighted(out);
                        }
                        idx[pos] += 1;
                        if idx[pos] < supports[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            }
        };
        EnvelopeLaw::from_weighted(weighted)
    }

    /// Analytic witness that `E(e^{v|R_n|}) = +∞` along infinitely many `n`,
    /// for `v > v̄`: a state whose `|Q|`-abscissa lies below `v`, visited with
    /// probability one by irreducibility.
    pub fn divergence_witness(&self, v: f64) -> Result<DivergenceWitness, MarkovError> {
        let v_bar = self.v_bar();
        if !(v_bar < v) {
            return Err(MarkovError::Regime(format!(
                "v = {v} is not strictly above v̄ = {v_bar}"
            )));
        }
        let (idx, abscissa) = self
            .per_state
            .iter()
            .enumerate()
            .map(|(i, j)| {
                let a = j
                    .branches()
                    .iter()
                    .map(|b| b.q.abs_pushforward().expect("validated").abscissa())
                    .fold(ExtReal::Infinity, ExtReal::min);
                (i, a)
            })
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("comparable"))
            .expect("at least one state");
        let abscissa = abscissa.expect_finite("witness abscissa below finite v");
        Ok(DivergenceWitness {
            state: self.states[idx].clone(),
            abscissa,
            v,
            visited_with_probability_one: true,
        })
    }
}

fn require_m_strictly_below_one(state: &str, j: &JointMQ) -> Result<(), MarkovError> {
    if let Some(b) = j.branches().iter().find(|b| b.m >= 1.0) {
        return Err(MarkovError::InvalidSpec(format!(
            "state {state}: m = {} must be strictly below 1",
            b.m
        )));
    }
    Ok(())
}

fn validate_chain(
    states: &[String],
    transition: &[Vec<f64>],
    initial: &[f64],
) -> Result<(), MarkovError> {
    let n = states.len();
    if n == 0 {
        return Err(MarkovError::InvalidSpec("empty state set".into()));
    }
    for (i, s) in states.iter().enumerate() {
        if states[..i].contains(s) {
            return Err(MarkovError::InvalidSpec(format!("duplicate state label {s:?}")));
        }
    }
    if transition.len() != n {
        return Err(MarkovError::InvalidSpec(format!(
            "transition matrix has {} rows for {n} states",
            transition.len()
        )));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.len() != n {
            return Err(MarkovError::InvalidSpec(format!(
                "transition row {i} has {} entries for {n} states",
                row.len()
            )));
        }
        if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(MarkovError::InvalidSpec(format!(
                "transition row {i} has a negative or non-finite entry"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(MarkovError::InvalidSpec(format!(
                "transition row {i} sums to {sum}, expected 1"
            )));
        }
    }
    if initial.len() != n {
        return Err(MarkovError::InvalidSpec(format!(
            "initial distribution has {} entries for {n} states",
            initial.len()
        )));
    }
    if initial.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(MarkovError::InvalidSpec(
            "initial distribution has a negative or non-finite entry".into(),
        ));
    }
    let sum: f64 = initial.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(MarkovError::InvalidSpec(format!(
            "initial distribution sums to {sum}, expected 1"
        )));
    }
    if !strongly_connected(transition) {
        return Err(MarkovError::NotIrreducible);
    }
    Ok(())
}

/// Strong connectivity of the support digraph: every state reaches state 0
/// and is reached from it (forward and backward BFS).
fn strongly_connected(transition: &[Vec<f64>]) -> bool {
    let n = transition.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let edge = if forward {
                    transition[i][j] > 0.0
                } else {
                    transition[j][i] > 0.0
                };
                if edge && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Marginal `(M(x), Q(x))` law of one coordinate of the vector list.
fn marginal_of_state(vectors: &[VectorAtom], s: usize) -> Result<JointMQ, MarkovError> {
    let mut by_m: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    let mut sorted: Vec<(f64, f64, f64)> = vectors
        .iter()
        .map(|va| (va.pairs[s].0, va.pairs[s].1, va.prob))
        .collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite m"));
    for (m, q, p) in sorted {
        match by_m.last_mut() {
            Some(last) if (m - last.0).abs() <= ATOM_MERGE_TOL => last.1.push((q, p)),
            _ => by_m.push((m, vec![(q, p)])),
        }
    }
    let branches = by_m
        .into_iter()
        .map(|(m, qs)| {
            let total: f64 = qs.iter().map(|x| x.1).sum();
            let atoms = qs.into_iter().map(|(q, p)| (q, p / total)).collect();
            Ok(Branch::new(m, total, ScalarDist::atoms(atoms)?))
        })
        .collect::<Result<Vec<_>, MarkovError>>()?;
    Ok(JointMQ::new(branches)?)
}

/// The i.i.d. law of the envelope pair `(M̄, Q̄)`, as a plain instance of the
/// unmodulated recursion: every bound and certificate from the scalar theory
/// applies to it verbatim.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeLaw {
    law: JointMQ,
}

impl EnvelopeLaw {
    fn from_weighted(weighted: Vec<(f64, f64, f64)>) -> Result<Self, MarkovError> {
        let mut sorted = weighted;
        sorted.sort_by(|a, b| {
            a.0
                .partial_cmp(&b.0)
                .expect("finite")
                .then(a.1.partial_cmp(&b.1).expect("finite"))
        });
        let mut by_m: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for (m, q, p) in sorted {
            match by_m.last_mut() {
                Some(last) if (m - last.0).abs() <= ATOM_MERGE_TOL => last.1.push((q, p)),
                _ => by_m.push((m, vec![(q, p)])),
            }
        }
        let branches = by_m
            .into_iter()
            .map(|(m, qs)| {
                let total: f64 = qs.iter().map(|x| x.1).sum();
                let atoms = qs.into_iter().map(|(q, p)| (q, p / total)).collect();
                Ok(Branch::new(m, total, ScalarDist::atoms(atoms)?))
            })
            .collect::<Result<Vec<_>, MarkovError>>()?;
        let law = JointMQ::new(branches)?;
        debug_assert!(law.branches().iter().all(|b| b.m < 1.0));
        debug_assert!(law.branches().iter().all(|b| b.q.is_nonnegative()));
        Ok(EnvelopeLaw { law })
    }

    pub fn law(&self) -> &JointMQ {
        &self.law
    }
}

/// Analytic divergence witness for `v > v̄`.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceWitness {
    /// State whose `|Q(x)|`-abscissa lies below `v`.
    pub state: String,
    pub abscissa: f64,
    pub v: f64,
    /// Irreducibility makes every state recurrent, so the witness state is
    /// visited infinitely often with probability one.
    pub visited_with_probability_one: bool,
}

/// One modulated simulation request.
#[derive(Clone, Debug)]
pub struct ModulatedConfig {
    pub spec: MarkovSpec,
    pub r0: ScalarDist,
    pub horizon: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
}

/// Checkpointed output of the coupled `(X, R, R̄)` simulation.
///
/// The envelope recursion is driven by the same vector draws as the
/// modulated one, so `|R_n| ≤ R̄_n` holds pathwise; the simulator checks the
/// inequality at every step (not only at checkpoints) and counts violations,
/// which must be zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulatedRun {
    checkpoints: Vec<usize>,
    trajectories: usize,
    states: Vec<usize>,
    r: Vec<f64>,
    r_env: Vec<f64>,
    pub domination_violations: usize,
}

impl ModulatedRun {
    pub fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    pub fn state(&self, traj: usize, ckpt_idx: usize) -> usize {
        self.states[traj * self.checkpoints.len() + ckpt_idx]
    }

    pub fn r(&self, traj: usize, ckpt_idx: usize) -> f64 {
        self.r[traj * self.checkpoints.len() + ckpt_idx]
    }

    pub fn r_env(&self, traj: usize, ckpt_idx: usize) -> f64 {
        self.r_env[traj * self.checkpoints.len() + ckpt_idx]
    }
}

/// Simulates chain and recursion on separate substreams (lanes `2t` for the
/// driving vectors, `2t+1` for the chain), so the independence of `X` from
/// the `(M, Q)` draws is structural.
pub fn simulate_modulated(cfg: &ModulatedConfig) -> Result<ModulatedRun, MarkovError> {
    if cfg.trajectories == 0 {
        return Err(MarkovError::InvalidSpec("trajectories must be >= 1".into()));
    }
    if cfg.checkpoints.is_empty() || !cfg.checkpoints.windows(2).all(|w| w[0] < w[1]) {
        return Err(MarkovError::InvalidSpec(
            "checkpoints must be non-empty and strictly increasing".into(),
        ));
    }
    if *cfg.checkpoints.last().unwrap() > cfg.horizon {
        return Err(MarkovError::InvalidSpec(format!(
            "checkpoint {} beyond horizon {}",
            cfg.checkpoints.last().unwrap(),
            cfg.horizon
        )));
    }

    let rows: Vec<(Vec<usize>, Vec<f64>, Vec<f64>, usize)> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|t| run_modulated_trajectory(cfg, t as u64))
        .collect();

    let width = cfg.checkpoints.len();
    let mut states = Vec::with_capacity(rows.len() * width);
    let mut r = Vec::with_capacity(rows.len() * width);
    let mut r_env = Vec::with_capacity(rows.len() * width);
    let mut violations = 0usize;
    for (xs, rs, res, viol) in rows {
        states.extend_from_slice(&xs);
        r.extend_from_slice(&rs);
        r_env.extend_from_slice(&res);
        violations += viol;
    }
    Ok(ModulatedRun {
        checkpoints: cfg.checkpoints.clone(),
        trajectories: cfg.trajectories,
        states,
        r,
        r_env,
        domination_violations: violations,
    })
}

fn run_modulated_trajectory(
    cfg: &ModulatedConfig,
    traj: u64,
) -> (Vec<usize>, Vec<f64>, Vec<f64>, usize) {
    let spec = &cfg.spec;
    let n_states = spec.states.len();
    let mut noise = substream(cfg.seed, 2 * traj);
    let mut chain = substream(cfg.seed, 2 * traj + 1);

    let mut x = index_from_uniform(&spec.initial, chain.gen::<f64>());
    let mut r = cfg.r0.sample(noise.gen::<f64>());
    let mut r_env = r.abs();
    let mut violations = 0usize;

    let width = cfg.checkpoints.len();
    let mut xs = Vec::with_capacity(width);
    let mut rs = Vec::with_capacity(width);
    let mut res = Vec::with_capacity(width);
    let mut next = 0usize;
    if cfg.checkpoints[next] == 0 {
        xs.push(x);
        rs.push(r);
        res.push(r_env);
        next += 1;
    }

    for step in 1..=cfg.horizon {
        // Draw the full vector; the envelope needs every coordinate even
        // though the recursion only consumes the current state's.
        let (m_cur, q_cur, m_bar, q_bar) = match &spec.dependence {
            Dependence::Independent => {
                let mut m_cur = 0.0;
                let mut q_cur = 0.0;
                let mut m_bar: f64 = 0.0;
                let mut q_bar: f64 = 0.0;
                for s in 0..n_states {
                    let u_branch = noise.gen::<f64>();
                    let u_q = noise.gen::<f64>();
                    let (m, q) = spec.per_state[s].draw_with(u_branch, u_q);
                    if s == x {
                        m_cur = m;
                        q_cur = q;
                    }
                    m_bar = m_bar.max(m);
                    q_bar = q_bar.max(q.abs());
                }
                (m_cur, q_cur, m_bar, q_bar)
            }
            Dependence::JointVectors(vectors) => {
                let u = noise.gen::<f64>();
                let mut cum = 0.0;
                let mut chosen = vectors.len() - 1;
                for (i, va) in vectors.iter().enumerate() {
                    cum += va.prob;
                    if cum >= u {
                        chosen = i;
                        break;
                    }
                }
                let va = &vectors[chosen];
                let m_bar = va.pairs.iter().map(|p| p.0).fold(0.0, f64::max);
                let q_bar = va.pairs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
                (va.pairs[x].0, va.pairs[x].1, m_bar, q_bar)
            }
        };

        r = m_cur * r + q_cur;
        r_env = m_bar * r_env + q_bar;
        if r.abs() > r_env {
            violations += 1;
        }
        x = index_from_uniform(&spec.transition[x], chain.gen::<f64>());

        if next < width && cfg.checkpoints[next] == step {
            xs.push(x);
            rs.push(r);
            res.push(r_env);
            next += 1;
        }
    }
    (xs, rs, res, violations)
}

fn index_from_uniform(probs: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if cum >= u {
            return i;
        }
    }
    probs.len() - 1
}

// JSON: {"states":[...], "transition":[[...]], "initial":[...],
//        "per_state":{...}, "dependence":"independent"|{"vectors":[...]}}.
// per_state is keyed by state label and must be omitted in vectors mode
// (the marginals are derived, so no second source of truth exists).
// dependence defaults to "independent" when absent.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkovSpecWire {
    states: Vec<String>,
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    #[serde(default)]
    per_state: Option<std::collections::BTreeMap<String, JointMQ>>,
    #[serde(default)]
    dependence: Option<DependenceWire>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DependenceWire {
    Keyword(String),
    Vectors { vectors: Vec<VectorAtom> },
}

impl<'de> Deserialize<'de> for MarkovSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = MarkovSpecWire::deserialize(deserializer)?;
        let dependence = wire
            .dependence
            .unwrap_or_else(|| DependenceWire::Keyword("independent".into()));
        match dependence {
            DependenceWire::Keyword(word) if word == "independent" => {
                let map = wire.per_state.ok_or_else(|| {
                    D::Error::custom("independent dependence requires per_state")
                })?;
                let mut per_state = Vec::with_capacity(wire.states.len());
                for s in &wire.states {
                    let j = map.get(s).ok_or_else(|| {
                        D::Error::custom(format!("per_state missing entry for state {s:?}"))
                    })?;
                    per_state.push(j.clone());
                }
                if map.len() != wire.states.len() {
                    return Err(D::Error::custom("per_state has entries for unknown states"));
                }
                MarkovSpec::independent(wire.states, wire.transition, wire.initial, per_state)
                    .map_err(D::Error::custom)
            }
            DependenceWire::Keyword(word) => {
                Err(D::Error::custom(format!("unknown dependence mode {word:?}")))
            }
            DependenceWire::Vectors { vectors } => {
                if wire.per_state.is_some() {
                    return Err(D::Error::custom(
                        "per_state must be omitted when dependence.vectors is given",
                    ));
                }
                MarkovSpec::with_joint_vectors(wire.states, wire.transition, wire.initial, vectors)
                    .map_err(D::Error::custom)
            }
        }
    }
}

impl Serialize for MarkovSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("states", &self.states)?;
        map.serialize_entry("transition", &self.transition)?;
        map.serialize_entry("initial", &self.initial)?;
        match &self.dependence {
            Dependence::Independent => {
                let keyed: std::collections::BTreeMap<&str, &JointMQ> = self
                    .states
                    .iter()
                    .map(String::as_str)
                    .zip(self.per_state.iter())
                    .collect();
                map.serialize_entry("per_state", &keyed)?;
                map.serialize_entry("dependence", "independent")?;
            }
            Dependence::JointVectors(vectors) => {
                #[derive(Serialize)]
                struct V<'a> {
                    vectors: &'a [VectorAtom],
                }
                map.serialize_entry("dependence", &V { vectors })?;
            }
        }
        map.end()
    }
}
