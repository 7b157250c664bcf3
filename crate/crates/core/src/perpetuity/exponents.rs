//! Critical exponents of the exponential-moment dichotomy.
//!
//! For the joint law of `(M, Q)` define
//!
//! - `v_Q`: abscissa of convergence of `E(e^{vQ})`,
//! - `v_0 = sup{v ≥ 0 : E(e^{vQ} M) < 1}`,
//! - `v_1 = sup{v ≥ 0 : E(e^{vQ} 1_{M=1}) < 1}`,
//! - `v_GG = v_Q ∧ v_0` and `v_c = v_Q ∧ v_1`.
//!
//! Below `v_GG` a one-step contraction argument already bounds
//! `sup_n E(e^{vR_n})`; the sharp threshold is `v_c`: uniformly bounded
//! exponential moments strictly below it, divergence strictly above.
//!
//! Both suprema are found by monotone bisection. The target maps
//! `v ↦ E(e^{vQ} M)` and `v ↦ E(e^{vQ} 1_{M=1})` are convex with value `≤ 1`
//! at `v = 0`, so `{v ≥ 0 : f(v) ≥ 1}` is upward closed and bisection is
//! sound even for signed `Q`.

use super::JointMQ;
use crate::dist::ScalarDist;
use crate::ext::ExtReal;
use serde::Serialize;

/// Absolute bisection tolerance. Tighter than the 1e-12 the exponents are
/// reported at, so the reported values carry the full advertised accuracy.
const BISECT_TOL: f64 = 1e-13;

/// The five critical exponents, as extended nonnegative reals.
///
/// Invariants (checked property-style in tests): `v_GG = v_Q ∧ v_0`,
/// `v_c = v_Q ∧ v_1`, `v_0 ≤ v_1`, hence `v_GG ≤ v_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponents {
    pub v_q: ExtReal,
    pub v_0: ExtReal,
    pub v_gg: ExtReal,
    pub v_1: ExtReal,
    pub v_c: ExtReal,
}

impl JointMQ {
    /// Computes all five exponents.
    pub fn exponents(&self) -> Exponents {
        let v_q = self.v_q();

        // v_0: the conditional abscissa is over branches with positive
        // m-weight (zero-weight branches never enter E(e^{vQ}M)).
        let cond_abs_0 = self
            .branches()
            .iter()
            .filter(|b| b.m > 0.0)
            .map(|b| b.q.abscissa())
            .fold(ExtReal::Infinity, ExtReal::min);
        let diverges_0 = self
            .branches()
            .iter()
            .any(|b| b.m > 0.0 && has_positive_atom(&b.q));
        let v_0 = sup_below_one(|v| self.ewm(v), cond_abs_0, diverges_0);

        let v_1 = match self.m1_branch() {
            None => ExtReal::Infinity,
            Some(b) => {
                let q = b.q.clone();
                sup_below_one(|v| self.ewq_on_m1(v), q.abscissa(), has_positive_atom(&q))
            }
        };

        Exponents {
            v_q,
            v_0,
            v_gg: v_q.min(v_0),
            v_1,
            v_c: v_q.min(v_1),
        }
    }
}

/// Whether the transform of an atomic law grows without bound as `v → ∞`
/// (some atom strictly above 0). Parametric families have a finite abscissa
/// and are handled through that path instead.
fn has_positive_atom(d: &ScalarDist) -> bool {
    match d.max_support() {
        Some(hi) => hi > 0.0,
        None => false,
    }
}

/// `sup{v ≥ 0 : f(v) < 1}` for a convex increasing-at-the-relevant-scale
/// transform functional `f` with `f` jumping to `+∞` past `domain_end`.
///
/// Conventions:
/// - `f(0) ≥ 1` gives 0 (the supremum of an empty set of positive `v`).
/// - If `f` stays below 1 on its whole finite domain and only the jump to
///   `+∞` at the abscissa ends it, the abscissa itself is returned.
/// - If `domain_end` is infinite and `f` never diverges (`diverges_at_infinity`
///   false), the supremum is `+∞`.
fn sup_below_one(
    f: impl Fn(f64) -> ExtReal,
    domain_end: ExtReal,
    diverges_at_infinity: bool,
) -> ExtReal {
    let ge1 = |v: f64| match f(v) {
        ExtReal::Infinity => true,
        ExtReal::Finite(x) => x >= 1.0,
    };
    if ge1(0.0) {
        return ExtReal::finite(0.0);
    }
    let (mut lo, mut hi) = match domain_end {
        ExtReal::Finite(a) => {
            if !ge1(a) {
                // Finite and still below 1 at the boundary: the sup is
                // attained at the transform's jump discontinuity.
                return ExtReal::finite(a);
            }
            (0.0, a)
        }
        ExtReal::Infinity => {
            if !diverges_at_infinity {
                return ExtReal::Infinity;
            }
            let mut probe = 1e-6;
            let mut lo = 0.0;
            while !ge1(probe) {
                lo = probe;
                probe *= 2.0;
                assert!(probe.is_finite(), "divergent transform never crossed 1");
            }
            (lo, probe)
        }
    };
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval is down to adjacent floats; the absolute tolerance is
            // not representable at this magnitude.
            break;
        }
        if ge1(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ExtReal::finite(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::super::test_instances::{i1, i2};
    use super::super::{Branch, JointMQ};
    use super::*;
    use proptest::prelude::*;

    fn assert_exp(e: ExtReal, want: f64, tol: f64) {
        let got = e.expect_finite("expected finite exponent");
        assert!((got - want).abs() <= tol, "got {got}, want {want}");
    }

    #[test]
    fn exponents_on_two_point_instance() {
        let e = i1().exponents();
        let ln2 = std::f64::consts::LN_2;
        assert_eq!(e.v_q, ExtReal::Infinity);
        assert_exp(e.v_0, (4.0f64 / 3.0).ln(), 1e-12);
        assert_exp(e.v_1, ln2, 1e-12);
        assert_exp(e.v_gg, (4.0f64 / 3.0).ln(), 1e-12);
        assert_exp(e.v_c, ln2, 1e-12);
    }

    #[test]
    fn exponents_on_exponential_instance() {
        let e = i2().exponents();
        assert_eq!(e.v_q, ExtReal::finite(1.0));
        assert_exp(e.v_0, 0.5, 1e-12);
        assert_eq!(e.v_1, ExtReal::Infinity);
        assert_exp(e.v_gg, 0.5, 1e-12);
        assert_eq!(e.v_c, ExtReal::finite(1.0));
    }

    #[test]
    fn degenerate_instance_has_all_infinite_exponents() {
        let j = JointMQ::new(vec![Branch::new(0.0, 1.0, ScalarDist::point(0.0))]).unwrap();
        let e = j.exponents();
        assert_eq!(e.v_q, ExtReal::Infinity);
        assert_eq!(e.v_0, ExtReal::Infinity);
        assert_eq!(e.v_1, ExtReal::Infinity);
        assert_eq!(e.v_gg, ExtReal::Infinity);
        assert_eq!(e.v_c, ExtReal::Infinity);
    }

    #[test]
    fn all_mass_at_m1_with_q_at_zero_keeps_v1_infinite() {
        // The "trivial case": Q-mass on {M=1} sits at 0, so
        // E(e^{vQ} 1_{M=1}) = p < 1 for every v.
        let j = JointMQ::new(vec![
            Branch::new(0.5, 0.5, ScalarDist::point(1.0)),
            Branch::new(1.0, 0.5, ScalarDist::point(0.0)),
        ])
        .unwrap();
        let e = j.exponents();
        assert_eq!(e.v_1, ExtReal::Infinity);
        assert!(e.v_0.is_finite());
    }

    #[test]
    fn m_identically_one_gives_zero_exponents() {
        let j = JointMQ::new(vec![Branch::new(1.0, 1.0, ScalarDist::point(1.0))]).unwrap();
        let e = j.exponents();
        assert_eq!(e.v_0, ExtReal::finite(0.0));
        assert_eq!(e.v_1, ExtReal::finite(0.0));
        assert_eq!(e.v_c, ExtReal::finite(0.0));
    }

    #[test]
    fn geometric_branch_exponents() {
        // Single branch m = 1, Q ~ Geometric(p=0.5, step=1): the transform
        // E(e^{vQ}) = 0.5/(1 - 0.5 e^v) crosses 1/p_branch... with p_branch=0.5
        // branch weight: f(v) = 0.5 * 0.5/(1-0.5e^v) = 1 at e^v = 1.5.
        let j = JointMQ::new(vec![
            Branch::new(0.0, 0.5, ScalarDist::point(0.0)),
            Branch::new(1.0, 0.5, ScalarDist::geometric(0.5, 1.0).unwrap()),
        ])
        .unwrap();
        let e = j.exponents();
        assert_exp(e.v_1, 1.5f64.ln(), 1e-12);
        assert_exp(e.v_c, 1.5f64.ln(), 1e-12);
    }

    #[test]
    fn boundary_case_returns_conditional_abscissa() {
        // Direct check of the sup convention on a synthetic functional that
        // stays below 1 on its closed finite domain and only then jumps.
        let f = |v: f64| {
            if v <= 2.0 {
                ExtReal::finite(0.25 * (1.0 + v / 2.0))
            } else {
                ExtReal::Infinity
            }
        };
        assert_eq!(sup_below_one(f, ExtReal::finite(2.0), false), ExtReal::finite(2.0));
    }

    fn arb_branch_q() -> impl Strategy<Value = ScalarDist> {
        prop_oneof![
            proptest::collection::vec((0.0f64..5.0, 0.1f64..1.0), 1..4).prop_map(|mut pairs| {
                let t: f64 = pairs.iter().map(|p| p.1).sum();
                for p in &mut pairs {
                    p.1 /= t;
                }
                ScalarDist::atoms(pairs).unwrap()
            }),
            (0.2f64..4.0).prop_map(|r| ScalarDist::exponential(r).unwrap()),
            ((0.1f64..0.9), (0.2f64..2.0)).prop_map(|(p, s)| ScalarDist::geometric(p, s).unwrap()),
            (0.0f64..5.0).prop_map(ScalarDist::point),
        ]
    }

    prop_compose! {
        pub(crate) fn arb_instance()(
            ms in proptest::collection::vec(0.0f64..=1.0, 1..4),
            ws in proptest::collection::vec(0.05f64..1.0, 4),
            qs in proptest::collection::vec(arb_branch_q(), 4),
            pin_m1 in proptest::bool::ANY,
        ) -> JointMQ {
            let mut ms = ms;
            if pin_m1 {
                ms.push(1.0);
            }
            ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ms.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
            let k = ms.len();
            let total: f64 = ws[..k].iter().sum();
            let branches = ms
                .into_iter()
                .enumerate()
                .map(|(i, m)| Branch::new(m, ws[i] / total, qs[i].clone()))
                .collect();
            JointMQ::new(branches).unwrap()
        }
    }

    proptest! {
        // v_0 ≤ v_1 (E(e^{vQ}M) dominates E(e^{vQ}1_{M=1}) for M ∈ [0,1]),
        // hence v_GG ≤ v_c; and the wedges hold by construction.
        #[test]
        fn exponent_ordering(j in arb_instance()) {
            let e = j.exponents();
            prop_assert!(e.v_0 <= e.v_1, "v_0 {:?} > v_1 {:?}", e.v_0, e.v_1);
            prop_assert!(e.v_gg <= e.v_c);
            prop_assert_eq!(e.v_gg, e.v_q.min(e.v_0));
            prop_assert_eq!(e.v_c, e.v_q.min(e.v_1));
        }

        // The defining property of v_0: strictly below it the weighted
        // transform is < 1, strictly above it is ≥ 1 (or infinite).
        #[test]
        fn v0_is_the_crossing_point(j in arb_instance(), t in 0.05f64..0.95) {
            let e = j.exponents();
            if let ExtReal::Finite(v0) = e.v_0 {
                if v0 > 1e-9 {
                    let below = j.ewm(t * v0 * (1.0 - 1e-9));
                    prop_assert!(below < 1.0, "ewm below v_0 should be < 1, got {below:?}");
                }
                let above = j.ewm(v0 + 1e-6 + 0.5 * v0 * 1e-6);
                prop_assert!(above >= 1.0, "ewm above v_0 should be >= 1, got {above:?}");
            }
        }

        // Theorem-2 regime forces strictly positive thresholds.
        #[test]
        fn regime_implies_positive_exponents(j in arb_instance()) {
            if j.theorem2_regime() {
                let e = j.exponents();
                prop_assert!(e.v_0 > 0.0);
                prop_assert!(e.v_1 > 0.0);
            }
        }
    }
}
