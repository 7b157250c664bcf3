//! Numerical laboratory for the affine stochastic recursion
//! `R_{n+1} = M_n R_n + Q_n` with `0 ≤ M ≤ 1`.
//!
//! The crate computes, exactly where closed forms exist and by seeded
//! simulation otherwise:
//!
//! - critical exponents (`v_Q`, `v_0`, `v_GG`, `v_1`, `v_c`) of the
//!   exponential-moment dichotomy for the fixed point of `R =ᴸ MR + Q`
//!   ([`perpetuity`]);
//! - exact Laplace-transform propagation `L_n(v) = E(e^{vR_n})` over the
//!   evaluation-point tree generated by the multiplicative support of `M`,
//!   with constructive boundedness and divergence certificates
//!   ([`perpetuity`]);
//! - the exponentially weighted survival distance `d_ρ` and the T-operator
//!   contraction check ([`metric`]);
//! - reproducibly parallel Monte Carlo with counter-based substreams
//!   ([`montecarlo`]);
//! - the Markov-modulated recursion `R_{n+1} = M_n(X_n) R_n + Q_n(X_n)` with
//!   its dominating envelope coupling ([`markov`]).

pub mod dist;
pub mod ext;
pub mod markov;
pub mod metric;
pub mod montecarlo;
pub mod perpetuity;
pub mod rng;

pub use dist::{DistError, ScalarDist};
pub use ext::ExtReal;
pub use perpetuity::{Branch, Exponents, JointMQ, PerpetuityError, PropagationTable};
