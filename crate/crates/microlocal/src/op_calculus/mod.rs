//! Operator calculus on the dyadic quantizations: composition expansions
//! with scale-decaying remainders, commutators of cutoff multipliers with
//! rough coefficients, lower bounds for nonnegative symbols, and the
//! paraproduct rewriting of pointwise nonlinearities.
//!
//! Everything here measures quantitative statements: each expansion or
//! bound comes with the probe machinery ([`probes`]) to confirm the decay
//! rate it claims, and the reports carry the measured per-scale data so the
//! rates can be re-fit downstream.

pub mod commutator;
pub mod compose;
pub mod garding;
pub mod paralin;
pub mod probes;

pub use commutator::{
    commutator_bound_factors, multiplier_commutator, CommutatorBoundFactors, CommutatorExpansion,
    CommutatorTerm,
};
pub use compose::{compose_expand, CompositionReport, CompositionTerm};
pub use garding::{garding_check, theta_star, worst_rayleigh_quotient, GardingReport};
pub use paralin::{paralinearize_residual, ParalinearizationReport, PointMap, SystemMap};
pub use probes::{
    dense_operator_matrix, dense_operator_norm, fit_slope, hermitian_part_min_eig, inner_product,
    pointwise_mul, probe_corpus, probe_operator_norm,
};
