//! Inference-aware multiple testing.
//!
//! A family of tests needs an adjusted alpha only when it is used for a
//! single joint decision (a union-intersection test of "H1 or H2 or ...").
//! Separate inferences about separate hypotheses keep their own unadjusted
//! alpha no matter how many of them are made. This crate models testing
//! plans in those terms, computes the error rates and adjustments, makes
//! decisions under the joint, individual and hybrid readings, lints plans for
//! redundant corrections, and simulates the error rates it claims.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod decision;
pub mod error;
pub mod lint;
pub mod model;
pub mod normal;
pub mod rates;
pub mod simulation;

pub use decision::{
    decide_hybrid, decide_individual, decide_union_intersection, evaluate_family, summarize_support,
};
pub use error::{Error, Result};
pub use lint::{
    classify_confusion, lint_plan, reclassify, AnalysisDescription, LintCode, LintFinding,
    ReclassificationReport,
};
pub use model::{
    validate_plan, AlphaPolicy, DecisionBasis, Family, FamilyDecision, Hypothesis, InferenceClaim,
    InferenceMode, Outcome, Support, TestingPlan, Verdict,
};
pub use normal::{analytic_power, normal_cdf, normal_quantile, p_value_two_sided};
pub use rates::{
    bonferroni_adjust, fwer_independent, pfer, rates_for_family, resolve_policy, sidak_adjust,
    RatePair,
};
pub use simulation::{draw_family, simulate_rates, SimulationConfig, SimulationReport};
