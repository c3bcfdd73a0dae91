//! Analytic family-based error rates and alpha adjustments.
//!
//! `1 - (1 - a)^k` is evaluated as `-expm1(k * log1p(-a))` so it stays
//! accurate for tiny alphas and very large families.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_k, Result};
use crate::model::AlphaPolicy;

/// Familywise and per family error rates of one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub fwer: f64,
    pub pfer: f64,
}

/// Probability of at least one false positive among `k` independent tests
/// each run at `alpha_constituent`.
pub fn fwer_independent(alpha_constituent: f64, k: u32) -> Result<f64> {
    let alpha = check_alpha(alpha_constituent)?;
    let k = check_k(k)?;
    if k == 1 {
        return Ok(alpha);
    }
    Ok(-libm::expm1(f64::from(k) * libm::log1p(-alpha)))
}

/// Expected number of false positives among `k` tests at `alpha_constituent`.
pub fn pfer(alpha_constituent: f64, k: u32) -> Result<f64> {
    let alpha = check_alpha(alpha_constituent)?;
    let k = check_k(k)?;
    Ok(alpha * f64::from(k))
}

/// Dunn-Šidák constituent alpha: the `a` solving `1 - (1 - a)^k = alpha_joint`.
pub fn sidak_adjust(alpha_joint: f64, k: u32) -> Result<f64> {
    let alpha = check_alpha(alpha_joint)?;
    let k = check_k(k)?;
    if k == 1 {
        return Ok(alpha);
    }
    Ok(-libm::expm1(libm::log1p(-alpha) / f64::from(k)))
}

/// Bonferroni constituent alpha, `alpha_joint / k`.
pub fn bonferroni_adjust(alpha_joint: f64, k: u32) -> Result<f64> {
    let alpha = check_alpha(alpha_joint)?;
    let k = check_k(k)?;
    Ok(alpha / f64::from(k))
}

/// Per-test threshold a policy yields for a family of `k` tests.
pub fn resolve_policy(policy: &AlphaPolicy, k: u32) -> Result<f64> {
    check_k(k)?;
    match *policy {
        AlphaPolicy::Unadjusted { alpha_individual } => check_alpha(alpha_individual),
        AlphaPolicy::Specified {
            alpha_constituent, ..
        } => check_alpha(alpha_constituent),
        AlphaPolicy::Sidak { alpha_joint } => sidak_adjust(alpha_joint, k),
        AlphaPolicy::Bonferroni { alpha_joint } => bonferroni_adjust(alpha_joint, k),
    }
}

pub fn rates_for_family(policy: &AlphaPolicy, k: u32) -> Result<RatePair> {
    let alpha = resolve_policy(policy, k)?;
    Ok(RatePair {
        fwer: fwer_independent(alpha, k)?,
        pfer: pfer(alpha, k)?,
    })
}
