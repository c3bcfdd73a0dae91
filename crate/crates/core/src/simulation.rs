//! Seeded simulation of a family of two-sided z-tests.
//!
//! Replication `i` draws its statistics from a ChaCha8 stream keyed by
//! `(seed, i)`, so any split of the replication range across workers sees
//! exactly the same numbers. Tallies are integer counts; merging them is
//! associative and commutative, and the report is computed from the merged
//! integers only.
//!
//! The data model is `Z_j = δ_j + sqrt(ρ) S + sqrt(1 - ρ) E_j` with `S` and
//! `E_j` independent standard normals. `ρ = 0` gives independent tests;
//! `ρ > 0` is an equicorrelated single-factor extension.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::model::AlphaPolicy;
use crate::normal::{analytic_power, p_value_two_sided};
use crate::rates::{fwer_independent, pfer, resolve_policy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub k: u32,
    /// Standardized mean shift of each test; zero means the null is true.
    pub effect_sizes: Vec<f64>,
    pub correlation: f64,
    pub policy: AlphaPolicy,
    pub nominal_alpha: f64,
    pub replications: u64,
    pub seed: u64,
}

impl SimulationConfig {
    /// All nulls true, independent tests.
    pub fn global_null(k: u32, policy: AlphaPolicy, replications: u64, seed: u64) -> Self {
        Self {
            k,
            effect_sizes: vec![0.0; k as usize],
            correlation: 0.0,
            policy,
            nominal_alpha: crate::model::DEFAULT_NOMINAL_ALPHA,
            replications,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.effect_sizes.len() != self.k as usize {
            return bad(format!(
                "expected {} effect sizes, got {}",
                self.k,
                self.effect_sizes.len()
            ));
        }
        if let Some(d) = self.effect_sizes.iter().find(|d| !d.is_finite()) {
            return bad(format!("effect size {d} is not finite"));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return bad(format!(
                "correlation must be in [0,1), got {}",
                self.correlation
            ));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        check_alpha(self.nominal_alpha)?;
        resolve_policy(&self.policy, self.k)?;
        Ok(())
    }

    pub fn alpha_resolved(&self) -> Result<f64> {
        resolve_policy(&self.policy, self.k)
    }

    fn null_count(&self) -> u32 {
        self.effect_sizes.iter().filter(|&&d| d == 0.0).count() as u32
    }
}

/// Generator for replication `index`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_into(config: &SimulationConfig, index: u64, out: &mut [f64]) {
    let mut rng = replication_rng(config.seed, index);
    let shared_weight = libm::sqrt(config.correlation);
    let own_weight = libm::sqrt(1.0 - config.correlation);
    let shared: f64 = StandardNormal.sample(&mut rng);
    for (p, &delta) in out.iter_mut().zip(&config.effect_sizes) {
        let own: f64 = StandardNormal.sample(&mut rng);
        *p = p_value_two_sided(delta + shared_weight * shared + own_weight * own);
    }
}

/// The `k` two-sided p-values of replication `index`.
pub fn draw_family(config: &SimulationConfig, index: u64) -> Vec<f64> {
    let mut out = vec![0.0; config.k as usize];
    draw_into(config, index, &mut out);
    out
}

/// Integer counts accumulated over a set of replications.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub replications: u64,
    /// Replications with at least one true-null rejection.
    pub familywise_hits: u64,
    /// Sum over replications of the number of true-null rejections.
    pub null_rejections: u64,
    /// Sum of squared per-replication true-null rejection counts.
    pub null_rejections_sq: u64,
    /// Rejections per test at the resolved alpha.
    pub per_test: Vec<u64>,
    /// Rejections per test at the nominal alpha.
    pub per_test_nominal: Vec<u64>,
}

impl Tally {
    pub fn empty(k: u32) -> Self {
        Self {
            replications: 0,
            familywise_hits: 0,
            null_rejections: 0,
            null_rejections_sq: 0,
            per_test: vec![0; k as usize],
            per_test_nominal: vec![0; k as usize],
        }
    }

    pub fn merge(mut self, other: &Tally) -> Self {
        self.replications += other.replications;
        self.familywise_hits += other.familywise_hits;
        self.null_rejections += other.null_rejections;
        self.null_rejections_sq += other.null_rejections_sq;
        for (a, b) in self.per_test.iter_mut().zip(&other.per_test) {
            *a += b;
        }
        for (a, b) in self
            .per_test_nominal
            .iter_mut()
            .zip(&other.per_test_nominal)
        {
            *a += b;
        }
        self
    }
}

/// Runs replications `range` of a validated config.
pub fn tally_range(config: &SimulationConfig, range: Range<u64>) -> Result<Tally> {
    let alpha = config.alpha_resolved()?;
    let nominal = config.nominal_alpha;
    let mut tally = Tally::empty(config.k);
    let mut ps = vec![0.0; config.k as usize];
    for index in range {
        draw_into(config, index, &mut ps);
        let mut nulls_rejected = 0u64;
        for (j, (&p, &delta)) in ps.iter().zip(&config.effect_sizes).enumerate() {
            let reject = p < alpha;
            if reject {
                tally.per_test[j] += 1;
                if delta == 0.0 {
                    nulls_rejected += 1;
                }
            }
            if p < nominal {
                tally.per_test_nominal[j] += 1;
            }
        }
        tally.replications += 1;
        tally.null_rejections += nulls_rejected;
        tally.null_rejections_sq += nulls_rejected * nulls_rejected;
        if nulls_rejected > 0 {
            tally.familywise_hits += 1;
        }
    }
    Ok(tally)
}

/// A Monte Carlo estimate with its standard error and, where one exists, the
/// closed-form value it should match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub se: f64,
    pub analytic: Option<f64>,
}

impl Estimate {
    fn proportion(hits: u64, n: u64, analytic: Option<f64>) -> Self {
        let r = hits as f64 / n as f64;
        Self {
            estimate: r,
            se: libm::sqrt(r * (1.0 - r) / n as f64),
            analytic,
        }
    }

    /// `|estimate - analytic|` in units of the standard error.
    pub fn z_score(&self) -> Option<f64> {
        let a = self.analytic?;
        let diff = (self.estimate - a).abs();
        if self.se == 0.0 {
            return Some(if diff == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Some(diff / self.se)
    }

    pub fn within(&self, n_se: f64) -> bool {
        self.z_score().is_some_and(|z| z <= n_se)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// The null is true; the rate is a Type I error rate.
    TypeIRate,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRate {
    pub index: u32,
    pub effect_size: f64,
    pub kind: TestKind,
    /// Rejection rate at the resolved alpha.
    pub rate: Estimate,
    /// Rejection rate at the nominal alpha.
    pub rate_at_nominal: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub seed: u64,
    pub alpha_resolved: f64,
    pub dependence_model: String,
    pub null_tests: u32,
    /// Absent when no test has a true null.
    pub empirical_fwer: Option<Estimate>,
    pub empirical_pfer: Option<Estimate>,
    pub per_test: Vec<TestRate>,
}

/// Turns a merged tally into a report.
pub fn build_report(config: &SimulationConfig, tally: &Tally) -> Result<SimulationReport> {
    config.validate()?;
    if tally.replications != config.replications || tally.per_test.len() != config.k as usize {
        return Err(Error::InvalidConfig(format!(
            "tally covers {} replications of {} tests, config has {} of {}",
            tally.replications,
            tally.per_test.len(),
            config.replications,
            config.k
        )));
    }
    let alpha = config.alpha_resolved()?;
    let n = tally.replications;
    let m0 = config.null_count();
    let independent = config.correlation == 0.0;

    let (empirical_fwer, empirical_pfer) = if m0 == 0 {
        (None, None)
    } else {
        let fwer_analytic = if independent {
            Some(fwer_independent(alpha, m0)?)
        } else {
            None
        };
        let fwer = Estimate::proportion(tally.familywise_hits, n, fwer_analytic);

        let mean = tally.null_rejections as f64 / n as f64;
        let var = if n > 1 {
            let sum = tally.null_rejections as f64;
            let sum_sq = tally.null_rejections_sq as f64;
            ((sum_sq - sum * sum / n as f64) / (n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        // expectation is linear, so this holds under any dependence
        let pfer = Estimate {
            estimate: mean,
            se: libm::sqrt(var / n as f64),
            analytic: Some(pfer(alpha, m0)?),
        };
        (Some(fwer), Some(pfer))
    };

    let per_test = config
        .effect_sizes
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            Ok(TestRate {
                index: j as u32,
                effect_size: delta,
                kind: if delta == 0.0 {
                    TestKind::TypeIRate
                } else {
                    TestKind::Power
                },
                rate: Estimate::proportion(
                    tally.per_test[j],
                    n,
                    Some(analytic_power(delta, alpha)?),
                ),
                rate_at_nominal: Estimate::proportion(
                    tally.per_test_nominal[j],
                    n,
                    Some(analytic_power(delta, config.nominal_alpha)?),
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SimulationReport {
        config: config.clone(),
        seed: config.seed,
        alpha_resolved: alpha,
        dependence_model: if independent {
            "independent".into()
        } else {
            format!(
                "equicorrelated single factor, rho = {} (extension; analytic FWER assumes independence)",
                config.correlation
            )
        },
        null_tests: m0,
        empirical_fwer,
        empirical_pfer,
        per_test,
    })
}

/// Single-threaded simulation over all replications.
pub fn simulate_rates(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let tally = tally_range(config, 0..config.replications)?;
    build_report(config, &tally)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNADJUSTED: AlphaPolicy = AlphaPolicy::Unadjusted {
        alpha_individual: 0.05,
    };

    #[test]
    fn draws_are_keyed_by_seed_and_index() {
        let cfg = SimulationConfig::global_null(4, UNADJUSTED, 10, 42);
        assert_eq!(draw_family(&cfg, 7), draw_family(&cfg, 7));
        assert_ne!(draw_family(&cfg, 7), draw_family(&cfg, 8));
        let other = SimulationConfig {
            seed: 43,
            ..cfg.clone()
        };
        assert_ne!(draw_family(&cfg, 7), draw_family(&other, 7));
        assert!(draw_family(&cfg, 7).iter().all(|&p| p > 0.0 && p <= 1.0));
    }

    #[test]
    fn split_ranges_merge_to_the_whole() {
        let cfg = SimulationConfig::global_null(3, UNADJUSTED, 1000, 9);
        let whole = tally_range(&cfg, 0..1000).unwrap();
        let parts = [0..1, 1..400, 400..401, 401..1000]
            .into_iter()
            .rev()
            .map(|r| tally_range(&cfg, r).unwrap())
            .fold(Tally::empty(3), |acc, t| acc.merge(&t));
        assert_eq!(whole, parts);
    }

    #[test]
    fn config_validation() {
        let ok = SimulationConfig::global_null(2, UNADJUSTED, 10, 1);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.correlation = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.effect_sizes.push(0.0);
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.replications = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.policy = AlphaPolicy::Sidak { alpha_joint: 1.5 };
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.effect_sizes[0] = f64::NAN;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_test_rate_equals_fwer() {
        let cfg = SimulationConfig::global_null(1, UNADJUSTED, 20_000, 3);
        let r = simulate_rates(&cfg).unwrap();
        let fwer = r.empirical_fwer.unwrap();
        assert_eq!(fwer.estimate, r.per_test[0].rate.estimate);
        assert!(fwer.within(3.0), "{fwer:?}");
    }

    #[test]
    fn report_without_nulls() {
        let mut cfg = SimulationConfig::global_null(2, UNADJUSTED, 2000, 5);
        cfg.effect_sizes = vec![1.0, 2.0];
        let r = simulate_rates(&cfg).unwrap();
        assert_eq!(r.null_tests, 0);
        assert!(r.empirical_fwer.is_none());
        assert!(r.per_test.iter().all(|t| t.kind == TestKind::Power));
    }

    #[test]
    fn dependence_drops_analytic_fwer() {
        let mut cfg = SimulationConfig::global_null(3, UNADJUSTED, 100, 5);
        cfg.correlation = 0.5;
        let r = simulate_rates(&cfg).unwrap();
        assert!(r.empirical_fwer.unwrap().analytic.is_none());
        assert!(r.empirical_pfer.unwrap().analytic.is_some());
        assert!(r.dependence_model.contains("extension"));
    }
}
