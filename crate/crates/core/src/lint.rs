//! Diagnoses mismatches between how a plan corrects alpha and which
//! inferences it actually reports.
//!
//! A correction is only needed for a joint (union-intersection) inference.
//! A family that adjusts its threshold but then only reports individual
//! inferences pays for the adjustment in power and gets nothing back:
//! [`LintCode::RedundantCorrection`]. The reverse, a joint claim made at an
//! unadjusted threshold, is [`LintCode::MissingAdjustment`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::decision::evaluate_family;
use crate::error::{check_alpha, Error, Result};
use crate::model::{
    validate_plan, AlphaPolicy, ClaimTarget, DecisionBasis, Family, FamilyDecision, Outcome,
    TestingPlan, DEFAULT_NOMINAL_ALPHA,
};
use crate::rates::{fwer_independent, pfer, resolve_policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LintCode {
    RedundantCorrection,
    MissingAdjustment,
    ConfusionI,
    ConfusionIi,
    ConfusionIii,
    HypothesisFreeFwer,
    /// Joint claim and individual claims at the adjusted alpha side by side.
    MixedClaims,
}

impl LintCode {
    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::RedundantCorrection => "REDUNDANT_CORRECTION",
            LintCode::MissingAdjustment => "MISSING_ADJUSTMENT",
            LintCode::ConfusionI => "CONFUSION_I",
            LintCode::ConfusionIi => "CONFUSION_II",
            LintCode::ConfusionIii => "CONFUSION_III",
            LintCode::HypothesisFreeFwer => "HYPOTHESIS_FREE_FWER",
            LintCode::MixedClaims => "MIXED_CLAIMS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Info,
}

/// What a finding is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Family(String),
    /// Index into `reported_inferences`.
    Claim(usize),
    /// Index into `analyses`.
    Analysis(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Count(u64),
    Number(f64),
    Ids(Vec<String>),
}

impl Quantity {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Quantity::Number(x) => Some(x),
            Quantity::Count(n) => Some(n as f64),
            Quantity::Ids(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LintFinding {
    pub code: LintCode,
    pub severity: Severity,
    pub subject: Subject,
    pub explanation: String,
    pub quantities: BTreeMap<String, Quantity>,
}

impl LintFinding {
    fn new(code: LintCode, subject: Subject, explanation: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Warning,
            subject,
            explanation: explanation.into(),
            quantities: BTreeMap::new(),
        }
    }

    fn info(mut self) -> Self {
        self.severity = Severity::Info;
        self
    }

    fn with(mut self, key: &str, q: Quantity) -> Self {
        self.quantities.insert(key.into(), q);
        self
    }

    fn num(self, key: &str, x: f64) -> Self {
        self.with(key, Quantity::Number(x))
    }

    pub fn quantity(&self, key: &str) -> Option<f64> {
        self.quantities.get(key).and_then(Quantity::as_f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateType {
    Fwer,
    Pfer,
}

/// What a write-up asserts about per-inference error rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertedInflation {
    #[default]
    None,
    /// Each individual Type I error rate is said to be inflated.
    IndividualRate,
    /// Each inference's family-based rate is said to be inflated.
    FamilyRate,
}

/// A structured extract of how an analysis counted its tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisDescription {
    pub n_inferences: u32,
    pub tests_per_inference: u32,
    pub k_used_for_correction: u32,
    pub rate_type: RateType,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub asserted_inflation: AssertedInflation,
    /// The write-up reports a family rate over the whole collection of
    /// separate inferences.
    #[serde(default)]
    pub reports_collection_rate: bool,
}

fn default_alpha() -> f64 {
    DEFAULT_NOMINAL_ALPHA
}

impl AnalysisDescription {
    pub fn new(
        n_inferences: u32,
        tests_per_inference: u32,
        k_used: u32,
        rate_type: RateType,
    ) -> Self {
        Self {
            n_inferences,
            tests_per_inference,
            k_used_for_correction: k_used,
            rate_type,
            alpha: DEFAULT_NOMINAL_ALPHA,
            asserted_inflation: AssertedInflation::None,
            reports_collection_rate: false,
        }
    }
}

/// Recognizes the error-rate confusions behind redundant corrections.
///
/// Only analyses with one test per inference can be confused this way; an
/// analysis that really runs several tests per inference is a legitimate
/// union-intersection setting.
pub fn classify_confusion(
    analysis: &AnalysisDescription,
    index: usize,
) -> Result<Option<LintFinding>> {
    for (name, v) in [
        ("n_inferences", analysis.n_inferences),
        ("tests_per_inference", analysis.tests_per_inference),
        ("k_used_for_correction", analysis.k_used_for_correction),
    ] {
        if v == 0 {
            return Err(Error::ZeroCount(name));
        }
    }
    let alpha = check_alpha(analysis.alpha)?;
    let n = analysis.n_inferences;
    let subject = Subject::Analysis(index);

    if analysis.tests_per_inference != 1 {
        return Ok(None);
    }

    if n > 1 && analysis.k_used_for_correction == n {
        let finding = LintFinding::new(
            LintCode::ConfusionIii,
            subject,
            format!(
                "k was set to the number of separate inferences ({n}) instead of the number \
                 of tests per inference (1); the resulting family rate refers to no single \
                 hypothesis, and each inference keeps its own rate of {alpha}"
            ),
        )
        .num("hypothesis_free_fwer", fwer_independent(alpha, n)?)
        .num("hypothesis_free_pfer", pfer(alpha, n)?)
        .num("per_inference_rate", alpha)
        .with("k_used_for_correction", Quantity::Count(n.into()));
        return Ok(Some(finding));
    }

    match analysis.asserted_inflation {
        AssertedInflation::IndividualRate => {
            return Ok(Some(
                LintFinding::new(
                    LintCode::ConfusionI,
                    subject,
                    format!(
                        "running several individual tests does not raise the Type I error \
                         rate of any one of them; each stays at {alpha}"
                    ),
                )
                .num("per_inference_rate", alpha)
                .with("n_inferences", Quantity::Count(n.into())),
            ));
        }
        AssertedInflation::FamilyRate => {
            return Ok(Some(
                LintFinding::new(
                    LintCode::ConfusionIi,
                    subject,
                    "each inference rests on one test, so k = 1 and its familywise and per \
                     family error rates both equal its own alpha",
                )
                .num("per_inference_fwer", fwer_independent(alpha, 1)?)
                .num("per_inference_pfer", pfer(alpha, 1)?),
            ));
        }
        AssertedInflation::None => {}
    }

    if n > 1 && analysis.reports_collection_rate {
        let rate = match analysis.rate_type {
            RateType::Fwer => fwer_independent(alpha, n)?,
            RateType::Pfer => pfer(alpha, n)?,
        };
        return Ok(Some(
            LintFinding::new(
                LintCode::HypothesisFreeFwer,
                subject,
                "a family rate over separate inferences does not describe the error rate of \
                 any inference actually made",
            )
            .info()
            .num("hypothesis_free_fwer", fwer_independent(alpha, n)?)
            .num("collection_rate", rate),
        ));
    }

    Ok(None)
}

/// Whether a family's policy actually lowers the threshold for a joint test.
fn is_adjusting(family: &Family, nominal: f64) -> bool {
    match family.policy {
        AlphaPolicy::Sidak { .. } | AlphaPolicy::Bonferroni { .. } => family.adjustment_k() >= 2,
        AlphaPolicy::Specified {
            alpha_constituent,
            derived_from_correction,
        } => derived_from_correction && alpha_constituent < nominal,
        AlphaPolicy::Unadjusted { .. } => false,
    }
}

fn same_alpha(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.max(1e-12)
}

/// Lints a plan. Findings for families come first, ordered by family id,
/// followed by findings for `analyses` in declaration order.
pub fn lint_plan(plan: &TestingPlan) -> Result<Vec<LintFinding>> {
    let errors = validate_plan(plan);
    if !errors.is_empty() {
        return Err(Error::InvalidPlan(errors));
    }
    let nominal = plan.nominal_alpha;

    let mut families: Vec<&Family> = plan.families.iter().collect();
    families.sort_by(|a, b| a.id.cmp(&b.id));

    let mut findings = Vec::new();
    for family in families {
        let k = family.members.len() as u32;
        let alpha_c = resolve_policy(&family.policy, family.adjustment_k())?;
        let joint_claims: Vec<_> = plan
            .reported_inferences
            .iter()
            .filter(|c| matches!(&c.target, ClaimTarget::Family(id) if *id == family.id))
            .collect();
        let individual_claims: Vec<_> = plan
            .reported_inferences
            .iter()
            .filter(
                |c| matches!(&c.target, ClaimTarget::Hypothesis(id) if family.members.contains(id)),
            )
            .collect();

        if is_adjusting(family, nominal) {
            if joint_claims.is_empty() && !individual_claims.is_empty() {
                findings.push(redundant_correction(family, plan, alpha_c, k)?);
            } else if !joint_claims.is_empty()
                && individual_claims
                    .iter()
                    .any(|c| same_alpha(c.claimed_alpha, alpha_c))
            {
                findings.push(
                    LintFinding::new(
                        LintCode::MixedClaims,
                        Subject::Family(family.id.clone()),
                        "the family reports a joint inference and also individual inferences \
                         at the adjusted alpha; only the joint inference needs the adjustment",
                    )
                    .info()
                    .num("alpha_constituent", alpha_c)
                    .num("nominal_alpha", nominal),
                );
            }
        }

        if let AlphaPolicy::Unadjusted { alpha_individual } = family.policy {
            if k >= 2 && !joint_claims.is_empty() {
                let fwer = fwer_independent(alpha_individual, k)?;
                findings.push(
                    LintFinding::new(
                        LintCode::MissingAdjustment,
                        Subject::Family(family.id.clone()),
                        format!(
                            "a joint inference over {k} tests at an unadjusted {alpha_individual} \
                             has a familywise error rate of {fwer:.6} under independence"
                        ),
                    )
                    .num("alpha_constituent", alpha_individual)
                    .num("fwer", fwer)
                    .num("pfer", pfer(alpha_individual, k)?)
                    .with("k", Quantity::Count(k.into())),
                );
            }
        }
    }

    for (i, analysis) in plan.analyses.iter().enumerate() {
        findings.extend(classify_confusion(analysis, i)?);
    }
    Ok(findings)
}

fn redundant_correction(
    family: &Family,
    plan: &TestingPlan,
    alpha_c: f64,
    k: u32,
) -> Result<LintFinding> {
    let nominal = plan.nominal_alpha;
    let mut lost = Vec::new();
    let mut unresolved = Vec::new();
    let mut missing = Vec::new();
    for id in &family.members {
        let Some(e) = plan.hypothesis(id).and_then(|h| h.evidence()) else {
            missing.push(id.clone());
            continue;
        };
        match (e.against(alpha_c), e.against(nominal)) {
            (Outcome::FailToReject, Outcome::Reject) => lost.push(id.clone()),
            (Outcome::Reject, _) | (Outcome::FailToReject, Outcome::FailToReject) => {}
            _ => unresolved.push(id.clone()),
        }
    }
    let mut finding = LintFinding::new(
        LintCode::RedundantCorrection,
        Subject::Family(family.id.clone()),
        format!(
            "alpha was adjusted to {alpha_c:.6} for a joint test of {k} hypotheses, but only \
             individual inferences are reported; those need no adjustment and could use {nominal}"
        ),
    )
    .num("alpha_constituent", alpha_c)
    .num("nominal_alpha", nominal)
    .with("power_cost", Quantity::Count(lost.len() as u64))
    .with("power_cost_members", Quantity::Ids(lost));
    if !unresolved.is_empty() {
        finding = finding.with("power_cost_unresolved", Quantity::Ids(unresolved));
    }
    if !missing.is_empty() {
        finding = finding.with("members_without_p_value", Quantity::Ids(missing));
    }
    Ok(finding)
}

/// A family's decisions under all three bases, side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReclassificationReport {
    pub family_id: String,
    pub decisions: BTreeMap<DecisionBasis, FamilyDecision>,
    pub narrative: String,
}

impl ReclassificationReport {
    pub fn support(&self, basis: DecisionBasis) -> Option<crate::model::Support> {
        self.decisions.get(&basis).map(|d| d.support)
    }
}

pub fn reclassify(family: &Family, plan: &TestingPlan) -> Result<ReclassificationReport> {
    let mut decisions = BTreeMap::new();
    for basis in DecisionBasis::ALL {
        decisions.insert(basis, evaluate_family(family, plan, basis)?);
    }
    let joint = &decisions[&DecisionBasis::JointUnionIntersection];
    let indiv = &decisions[&DecisionBasis::IndividualAtNominal];
    let hybrid = &decisions[&DecisionBasis::HybridAsReported];

    let mut narrative = format!(
        "joint test at {:.6}: {}; individual tests at {}: {}; hybrid reading at {:.6}: {}.",
        joint.resolved_alpha_constituent,
        joint.support,
        indiv.resolved_alpha_constituent,
        indiv.support,
        hybrid.resolved_alpha_constituent,
        hybrid.support,
    );
    let lost = indiv
        .count(Outcome::Reject)
        .saturating_sub(hybrid.count(Outcome::Reject));
    if lost > 0 {
        narrative.push_str(&format!(
            " The hybrid reading gives up {lost} rejection(s) that individual testing supports."
        ));
    }
    if hybrid.support != joint.support && hybrid.support != indiv.support {
        narrative.push_str(" Neither consistent reading agrees with the hybrid label.");
    }

    Ok(ReclassificationReport {
        family_id: family.id.clone(),
        decisions,
        narrative,
    })
}
