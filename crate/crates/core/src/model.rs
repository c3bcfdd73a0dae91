//! Domain vocabulary: hypotheses, families, alpha policies, claims and decisions.
//!
//! Every type here is a plain value. A [`TestingPlan`] is only meaningful once
//! [`validate_plan`] returns no errors; downstream code relies on that for
//! referential integrity and value ranges.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::lint::{AnalysisDescription, LintFinding};

/// Plan documents currently understood by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Conventional unadjusted alpha used when a plan does not set one.
pub const DEFAULT_NOMINAL_ALPHA: f64 = 0.05;

/// Identifiers are case-sensitive, non-empty and at most this many characters.
pub const MAX_ID_LEN: usize = 64;

/// Interval report of a p-value, `lower <= p < upper`.
///
/// Used when a source only states that a result fell below or between
/// thresholds (for example "p < .001").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PBand {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypothesis {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_band: Option<PBand>,
}

impl Hypothesis {
    pub fn with_p(id: &str, label: &str, p: f64) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            p_value: Some(p),
            p_band: None,
        }
    }

    pub fn with_band(id: &str, label: &str, lower: f64, upper: f64) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            p_value: None,
            p_band: Some(PBand { lower, upper }),
        }
    }

    /// The reported test result, point value preferred.
    pub fn evidence(&self) -> Option<Evidence> {
        match (self.p_value, self.p_band) {
            (Some(p), _) => Some(Evidence::Point(p)),
            (None, Some(band)) => Some(Evidence::Band(band)),
            (None, None) => None,
        }
    }
}

/// What is known about one p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evidence {
    Point(f64),
    Band(PBand),
}

impl From<f64> for Evidence {
    fn from(p: f64) -> Self {
        Evidence::Point(p)
    }
}

impl Evidence {
    /// Strict `p < alpha` comparison. A band that straddles `alpha` cannot be
    /// resolved and yields [`Outcome::Indeterminate`].
    pub fn against(&self, alpha: f64) -> Outcome {
        match *self {
            Evidence::Point(p) => Verdict::from_comparison(p, alpha).into(),
            // every p in [lower, upper) is < upper <= alpha
            Evidence::Band(b) if b.upper <= alpha => Outcome::Reject,
            Evidence::Band(b) if b.lower >= alpha => Outcome::FailToReject,
            Evidence::Band(_) => Outcome::Indeterminate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMode {
    Individual,
    UnionIntersection,
}

/// Source of a family's per-test threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaPolicy {
    Unadjusted {
        alpha_individual: f64,
    },
    Sidak {
        alpha_joint: f64,
    },
    Bonferroni {
        alpha_joint: f64,
    },
    /// A stringent threshold chosen directly. `derived_from_correction` marks
    /// one that was really obtained by dividing down a joint alpha.
    Specified {
        alpha_constituent: f64,
        #[serde(default, skip_serializing_if = "is_false")]
        derived_from_correction: bool,
    },
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl AlphaPolicy {
    pub fn alpha(&self) -> f64 {
        match *self {
            AlphaPolicy::Unadjusted { alpha_individual } => alpha_individual,
            AlphaPolicy::Sidak { alpha_joint } | AlphaPolicy::Bonferroni { alpha_joint } => {
                alpha_joint
            }
            AlphaPolicy::Specified {
                alpha_constituent, ..
            } => alpha_constituent,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlphaPolicy::Unadjusted { .. } => "unadjusted",
            AlphaPolicy::Sidak { .. } => "sidak",
            AlphaPolicy::Bonferroni { .. } => "bonferroni",
            AlphaPolicy::Specified { .. } => "specified",
        }
    }
}

impl fmt::Display for AlphaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.alpha())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub id: String,
    pub members: Vec<String>,
    pub mode: InferenceMode,
    pub policy: AlphaPolicy,
}

impl Family {
    /// Number of tests the policy adjusts for. An individual-mode family
    /// makes one inference per member, so each inference has k = 1.
    pub fn adjustment_k(&self) -> u32 {
        match self.mode {
            InferenceMode::Individual => 1,
            InferenceMode::UnionIntersection => self.members.len() as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimTarget {
    Hypothesis(String),
    Family(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Reject,
    FailToReject,
}

impl Verdict {
    pub(crate) fn from_comparison(p: f64, alpha: f64) -> Self {
        if p < alpha {
            Verdict::Reject
        } else {
            Verdict::FailToReject
        }
    }
}

/// A published inference: what was targeted, at which alpha, with which result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceClaim {
    pub target: ClaimTarget,
    pub claimed_alpha: f64,
    pub claimed_outcome: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestingPlan {
    pub schema_version: u32,
    #[serde(default = "default_nominal_alpha")]
    pub nominal_alpha: f64,
    pub hypotheses: Vec<Hypothesis>,
    pub families: Vec<Family>,
    #[serde(default)]
    pub reported_inferences: Vec<InferenceClaim>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analyses: Vec<AnalysisDescription>,
}

fn default_nominal_alpha() -> f64 {
    DEFAULT_NOMINAL_ALPHA
}

impl TestingPlan {
    pub fn hypothesis(&self, id: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.id == id)
    }

    pub fn family(&self, id: &str) -> Option<&Family> {
        self.families.iter().find(|f| f.id == id)
    }

    /// Family containing hypothesis `id`, if any.
    pub fn family_of(&self, id: &str) -> Option<&Family> {
        self.families
            .iter()
            .find(|f| f.members.iter().any(|m| m == id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Reject,
    FailToReject,
    Indeterminate,
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Reject => Outcome::Reject,
            Verdict::FailToReject => Outcome::FailToReject,
        }
    }
}

/// Summary label for a multi-part hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Full,
    Partial,
    None,
    Indeterminate,
}

impl Support {
    /// Position in None < Partial < Full. Indeterminate has no rank.
    pub fn rank(self) -> Option<u8> {
        match self {
            Support::None => Some(0),
            Support::Partial => Some(1),
            Support::Full => Some(2),
            Support::Indeterminate => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Support::Full => "full",
            Support::Partial => "partial",
            Support::None => "none",
            Support::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a family's p-values are turned into decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionBasis {
    /// One decision about the intersection null at the adjusted alpha.
    JointUnionIntersection,
    /// One decision per member at the plan's nominal alpha.
    IndividualAtNominal,
    /// Per-member decisions at the adjusted alpha, as often published.
    HybridAsReported,
}

impl DecisionBasis {
    pub const ALL: [DecisionBasis; 3] = [
        DecisionBasis::JointUnionIntersection,
        DecisionBasis::IndividualAtNominal,
        DecisionBasis::HybridAsReported,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DecisionBasis::JointUnionIntersection => "joint",
            DecisionBasis::IndividualAtNominal => "individual",
            DecisionBasis::HybridAsReported => "hybrid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberOutcome {
    pub id: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDecision {
    pub family_id: String,
    pub basis: DecisionBasis,
    /// Threshold the decisions were made against.
    pub resolved_alpha_constituent: f64,
    pub per_member_outcome: Vec<MemberOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_outcome: Option<Outcome>,
    pub support: Support,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<LintFinding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl FamilyDecision {
    pub fn outcome_of(&self, id: &str) -> Option<Outcome> {
        self.per_member_outcome
            .iter()
            .find(|m| m.id == id)
            .map(|m| m.outcome)
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.per_member_outcome
            .iter()
            .filter(|m| m.outcome == outcome)
            .count()
    }
}

/// One broken rule, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Collector(Vec<ValidationError>);

impl Collector {
    fn push(&mut self, path: String, message: impl Into<String>) {
        self.0.push(ValidationError {
            path,
            message: message.into(),
        });
    }

    fn id(&mut self, path: String, id: &str) {
        if id.is_empty() {
            self.push(path, "identifier must not be empty");
        } else if id.chars().count() > MAX_ID_LEN {
            self.push(
                path,
                format!("identifier longer than {MAX_ID_LEN} characters"),
            );
        }
    }

    fn alpha(&mut self, path: String, alpha: f64) {
        if !(alpha > 0.0 && alpha < 1.0) {
            self.push(path, format!("alpha must be in (0,1), got {alpha}"));
        }
    }
}

/// Checks every structural and range invariant of a plan. An empty result
/// means the plan is valid.
pub fn validate_plan(plan: &TestingPlan) -> Vec<ValidationError> {
    let mut c = Collector(Vec::new());

    if plan.schema_version != SCHEMA_VERSION {
        c.push(
            "schema_version".into(),
            format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                plan.schema_version
            ),
        );
    }
    c.alpha("nominal_alpha".into(), plan.nominal_alpha);

    let mut hypothesis_ids = BTreeSet::new();
    for (i, h) in plan.hypotheses.iter().enumerate() {
        let at = |field: &str| format!("hypotheses[{i}].{field}");
        c.id(at("id"), &h.id);
        if !hypothesis_ids.insert(h.id.as_str()) {
            c.push(at("id"), format!("duplicate hypothesis id {}", h.id));
        }
        if let Some(p) = h.p_value {
            if !(p > 0.0 && p <= 1.0) {
                c.push(at("p_value"), "p_value must be in (0,1]");
            }
        }
        if let Some(b) = h.p_band {
            if !(0.0 <= b.lower && b.lower < b.upper && b.upper <= 1.0) {
                c.push(at("p_band"), "p_band must satisfy 0 <= lower < upper <= 1");
            }
        }
        if h.p_value.is_some() && h.p_band.is_some() {
            c.push(at("p_band"), "p_value and p_band are mutually exclusive");
        }
    }

    let mut family_ids = BTreeSet::new();
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for (i, f) in plan.families.iter().enumerate() {
        let at = |field: &str| format!("families[{i}].{field}");
        c.id(at("id"), &f.id);
        if !family_ids.insert(f.id.as_str()) {
            c.push(at("id"), format!("duplicate family id {}", f.id));
        }
        if f.members.is_empty() {
            c.push(at("members"), "family must have at least one member");
        }
        let mut seen = BTreeSet::new();
        for (j, m) in f.members.iter().enumerate() {
            let path = format!("families[{i}].members[{j}]");
            if !hypothesis_ids.contains(m.as_str()) {
                c.push(path, format!("unresolved member {m}"));
                continue;
            }
            if !seen.insert(m.as_str()) {
                c.push(path, format!("duplicate member {m}"));
                continue;
            }
            if let Some(prev) = owner.insert(m.as_str(), f.id.as_str()) {
                c.push(
                    path,
                    format!("hypothesis {m} already belongs to family {prev}"),
                );
            }
        }
        let policy_path = match f.policy {
            AlphaPolicy::Unadjusted { .. } => "policy.alpha_individual",
            AlphaPolicy::Sidak { .. } | AlphaPolicy::Bonferroni { .. } => "policy.alpha_joint",
            AlphaPolicy::Specified { .. } => "policy.alpha_constituent",
        };
        c.alpha(at(policy_path), f.policy.alpha());
    }

    for (i, claim) in plan.reported_inferences.iter().enumerate() {
        let at = |field: &str| format!("reported_inferences[{i}].{field}");
        match &claim.target {
            ClaimTarget::Hypothesis(id) if !hypothesis_ids.contains(id.as_str()) => {
                c.push(at("target"), format!("unresolved hypothesis {id}"));
            }
            ClaimTarget::Family(id) if !family_ids.contains(id.as_str()) => {
                c.push(at("target"), format!("unresolved family {id}"));
            }
            _ => {}
        }
        c.alpha(at("claimed_alpha"), claim.claimed_alpha);
    }

    for (i, a) in plan.analyses.iter().enumerate() {
        let at = |field: &str| format!("analyses[{i}].{field}");
        for (name, v) in [
            ("n_inferences", a.n_inferences),
            ("tests_per_inference", a.tests_per_inference),
            ("k_used_for_correction", a.k_used_for_correction),
        ] {
            if v == 0 {
                c.push(at(name), format!("{name} must be at least 1"));
            }
        }
        c.alpha(at("alpha"), a.alpha);
    }

    c.0
}
