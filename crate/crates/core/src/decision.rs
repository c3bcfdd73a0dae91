//! Turning p-values into decisions under the three decision bases.
//!
//! All comparisons are strict: a p-value equal to the threshold fails to
//! reject.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{check_alpha, check_p, Error, Result};
use crate::lint::{LintCode, LintFinding, Quantity, Severity, Subject};
use crate::model::{
    DecisionBasis, Evidence, Family, FamilyDecision, MemberOutcome, Outcome, Support, TestingPlan,
    Verdict,
};
use crate::rates::resolve_policy;

const JOINT_NONE_NOTE: &str = "the intersection null was not rejected; reported as support \
     'none', though 'inconclusive' is an equally defensible reading";

fn check_family(p_values: &[f64], alpha: f64) -> Result<()> {
    if p_values.is_empty() {
        return Err(Error::EmptyFamily);
    }
    check_alpha(alpha)?;
    p_values.iter().try_for_each(|&p| check_p(p).map(drop))
}

/// Union-intersection test: reject the intersection null iff some
/// constituent p-value is below `alpha_constituent`. The result is a single
/// joint decision and says nothing about which member was significant.
pub fn decide_union_intersection(p_values: &[f64], alpha_constituent: f64) -> Result<Verdict> {
    check_family(p_values, alpha_constituent)?;
    let min = p_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Verdict::from_comparison(min, alpha_constituent))
}

/// One test, one hypothesis, no adjustment.
pub fn decide_individual(p_value: f64, alpha_individual: f64) -> Result<Verdict> {
    check_p(p_value)?;
    check_alpha(alpha_individual)?;
    Ok(Verdict::from_comparison(p_value, alpha_individual))
}

/// Per-member decisions at an adjusted threshold. This reproduces the
/// inconsistent practice of adjusting for a joint test and then reading
/// members individually; callers should surface it as such.
pub fn decide_hybrid(p_values: &[f64], alpha_constituent: f64) -> Result<Vec<Verdict>> {
    check_family(p_values, alpha_constituent)?;
    Ok(p_values
        .iter()
        .map(|&p| Verdict::from_comparison(p, alpha_constituent))
        .collect())
}

/// Joint outcome over possibly banded evidence.
pub fn union_intersection_outcome(evidence: &[Evidence], alpha: f64) -> Outcome {
    let outcomes = evidence.iter().map(|e| e.against(alpha));
    let mut undecided = false;
    for o in outcomes {
        match o {
            Outcome::Reject => return Outcome::Reject,
            Outcome::Indeterminate => undecided = true,
            Outcome::FailToReject => {}
        }
    }
    if undecided {
        Outcome::Indeterminate
    } else {
        Outcome::FailToReject
    }
}

fn label(outcomes: impl Iterator<Item = Verdict> + Clone) -> Support {
    let all = |v| outcomes.clone().all(|o| o == v);
    if all(Verdict::Reject) {
        Support::Full
    } else if all(Verdict::FailToReject) {
        Support::None
    } else {
        Support::Partial
    }
}

/// Full / partial / none summary of member outcomes. Indeterminate members
/// only make the label indeterminate when resolving them could change it.
pub fn summarize_support(outcomes: &[Outcome]) -> Support {
    if outcomes.is_empty() {
        return Support::Indeterminate;
    }
    let resolve = |fill: Verdict| {
        outcomes.iter().map(move |o| match o {
            Outcome::Reject => Verdict::Reject,
            Outcome::FailToReject => Verdict::FailToReject,
            Outcome::Indeterminate => fill,
        })
    };
    // Mixed resolutions can only land between these two extremes.
    let high = label(resolve(Verdict::Reject));
    let low = label(resolve(Verdict::FailToReject));
    if high == low {
        high
    } else {
        Support::Indeterminate
    }
}

fn member_evidence(family: &Family, plan: &TestingPlan) -> Result<Vec<(String, Evidence)>> {
    family
        .members
        .iter()
        .map(|id| {
            plan.hypothesis(id)
                .and_then(|h| h.evidence())
                .map(|e| (id.clone(), e))
                .ok_or_else(|| Error::MissingPValue(id.clone()))
        })
        .collect()
}

/// Evaluates one family of a validated plan under `basis`.
pub fn evaluate_family(
    family: &Family,
    plan: &TestingPlan,
    basis: DecisionBasis,
) -> Result<FamilyDecision> {
    let evidence = member_evidence(family, plan)?;
    let alpha_c = resolve_policy(&family.policy, family.adjustment_k())?;
    let nominal = check_alpha(plan.nominal_alpha)?;

    let per_member = |alpha: f64| -> Vec<MemberOutcome> {
        evidence
            .iter()
            .map(|(id, e)| MemberOutcome {
                id: id.clone(),
                outcome: e.against(alpha),
            })
            .collect()
    };
    let support_of = |members: &[MemberOutcome]| {
        let outcomes: Vec<Outcome> = members.iter().map(|m| m.outcome).collect();
        summarize_support(&outcomes)
    };

    let mut decision = FamilyDecision {
        family_id: family.id.clone(),
        basis,
        resolved_alpha_constituent: alpha_c,
        per_member_outcome: Vec::new(),
        joint_outcome: None,
        support: Support::Indeterminate,
        diagnostics: Vec::new(),
        notes: Vec::new(),
    };

    match basis {
        DecisionBasis::JointUnionIntersection => {
            let all: Vec<Evidence> = evidence.iter().map(|(_, e)| *e).collect();
            let joint = union_intersection_outcome(&all, alpha_c);
            decision.joint_outcome = Some(joint);
            decision.support = match joint {
                Outcome::Reject => Support::Full,
                Outcome::FailToReject => {
                    decision.notes.push(JOINT_NONE_NOTE.into());
                    Support::None
                }
                Outcome::Indeterminate => Support::Indeterminate,
            };
        }
        DecisionBasis::IndividualAtNominal => {
            decision.resolved_alpha_constituent = nominal;
            decision.per_member_outcome = per_member(nominal);
            decision.support = support_of(&decision.per_member_outcome);
        }
        DecisionBasis::HybridAsReported => {
            decision.per_member_outcome = per_member(alpha_c);
            decision.support = support_of(&decision.per_member_outcome);
            decision
                .diagnostics
                .push(hybrid_diagnostic(family, alpha_c, nominal));
        }
    }
    Ok(decision)
}

fn hybrid_diagnostic(family: &Family, alpha_c: f64, nominal: f64) -> LintFinding {
    let mut quantities = BTreeMap::new();
    quantities.insert("alpha_constituent".into(), Quantity::Number(alpha_c));
    quantities.insert("nominal_alpha".into(), Quantity::Number(nominal));
    LintFinding {
        code: LintCode::RedundantCorrection,
        severity: Severity::Warning,
        subject: Subject::Family(family.id.clone()),
        explanation: "hybrid decisions apply the joint-test threshold to individual \
                      inferences; individual inferences need no adjustment and the joint \
                      decision needs only one significant member"
            .into(),
        quantities,
    }
}
