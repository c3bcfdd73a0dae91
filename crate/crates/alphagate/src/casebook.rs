//! Published and constructed examples, shipped as ordinary plan documents.

use std::collections::BTreeMap;

use alphagate_core::{
    lint_plan, reclassify, DecisionBasis, LintCode, LintFinding, ReclassificationReport, Support,
    TestingPlan,
};
use serde::{Deserialize, Serialize};

use crate::plan::{parse_valid_plan, PlanError};

const MANIFEST: &str = include_str!("../fixtures/cases.json");

const PLANS: [(&str, &str); 4] = [
    (
        "gender_example",
        include_str!("../fixtures/gender_example.plan.json"),
    ),
    (
        "prem_2021_h4",
        include_str!("../fixtures/prem_2021_h4.plan.json"),
    ),
    (
        "clemens_2023_h1b",
        include_str!("../fixtures/clemens_2023_h1b.plan.json"),
    ),
    (
        "janssen_2023_exp2",
        include_str!("../fixtures/janssen_2023_exp2.plan.json"),
    ),
];

pub const CASE_IDS: [&str; 4] = [
    "gender_example",
    "prem_2021_h4",
    "clemens_2023_h1b",
    "janssen_2023_exp2",
];

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("unknown case id {0:?} (known: {known})", known = CASE_IDS.join(", "))]
    Unknown(String),
    #[error("fixture {id} is broken: {source}")]
    Fixture {
        id: String,
        #[source]
        source: PlanError,
    },
    #[error(transparent)]
    Core(#[from] alphagate_core::Error),
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    case_id: String,
    provenance: String,
    expected: BTreeMap<DecisionBasis, Support>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseFixture {
    pub case_id: String,
    pub plan: TestingPlan,
    pub expected: BTreeMap<DecisionBasis, Support>,
    pub provenance: String,
}

pub fn plan_text(case_id: &str) -> Option<&'static str> {
    PLANS.iter().find(|(id, _)| *id == case_id).map(|(_, t)| *t)
}

pub fn load_case(case_id: &str) -> Result<CaseFixture, CaseError> {
    let text = plan_text(case_id).ok_or_else(|| CaseError::Unknown(case_id.into()))?;
    let plan = parse_valid_plan(text).map_err(|source| CaseError::Fixture {
        id: case_id.into(),
        source,
    })?;
    let manifest: Vec<ManifestEntry> =
        serde_json::from_str(MANIFEST).expect("embedded case manifest is valid JSON");
    let entry = manifest
        .into_iter()
        .find(|e| e.case_id == case_id)
        .ok_or_else(|| CaseError::Unknown(case_id.into()))?;
    Ok(CaseFixture {
        case_id: entry.case_id,
        plan,
        expected: entry.expected,
        provenance: entry.provenance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseRun {
    pub case_id: String,
    pub provenance: String,
    pub expected: BTreeMap<DecisionBasis, Support>,
    pub report: ReclassificationReport,
    pub findings: Vec<LintFinding>,
    pub matches_expected: bool,
}

impl CaseRun {
    pub fn has_finding(&self, code: LintCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

/// Reclassifies the fixture's family and lints its plan.
pub fn run_case(case_id: &str) -> Result<CaseRun, CaseError> {
    let fixture = load_case(case_id)?;
    let family = &fixture.plan.families[0];
    let report = reclassify(family, &fixture.plan)?;
    let findings = lint_plan(&fixture.plan)?;
    let observed: BTreeMap<_, _> = report
        .decisions
        .iter()
        .map(|(basis, d)| (*basis, d.support))
        .collect();
    Ok(CaseRun {
        case_id: fixture.case_id,
        provenance: fixture.provenance,
        matches_expected: observed == fixture.expected,
        expected: fixture.expected,
        report,
        findings,
    })
}
