//! JSON plan documents.

use std::fs;
use std::path::Path;

use alphagate_core::model::ValidationError;
use alphagate_core::{validate_plan, TestingPlan};

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed plan: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid plan:\n{}", render_errors(.0))]
    Invalid(Vec<ValidationError>),
}

fn render_errors(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses a plan without validating it. Unknown keys are rejected.
pub fn parse_plan(text: &str) -> Result<TestingPlan, PlanError> {
    Ok(serde_json::from_str(text)?)
}

/// Parses and validates.
pub fn parse_valid_plan(text: &str) -> Result<TestingPlan, PlanError> {
    let plan = parse_plan(text)?;
    let errors = validate_plan(&plan);
    if errors.is_empty() {
        Ok(plan)
    } else {
        Err(PlanError::Invalid(errors))
    }
}

pub fn emit_plan(plan: &TestingPlan) -> String {
    serde_json::to_string_pretty(plan).expect("plan serialization is infallible")
}

pub fn read_plan_file(path: &Path) -> Result<String, PlanError> {
    fs::read_to_string(path).map_err(|source| PlanError::Io {
        path: path.display().to_string(),
        source,
    })
}
