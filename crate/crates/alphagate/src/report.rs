//! Output envelopes and renderers: JSON, markdown and CSV.

use std::fmt::Write as _;

use alphagate_core::lint::{Quantity, Subject};
use alphagate_core::simulation::{Estimate, TestKind};
use alphagate_core::{
    FamilyDecision, LintFinding, Outcome, ReclassificationReport, SimulationReport,
};
use serde::Serialize;

use crate::casebook::CaseRun;

pub const ADJUST_SCHEMA: &str = "alphagate.adjust/v1";
pub const DECIDE_SCHEMA: &str = "alphagate.decide/v1";
pub const LINT_SCHEMA: &str = "alphagate.lint/v1";
pub const SIMULATE_SCHEMA: &str = "alphagate.simulate/v1";
pub const CASE_SCHEMA: &str = "alphagate.case/v1";

/// Every JSON document carries a `schema` tag ahead of its body.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn to_json<T: Serialize>(schema: &'static str, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { schema, body })
        .expect("report serialization is infallible");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustReport {
    pub method: &'static str,
    pub k: u32,
    pub alpha_joint: f64,
    pub alpha_constituent: f64,
    pub fwer: f64,
    pub pfer: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecideReport {
    pub nominal_alpha: f64,
    pub decisions: Vec<FamilyDecision>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LintReport {
    pub findings: Vec<LintFinding>,
}

/// Six significant digits, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), sig6)
}

fn outcome(o: Outcome) -> &'static str {
    match o {
        Outcome::Reject => "reject",
        Outcome::FailToReject => "fail to reject",
        Outcome::Indeterminate => "indeterminate",
    }
}

fn subject(s: &Subject) -> String {
    match s {
        Subject::Family(id) => format!("family {id}"),
        Subject::Claim(i) => format!("reported_inferences[{i}]"),
        Subject::Analysis(i) => format!("analyses[{i}]"),
    }
}

fn quantity(q: &Quantity) -> String {
    match q {
        Quantity::Count(n) => n.to_string(),
        Quantity::Number(x) => sig6(*x),
        Quantity::Ids(ids) => ids.join(", "),
    }
}

pub fn adjust_markdown(r: &AdjustReport) -> String {
    format!(
        "| method | k | alpha_joint | alpha_constituent | fwer | pfer |\n\
         |---|---|---|---|---|---|\n\
         | {} | {} | {} | {} | {} | {} |\n",
        r.method,
        r.k,
        sig6(r.alpha_joint),
        sig6(r.alpha_constituent),
        sig6(r.fwer),
        sig6(r.pfer)
    )
}

pub fn adjust_csv(r: &AdjustReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "k",
        "alpha_joint",
        "alpha_constituent",
        "fwer",
        "pfer",
    ])
    .and_then(|_| {
        w.write_record([
            r.method.to_string(),
            r.k.to_string(),
            r.alpha_joint.to_string(),
            r.alpha_constituent.to_string(),
            r.fwer.to_string(),
            r.pfer.to_string(),
        ])
    })
    .expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

fn decision_markdown(out: &mut String, d: &FamilyDecision) {
    let _ = writeln!(
        out,
        "### {} / {}\n\nalpha: {}  \nsupport: {}",
        d.family_id,
        d.basis.as_str(),
        sig6(d.resolved_alpha_constituent),
        d.support
    );
    if let Some(j) = d.joint_outcome {
        let _ = writeln!(out, "joint outcome: {}", outcome(j));
    }
    if !d.per_member_outcome.is_empty() {
        out.push_str("\n| member | outcome |\n|---|---|\n");
        for m in &d.per_member_outcome {
            let _ = writeln!(out, "| {} | {} |", m.id, outcome(m.outcome));
        }
    }
    for n in &d.notes {
        let _ = writeln!(out, "\nnote: {n}");
    }
    for f in &d.diagnostics {
        let _ = writeln!(out, "\ndiagnostic: {} ({})", f.code.as_str(), f.explanation);
    }
    out.push('\n');
}

pub fn decide_markdown(r: &DecideReport) -> String {
    let mut out = format!(
        "## Decisions\n\nnominal alpha: {}\n\n",
        sig6(r.nominal_alpha)
    );
    for d in &r.decisions {
        decision_markdown(&mut out, d);
    }
    out
}

fn findings_markdown(out: &mut String, findings: &[LintFinding]) {
    if findings.is_empty() {
        out.push_str("No findings.\n");
        return;
    }
    for f in findings {
        let severity = match f.severity {
            alphagate_core::lint::Severity::Warning => "warning",
            alphagate_core::lint::Severity::Info => "info",
        };
        let _ = writeln!(
            out,
            "- **{}** ({severity}, {}): {}",
            f.code.as_str(),
            subject(&f.subject),
            f.explanation
        );
        for (k, q) in &f.quantities {
            let _ = writeln!(out, "  - {k}: {}", quantity(q));
        }
    }
}

pub fn lint_markdown(r: &LintReport) -> String {
    let mut out = String::from("## Findings\n\n");
    findings_markdown(&mut out, &r.findings);
    out
}

fn reclassification_markdown(out: &mut String, r: &ReclassificationReport) {
    let _ = writeln!(out, "| basis | alpha | support |\n|---|---|---|");
    for d in r.decisions.values() {
        let _ = writeln!(
            out,
            "| {} | {} | {} |",
            d.basis.as_str(),
            sig6(d.resolved_alpha_constituent),
            d.support
        );
    }
    let _ = writeln!(out, "\n{}\n", r.narrative);
    for d in r.decisions.values() {
        decision_markdown(out, d);
    }
}

pub fn case_markdown(run: &CaseRun) -> String {
    let mut out = format!(
        "# Case {}\n\n{}\n\n## Family {}\n\n",
        run.case_id, run.provenance, run.report.family_id
    );
    reclassification_markdown(&mut out, &run.report);
    out.push_str("## Findings\n\n");
    findings_markdown(&mut out, &run.findings);
    let _ = writeln!(out, "\nmatches expected: {}", run.matches_expected);
    out
}

fn estimate_cell(e: &Estimate) -> String {
    format!("{} ± {}", sig6(e.estimate), sig6(e.se))
}

pub fn simulate_markdown(r: &SimulationReport) -> String {
    let c = &r.config;
    let mut out = format!(
        "## Simulation\n\nk: {}  \npolicy: {}  \nalpha resolved: {}  \nnominal alpha: {}  \n\
         dependence: {}  \nreplications: {}  \nseed: {}\n\n",
        c.k,
        c.policy,
        sig6(r.alpha_resolved),
        sig6(c.nominal_alpha),
        r.dependence_model,
        c.replications,
        r.seed
    );
    out.push_str("| metric | estimate ± se | analytic |\n|---|---|---|\n");
    for (name, e) in [("fwer", &r.empirical_fwer), ("pfer", &r.empirical_pfer)] {
        if let Some(e) = e {
            let _ = writeln!(
                out,
                "| {name} | {} | {} |",
                estimate_cell(e),
                opt(e.analytic)
            );
        }
    }
    for t in &r.per_test {
        let name = metric_name(t.kind);
        let _ = writeln!(
            out,
            "| {name}[{}] | {} | {} |",
            t.index,
            estimate_cell(&t.rate),
            opt(t.rate.analytic)
        );
        let _ = writeln!(
            out,
            "| {name}_at_nominal[{}] | {} | {} |",
            t.index,
            estimate_cell(&t.rate_at_nominal),
            opt(t.rate_at_nominal.analytic)
        );
    }
    out
}

fn metric_name(kind: TestKind) -> &'static str {
    match kind {
        TestKind::TypeIRate => "type_i_rate",
        TestKind::Power => "power",
    }
}

pub fn simulate_csv(r: &SimulationReport) -> String {
    let c = &r.config;
    let mut rows: Vec<(String, &Estimate)> = Vec::new();
    if let Some(e) = &r.empirical_fwer {
        rows.push(("fwer".into(), e));
    }
    if let Some(e) = &r.empirical_pfer {
        rows.push(("pfer".into(), e));
    }
    for t in &r.per_test {
        let name = metric_name(t.kind);
        rows.push((format!("{name}[{}]", t.index), &t.rate));
        rows.push((
            format!("{name}_at_nominal[{}]", t.index),
            &t.rate_at_nominal,
        ));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "k",
        "rho",
        "policy",
        "alpha_resolved",
        "metric",
        "estimate",
        "se",
        "analytic",
        "replications",
        "seed",
    ];
    w.write_record(header).expect("writing to memory");
    for (metric, e) in rows {
        w.write_record([
            c.k.to_string(),
            c.correlation.to_string(),
            c.policy.to_string(),
            r.alpha_resolved.to_string(),
            metric,
            e.estimate.to_string(),
            e.se.to_string(),
            e.analytic.map(|a| a.to_string()).unwrap_or_default(),
            c.replications.to_string(),
            r.seed.to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.016952427508441), "0.0169524");
        assert_eq!(sig6(0.025), "0.025");
        assert_eq!(sig6(0.142625), "0.142625");
        assert_eq!(sig6(0.6415140775914581), "0.641514");
        assert_eq!(sig6(5.0), "5");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(-0.5), "-0.5");
        assert_eq!(sig6(6.22e-16), "6.22000e-16");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn envelope_puts_schema_first() {
        let r = AdjustReport {
            method: "bonferroni",
            k: 2,
            alpha_joint: 0.05,
            alpha_constituent: 0.025,
            fwer: 0.049375,
            pfer: 0.05,
        };
        let json = to_json(ADJUST_SCHEMA, &r);
        assert!(json.starts_with("{\n  \"schema\": \"alphagate.adjust/v1\""));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["alpha_constituent"], 0.025);
    }

    #[test]
    fn adjust_csv_has_one_row() {
        let r = AdjustReport {
            method: "sidak",
            k: 3,
            alpha_joint: 0.05,
            alpha_constituent: 0.016952427508441503,
            fwer: 0.05,
            pfer: 0.05085728252532451,
        };
        let text = adjust_csv(&r);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "method,k,alpha_joint,alpha_constituent,fwer,pfer");
        assert_eq!(
            lines[1],
            "sidak,3,0.05,0.016952427508441503,0.05,0.05085728252532451"
        );
        assert_eq!(lines.len(), 2);
    }
}
