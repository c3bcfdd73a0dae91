use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn alphagate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alphagate"))
        .args(args)
        .env_remove("ALPHAGATE_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}",
            String::from_utf8_lossy(&o.stdout)
        )
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn adjust_bonferroni_halves_alpha() {
    let o = alphagate(&[
        "adjust",
        "--alpha-joint",
        "0.05",
        "--k",
        "2",
        "--method",
        "bonferroni",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema"], "alphagate.adjust/v1");
    assert_eq!(v["alpha_constituent"], 0.025);
    assert_eq!(v["pfer"], 0.05);
}

#[test]
fn adjust_sidak_restores_joint_alpha() {
    let o = alphagate(&[
        "adjust",
        "--alpha-joint",
        "0.05",
        "--k",
        "3",
        "--method",
        "sidak",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!((v["alpha_constituent"].as_f64().unwrap() - 0.016952).abs() < 1e-6);
    assert!((v["fwer"].as_f64().unwrap() - 0.05).abs() < 1e-12);
}

#[test]
fn adjust_out_of_range_alpha_is_usage_error() {
    let o = alphagate(&[
        "adjust",
        "--alpha-joint",
        "1.5",
        "--k",
        "3",
        "--method",
        "sidak",
    ]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("alpha"));
}

#[test]
fn adjust_formats_agree() {
    let args = [
        "adjust",
        "--alpha-joint",
        "0.05",
        "--k",
        "3",
        "--method",
        "sidak",
    ];
    let csv = alphagate(&[&args[..], &["--format", "csv"]].concat());
    assert_eq!(code(&csv), 0);
    let text = String::from_utf8(csv.stdout).unwrap();
    let row: Vec<_> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "sidak");
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.0169524275084415);

    let md = alphagate(&[&args[..], &["--format", "markdown"]].concat());
    assert!(String::from_utf8(md.stdout)
        .unwrap()
        .contains("| sidak | 3 | 0.05 | 0.0169524 | 0.05 |"));
}

#[test]
fn help_and_version_exit_zero_bad_flags_exit_two() {
    assert_eq!(code(&alphagate(&["--help"])), 0);
    assert_eq!(code(&alphagate(&["--version"])), 0);
    assert_eq!(code(&alphagate(&[])), 2);
    assert_eq!(code(&alphagate(&["adjust", "--k", "x"])), 2);
    assert_eq!(
        code(&alphagate(&[
            "adjust",
            "--alpha-joint",
            "0.05",
            "--k",
            "2",
            "--method",
            "holm"
        ])),
        2
    );
}

#[test]
fn decide_janssen_all_bases() {
    let plan = fixture("janssen_2023_exp2.plan.json");
    let o = alphagate(&["decide", "--plan", plan.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["schema"], "alphagate.decide/v1");
    let ds = v["decisions"].as_array().unwrap();
    let support: Vec<_> = ds
        .iter()
        .map(|d| (d["basis"].as_str().unwrap(), d["support"].as_str().unwrap()))
        .collect();
    assert_eq!(
        support,
        vec![
            ("joint_union_intersection", "full"),
            ("individual_at_nominal", "full"),
            ("hybrid_as_reported", "partial"),
        ]
    );
    assert_eq!(ds[0]["joint_outcome"], "reject");
    assert!(ds[1].get("joint_outcome").is_none());
}

#[test]
fn decide_empty_family_is_usage_error() {
    let o = alphagate(&[
        "decide",
        "--plan",
        data("empty_family.plan.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("families[0].members"));
}

#[test]
fn decide_missing_p_value_is_incomplete() {
    let o = alphagate(&[
        "decide",
        "--plan",
        data("missing_p.plan.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("H2"));
}

#[test]
fn decide_straddling_band_is_indeterminate() {
    let text = std::fs::read_to_string(fixture("prem_2021_h4.plan.json")).unwrap();
    // widen the home band so it spans the adjusted threshold
    let widened = text.replacen(
        r#""lower": 0.025, "upper": 0.05"#,
        r#""lower": 0.01, "upper": 0.05"#,
        1,
    );
    assert_ne!(text, widened);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prem_wide.json");
    std::fs::write(&path, widened).unwrap();

    let o = alphagate(&[
        "decide",
        "--plan",
        path.to_str().unwrap(),
        "--basis",
        "hybrid",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = &json(&o)["decisions"][0];
    assert_eq!(d["per_member_outcome"][0]["outcome"], "indeterminate");
    assert_eq!(d["per_member_outcome"][1]["outcome"], "reject");
    assert_eq!(d["support"], "indeterminate");
}

#[test]
fn decide_rejects_csv_and_bad_input() {
    let plan = fixture("janssen_2023_exp2.plan.json");
    assert_eq!(
        code(&alphagate(&[
            "decide",
            "--plan",
            plan.to_str().unwrap(),
            "--format",
            "csv"
        ])),
        2
    );
    assert_eq!(
        code(&alphagate(&["decide", "--plan", "/nonexistent/plan.json"])),
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(
        code(&alphagate(&["decide", "--plan", path.to_str().unwrap()])),
        2
    );
}

#[test]
fn lint_prem_strict_fails_with_redundant_correction() {
    let plan = fixture("prem_2021_h4.plan.json");
    let o = alphagate(&["lint", "--plan", plan.to_str().unwrap(), "--strict"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["schema"], "alphagate.lint/v1");
    assert_eq!(v["findings"][0]["code"], "REDUNDANT_CORRECTION");
    assert_eq!(v["findings"][0]["quantities"]["power_cost"], 1);

    let relaxed = alphagate(&["lint", "--plan", plan.to_str().unwrap()]);
    assert_eq!(code(&relaxed), 0);
}

#[test]
fn lint_clean_plan_has_no_findings() {
    let o = alphagate(&[
        "lint",
        "--plan",
        data("individual_only.plan.json").to_str().unwrap(),
        "--strict",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["findings"], serde_json::json!([]));
}

#[test]
fn lint_confusion_iii_extract() {
    let path = data("confusion_iii.plan.json");
    let o = alphagate(&["lint", "--plan", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let f = &json(&o)["findings"][0];
    assert_eq!(f["code"], "CONFUSION_III");
    let q = f["quantities"]["hypothesis_free_fwer"].as_f64().unwrap();
    assert!((q - 0.641514).abs() < 1e-6);

    let md = alphagate(&[
        "lint",
        "--plan",
        path.to_str().unwrap(),
        "--format",
        "markdown",
    ]);
    assert!(String::from_utf8(md.stdout)
        .unwrap()
        .contains("hypothesis_free_fwer: 0.641514"));
}

#[test]
fn lint_parse_failure_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "hypotheses": [], "families": [], "bogus": 1}"#,
    )
    .unwrap();
    assert_eq!(
        code(&alphagate(&[
            "lint",
            "--plan",
            path.to_str().unwrap(),
            "--strict"
        ])),
        2
    );
}

#[test]
fn simulate_single_test_collapses() {
    let o = alphagate(&[
        "simulate", "--k", "1", "--alpha", "0.05", "--reps", "50000", "--seed", "5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["schema"], "alphagate.simulate/v1");
    assert_eq!(
        v["empirical_fwer"]["estimate"],
        v["per_test"][0]["rate"]["estimate"]
    );
    let fwer = &v["empirical_fwer"];
    let est = fwer["estimate"].as_f64().unwrap();
    assert!((est - 0.05).abs() < 3.0 * fwer["se"].as_f64().unwrap());
}

#[test]
fn simulate_power_loss_under_bonferroni() {
    let o = alphagate(&[
        "simulate",
        "--k",
        "2",
        "--policy",
        "bonferroni",
        "--delta",
        "2.8,2.8",
        "--alpha",
        "0.05",
        "--reps",
        "40000",
        "--seed",
        "11",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(v.get("empirical_fwer").is_none() || v["empirical_fwer"].is_null());
    for t in v["per_test"].as_array().unwrap() {
        assert_eq!(t["kind"], "power");
        let adjusted = t["rate"]["analytic"].as_f64().unwrap();
        let nominal = t["rate_at_nominal"]["analytic"].as_f64().unwrap();
        assert!((adjusted - 0.712).abs() < 2e-3, "{adjusted}");
        assert!((nominal - 0.800).abs() < 2e-3, "{nominal}");
        assert!(
            t["rate"]["estimate"].as_f64().unwrap()
                < t["rate_at_nominal"]["estimate"].as_f64().unwrap()
        );
    }
}

#[test]
fn simulate_csv_columns() {
    let o = alphagate(&[
        "simulate", "--k", "2", "--delta", "0,-1.5", "--reps", "1000", "--seed", "2", "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,rho,policy,alpha_resolved,metric,estimate,se,analytic,replications,seed"
    );
    let metrics: Vec<_> = lines
        .map(|l| l.split(',').nth(4).unwrap().to_string())
        .collect();
    assert_eq!(
        metrics,
        [
            "fwer",
            "pfer",
            "type_i_rate[0]",
            "type_i_rate_at_nominal[0]",
            "power[1]",
            "power_at_nominal[1]"
        ]
    );
}

#[test]
fn simulate_seed_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_alphagate"));
        c.args(["simulate", "--k", "3", "--reps", "2000"])
            .args(extra)
            .env_remove("ALPHAGATE_SEED");
        if let Some(s) = env {
            c.env("ALPHAGATE_SEED", s);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("99"), &[]), run(None, &["--seed", "99"]));
    assert_ne!(run(Some("99"), &[]), run(None, &[]));
    assert_eq!(
        run(Some("99"), &["--seed", "4"]),
        run(None, &["--seed", "4"])
    );
}

#[test]
fn simulate_invalid_configs() {
    for args in [
        &["simulate", "--k", "2", "--delta", "1,2,3"][..],
        &["simulate", "--k", "0"],
        &["simulate", "--k", "2", "--rho", "1"],
        &["simulate", "--k", "2", "--reps", "0"],
        &["simulate", "--k", "2", "--alpha", "0"],
        &["simulate", "--k", "2", "--workers", "0"],
    ] {
        let o = alphagate(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(stderr(&o).starts_with("error"), "{args:?}");
    }
}

#[test]
fn case_janssen_and_gender() {
    let o = alphagate(&["case", "--id", "janssen_2023_exp2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema"], "alphagate.case/v1");
    let d = &v["report"]["decisions"];
    assert_eq!(d["hybrid_as_reported"]["support"], "partial");
    assert_eq!(d["joint_union_intersection"]["support"], "full");
    assert_eq!(d["individual_at_nominal"]["support"], "full");
    assert_eq!(v["matches_expected"], true);

    let g = json(&alphagate(&["case", "--id", "gender_example"]));
    assert_eq!(
        g["report"]["decisions"]["joint_union_intersection"]["support"],
        "full"
    );
    assert_eq!(g["findings"], serde_json::json!([]));
}

#[test]
fn case_unknown_id_is_usage_error() {
    let o = alphagate(&["case", "--id", "nope"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope"));
}

#[test]
fn markdown_and_json_carry_the_same_numbers() {
    let j = json(&alphagate(&["case", "--id", "prem_2021_h4"]));
    let md = String::from_utf8(
        alphagate(&["case", "--id", "prem_2021_h4", "--format", "markdown"]).stdout,
    )
    .unwrap();
    let q = &j["findings"][0]["quantities"];
    assert!(md.contains(&format!("power_cost: {}", q["power_cost"])));
    assert!(md.contains(&format!("alpha_constituent: {}", q["alpha_constituent"])));
    assert!(md.contains("| hybrid | 0.025 | partial |"));
}
