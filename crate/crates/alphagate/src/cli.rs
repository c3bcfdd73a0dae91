//! The `alphagate` command line.
//!
//! Exit codes: 0 success, 1 warnings under `lint --strict`, 2 usage, parse or
//! domain errors, 3 a hypothesis without a p-value.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use alphagate_core::lint::Severity;
use alphagate_core::{
    bonferroni_adjust, evaluate_family, fwer_independent, lint_plan, pfer, sidak_adjust,
    AlphaPolicy, DecisionBasis, Error as CoreError, SimulationConfig,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::casebook::{run_case, CaseError};
use crate::parallel::simulate;
use crate::plan::{parse_valid_plan, read_plan_file, PlanError};
use crate::report::{self, AdjustReport, DecideReport, LintReport};

#[derive(Debug, Parser)]
#[command(
    name = "alphagate",
    version,
    about = "Multiple-testing corrections matched to the inferences they serve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Sidak,
    Bonferroni,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Basis {
    All,
    Joint,
    Individual,
    Hybrid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Policy {
    Unadjusted,
    Sidak,
    Bonferroni,
    Specified,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Constituent alpha for a joint alpha spread over k tests.
    Adjust {
        #[arg(long)]
        alpha_joint: f64,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Decisions for every family of a plan.
    Decide {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        basis: Basis,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check a plan's corrections against its reported inferences.
    Lint {
        #[arg(long)]
        plan: PathBuf,
        /// Exit with 1 when any warning is found.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Monte Carlo error rates and power for a family of z-tests.
    Simulate {
        #[arg(long)]
        k: u32,
        /// The policy's own alpha (individual, joint or constituent).
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "unadjusted")]
        policy: Policy,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        /// Comma-separated effect sizes, one per test. Defaults to all zero.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, env = "ALPHAGATE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        nominal_alpha: f64,
        /// Worker threads; the output does not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Reclassify one of the bundled cases.
    Case {
        #[arg(long)]
        id: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCOMPLETE: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::MissingPValue(_) => EXIT_INCOMPLETE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        Self::usage(e)
    }
}

impl From<CaseError> for Failure {
    fn from(e: CaseError) -> Self {
        match e {
            CaseError::Core(c) => c.into(),
            other => Self::usage(other),
        }
    }
}

struct Output {
    text: String,
    code: u8,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Self {
            text,
            code: EXIT_OK,
        }
    }
}

fn no_csv(format: Format, command: &str) -> Result<(), Failure> {
    if format == Format::Csv {
        return Err(Failure::usage(format!(
            "csv output is only available for adjust and simulate, not {command}"
        )));
    }
    Ok(())
}

fn adjust(alpha_joint: f64, k: u32, method: Method, format: Format) -> Result<Output, Failure> {
    let (name, alpha_c) = match method {
        Method::Sidak => ("sidak", sidak_adjust(alpha_joint, k)?),
        Method::Bonferroni => ("bonferroni", bonferroni_adjust(alpha_joint, k)?),
    };
    let r = AdjustReport {
        method: name,
        k,
        alpha_joint,
        alpha_constituent: alpha_c,
        fwer: fwer_independent(alpha_c, k)?,
        pfer: pfer(alpha_c, k)?,
    };
    Ok(match format {
        Format::Json => report::to_json(report::ADJUST_SCHEMA, &r),
        Format::Csv => report::adjust_csv(&r),
        Format::Markdown => report::adjust_markdown(&r),
    }
    .into())
}

fn decide(path: &Path, basis: Basis, format: Format) -> Result<Output, Failure> {
    no_csv(format, "decide")?;
    let plan = parse_valid_plan(&read_plan_file(path)?)?;
    let bases: &[DecisionBasis] = match basis {
        Basis::All => &DecisionBasis::ALL,
        Basis::Joint => &[DecisionBasis::JointUnionIntersection],
        Basis::Individual => &[DecisionBasis::IndividualAtNominal],
        Basis::Hybrid => &[DecisionBasis::HybridAsReported],
    };
    let mut decisions = Vec::new();
    for family in &plan.families {
        for &b in bases {
            decisions.push(evaluate_family(family, &plan, b)?);
        }
    }
    let r = DecideReport {
        nominal_alpha: plan.nominal_alpha,
        decisions,
    };
    Ok(match format {
        Format::Markdown => report::decide_markdown(&r),
        _ => report::to_json(report::DECIDE_SCHEMA, &r),
    }
    .into())
}

fn lint(path: &Path, strict: bool, format: Format) -> Result<Output, Failure> {
    no_csv(format, "lint")?;
    let plan = parse_valid_plan(&read_plan_file(path)?)?;
    let r = LintReport {
        findings: lint_plan(&plan)?,
    };
    let warned = r.findings.iter().any(|f| f.severity == Severity::Warning);
    let text = match format {
        Format::Markdown => report::lint_markdown(&r),
        _ => report::to_json(report::LINT_SCHEMA, &r),
    };
    Ok(Output {
        text,
        code: if strict && warned {
            EXIT_FINDINGS
        } else {
            EXIT_OK
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    k: u32,
    alpha: f64,
    policy: Policy,
    rho: f64,
    delta: Vec<f64>,
    reps: u64,
    seed: u64,
    nominal_alpha: f64,
    workers: Option<usize>,
    format: Format,
) -> Result<Output, Failure> {
    let policy = match policy {
        Policy::Unadjusted => AlphaPolicy::Unadjusted {
            alpha_individual: alpha,
        },
        Policy::Sidak => AlphaPolicy::Sidak { alpha_joint: alpha },
        Policy::Bonferroni => AlphaPolicy::Bonferroni { alpha_joint: alpha },
        Policy::Specified => AlphaPolicy::Specified {
            alpha_constituent: alpha,
            derived_from_correction: false,
        },
    };
    let effect_sizes = if delta.is_empty() {
        vec![0.0; k as usize]
    } else {
        delta
    };
    let config = SimulationConfig {
        k,
        effect_sizes,
        correlation: rho,
        policy,
        nominal_alpha,
        replications: reps,
        seed,
    };
    if workers == Some(0) {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    let r = simulate(&config, workers)?;
    Ok(match format {
        Format::Json => report::to_json(report::SIMULATE_SCHEMA, &r),
        Format::Csv => report::simulate_csv(&r),
        Format::Markdown => report::simulate_markdown(&r),
    }
    .into())
}

fn case(id: &str, format: Format) -> Result<Output, Failure> {
    no_csv(format, "case")?;
    let run = run_case(id)?;
    Ok(match format {
        Format::Markdown => report::case_markdown(&run),
        _ => report::to_json(report::CASE_SCHEMA, &run),
    }
    .into())
}

fn dispatch(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Adjust {
            alpha_joint,
            k,
            method,
            format,
        } => adjust(alpha_joint, k, method, format),
        Command::Decide {
            plan,
            basis,
            format,
        } => decide(&plan, basis, format),
        Command::Lint {
            plan,
            strict,
            format,
        } => lint(&plan, strict, format),
        Command::Simulate {
            k,
            alpha,
            policy,
            rho,
            delta,
            reps,
            seed,
            nominal_alpha,
            workers,
            format,
        } => simulate_cmd(
            k,
            alpha,
            policy,
            rho,
            delta,
            reps,
            seed,
            nominal_alpha,
            workers,
            format,
        ),
        Command::Case { id, format } => case(&id, format),
    }
}

/// Runs the command line given by `args` (program name first) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command) {
        Ok(output) => match out
            .write_all(output.text.as_bytes())
            .and_then(|_| out.flush())
        {
            Ok(()) => output.code,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write output: {e}");
                EXIT_USAGE
            }
        },
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
