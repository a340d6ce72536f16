//! Batch front end: critical radius tables, identity verification, potential
//! profiles and particle minimization.
//!
//! Artifacts go to files under `--out` when given, otherwise to stdout; human
//! summaries then go to stderr. Every artifact carries the run manifest: as a
//! leading `#` comment line in CSV, as the `manifest` field in JSON.
//!
//! Exit codes: 0 success, 1 verification failure or numerical error, 2 usage
//! or I/O error.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{DateTime, SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use riesz_eq::identities::{run_suite_with, Gates, GridProfile, IdentityId, SuiteOptions, Verifier};
use riesz_eq::minimizer::{minimize_traced, write_snapshots_csv, Constraint, MinimizerConfig, ParticleSystem};
use riesz_eq::potentials::PotentialProfile;
use riesz_eq::riesz::{critical_radius, ProblemSpec};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "riesz-eq",
    version,
    about = "Riesz equilibrium measures: tables, identity checks, potentials, particle runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical radius of the radial arcsine law for d = 2..=dim.
    Table1(Table1Args),
    /// Runs the identity suite and reports every case as JSON.
    Verify(VerifyArgs),
    /// Samples φ(λ) on a uniform grid of [0, 1] with its deviation from φ(0).
    Potential(PotentialArgs),
    /// Minimizes the particle energy in the s = d - 3 regime.
    Minimize(MinimizeArgs),
}

#[derive(Args, Serialize)]
struct Table1Args {
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Largest dimension in the table.
    #[arg(long = "dim", default_value_t = 20, value_parser = clap::value_parser!(u32).range(2..))]
    d_max: u32,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// smoke, standard, exhaustive or real_dimension.
    #[arg(long, env = "RIESZ_EQ_PROFILE", default_value = "smoke", value_parser = parse_profile)]
    #[serde(serialize_with = "profile_name")]
    profile: GridProfile,
    /// Restrict to these identity tags (repeatable or comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_identity)]
    identity: Vec<IdentityId>,
    /// Absolute pass gate for every case (overrides the per-case defaults).
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Relative pass gate for every case (overrides the per-case defaults).
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PotentialArgs {
    #[arg(long = "dim", value_parser = clap::value_parser!(u32).range(2..))]
    d: u32,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Number of grid points, including λ = 0 and λ = 1.
    #[arg(long, default_value_t = 21, value_parser = clap::value_parser!(u32).range(2..))]
    grid: u32,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct MinimizeArgs {
    #[arg(long = "dim", value_parser = clap::value_parser!(u32).range(2..))]
    d: u32,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Particle count.
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// ball or free.
    #[arg(long, default_value = "ball", value_parser = parse_constraint)]
    constraint: Constraint,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn parse_profile(s: &str) -> Result<GridProfile, String> {
    s.parse().map_err(|e: riesz_eq::Error| e.to_string())
}

fn parse_identity(s: &str) -> Result<IdentityId, String> {
    s.parse().map_err(|e: riesz_eq::Error| e.to_string())
}

fn parse_constraint(s: &str) -> Result<Constraint, String> {
    s.parse().map_err(|e: riesz_eq::Error| e.to_string())
}

fn profile_name<S: serde::Serializer>(p: &GridProfile, ser: S) -> Result<S::Ok, S::Error> {
    let name = match p {
        GridProfile::Smoke => "smoke",
        GridProfile::Standard => "standard",
        GridProfile::Exhaustive => "exhaustive",
        GridProfile::RealDimension => "real_dimension",
        GridProfile::Custom(_) => "custom",
    };
    ser.serialize_str(name)
}

#[derive(Debug, Serialize)]
struct RunManifest {
    command: &'static str,
    parameters: serde_json::Value,
    tool_version: &'static str,
    timestamp: String,
}

impl RunManifest {
    fn new(command: &'static str, parameters: &impl Serialize) -> Self {
        // SOURCE_DATE_EPOCH pins the timestamp for reproducible artifacts
        let now = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse::<i64>().ok())
            .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
            .unwrap_or_else(Utc::now);
        RunManifest {
            command,
            parameters: serde_json::to_value(parameters).unwrap_or(serde_json::Value::Null),
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: now.to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }

    fn csv_header(&self) -> String {
        format!("# {}\n", serde_json::to_string(self).unwrap_or_default())
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

impl From<riesz_eq::Error> for Failure {
    fn from(e: riesz_eq::Error) -> Self {
        match e {
            riesz_eq::Error::InvalidParameter(msg) => Failure::Usage(msg),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

/// Full round-trip precision: 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `content` to `dir/name`, or to stdout without `--out`.
fn emit(out: Option<&Path>, name: &str, content: &str) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), content)?;
        }
        None => io::stdout().lock().write_all(content.as_bytes())?,
    }
    Ok(())
}

/// Prints a summary to stdout when artifacts go to files, otherwise to stderr.
fn summary(out: Option<&Path>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn table1(args: &Table1Args) -> Result<bool, Failure> {
    let manifest = RunManifest::new("table1", args);
    let mut csv = manifest.csv_header();
    csv.push_str("d,s,R\n");
    let mut table = format!("{:>4} {:>4} {:>10}\n", "d", "s", "R");
    for d in 2..=args.d_max {
        let r = critical_radius(d, args.gamma)?;
        let s = d as i64 - 3;
        let _ = writeln!(csv, "{d},{s},{}", num(r));
        let _ = writeln!(table, "{d:>4} {s:>4} {r:>10.6}");
    }
    match &args.out {
        Some(dir) => {
            emit(Some(dir), "table1.csv", &csv)?;
            print!("{table}");
        }
        None => print!("{table}"),
    }
    Ok(true)
}

fn verify(args: &VerifyArgs) -> Result<bool, Failure> {
    let manifest = RunManifest::new("verify", args);
    let gates = match (args.tol_abs, args.tol_rel) {
        (None, None) => None,
        (abs, rel) => Some(Gates::new(
            abs.unwrap_or(Gates::DEFAULT.abs),
            rel.unwrap_or(Gates::DEFAULT.rel),
        )?),
    };
    let options = SuiteOptions {
        verifier: Verifier {
            gates,
            ..Verifier::default()
        },
        filter: (!args.identity.is_empty()).then(|| args.identity.clone()),
        ..SuiteOptions::default()
    };
    let report = run_suite_with(&args.profile, &options);
    let doc = json!({
        "manifest": manifest,
        "cases": report.cases,
        "summary": {
            "total": report.total(),
            "passed": report.passed(),
            "failed": report.failed(),
        },
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numerical(e.to_string()))? + "\n";
    let out = args.out.as_deref();
    emit(out, "verify.json", &text)?;
    for (id, tally) in &report.summary {
        summary(
            out,
            &format!(
                "{:<16} {:>5} passed {:>5} failed",
                id.to_string(),
                tally.passed,
                tally.failed
            ),
        );
    }
    summary(
        out,
        &format!(
            "total {} passed {} failed {}",
            report.total(),
            report.passed(),
            report.failed()
        ),
    );
    // non-integer dimensions are exploratory and not gated
    Ok(args.profile == GridProfile::RealDimension || report.all_passed())
}

fn potential(args: &PotentialArgs) -> Result<bool, Failure> {
    let manifest = RunManifest::new("potential", args);
    let spec = ProblemSpec::critical(args.d, args.gamma)?;
    let steps = args.grid - 1;
    let lambdas: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let profile = PotentialProfile::compute(&spec, &lambdas, Default::default())?;
    let mut csv = manifest.csv_header();
    csv.push_str("lambda,phi,residual\n");
    for (l, v) in profile.lambdas.iter().zip(&profile.values) {
        let _ = writeln!(csv, "{},{},{}", num(*l), num(*v), num(v - profile.reference));
    }
    let out = args.out.as_deref();
    emit(out, "potential.csv", &csv)?;
    summary(out, &format!("max |residual| = {:.3e}", profile.max_deviation()));
    Ok(true)
}

fn minimize(args: &MinimizeArgs) -> Result<bool, Failure> {
    let manifest = RunManifest::new("minimize", args);
    let spec = ProblemSpec::critical(args.d, args.gamma)?;
    let config = MinimizerConfig {
        max_steps: args.max_steps as usize,
        seed: args.seed,
        constraint: args.constraint,
        ..MinimizerConfig::default()
    };
    let ps = ParticleSystem::sample(spec, args.n as usize, args.constraint, args.seed)?;
    let (_, report, trace) = minimize_traced(&ps, &config, None)?;
    let mut csv = manifest.csv_header().into_bytes();
    write_snapshots_csv(&mut csv, args.d as usize, &trace.snapshots)?;
    let doc = json!({ "manifest": manifest, "report": report });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numerical(e.to_string()))? + "\n";
    let out = args.out.as_deref();
    let csv = String::from_utf8(csv).map_err(|e| Failure::Numerical(e.to_string()))?;
    match out {
        Some(dir) => {
            emit(Some(dir), "particles.csv", &csv)?;
            emit(Some(dir), "fit_report.json", &text)?;
        }
        None => emit(None, "", &text)?,
    }
    let ks = report.ks_distance.map_or("n/a".to_string(), |k| format!("{k:.4}"));
    summary(
        out,
        &format!(
            "steps {} ({:?}), energy {:.10}, support radius {:.6} (target {}), KS {ks}",
            report.steps_used,
            report.stop_reason,
            report.final_energy,
            report.support_radius,
            report.target_radius.map_or("n/a".to_string(), |r| format!("{r:.6}")),
        ),
    );
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Table1(a) => table1(a),
        Command::Verify(a) => verify(a),
        Command::Potential(a) => potential(a),
        Command::Minimize(a) => minimize(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
