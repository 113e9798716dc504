//! `prequant`: build reduction specs, echo their derived data, and run the
//! verification suites.
//!
//! Exit status is 0 when everything passes, 1 when a suite fails and 2 on
//! invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use prequant_core::contact::{flow, random_sphere_generator, ConstantHamiltonian, ContactHamiltonian, LinearHamiltonian};
use prequant_core::moment::sample;
use prequant_core::report::builtin::NAMES;
use prequant_core::report::suites::flow_oracle_residual;
use prequant_core::report::{derived_data, spec_file, SampleCounts, Status, Tolerances};
use prequant_core::{builtin, run_suites, Error, ReductionSpec, Report, RunConfig, Suite, C64};

#[derive(Parser, Debug)]
#[command(name = "prequant", version, about = "Reduction specs for prequantization bundles over toric x Grassmannian products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a polytope: primitive conormals, interior point, compactness.
    CheckPolytope {
        /// Spec file, or one of the built-in names.
        spec: String,
    },
    /// Print the derived reduction data as JSON.
    Build { spec: String },
    /// Run verification suites on one spec.
    Verify {
        spec: String,
        #[command(flatten)]
        run: RunArgs,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite", value_parser = parse_suite)]
        suites: Vec<Suite>,
        /// Print the full report as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Integrate a contact Hamiltonian flow from a sampled level-set point.
    Flow {
        spec: String,
        #[arg(long, value_enum)]
        hamiltonian: HamiltonianKind,
        #[arg(long = "t", default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every suite on every built-in spec.
    Report {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use this many samples in every sampled check.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol_level: Option<f64>,
    #[arg(long)]
    tol_contact: Option<f64>,
    #[arg(long)]
    tol_legendrian: Option<f64>,
    #[arg(long)]
    tol_unitary: Option<f64>,
    #[arg(long)]
    tol_flow: Option<f64>,
    #[arg(long)]
    tol_reeb: Option<f64>,
    /// Record suite runtimes (the report is then no longer byte-stable).
    #[arg(long)]
    timings: bool,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HamiltonianKind {
    /// `h = 1`, the Reeb flow.
    One,
    /// `h = 0`, the identity.
    Zero,
    /// `h = α(Az)` for a random sphere-preserving generator `A`.
    Linear,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

impl RunArgs {
    fn config(&self, suites: Vec<Suite>) -> Result<RunConfig, Error> {
        let d = Tolerances::default();
        let config = RunConfig {
            seed: self.seed,
            tolerances: Tolerances {
                level: self.tol_level.unwrap_or(d.level),
                contact: self.tol_contact.unwrap_or(d.contact),
                legendrian: self.tol_legendrian.unwrap_or(d.legendrian),
                unitary: self.tol_unitary.unwrap_or(d.unitary),
                flow: self.tol_flow.unwrap_or(d.flow),
                reeb: self.tol_reeb.unwrap_or(d.reeb),
            },
            samples: self.samples.map(SampleCounts::uniform).unwrap_or_default(),
            suites,
            timings: self.timings,
            ..RunConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

enum Failure {
    Suites,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// A path to a spec file, or a built-in name when no such file exists.
fn resolve(spec: &str) -> Result<ReductionSpec, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{spec}: {e}")))?;
        return spec_file::load_spec(&bytes).map_err(|e| Failure::Input(format!("{spec}: {e}")));
    }
    if NAMES.contains(&spec) {
        return Ok(builtin(spec)?);
    }
    Err(Failure::Input(format!(
        "{spec}: no such file and not a built-in spec ({})",
        NAMES.join(", ")
    )))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn print_summary(report: &Report) {
    println!("{}", report.spec);
    for s in &report.suites {
        let status = match s.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skip",
        };
        let residual = s.max_residual.map(|r| format!(" max residual {r:.3e}")).unwrap_or_default();
        let seed = s.failing_seed.map(|x| format!(" (seed {x})")).unwrap_or_default();
        let detail = if s.detail.is_empty() { String::new() } else { format!(": {}", s.detail) };
        println!("  {status} {:<13} {} samples{residual}{seed}{detail}", s.suite.name(), s.samples);
    }
}

fn complex_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|c| json!([c.re, c.im])).collect())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::CheckPolytope { spec } => {
            let spec = resolve(&spec)?;
            let p = &spec.polytope;
            let d = &spec.delzant;
            let out = json!({
                "name": spec.name,
                "dim": p.dim(),
                "facets": p.facets(),
                "primitive": true,
                "bounded": !spec.interior.unbounded,
                "interior": derived_data(&spec).interior,
                "weight": d.weight.0,
                "even": d.even,
                "parity_witness": d.parity_witness,
            });
            print!("{}", pretty(&out));
            Ok(())
        }
        Command::Build { spec } => {
            let spec = resolve(&spec)?;
            let v = serde_json::to_value(derived_data(&spec)).expect("derived data serializes");
            print!("{}", pretty(&v));
            Ok(())
        }
        Command::Verify { spec, run, suites, json } => {
            let spec = resolve(&spec)?;
            let report = run_suites(&spec, &run.config(suites)?);
            let text = report.to_json();
            write_out(&run.out, &text)?;
            if json {
                print!("{text}");
            } else {
                print_summary(&report);
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Suites)
            }
        }
        Command::Flow { spec, hamiltonian, time, step, seed } => {
            let spec = resolve(&spec)?;
            let z0 = sample(&spec, seed);
            let linear;
            let h: &dyn ContactHamiltonian = match hamiltonian {
                HamiltonianKind::One => &ConstantHamiltonian(1.0),
                HamiltonianKind::Zero => &ConstantHamiltonian(0.0),
                HamiltonianKind::Linear => {
                    let mut rng = prequant_core::seed::rng(prequant_core::seed::splitmix64(seed));
                    linear = LinearHamiltonian { generator: random_sphere_generator(&spec, &mut rng) };
                    &linear
                }
            };
            let st = flow(h, &z0, time, step, &spec)?;
            let mut out = json!({
                "spec": spec.name,
                "hamiltonian": format!("{hamiltonian:?}").to_lowercase(),
                "seed": seed,
                "time": st.time,
                "step": st.step,
                "steps": st.steps,
                "method": st.method,
                "max_drift": st.max_drift,
                "start": complex_list(&z0.flatten()),
                "end": complex_list(&st.point.flatten()),
            });
            if let HamiltonianKind::Linear = hamiltonian {
                out["oracle_deviation"] = json!(flow_oracle_residual(&spec, seed, time, step)?);
            }
            print!("{}", pretty(&out));
            Ok(())
        }
        Command::Report { run, json } => {
            let config = run.config(Vec::new())?;
            let reports: Vec<Report> = NAMES
                .iter()
                .map(|n| builtin(n).map(|s| run_suites(&s, &config)))
                .collect::<Result<_, _>>()?;
            // the evenness suite is expected to fail on the odd fixture
            let passed = reports
                .iter()
                .all(|r| r.suites.iter().all(|s| s.passed() || (s.suite == Suite::Evenness && !r.derived.even)));
            let text = pretty(&json!({ "reports": reports, "passed": passed }));
            write_out(&run.out, &text)?;
            if json {
                print!("{text}");
            } else {
                reports.iter().for_each(print_summary);
                println!("{}", if passed { "all suites pass (hirzebruch1 is expected to be odd)" } else { "suite failures" });
            }
            if passed {
                Ok(())
            } else {
                Err(Failure::Suites)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suites) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
