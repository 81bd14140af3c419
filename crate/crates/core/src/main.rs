use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pmcontext::correlation::{self, Inequality};
use pmcontext::io::{self, Polytope};
use pmcontext::pipeline::{self, PipelineConfig, PipelineError, VerifyContext, VerifyOptions};
use pmcontext::quantum::DepolarizingStrength;
use pmcontext::scenario::Scenario;
use pmcontext::symmetry::{self, SignedPermutation, SymmetryGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "pmcontext", version, about = "Exact noncontextuality inequalities for the Peres-Mermin scenario")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// H file to V file or back.
    Convert {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the input path with the other extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole pipeline and write artifacts to a directory.
    Derive {
        #[arg(long, default_value = "peres-mermin")]
        scenario: String,
        #[arg(long, default_value = "artifacts")]
        out: PathBuf,
        #[arg(long, default_value = "1")]
        r: String,
    },
    /// Orbit classification of a facet file (or of the derived facets).
    Classify {
        #[arg(long, default_value = "peres-mermin")]
        scenario: String,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Depolarized correlations and the inequalities they violate.
    Quantum {
        #[arg(long, default_value = "1")]
        r: String,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Check every expected count and identity.
    Verify {
        /// Comma-separated groups: counts, logic, quantum, roundtrip, symmetry.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Facet file to compare against the derived facets.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit_json<T: serde::Serialize>(value: &T) -> Result<(), PipelineError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn read_hrep(path: &Path) -> Result<pmcontext::HRep, PipelineError> {
    match io::parse_polytope(&pipeline::read(path)?)? {
        Polytope::H(h) => Ok(h),
        Polytope::V(_) => Err(PipelineError::Config(format!("{}: expected an H file", path.display()))),
    }
}

fn facet_inequalities(path: &Path, cols: usize) -> Result<Vec<Inequality>, PipelineError> {
    let h = read_hrep(path)?;
    Ok(h.rows().iter().map(|r| Inequality::from_row(r, cols)).collect::<Result<_, _>>()?)
}

fn run(cli: &Cli) -> Result<u8, PipelineError> {
    match &cli.command {
        Command::Convert { input, out } => {
            let converted = pipeline::convert(&io::parse_polytope(&pipeline::read(input)?)?)?;
            let out = out.clone().unwrap_or_else(|| {
                input.with_extension(match converted {
                    Polytope::H(_) => "hrep",
                    Polytope::V(_) => "vrep",
                })
            });
            pipeline::write(&out, &io::write_polytope(&converted))?;
            let (kind, rows) = match &converted {
                Polytope::H(h) => ("inequalities", h.len()),
                Polytope::V(v) => ("points", v.len()),
            };
            match cli.format {
                Format::Text => println!("{}: {rows} {kind}", out.display()),
                Format::Json => emit_json(&serde_json::json!({ "out": out, kind: rows }))?,
            }
            Ok(0)
        }
        Command::Derive { scenario, out, r } => {
            let config = PipelineConfig {
                scenario: pipeline::load_scenario(scenario)?,
                out: out.clone(),
                r: DepolarizingStrength::parse(r)?,
                verify: true,
            };
            let outcome = pipeline::run_pipeline(&config)?;
            let d = &outcome.derivation;
            match cli.format {
                Format::Text => {
                    println!(
                        "{}: {} assignment vertices, {} correlation vertices, {} inequalities",
                        d.scenario.name,
                        d.correlation.assignment.len(),
                        d.correlation.vertices.len(),
                        d.inequalities.len()
                    );
                    println!("orbit sizes: {}", d.summary());
                    println!("artifacts written to {}", out.display());
                    if let Some(report) = &outcome.report {
                        for e in report.failures() {
                            println!("FAIL {}/{}: expected {}, computed {}", e.group, e.name, e.expected, e.computed);
                        }
                        println!("verification: {}", if report.passed() { "passed" } else { "FAILED" });
                    }
                }
                Format::Json => emit_json(&serde_json::json!({
                    "out": out,
                    "inequalities": d.inequalities.len(),
                    "summary": d.summary(),
                    "verification": outcome.report,
                }))?,
            }
            Ok(outcome.exit_code() as u8)
        }
        Command::Classify { scenario, input } => {
            let scenario = pipeline::load_scenario(scenario)?;
            let d = pipeline::derive(&scenario)?;
            let d = match input {
                None => d,
                Some(path) => {
                    let raw = facet_inequalities(path, scenario.cols)?;
                    let h = correlation::inequalities_to_hrep(&raw, scenario.num_cells());
                    let group = d
                        .correlation_group
                        .clone()
                        .filter(|g| g.elements().iter().all(|e| symmetry::preserves_hrep(&h, e)))
                        .unwrap_or_else(|| {
                            SymmetryGroup::from_elements([SignedPermutation::identity(scenario.num_cells())])
                        });
                    let inequalities = correlation::classify(&raw, &group, &scenario)?;
                    pipeline::Derivation { correlation_h: h, inequalities, ..d }
                }
            };
            match cli.format {
                Format::Text => print!("{}", pipeline::orbit_text(&d)),
                Format::Json => emit_json(&pipeline::Artifact::build(&d, None)?.symmetry)?,
            }
            Ok(0)
        }
        Command::Quantum { r, input } => {
            let r = DepolarizingStrength::parse(r)?;
            let inequalities = match input {
                Some(path) => {
                    let pm = Scenario::peres_mermin();
                    let raw = facet_inequalities(path, pm.cols)?;
                    let group = symmetry::close_generators(9, &symmetry::correlation_generators(), |_| true)
                        .map_err(correlation::CorrelationError::from)?;
                    let h = correlation::inequalities_to_hrep(&raw, 9);
                    let closed = group.elements().iter().all(|e| symmetry::preserves_hrep(&h, e));
                    if closed {
                        correlation::classify(&raw, &group, &pm)?
                    } else {
                        raw
                    }
                }
                None => pipeline::derive(&Scenario::peres_mermin())?.inequalities,
            };
            let report = pipeline::quantum_report(&inequalities, &r)?;
            match cli.format {
                Format::Text => print!("{}", pipeline::quantum_text(&report)),
                Format::Json => emit_json(&report)?,
            }
            Ok(0)
        }
        Command::Verify { only, input } => {
            let unknown: Vec<&String> =
                only.iter().filter(|g| !pipeline::VERIFY_GROUPS.contains(&g.as_str())).collect();
            if !unknown.is_empty() {
                return Err(PipelineError::Config(format!(
                    "unknown check group(s) {unknown:?}; expected one of {:?}",
                    pipeline::VERIFY_GROUPS
                )));
            }
            let mut ctx = VerifyContext::default();
            ctx.facet_file = input.clone();
            let report = pipeline::verify_with(&mut ctx, &VerifyOptions { only: only.clone() });
            match cli.format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => emit_json(&report)?,
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}
