use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use specshift::flow::FamilyKind;
use specshift::shift::xi;
use specshift_cli::matrix_io::read_hermitian;
use specshift_cli::report::{to_canonical_json, write_atomic};
use specshift_cli::run::write_outcome;
use specshift_cli::{run, run_suite, CliError, Experiment, InstanceSpec, Params};

#[derive(Parser)]
#[command(name = "specshift", version, about = "Spectral shift function experiments")]
struct Cli {
    /// Overrides the experiment tolerance (`params.tol`).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Directory for JSON reports and CSV tables.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// `csv` also writes the per-experiment tables (needs `--out-dir`).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads; defaults to one per core.
    #[arg(long, env = "SPECSHIFT_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Linear,
    QuadraticConcave,
    MatrixPolynomial,
}

impl From<Kind> for FamilyKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Linear => FamilyKind::Linear,
            Kind::QuadraticConcave => FamilyKind::QuadraticConcave,
            Kind::MatrixPolynomial => FamilyKind::MatrixPolynomial,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment spec.
    Run { spec: PathBuf },
    /// Run every `*.json` spec in a directory.
    Suite { dir: PathBuf },
    /// Print a spec with default parameters.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value = "xi")]
        experiment: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Spectral shift function of a matrix pair as CSV.
    Xi {
        #[arg(long)]
        h0: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let csv = cli.format == Format::Csv;
    if csv && cli.out_dir.is_none() && matches!(cli.command, Command::Run { .. } | Command::Suite { .. }) {
        return Err(CliError::Invalid {
            field: "--format".into(),
            message: "csv output needs --out-dir".into(),
        });
    }
    match cli.command {
        Command::Run { spec } => {
            let parsed = InstanceSpec::from_path(&spec)?;
            let outcome = run(&parsed, cli.tol)?;
            match &cli.out_dir {
                Some(dir) => {
                    let stem = spec.file_stem().unwrap_or_default().to_string_lossy();
                    write_outcome(&outcome, dir, &stem, csv)?;
                }
                None => emit(None, &to_canonical_json(&outcome.report)?)?,
            }
            for c in outcome.report.failed_checks() {
                eprintln!("FAIL {}: {} {:?} {}", c.name, c.statistic, c.relation, c.tolerance);
            }
            Ok(outcome.report.pass)
        }
        Command::Suite { dir } => {
            let report = run_suite(&dir, cli.tol, cli.out_dir.as_deref(), csv)?;
            let text = to_canonical_json(&report)?;
            match &cli.out_dir {
                Some(d) => write_atomic(&d.join("suite.json"), text.as_bytes())?,
                None => emit(None, &text)?,
            }
            for e in &report.entries {
                let status = if e.error.is_some() { "ERROR" } else if e.pass { "PASS" } else { "FAIL" };
                eprintln!("{status} {}", e.file);
            }
            eprintln!("{} specs, {} failed, {} errors", report.total, report.failed, report.errors);
            if report.errors > 0 {
                return Err(CliError::Invalid {
                    field: "suite".into(),
                    message: format!("{} spec(s) could not be run", report.errors),
                });
            }
            Ok(report.pass)
        }
        Command::Gen {
            seed,
            dim,
            kind,
            experiment,
            scale,
        } => {
            let experiment: Experiment = serde_json::from_value(serde_json::Value::String(experiment.clone()))
                .map_err(|_| CliError::Invalid {
                    field: "--experiment".into(),
                    message: format!(
                        "unknown experiment `{experiment}`; expected one of {}",
                        Experiment::ALL.map(Experiment::name).join(", ")
                    ),
                })?;
            let spec = InstanceSpec {
                seed,
                dim,
                family_kind: kind.into(),
                scale,
                experiment,
                params: Params {
                    tol: cli.tol,
                    ..Params::default()
                },
            };
            spec.validate()?;
            let path = cli.out_dir.as_ref().map(|d| d.join(format!("{}_{seed}.json", experiment.name())));
            if let Some(d) = &cli.out_dir {
                std::fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
            }
            emit(path.as_deref(), &to_canonical_json(&spec)?)?;
            Ok(true)
        }
        Command::Xi { h0, v, out } => {
            let h0 = read_hermitian(&h0)?;
            let v = read_hermitian(&v)?;
            let shift = xi(&h0, &v)?;
            let mut buf = Vec::new();
            shift.xi.write_csv(&mut buf)?;
            emit(out.as_deref(), &String::from_utf8(buf).expect("csv output is UTF-8"))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
