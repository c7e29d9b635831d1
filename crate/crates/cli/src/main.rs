//! `peskine`: sample trivectors, run checks, scan loci and aggregate reports.
//!
//! Exit codes: 0 when no check failed, 1 when one did, 2 for usage and input
//! errors, 3 when a scan would exceed its membership-test budget.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use peskine_core::checks::{
    estimate_locus, run_check, scan_locus, with_threads, CheckConfig, CHECK_IDS, LOCI,
};
use peskine_core::divisor::{sample_trivector, DivisorKind};
use peskine_core::estimators::{SliceConfig, DEFAULT_BUDGET};
use peskine_core::io::{load_trivector, store_trivector, trivector_to_json};
use peskine_core::report::{emit_report, read_reports, Aggregate, CheckReport};
use peskine_core::rng::rng_from_seed;
use peskine_core::{Error, PrimeField};

use config::FileConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::BudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "peskine",
    version,
    about = "Finite-field checks for trivector geometry"
)]
struct Cli {
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; never changes report contents.
    #[arg(long, global = true, env = "PESKINE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a trivector on a special divisor and store it as JSON.
    Sample {
        /// general, D3_3_10, D1_6_10 or D4_7_7.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one check, or `all` of them.
    Verify {
        check: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Exhaustive point count of a named locus.
    Scan {
        #[arg(long)]
        locus: Option<String>,
        #[command(flatten)]
        run: RunArgs,
        /// Stored trivector to use instead of a seeded sample.
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Slice-count dimension estimate of a named locus.
    EstimateDim {
        #[arg(long)]
        locus: Option<String>,
        #[command(flatten)]
        run: RunArgs,
        /// Random slices per level.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Merge report files into one aggregate.
    Report {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Membership-test budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Aggregate JSON output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the reports.
    #[arg(long)]
    timings: bool,
}

/// Flags merged with the config file.
struct Run {
    p: Option<u32>,
    seed: u64,
    budget: Option<u64>,
    out: Option<PathBuf>,
    timings: bool,
}

impl Run {
    fn new(args: RunArgs, file: &FileConfig) -> Self {
        Run {
            p: args.p.or(file.p),
            seed: args.seed.or(file.seed).unwrap_or(0),
            budget: args.budget.or(file.budget),
            out: args.out.or_else(|| file.out.clone()),
            timings: args.timings || file.timings.unwrap_or(false),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let command = cli.command;
    match threads {
        Some(n) => with_threads(n, || dispatch(command, &file)),
        None => dispatch(command, &file),
    }
}

fn dispatch(command: Command, file: &FileConfig) -> Result<u8, CliError> {
    match command {
        Command::Sample { kind, p, seed, out } => {
            let kind = kind
                .or_else(|| file.kind.clone())
                .unwrap_or_else(|| "general".into());
            let kind = DivisorKind::parse(&kind).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown kind `{kind}`; known: general, D3_3_10, D1_6_10, D4_7_7"
                ))
            })?;
            let p = p
                .or(file.p)
                .ok_or_else(|| CliError::Usage("--p is required".into()))?;
            let seed = seed.or(file.seed).unwrap_or(0);
            sample(kind, p, seed, out.or_else(|| file.out.clone()).as_deref())?;
            Ok(0)
        }
        Command::Verify { check, run, trials } => {
            let run = Run::new(run, file);
            let trials = trials.or(file.trials);
            verify(&check, &run, trials)
        }
        Command::Scan { locus, run, sigma } => {
            let run = Run::new(run, file);
            let locus = locus_name(locus, file)?;
            let sigma = stored_sigma(sigma, file)?;
            let p = run_prime(&run, sigma.as_ref())?;
            let budget = run.budget.unwrap_or(DEFAULT_BUDGET);
            let report = timed(run.timings, || {
                scan_locus(&locus, p, run.seed, budget, sigma.as_ref())
            })?;
            println!(
                "{locus} over F_{p}: {} of {} points",
                report.metrics["count"], report.metrics["ambient_points"]
            );
            finish(vec![report], run.out.as_deref())
        }
        Command::EstimateDim {
            locus,
            run,
            trials,
            sigma,
        } => {
            let run = Run::new(run, file);
            let locus = locus_name(locus, file)?;
            let sigma = stored_sigma(sigma, file)?;
            let p = run_prime(&run, sigma.as_ref())?;
            let mut slice = SliceConfig::default();
            if let Some(t) = trials.or(file.trials) {
                slice.trials = t;
            }
            if let Some(b) = run.budget {
                slice.budget = b;
            }
            let report = timed(run.timings, || {
                estimate_locus(&locus, p, run.seed, &slice, sigma.as_ref())
            })?;
            let note = &report.metrics["estimate"]["confidence_note"];
            println!(
                "{locus} over F_{p}: estimated dimension {} ({})",
                report.metrics["estimated_dim"],
                note.as_str().unwrap_or("")
            );
            finish(vec![report], run.out.as_deref())
        }
        Command::Report { inputs, out } => {
            let mut reports = Vec::new();
            for path in &inputs {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                reports.extend(read_reports(&text)?);
            }
            finish(reports, out.or_else(|| file.out.clone()).as_deref())
        }
    }
}

fn sample(kind: DivisorKind, p: u32, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let field = PrimeField::new(p)?;
    let w = sample_trivector(&mut rng_from_seed(seed), field, kind);
    match out {
        Some(path) => store_trivector(&w.sigma, path)?,
        None => println!("{}", trivector_to_json(&w.sigma)),
    }
    let flag: Vec<_> = w.flag.spaces().iter().map(|s| s.basis().to_vec()).collect();
    eprintln!(
        "{}",
        json!({ "kind": kind, "p": p, "seed": seed, "flag": flag })
    );
    Ok(())
}

fn verify(check: &str, run: &Run, trials: Option<usize>) -> Result<u8, CliError> {
    let ids: Vec<&str> = if check == "all" {
        CHECK_IDS.to_vec()
    } else if CHECK_IDS.contains(&check) {
        vec![check]
    } else {
        return Err(CliError::Usage(format!(
            "unknown check `{check}`; known: all, {}",
            CHECK_IDS.join(", ")
        )));
    };
    let cfg = CheckConfig {
        seed: run.seed,
        p: run.p,
        trials,
        budget: run.budget,
    };
    let mut reports = Vec::new();
    for id in ids {
        reports.push(timed(run.timings, || run_check(id, &cfg))?);
    }
    finish(reports, run.out.as_deref())
}

fn timed(
    on: bool,
    f: impl FnOnce() -> peskine_core::Result<CheckReport>,
) -> Result<CheckReport, CliError> {
    let start = Instant::now();
    let mut report = f()?;
    if on {
        report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

fn finish(reports: Vec<CheckReport>, out: Option<&Path>) -> Result<u8, CliError> {
    let agg: Aggregate = emit_report(reports, out)?;
    print!("{}", agg.table());
    Ok(u8::from(agg.has_failure()))
}

fn locus_name(flag: Option<String>, file: &FileConfig) -> Result<String, CliError> {
    let name = flag
        .or_else(|| file.locus.clone())
        .ok_or_else(|| CliError::Usage("--locus is required".into()))?;
    if !LOCI.contains(&name.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown locus `{name}`; known: {}",
            LOCI.join(", ")
        )));
    }
    Ok(name)
}

fn stored_sigma(
    flag: Option<PathBuf>,
    file: &FileConfig,
) -> Result<Option<peskine_core::Trivector>, CliError> {
    flag.or_else(|| file.sigma.clone())
        .map(|path| load_trivector(&path))
        .transpose()
        .map_err(|e| match e {
            Error::Io(io) => CliError::Usage(format!("cannot read trivector: {io}")),
            other => other.into(),
        })
}

/// `--p`, falling back to the prime of a stored trivector.
fn run_prime(run: &Run, sigma: Option<&peskine_core::Trivector>) -> Result<u32, CliError> {
    match (run.p, sigma) {
        (Some(p), Some(s)) if p != s.field().p() => Err(CliError::Usage(format!(
            "--p {p} disagrees with the stored trivector over F_{}",
            s.field().p()
        ))),
        (Some(p), _) => Ok(p),
        (None, Some(s)) => Ok(s.field().p()),
        (None, None) => Err(CliError::Usage("--p is required".into())),
    }
}
