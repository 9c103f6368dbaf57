mod config;
mod error;
mod output;
mod scenarios;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{canonical_scenario, resolve, ExperimentConfig, SCENARIOS};
use crate::error::CliError;
use crate::output::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "regfrac", version, about = "Regional fractional Laplacian experiments")]
struct Cli {
    /// TOML experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scenario name (alternative to the subcommand).
    #[arg(long, global = true)]
    scenario: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for assembly (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    Constants,
    EvalOp,
    Solve,
    Rates,
    Eigen,
    Extension,
    #[command(name = "limit-s1")]
    LimitS1,
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::EvalOp => "eval-op",
            Command::Solve => "solve",
            Command::Rates => "rates",
            Command::Eigen => "eigen",
            Command::Extension => "extension",
            Command::LimitS1 => "limit-s1",
            Command::All => "all",
        }
    }
}

struct Settings {
    scenario: &'static str,
    cfg: ExperimentConfig,
    out: PathBuf,
    threads: usize,
}

fn settings(cli: Cli) -> Result<Settings, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let from_cmd = cli.command.as_ref().map(Command::name);
    let from_flag = cli.scenario.as_deref().map(canonical_scenario).transpose()?;
    let from_file = cfg.scenario.as_deref().map(canonical_scenario).transpose()?;
    let scenario = match (from_cmd, from_flag) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Config(format!("subcommand {a} conflicts with --scenario {b}")));
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => from_file.ok_or_else(|| CliError::Config("no scenario given".into()))?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    let threads = cli.threads.or(cfg.threads).unwrap_or(0);
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("regfrac-out"));
    Ok(Settings { scenario, cfg, out, threads })
}

fn run_one(name: &'static str, cfg: &ExperimentConfig, dir: &Path, threads: usize) -> Result<Vec<String>, CliError> {
    let r = resolve(name, cfg)?;
    let start = Instant::now();
    let result = scenarios::run(&r)?;
    let elapsed = start.elapsed().as_secs_f64();
    let sub = dir.join(name);
    let mut files = Vec::new();
    for t in &result.tables {
        let file = format!("{}.csv", t.name);
        write_atomic(&sub.join(&file), &t.to_csv()?)?;
        files.push(file);
    }
    let manifest = json!({
        "scenario": name,
        "version": env!("CARGO_PKG_VERSION"),
        "config": r,
        "tolerances": result.tolerances,
        "files": files,
        "threads": threads,
        "seed": r.seed,
        "wall_seconds": elapsed,
    });
    write_atomic(&sub.join("manifest.json"), &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(files.into_iter().map(|f| format!("{name}/{f}")).collect())
}

fn execute(s: &Settings) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    pool.install(|| {
        if s.scenario == "all" {
            let start = Instant::now();
            let mut files = Vec::new();
            for name in SCENARIOS {
                files.extend(run_one(name, &s.cfg, &s.out, threads)?);
            }
            let manifest = json!({
                "scenario": "all",
                "version": env!("CARGO_PKG_VERSION"),
                "scenarios": SCENARIOS,
                "files": files,
                "threads": threads,
                "seed": s.cfg.seed.unwrap_or(0),
                "wall_seconds": start.elapsed().as_secs_f64(),
            });
            write_atomic(&s.out.join("manifest.json"), &serde_json::to_vec_pretty(&manifest)?)
        } else {
            run_one(s.scenario, &s.cfg, &s.out, threads).map(|_| ())
        }
    })
}

fn report(err: &CliError, out: Option<&Path>) -> ExitCode {
    let record = json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
    });
    eprintln!("{record}");
    if let Some(dir) = out {
        if let Ok(bytes) = serde_json::to_vec_pretty(&record) {
            let _ = write_atomic(&dir.join("error.json"), &bytes);
        }
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report(&CliError::Config(e.to_string()), None);
        }
    };
    let s = match settings(cli) {
        Ok(s) => s,
        Err(e) => return report(&e, None),
    };
    match execute(&s) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, Some(&s.out)),
    }
}
