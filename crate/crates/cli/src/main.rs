//! Command-line front end: reads an INI (or JSON) run configuration, runs one
//! solver or simulation and writes CSV artifacts plus `summary.json`.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;

/// Environment variable overriding `[sim] threads`.
pub const THREADS_ENV: &str = "BANDIT_BONUS_THREADS";

#[derive(Parser)]
#[command(
    name = "bandit-bonus",
    version,
    about = "Optimal review bonuses and pricing under social learning",
    after_help = "Exit codes: 0 success, 1 i/o, 2 usage, 3 configuration, 4 invariant or assumption violated, 5 solver failure.\n\
                  The thread count of simulations can be overridden with BANDIT_BONUS_THREADS."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration: INI file, or a JSON configuration / summary.json from an earlier run.
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Finite or infinite horizon bonus schedules, fixed points and strategy profits.
    ///
    /// Writes policy.csv (t,fc,pc: bonus by period for the full- and
    /// partial-coverage schedules) and summary.json.
    SolveDiscrete(RunArgs),
    /// Continuous-time policy: switching beliefs, value and bonus curves.
    ///
    /// Regenerates the seller's value and bonus as functions of the belief,
    /// with the safe, partial, full, immediate-revelation and no-bonus regions.
    /// Writes policy.csv (alpha,value,bonus,region) and summary.json.
    SolveContinuous(RunArgs),
    /// Social planner benchmark: value, reporting cutoffs and the implementing mechanism.
    ///
    /// Regenerates the planner's value and its two reporting-cost cutoffs by
    /// belief (policy.csv: alpha,W,c1,c2,report_prob) and the allocation,
    /// reporting duty and transfer table (mechanism.csv: alpha,c,p,q,t).
    SolvePlanner(RunArgs),
    /// Monte Carlo estimate of the optimal policy's profit.
    ///
    /// Continuous models start at `[sim] alpha0`; discrete models need an [r1]
    /// law. With `[sim] trace_paths` > 0 also writes trace.csv with per-period
    /// beliefs, bonuses, costs, reports and discounted cash flows.
    Simulate(RunArgs),
    /// Strategy profits across safe-arm values.
    ///
    /// Regenerates the profit of every strategy (full coverage, partial
    /// coverage, safe arm, no bonus, immediate revelation) against the safe
    /// value R2 on `[sweep] r2_min..r2_max`, with the winning strategy.
    /// Writes sweep.csv (r2,pi_fc,pi_pc,pi_sa,pi_nb,pi_ir,winner).
    Sweep(RunArgs),
    /// Planner welfare, social surplus and seller profit by belief.
    ///
    /// Regenerates the welfare comparison curves W (planner), Lambda (social
    /// surplus under the seller's policy) and Pi (seller profit), and checks
    /// W >= Lambda >= Pi. Writes welfare.csv (alpha,W,Lambda,Pi).
    CompareWelfare(RunArgs),
    /// Checks every assumption of a configuration without solving and reports its regime.
    Validate {
        /// Run configuration (INI or JSON).
        config: PathBuf,
    },
}

fn load(path: &Path, out: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    cfg.apply_env()?;
    if let Some(dir) = out {
        cfg.output.directory = dir.clone();
    }
    cfg.check()?;
    Ok(cfg)
}

fn run(name: &str, args: &RunArgs, f: fn(&RunConfig) -> Result<commands::Artifacts, CliError>) -> Result<(), CliError> {
    let cfg = load(&args.config, args.out.as_ref())?;
    let artifacts = f(&cfg)?;
    let summary = json!({
        "command": name,
        "config": cfg,
        "results": artifacts.results,
    });
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    let dir = &cfg.output.directory;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for (file, bytes) in &artifacts.files {
        let path = dir.join(file);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let path = dir.join("summary.json");
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    let names: Vec<&str> = artifacts.files.iter().map(|(n, _)| *n).chain(["summary.json"]).collect();
    println!("{name}: wrote {} to {}", names.join(", "), dir.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SolveDiscrete(a) => run("solve-discrete", &a, commands::solve_discrete),
        Command::SolveContinuous(a) => run("solve-continuous", &a, commands::solve_continuous),
        Command::SolvePlanner(a) => run("solve-planner", &a, commands::solve_planner),
        Command::Simulate(a) => run("simulate", &a, commands::simulate),
        Command::Sweep(a) => run("sweep", &a, commands::sweep),
        Command::CompareWelfare(a) => run("compare-welfare", &a, commands::compare_welfare),
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            print!("{}", commands::validate(&cfg)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bandit-bonus: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
