use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discharge_core::experiment::{
    parse_config, run_convergence_study, run_self_similar_study, run_simulate, run_solve,
    run_validation_suite, write_solve, Experiment, ExperimentConfig,
};
use discharge_core::Error;

/// Random-discharge versus hard-wall integrate-and-fire experiments.
#[derive(Debug, Parser)]
#[command(name = "discharge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// δ-sweep of density and firing-rate discrepancies with power-law fits.
    Convergence,
    /// Self-similar fit of the density above threshold.
    Selfsim,
    /// Monte Carlo against Fokker–Planck cross-checks.
    Validate,
    /// Simulate an ensemble of paths.
    Simulate,
    /// Run one Fokker–Planck solve.
    Solve,
}

#[derive(Debug, Args)]
struct Overrides {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo path count.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Solver cell count.
    #[arg(long, global = true)]
    cells: Option<usize>,
    /// Solver time step.
    #[arg(long, global = true)]
    tau: Option<f64>,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Convergence => Experiment::Convergence,
            Command::Selfsim => Experiment::SelfSimilar,
            Command::Validate => Experiment::Validate,
            Command::Simulate => Experiment::Simulate,
            Command::Solve => Experiment::Solve,
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.overrides.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.experiment = cli.command.experiment();
    let o = &cli.overrides;
    if let Some(v) = &o.out {
        cfg.out = v.clone();
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.paths {
        cfg.paths = v;
    }
    if let Some(v) = o.cells {
        cfg.n_cells = v;
    }
    if let Some(v) = o.tau {
        cfg.tau = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the experiment and returns whether every check passed and every
/// cell succeeded.
fn run(cfg: &ExperimentConfig) -> Result<bool, Error> {
    let dir = &cfg.out;
    match cfg.experiment {
        Experiment::Convergence => {
            let study = run_convergence_study(cfg)?;
            study.write(cfg, dir)?;
            print!("{}", study.table1()?.render());
            Ok(study.failures() == 0)
        }
        Experiment::SelfSimilar => {
            let study = run_self_similar_study(cfg)?;
            study.write(cfg, dir)?;
            print!("{}", study.table2()?.render());
            Ok(study.failures() == 0)
        }
        Experiment::Validate => {
            let report = run_validation_suite(cfg)?;
            report.write(cfg, dir)?;
            for c in &report.checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                match &c.error {
                    Some(e) => println!("[{verdict}] {}: {e}", c.name),
                    None => println!(
                        "[{verdict}] {} = {} (tolerance {})",
                        c.name, c.value, c.tolerance
                    ),
                }
            }
            Ok(report.all_pass())
        }
        Experiment::Simulate => {
            let run = run_simulate(cfg)?;
            run.write(cfg, dir)?;
            println!("{} paths written to {}", run.paths.len(), dir.display());
            Ok(true)
        }
        Experiment::Solve => {
            let out = run_solve(cfg)?;
            write_solve(&out, cfg, dir)?;
            println!(
                "t = {}: mass {}, N {}",
                out.final_state.t,
                out.mass.last().copied().unwrap_or(f64::NAN),
                out.firing.values.last().copied().unwrap_or(f64::NAN)
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(&cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some checks failed or cells could not be computed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
