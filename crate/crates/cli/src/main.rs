use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use dvec_cli::config::{load_config, ExperimentSpec};
use dvec_cli::driver::{compute_oracles, run_experiment, thread_pool};
use dvec_cli::output::{write_experiment, write_oracle_file};

/// Decentralized Voronoi coverage experiments.
#[derive(Parser)]
#[command(name = "dvec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides `experiment.output_dir`.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads (overrides `experiment.parallelism`).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    parallelism: Option<u64>,
    /// Overrides `experiment.seed`, the root of all run and oracle seeds.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every density x mode x seed and write metrics, oracle costs and fields.
    Run { config: PathBuf },
    /// Compute only the reference coverage cost of each density.
    Oracle { config: PathBuf },
    /// Check a configuration without running anything.
    Validate { config: PathBuf },
}

const VALIDATION_FAILURE: u8 = 1;
const RUNTIME_FAILURE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(VALIDATION_FAILURE) } else { ExitCode::SUCCESS };
        }
    };
    let path = match &cli.command {
        Command::Run { config } | Command::Oracle { config } | Command::Validate { config } => config,
    };
    let mut spec = match load_config(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(VALIDATION_FAILURE);
        }
    };
    apply_overrides(&mut spec, &cli);
    match execute(&cli.command, &spec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(RUNTIME_FAILURE)
        }
    }
}

fn apply_overrides(spec: &mut ExperimentSpec, cli: &Cli) {
    if let Some(d) = &cli.output_dir {
        spec.output_dir = d.clone();
    }
    if let Some(p) = cli.parallelism {
        spec.parallelism = p as usize;
    }
    if let Some(s) = cli.seed_override {
        spec.experiment_seed = s;
    }
}

fn execute(command: &Command, spec: &ExperimentSpec) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Validate { config } => {
            println!(
                "{}: ok ({} densities x {} modes x {} seeds = {} runs, {} iterations each)",
                config.display(),
                spec.scenarios.len(),
                spec.modes.len(),
                spec.seeds.len(),
                spec.run_count(),
                spec.iterations()
            );
        }
        Command::Oracle { .. } => {
            let pool = thread_pool(spec.parallelism)?;
            let oracles = compute_oracles(spec, &pool);
            let path = write_oracle_file(&spec.output_dir, &oracles)?;
            for o in &oracles {
                println!("{}: best cost {:.9}", o.density_id, o.result.best_cost);
            }
            println!("wrote {}", path.display());
        }
        Command::Run { .. } => {
            let start = Instant::now();
            let result = run_experiment(spec)?;
            write_experiment(&spec.output_dir, &result)?;
            let flagged = result.runs.iter().flat_map(|r| &r.metrics.iterations).filter(|m| !m.warn.is_empty()).count();
            println!(
                "{} runs in {:.1}s; {} rows with warnings; output in {}",
                result.runs.len(),
                start.elapsed().as_secs_f64(),
                flagged,
                spec.output_dir.display()
            );
        }
    }
    Ok(())
}
