use std::path::PathBuf;
use std::process::ExitCode;

use aoi_core::experiment::config::{parse_config, TargetsFile};
use aoi_core::experiment::graphs::enumerate_connected_graphs;
use aoi_core::experiment::output::write_json;
use aoi_core::experiment::sweep::{run_experiment, run_sweep, SweepReport};
use aoi_core::policy::dp::value_iteration_oracle;
use aoi_core::{Error, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aoi", version, about = "Age-of-information scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario and policy in a config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `simulation.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Like `run`, isolating failing scenarios and ranking the results.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write all connected graphs on `n` nodes as JSON.
    EnumerateGraphs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a single-scenario config by value iteration and write targets.
    OracleDp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_cells(report: &SweepReport) {
    for c in &report.cells {
        let ci = c
            .total_cost
            .ci95
            .map(|(lo, hi)| format!(" [{lo:.4}, {hi:.4}]"))
            .unwrap_or_default();
        println!("{}\t{}\t{:.4}{}", c.scenario_id, c.policy, c.total_cost.mean, ci);
    }
    for f in &report.failures {
        eprintln!("failed\t{}\t{}", f.scenario_id, f.message);
    }
    println!("results written to {}", report.out_dir.display());
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, seed, out } => {
            let mut cfg = parse_config(&config)?;
            if let Some(s) = seed {
                cfg.simulation.seed = s;
            }
            if out.is_some() {
                cfg.output_dir = out;
            }
            print_cells(&run_experiment(&cfg, &cfg.output_dir())?);
        }
        Command::Sweep { config } => {
            let cfg = parse_config(&config)?;
            print_cells(&run_sweep(&cfg, &cfg.output_dir())?);
        }
        Command::EnumerateGraphs { n, out } => {
            let graphs = enumerate_connected_graphs(n)?;
            write_json(&out, &graphs)?;
            println!("{} graphs on {n} nodes written to {}", graphs.len(), out.display());
        }
        Command::OracleDp { config, out } => {
            let cfg = parse_config(&config)?;
            let entries = cfg.scenario_entries()?;
            if entries.len() != 1 {
                return Err(Error::Config {
                    path: "scenarios".into(),
                    message: format!("oracle-dp needs exactly one scenario, got {}", entries.len()),
                });
            }
            let scenario = cfg.resolve_entry(0, &entries[0])?;
            let r = value_iteration_oracle(&scenario.instance, &cfg.dp, cfg.oracle_slots, cfg.simulation.seed)?;
            let file = TargetsFile {
                scenario_id: scenario.id,
                targets: r.targets,
                optimal_cost: r.solution.gain,
                gain_bounds: r.solution.gain_bounds,
                simulated_total: r.simulated_total,
                a_max: cfg.dp.a_max,
            };
            write_json(&out, &file)?;
            println!("optimal average cost {:.4}; targets written to {}", file.optimal_cost, out.display());
        }
    }
    Ok(())
}

fn error_record(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_record("usage", e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
