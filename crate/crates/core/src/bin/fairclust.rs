use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairclust::acceptance::{run_all, AcceptOptions};
use fairclust::bench::{run, ExperimentConfig, RunOptions};
use fairclust::{brute_force_opt, Instance, OracleOptions};

#[derive(Parser)]
#[command(version, about = "Socially fair clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Keep per-iteration rounding traces.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run { config: PathBuf },
    /// Exact optimum of a JSON instance by enumeration.
    Oracle { instance: PathBuf },
    /// Run the acceptance suite.
    Accept {
        /// Directory with the credit and compas dataset specs.
        #[arg(long, default_value = "datasets")]
        datasets: PathBuf,
        /// Skip the second run that checks byte-identical reports.
        #[arg(long)]
        single_run: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn write_file(path: PathBuf, body: &str) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, body)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let report = run(&cfg, &RunOptions { trace: cli.trace })?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            for path in report.write_outputs(&out, cfg.plots)? {
                eprintln!("wrote {}", path.display());
            }
            for row in report.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "failed: {} {} k={} {}: {}",
                    row.dataset,
                    row.algorithm.name(),
                    row.k,
                    row.params,
                    row.error.as_deref().unwrap_or_default()
                );
            }
            println!("{} rows, {} failed", report.rows.len(), report.failures());
            Ok(report.failures() == 0)
        }
        Command::Oracle { instance } => {
            let inst = Instance::load_json(instance)?;
            let (centers, cost) = brute_force_opt(&inst, &OracleOptions::default())?;
            let body = serde_json::to_string_pretty(&serde_json::json!({
                "centers": centers,
                "per_group": cost.per_group,
                "objective": cost.objective,
            }))?;
            println!("{body}");
            if let Some(dir) = &cli.out {
                write_file(dir.join("oracle.json"), &body)?;
            }
            Ok(true)
        }
        Command::Accept { datasets, single_run } => {
            let report = run_all(&AcceptOptions {
                datasets_dir: datasets.clone(),
                check_determinism: !single_run,
            });
            for line in report.lines() {
                println!("{line}");
            }
            if let Some(dir) = &cli.out {
                write_file(dir.join("acceptance.json"), &report.to_json())?;
            }
            Ok(report.all_passed())
        }
    }
}
