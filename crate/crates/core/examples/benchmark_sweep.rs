//! Run an experiment config and write CSV, JSON and SVG output.
//!
//!     cargo run --example benchmark_sweep -- configs/micro.json out/micro

use std::path::PathBuf;

use fairclust::bench::{run, ExperimentConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| "configs/micro.json".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/micro".into()));
    let cfg = ExperimentConfig::load(&config)?;
    let report = run(&cfg, &RunOptions::default())?;
    print!("{}", report.to_csv());
    for path in report.write_outputs(&out, cfg.plots)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
