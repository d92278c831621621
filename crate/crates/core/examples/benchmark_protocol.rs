//! Runs the benchmark protocol on one synthetic cell and prints the
//! per-method summary.
//!
//! cargo run --release --example benchmark_protocol -- E3a 5

use std::time::Instant;

use sparsekm::experiment::{run_cell, summarize, write_summary_csv, ExperimentConfig};
use sparsekm::synth::ExperimentId;

fn main() -> sparsekm::Result<()> {
    let mut args = std::env::args().skip(1);
    let id: ExperimentId = args.next().as_deref().unwrap_or("E3a").parse()?;
    let reps = args
        .next()
        .map_or(5, |r| r.parse().expect("reps must be an integer"));
    let cfg = ExperimentConfig {
        reps,
        seed: 2024,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let records = run_cell(id, &cfg)?;
    eprintln!("{id}: {reps} reps in {:.1?}", start.elapsed());
    write_summary_csv(&summarize(&records), std::io::stdout().lock())
}
