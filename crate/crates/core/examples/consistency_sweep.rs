//! Monte Carlo sweep over sample sizes at the true sparsity level: how
//! often the relevant features' between-cluster sums all beat the noise
//! features', and how often the selected support is exact.
//!
//! cargo run --release --example consistency_sweep -- [trials]

use sparsekm::lab::sweep;
use sparsekm::synth::MixtureSpec;
use sparsekm::{KmeansConfig, SparseKmeansConfig, SparseMethod};

fn main() -> sparsekm::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map_or(30, |t| t.parse().expect("trials must be an integer"));
    let base = MixtureSpec::three_cluster(1.0, 10, 200, 20);
    let cfg = SparseKmeansConfig::new(
        SparseMethod::L0,
        20.0,
        KmeansConfig::new(3).with_restarts(5),
    );
    let report = sweep(&base, &[30, 60, 120, 240], trials, &cfg, 17)?;
    report.write_csv(std::io::stdout().lock())?;
    println!(
        "trends: gap {}, support {}, ecr {}",
        report.gap_trend_ok(),
        report.support_trend_ok(),
        report.ecr_trend_ok()
    );
    Ok(())
}
