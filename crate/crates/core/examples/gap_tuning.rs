//! Chooses the sparsity level of hard-thresholded sparse k-means with the
//! permutation gap statistic on the six-cluster benchmark, then fits at
//! the chosen level.
//!
//! cargo run --release --example gap_tuning -- [seed]

use std::time::Instant;

use sparsekm::gap::{gap_statistic, GapConfig};
use sparsekm::metrics::{cer, feature_counts};
use sparsekm::synth::{benchmark_spec, generate, ExperimentId};
use sparsekm::{l0_kmeans, KmeansConfig, SparseMethod};

fn main() -> sparsekm::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(7, |s| s.parse().expect("seed must be an integer"));
    let spec = benchmark_spec(ExperimentId::E1)?.with_seed(seed);
    let (raw, truth) = generate(&spec)?;
    let m = raw.standardize(true)?;

    let mut cfg = GapConfig::new(
        SparseMethod::L0,
        m.p(),
        KmeansConfig::new(spec.k).with_seed(seed),
    );
    cfg.seed = seed;
    let start = Instant::now();
    let profile = gap_statistic(&m, &cfg)?;
    eprintln!(
        "gap profile over {} grid points in {:.1?}",
        cfg.grid.len(),
        start.elapsed()
    );
    profile.write_csv(std::io::stdout().lock())?;

    let fit = l0_kmeans(
        &m,
        &cfg.sparse_config(profile.chosen_s, profile.chosen_index()),
    )?;
    let counts = feature_counts(fit.weights.values(), &truth.support)?;
    println!(
        "chosen s = {} (flat: {}), CER = {:.3}, selected {} features, {} of {} relevant",
        profile.chosen_s,
        profile.is_flat(),
        cer(fit.partition.labels(), &truth.labels)?,
        counts.nw,
        counts.pnw,
        spec.p_star
    );
    Ok(())
}
