//! Lloyd's algorithm under a feature-weighted distance: zeroing the weight
//! of a noisy column lets k-means find the structure in the other one.
//!
//! cargo run --example weighted_kmeans

use sparsekm::metrics::cer;
use sparsekm::synth::{generate, MixtureSpec};
use sparsekm::{run_kmeans, FeatureWeights, KmeansConfig, WeightRegime};

fn main() -> sparsekm::Result<()> {
    // two clusters separated in feature 0 only, plus 9 noise features
    let spec = MixtureSpec::ladder(2, 30, 10, 1, 4.0).with_seed(11);
    let (raw, truth) = generate(&spec)?;
    let m = raw.standardize(false)?;
    let cfg = KmeansConfig::new(2).with_seed(3);

    let plain = run_kmeans(&m, &FeatureWeights::ones(m.p()), &cfg)?;
    let mut w = vec![0.0; m.p()];
    w[0] = 1.0;
    let focused = run_kmeans(&m, &FeatureWeights::new(w, WeightRegime::L0)?, &cfg)?;

    for (name, r) in [("all features", &plain), ("feature 0 only", &focused)] {
        println!(
            "{name}: WCSS {:.2}, {} Lloyd iterations, CER {:.3}",
            r.wcss,
            r.iters_used,
            cer(r.partition.labels(), &truth.labels)?
        );
    }
    Ok(())
}
