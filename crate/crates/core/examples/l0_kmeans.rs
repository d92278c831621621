//! Hard-thresholded sparse k-means at a fixed sparsity level.
//!
//! cargo run --release --example l0_kmeans

use sparsekm::metrics::{cer, feature_counts};
use sparsekm::synth::{generate, MixtureSpec};
use sparsekm::{l0_kmeans, KmeansConfig, SparseKmeansConfig, SparseMethod};

fn main() -> sparsekm::Result<()> {
    let spec = MixtureSpec::three_cluster(1.0, 20, 200, 20).with_seed(1);
    let (raw, truth) = generate(&spec)?;
    let m = raw.standardize(true)?;

    let cfg = SparseKmeansConfig::new(SparseMethod::L0, 20.0, KmeansConfig::new(3).with_seed(1));
    let fit = l0_kmeans(&m, &cfg)?;
    for step in &fit.history {
        println!(
            "objective {:.3} -> {:.3}, weight change {:.2e}",
            step.objective_before, step.objective_after, step.change
        );
    }
    let counts = feature_counts(fit.weights.values(), &truth.support)?;
    println!(
        "{} outer iterations (converged: {}), CER {:.3}, {} of {} relevant features kept, {} noise features dropped",
        fit.outer_iters,
        fit.converged,
        cer(fit.partition.labels(), &truth.labels)?,
        counts.pnw,
        spec.p_star,
        counts.pzw
    );
    println!("selected: {:?}", fit.selected_features);
    Ok(())
}
