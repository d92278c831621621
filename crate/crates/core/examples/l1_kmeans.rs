//! Soft-thresholded sparse k-means: weights shrink smoothly, so more
//! features stay active than under hard thresholding at a comparable level.
//!
//! cargo run --release --example l1_kmeans

use sparsekm::metrics::{cer, feature_counts};
use sparsekm::synth::{generate, MixtureSpec};
use sparsekm::{l0_kmeans, l1_kmeans, KmeansConfig, SparseKmeansConfig, SparseMethod};

fn main() -> sparsekm::Result<()> {
    let spec = MixtureSpec::three_cluster(1.0, 20, 200, 20).with_seed(1);
    let (raw, truth) = generate(&spec)?;
    let m = raw.standardize(true)?;
    let inner = KmeansConfig::new(3).with_seed(1);

    // ‖w‖₁ ≤ √20 admits exactly the 20-feature uniform vector
    let l1 = l1_kmeans(
        &m,
        &SparseKmeansConfig::new(SparseMethod::L1, 20f64.sqrt(), inner),
    )?;
    let l0 = l0_kmeans(&m, &SparseKmeansConfig::new(SparseMethod::L0, 20.0, inner))?;
    for (name, fit) in [("l1", &l1), ("l0", &l0)] {
        let counts = feature_counts(fit.weights.values(), &truth.support)?;
        println!(
            "{name}: CER {:.3}, {} nonzero weights ({} relevant)",
            cer(fit.partition.labels(), &truth.labels)?,
            counts.nw,
            counts.pnw
        );
    }
    let mut top: Vec<(usize, f64)> = l1.weights.values().iter().copied().enumerate().collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("largest l1 weights: {:?}", &top[..5]);
    Ok(())
}
