//! Clustering error rate, purity-based error and feature-selection counts
//! on hand-made labelings.
//!
//! cargo run --example evaluation_metrics

use sparsekm::metrics::{cer, ecr, feature_counts, ConfusionProportions};

fn main() -> sparsekm::Result<()> {
    let truth = [0, 0, 0, 1, 1, 1, 2, 2, 2];
    let estimates: [(&str, [usize; 9]); 3] = [
        ("relabeled", [2, 2, 2, 0, 0, 0, 1, 1, 1]),
        ("one swap", [0, 0, 1, 1, 1, 1, 2, 2, 2]),
        ("merged", [0, 0, 0, 0, 0, 0, 1, 1, 1]),
    ];
    for (name, est) in &estimates {
        println!(
            "{name}: CER {:.3}, ECR {:.3}",
            cer(est, &truth)?,
            ecr(est, &truth)?
        );
    }
    let table = ConfusionProportions::new(&truth, &estimates[2].1)?;
    println!("merged confusion proportions: {:?}", table.pi);

    let weights = [1.0, 1.0, 0.0, 0.4, 0.0, 0.0];
    let counts = feature_counts(&weights, &[0, 1, 2])?;
    println!("NW {} PZW {} PNW {}", counts.nw, counts.pzw, counts.pnw);
    Ok(())
}
