//! Standardizes a small matrix and splits its total dispersion into the
//! per-feature between-cluster parts and the within-cluster remainder.
//!
//! cargo run --example standardize_and_bcss

use sparsekm::{bcss_per_feature, total_ss, weighted_wcss, DataMatrix, FeatureWeights, Partition};

fn main() -> sparsekm::Result<()> {
    let raw = DataMatrix::from_rows(&[
        vec![1.0, 10.0, 0.3],
        vec![1.2, 11.0, -0.2],
        vec![5.1, 10.5, 0.1],
        vec![4.9, 9.5, 0.4],
    ])?;
    let m = raw.standardize(false)?;
    let c = Partition::new(vec![0, 0, 1, 1], 2)?;
    let a = bcss_per_feature(&m, &c)?;
    println!("a_j = {:?}", a.values());

    let w = FeatureWeights::ones(m.p());
    let between = a.dot(&w);
    let within = weighted_wcss(&m, &c, &w)?;
    println!(
        "between {between:.4} + within {within:.4} = total {:.4}",
        total_ss(&m, &w)?
    );
    Ok(())
}
