//! Draws each named benchmark and reports its shape, plus the empirical
//! lag correlations of the AR(1) noise variant.
//!
//! cargo run --release --example synthetic_benchmarks

use sparsekm::synth::{benchmark_spec, generate, ExperimentId, MixtureSpec};

fn main() -> sparsekm::Result<()> {
    for family in ["E1", "E2", "E3", "E4"] {
        for id in ExperimentId::family(family)? {
            let spec = benchmark_spec(id)?.with_seed(1);
            let (m, truth) = generate(&spec)?;
            println!(
                "{id}: n={} p={} K={} relevant={} rho={}",
                m.n(),
                m.p(),
                spec.k,
                truth.support.len(),
                spec.rho
            );
        }
    }

    let spec = MixtureSpec::ladder(1, 20_000, 4, 1, 0.0)
        .with_rho(0.3)
        .with_seed(5);
    let (m, _) = generate(&spec)?;
    let corr = |a: usize, b: usize| {
        let (x, y) = (m.column(a), m.column(b));
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let cov: f64 = x.iter().zip(&y).map(|(u, v)| (u - mx) * (v - my)).sum();
        let vx: f64 = x.iter().map(|u| (u - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    };
    for lag in 1..4 {
        println!(
            "lag {lag}: empirical {:.3}, target {:.3}",
            corr(0, lag),
            0.3f64.powi(lag as i32)
        );
    }
    Ok(())
}
