use rand::Rng as _;
use sparsekm::kmeans::{kmeans_pp_init, lloyd_weighted, Centroids};
use sparsekm::rng::rng_from;
use sparsekm::{run_kmeans, weighted_wcss, DataMatrix, FeatureWeights, KmeansConfig, WeightRegime};

fn random_matrix(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut rng = rng_from(seed);
    let values = (0..n * p).map(|_| rng.random_range(-3.0..3.0)).collect();
    DataMatrix::new(n, p, values).unwrap()
}

fn random_weights(p: usize, seed: u64) -> FeatureWeights {
    let mut rng = rng_from(seed ^ 0xabc);
    let mut w: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..2.0)).collect();
    w[0] += 0.1;
    FeatureWeights::new(w, WeightRegime::Uniform).unwrap()
}

#[test]
fn wcss_never_increases_across_iterations() {
    for seed in 0..50 {
        let m = random_matrix(40, 4, seed);
        let w = random_weights(4, seed);
        let cfg = KmeansConfig::new(3).with_seed(seed);
        let r = run_kmeans(&m, &w, &cfg).unwrap();
        for pair in r.wcss_trace.windows(2) {
            assert!(
                pair[1] <= pair[0] * (1.0 + 1e-12),
                "seed {seed}: {:?}",
                r.wcss_trace
            );
        }
        let direct = weighted_wcss(&m, &r.partition, &w).unwrap();
        assert!((r.wcss - direct).abs() <= 1e-9 * direct.max(1.0));
    }
}

#[test]
fn scaling_the_weights_scales_wcss_and_keeps_labels() {
    // powers of two keep every floating-point comparison exact
    for seed in 0..20 {
        let m = random_matrix(30, 5, seed);
        let w = random_weights(5, seed);
        let cfg = KmeansConfig::new(3).with_seed(seed);
        let base = run_kmeans(&m, &w, &cfg).unwrap();
        for c in [0.25, 4.0, 1024.0] {
            let r = run_kmeans(&m, &w.scaled(c).unwrap(), &cfg).unwrap();
            assert_eq!(r.partition, base.partition);
            assert!((r.wcss - c * base.wcss).abs() <= 1e-12 * c * base.wcss);
        }
    }
}

#[test]
fn more_restarts_never_hurt() {
    for seed in 0..50 {
        let m = random_matrix(25, 3, seed + 100);
        let w = FeatureWeights::ones(3);
        let one = run_kmeans(
            &m,
            &w,
            &KmeansConfig::new(4).with_seed(seed).with_restarts(1),
        )
        .unwrap();
        let ten = run_kmeans(
            &m,
            &w,
            &KmeansConfig::new(4).with_seed(seed).with_restarts(10),
        )
        .unwrap();
        assert!(ten.wcss <= one.wcss, "seed {seed}");
    }
}

#[test]
fn seeding_splits_two_blobs() {
    let mut rows = Vec::new();
    let mut rng = rng_from(9);
    for i in 0..40 {
        let centre = if i < 20 { -10.0 } else { 10.0 };
        rows.push(vec![
            centre + rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ]);
    }
    let m = DataMatrix::from_rows(&rows).unwrap();
    let w = FeatureWeights::ones(2);
    let split = (0..200)
        .filter(|&seed| {
            let s = kmeans_pp_init(&m, &w, 2, seed).unwrap();
            (s.rows[0] < 20) != (s.rows[1] < 20)
        })
        .count();
    assert!(split >= 190, "{split}/200");
}

#[test]
fn lloyd_from_true_centres_recovers_blobs() {
    let m = DataMatrix::from_rows(&[
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![10.0, 0.0],
        vec![10.0, 1.0],
    ])
    .unwrap();
    let init = Centroids::new(2, 2, vec![0.0, 0.5, 10.0, 0.5]).unwrap();
    let r = lloyd_weighted(&m, &FeatureWeights::ones(2), &init, &KmeansConfig::new(2)).unwrap();
    assert_eq!(r.partition.labels(), &[0, 0, 1, 1]);
    assert_eq!(r.iters_used, 1);
}
