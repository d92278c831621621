use std::time::Instant;

use rand::Rng as _;
use sparsekm::gap::{gap_statistic, GapConfig};
use sparsekm::rng::rng_from;
use sparsekm::sparse::top_indices_by_sort;
use sparsekm::synth::{generate, MixtureSpec};
use sparsekm::{
    l0_weight_update, run_kmeans, sparse_kmeans, BcssVector, FeatureWeights, KmeansConfig,
    SparseKmeansConfig, SparseMethod,
};

#[test]
fn full_sparsity_matches_plain_kmeans() {
    for seed in 0..5 {
        let spec = MixtureSpec::three_cluster(1.0, 10, 15, 5).with_seed(seed);
        let m = generate(&spec).unwrap().0.standardize(true).unwrap();
        let inner = KmeansConfig::new(3).with_seed(seed);
        let fit =
            sparse_kmeans(&m, &SparseKmeansConfig::new(SparseMethod::L0, 15.0, inner)).unwrap();
        assert!(fit.weights.values().iter().all(|&w| w == 1.0));
        assert_eq!(fit.selected_features.len(), 15);
        assert!(fit.converged);
        assert_eq!(fit.history.last().unwrap().change, 0.0);
        let plain = run_kmeans(&m, &FeatureWeights::ones(15), &inner).unwrap();
        assert_eq!(fit.partition, plain.partition);
    }
}

#[test]
fn strong_signal_recovers_the_support() {
    let hits = (0..20)
        .filter(|&seed| {
            let spec = MixtureSpec::three_cluster(2.0, 20, 200, 20).with_seed(seed);
            let (raw, truth) = generate(&spec).unwrap();
            let m = raw.standardize(true).unwrap();
            let cfg = SparseKmeansConfig::new(
                SparseMethod::L0,
                20.0,
                KmeansConfig::new(3).with_seed(seed),
            );
            sparse_kmeans(&m, &cfg).unwrap().selected_features == truth.support
        })
        .count();
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn tuned_l1_keeps_more_features_than_tuned_l0() {
    let mut more = 0;
    for seed in 0..20 {
        let spec = MixtureSpec::three_cluster(0.6, 20, 200, 50).with_seed(seed);
        let m = generate(&spec).unwrap().0.standardize(true).unwrap();
        let inner = KmeansConfig::new(3).with_restarts(5);
        let nw = |method| {
            let mut cfg = GapConfig::new(method, m.p(), inner);
            cfg.seed = seed;
            let profile = gap_statistic(&m, &cfg).unwrap();
            let fit = sparse_kmeans(
                &m,
                &cfg.sparse_config(profile.chosen_s, profile.chosen_index()),
            )
            .unwrap();
            fit.selected_features.len()
        };
        if nw(SparseMethod::L1) > nw(SparseMethod::L0) {
            more += 1;
        }
    }
    assert!(more >= 15, "{more}/20");
}

#[test]
fn weight_steps_ascend_and_stay_feasible() {
    for seed in 0..10 {
        let spec = MixtureSpec::three_cluster(0.8, 10, 40, 8).with_seed(seed);
        let m = generate(&spec).unwrap().0.standardize(true).unwrap();
        let inner = KmeansConfig::new(3).with_seed(seed).with_restarts(3);
        for (method, s) in [(SparseMethod::L0, 8.0), (SparseMethod::L1, 3.0)] {
            let fit = sparse_kmeans(&m, &SparseKmeansConfig::new(method, s, inner)).unwrap();
            // the uniform start is not feasible for either constraint set,
            // so ascent is only guaranteed from the second step
            for step in fit.history.iter().skip(1) {
                assert!(
                    step.objective_after >= step.objective_before * (1.0 - 1e-12),
                    "{method:?} {step:?}"
                );
            }
            let w = fit.weights.values();
            match method {
                SparseMethod::L0 => {
                    assert!(w.iter().all(|&x| x == 0.0 || x == 1.0));
                    assert!(w.iter().filter(|&&x| x == 1.0).count() <= 8);
                }
                SparseMethod::L1 => {
                    let l2 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                    assert!((l2 - 1.0).abs() < 1e-9);
                    assert!(w.iter().sum::<f64>() <= s * (1.0 + 1e-9));
                }
            }
        }
    }
}

#[test]
fn unconstrained_l1_is_a_unit_vector() {
    let spec = MixtureSpec::three_cluster(1.0, 10, 16, 4).with_seed(2);
    let m = generate(&spec).unwrap().0.standardize(true).unwrap();
    let cfg = SparseKmeansConfig::new(SparseMethod::L1, 4.0, KmeansConfig::new(3).with_seed(2));
    let fit = sparse_kmeans(&m, &cfg).unwrap();
    let l2 = fit
        .weights
        .values()
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    assert!((l2 - 1.0).abs() < 1e-12);
    assert!(fit.weights.values().iter().all(|&x| x > 0.0));
    let again = sparse_kmeans(&m, &cfg).unwrap();
    assert_eq!(again.weights, fit.weights);
    assert_eq!(again.partition, fit.partition);
}

#[test]
fn hard_threshold_on_a_million_features_is_fast() {
    let mut rng = rng_from(1);
    let a: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
    let bcss = BcssVector::new(a.clone());
    let start = Instant::now();
    let w = l0_weight_update(&bcss, 5000.0).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "{elapsed:?}");
    let mut expected = top_indices_by_sort(&a, 5000);
    expected.sort_unstable();
    assert_eq!(w.selected(), expected);
}
