use sparsekm::lab::{run_trial, sweep};
use sparsekm::synth::MixtureSpec;
use sparsekm::{KmeansConfig, SparseKmeansConfig, SparseMethod};

fn cfg(seed: u64) -> SparseKmeansConfig {
    SparseKmeansConfig::new(
        SparseMethod::L0,
        10.0,
        KmeansConfig::new(3).with_seed(seed).with_restarts(5),
    )
}

#[test]
fn well_separated_clusters_give_exact_support() {
    let exact = (0..20)
        .filter(|&seed| {
            let spec = MixtureSpec::three_cluster(10.0, 20, 100, 10).with_seed(seed);
            run_trial(&spec, &cfg(seed)).unwrap().exact_support
        })
        .count();
    assert!(exact >= 19, "{exact}/20");
}

#[test]
fn no_signal_rarely_separates() {
    let mut events = 0;
    for seed in 0..100 {
        let spec = MixtureSpec::three_cluster(0.0, 20, 100, 10).with_seed(seed);
        let o = run_trial(&spec, &cfg(seed)).unwrap();
        assert!(!o.exact_support || o.gap_event);
        events += usize::from(o.gap_event);
    }
    assert!(events < 5, "{events}/100");
}

#[test]
fn sweeps_are_reproducible_and_ordered_by_n() {
    let base = MixtureSpec::three_cluster(1.0, 10, 60, 6);
    let c = cfg(0);
    let a = sweep(&base, &[60, 30], 20, &c, 5).unwrap();
    let b = sweep(&base, &[60, 30], 20, &c, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![30, 60]);
    for r in &a.rows {
        for f in [&r.freq_gap, &r.freq_support] {
            assert!(f.lower <= f.estimate && f.estimate <= f.upper);
            assert!((0.0..=1.0).contains(&f.estimate));
        }
    }
}
