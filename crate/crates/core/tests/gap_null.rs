use sparsekm::gap::{gap_statistic, permute_columns, GapConfig};
use sparsekm::synth::{generate, MixtureSpec};
use sparsekm::{DataMatrix, KmeansConfig, SparseMethod};

fn noise(n: usize, p: usize, seed: u64) -> DataMatrix {
    let spec = MixtureSpec::three_cluster(0.0, n / 3, p, 1).with_seed(seed);
    generate(&spec).unwrap().0.standardize(true).unwrap()
}

#[test]
fn pure_noise_gives_an_insignificant_gap() {
    for seed in 0..3 {
        let m = noise(30, 50, seed);
        let mut cfg = GapConfig::new(
            SparseMethod::L0,
            m.p(),
            KmeansConfig::new(3).with_restarts(3),
        );
        cfg.seed = seed;
        let g = gap_statistic(&m, &cfg).unwrap();
        let quiet = (0..g.grid.len())
            .filter(|&i| g.gap[i].abs() <= 3.0 * g.se[i])
            .count();
        assert!(
            quiet * 5 >= g.grid.len() * 4,
            "seed {seed}: {quiet}/{}",
            g.grid.len()
        );
    }
}

#[test]
fn gap_on_permuted_data_averages_to_zero() {
    let reps = 50;
    let base = MixtureSpec::three_cluster(1.5, 7, 20, 5);
    let grid = vec![2.0, 5.0, 10.0, 20.0];
    let mut gaps = vec![Vec::new(); grid.len()];
    for r in 0..reps {
        let m = generate(&base.clone().with_seed(r))
            .unwrap()
            .0
            .standardize(true)
            .unwrap();
        let null = permute_columns(&m, 1000 + r);
        let mut cfg = GapConfig::new(
            SparseMethod::L0,
            m.p(),
            KmeansConfig::new(3).with_restarts(2),
        );
        cfg.grid = grid.clone();
        cfg.permutations = 5;
        cfg.seed = r;
        let g = gap_statistic(&null, &cfg).unwrap();
        for (i, v) in g.gap.iter().enumerate() {
            gaps[i].push(*v);
        }
    }
    for (i, col) in gaps.iter().enumerate() {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(
            mean.abs() <= 3.0 * sd / n.sqrt(),
            "s = {}: mean {mean}, sd {sd}",
            grid[i]
        );
    }
}

#[test]
fn l0_objective_mostly_grows_with_s() {
    let spec = MixtureSpec::three_cluster(0.8, 15, 200, 30).with_seed(4);
    let m = generate(&spec).unwrap().0.standardize(true).unwrap();
    let cfg = GapConfig::new(
        SparseMethod::L0,
        m.p(),
        KmeansConfig::new(3).with_restarts(5),
    );
    let g = gap_statistic(&m, &cfg).unwrap();
    let pairs = g.objective.len() - 1;
    let up = g.objective.windows(2).filter(|w| w[1] >= w[0]).count();
    assert!(up * 10 >= pairs * 9, "{up}/{pairs}: {:?}", g.objective);
    assert_eq!(g, gap_statistic(&m, &cfg).unwrap());
}

#[test]
fn clustered_data_has_a_clear_gap() {
    let spec = MixtureSpec::three_cluster(1.5, 15, 100, 10).with_seed(8);
    let m = generate(&spec).unwrap().0.standardize(true).unwrap();
    let cfg = GapConfig::new(
        SparseMethod::L0,
        m.p(),
        KmeansConfig::new(3).with_restarts(5),
    );
    let g = gap_statistic(&m, &cfg).unwrap();
    assert!(!g.is_flat());
    assert!((5.0..=30.0).contains(&g.chosen_s), "{}", g.chosen_s);
}
