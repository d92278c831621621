//! Feature-weighted Lloyd iterations with k-means++ seeding.
//!
//! The dissimilarity between a sample and a centroid is
//! `Σ_j w_j (x_ij − μ_kj)²`. Features with zero weight never influence an
//! assignment, so the iterations run on a compact copy holding only the
//! active columns; with hard-thresholded weights that is usually a small
//! fraction of `p`.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, FeatureWeights, Partition};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once the relative WCSS improvement of an iteration drops below this.
    pub tol: f64,
    pub seed: u64,
}

impl KmeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 10,
            max_iters: 100,
            tol: 1e-8,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidConfig(format!(
                "k = {} must lie in [1, {n}]",
                self.k
            )));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig(
                "restarts and max_iters must be positive".into(),
            ));
        }
        if self.tol < 0.0 || self.tol.is_nan() {
            return Err(Error::InvalidConfig("tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `k × p` centroid matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroids {
    k: usize,
    p: usize,
    values: Vec<f64>,
}

impl Centroids {
    pub fn new(k: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != k * p {
            return Err(Error::InvalidShape(format!(
                "{} values for {k} centroids of dimension {p}",
                values.len()
            )));
        }
        Ok(Self { k, p, values })
    }

    /// Copies the given rows of `m`.
    pub fn from_rows(m: &DataMatrix, rows: &[usize]) -> Self {
        let values = rows
            .iter()
            .flat_map(|&i| m.row(i).iter().copied())
            .collect();
        Self {
            k: rows.len(),
            p: m.p(),
            values,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, c: usize) -> &[f64] {
        &self.values[c * self.p..(c + 1) * self.p]
    }
}

/// Output of k-means++ seeding.
#[derive(Debug, Clone)]
pub struct Seeding {
    /// Row indices that became centroids, in selection order.
    pub rows: Vec<usize>,
    pub centroids: Centroids,
    /// Set when fewer than `k` distinct rows exist under the weighted metric
    /// and some centroids had to duplicate others.
    pub duplicates: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmeansResult {
    pub partition: Partition,
    /// Cluster means over all `p` features.
    pub centroids: Centroids,
    /// Weighted WCSS of `partition` (ordered-pair convention).
    pub wcss: f64,
    pub iters_used: usize,
    pub restart_index: usize,
    /// WCSS after every iteration.
    pub wcss_trace: Vec<f64>,
    /// Number of empty-cluster repairs performed.
    pub repairs: usize,
}

/// Active columns of a matrix, premultiplied layout for the weighted metric.
struct WeightedView {
    n: usize,
    q: usize,
    cols: Vec<usize>,
    weights: Vec<f64>,
    data: Vec<f64>,
}

impl WeightedView {
    fn new(m: &DataMatrix, w: &FeatureWeights) -> Result<Self> {
        if w.len() != m.p() {
            return Err(Error::LengthMismatch(format!(
                "{} weights for {} features",
                w.len(),
                m.p()
            )));
        }
        let cols: Vec<usize> = (0..m.p()).filter(|&j| w.values()[j] > 0.0).collect();
        if cols.is_empty() {
            return Err(Error::AllZeroWeights);
        }
        let weights = cols.iter().map(|&j| w.values()[j]).collect();
        let data = m
            .rows()
            .flat_map(|r| cols.iter().map(move |&j| r[j]))
            .collect();
        Ok(Self {
            n: m.n(),
            q: cols.len(),
            cols,
            weights,
            data,
        })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.q..(i + 1) * self.q]
    }

    #[inline]
    fn dist(&self, x: &[f64], c: &[f64]) -> f64 {
        x.iter()
            .zip(c)
            .zip(&self.weights)
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum()
    }

    fn compact(&self, c: &Centroids) -> Vec<f64> {
        (0..c.k())
            .flat_map(|k| self.cols.iter().map(move |&j| c.row(k)[j]))
            .collect()
    }
}

fn seed_rows(view: &WeightedView, k: usize, rng: &mut Rng) -> (Vec<usize>, bool) {
    let n = view.n;
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let mut duplicates = false;
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut dist: Vec<f64> = (0..n)
        .map(|i| view.dist(view.row(i), view.row(first)))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = 0;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 {
                    last_positive = i;
                    acc += d;
                    if acc > target {
                        pick = Some(i);
                        break;
                    }
                }
            }
            pick.unwrap_or(last_positive)
        } else {
            duplicates = true;
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        for (i, d) in dist.iter_mut().enumerate() {
            let e = view.dist(view.row(i), view.row(next));
            if e < *d {
                *d = e;
            }
        }
    }
    (chosen, duplicates)
}

/// k-means++ seeding under the weighted metric: the first centroid is a
/// uniformly random row, each further one is drawn with probability
/// proportional to its weighted squared distance to the nearest centroid
/// chosen so far.
pub fn kmeans_pp_init(m: &DataMatrix, w: &FeatureWeights, k: usize, seed: u64) -> Result<Seeding> {
    let view = WeightedView::new(m, w)?;
    if k == 0 || k > m.n() {
        return Err(Error::DegenerateData { k, n: m.n() });
    }
    let (rows, duplicates) = seed_rows(&view, k, &mut rng_from(seed));
    if duplicates {
        log::warn!("fewer than {k} distinct rows under the weighted metric; duplicated centroids");
    }
    Ok(Seeding {
        centroids: Centroids::from_rows(m, &rows),
        rows,
        duplicates,
    })
}

struct LloydRun {
    labels: Vec<usize>,
    wcss: f64,
    iters: usize,
    trace: Vec<f64>,
    repairs: usize,
}

fn assign(
    view: &WeightedView,
    centroids: &[f64],
    k: usize,
    labels: &mut [usize],
    dists: &mut [f64],
) {
    let q = view.q;
    for i in 0..view.n {
        let x = view.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let d = view.dist(x, &centroids[c * q..(c + 1) * q]);
            // strict comparison keeps the smallest index on ties
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
    }
}

/// Moves the sample farthest from its centroid into each empty cluster.
fn repair_empty(view: &WeightedView, k: usize, labels: &mut [usize], dists: &mut [f64]) -> usize {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut repairs = 0;
    for e in 0..k {
        if sizes[e] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for i in 0..view.n {
            if sizes[labels[i]] > 1 && dists[i] > far_d {
                far_d = dists[i];
                far = Some(i);
            }
        }
        let Some(i) = far else { break };
        sizes[labels[i]] -= 1;
        sizes[e] = 1;
        labels[i] = e;
        dists[i] = 0.0;
        repairs += 1;
    }
    repairs
}

fn update(view: &WeightedView, labels: &[usize], k: usize, centroids: &mut [f64]) {
    let q = view.q;
    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0; k * q];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, &x) in sums[l * q..(l + 1) * q].iter_mut().zip(view.row(i)) {
            *s += x;
        }
    }
    for c in 0..k {
        // a cluster left empty keeps its previous centroid
        if counts[c] > 0 {
            for (dst, s) in centroids[c * q..(c + 1) * q]
                .iter_mut()
                .zip(&sums[c * q..(c + 1) * q])
            {
                *dst = s / counts[c] as f64;
            }
        }
    }
}

fn within(view: &WeightedView, labels: &[usize], centroids: &[f64]) -> f64 {
    let q = view.q;
    let s: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| view.dist(view.row(i), &centroids[l * q..(l + 1) * q]))
        .sum();
    2.0 * s
}

fn lloyd(view: &WeightedView, mut centroids: Vec<f64>, k: usize, cfg: &KmeansConfig) -> LloydRun {
    let n = view.n;
    let mut labels = vec![0usize; n];
    let mut prev_labels: Option<Vec<usize>> = None;
    let mut dists = vec![0.0; n];
    let mut trace = Vec::new();
    let mut repairs = 0;
    let mut iters = 0;
    let mut wcss = f64::INFINITY;
    while iters < cfg.max_iters {
        iters += 1;
        assign(view, &centroids, k, &mut labels, &mut dists);
        repairs += repair_empty(view, k, &mut labels, &mut dists);
        let before = centroids.clone();
        update(view, &labels, k, &mut centroids);
        let prev = wcss;
        wcss = within(view, &labels, &centroids);
        trace.push(wcss);
        let unchanged = prev_labels.as_deref() == Some(&labels[..]) || before == centroids;
        if unchanged || wcss == 0.0 || (prev.is_finite() && prev - wcss <= cfg.tol * prev) {
            break;
        }
        prev_labels = Some(labels.clone());
    }
    LloydRun {
        labels,
        wcss,
        iters,
        trace,
        repairs,
    }
}

fn finish(m: &DataMatrix, k: usize, run: LloydRun, restart_index: usize) -> Result<KmeansResult> {
    let partition = Partition::new(run.labels, k)?;
    let p = m.p();
    let mut sums = vec![0.0; k * p];
    let sizes = partition.sizes();
    for (r, &l) in m.rows().zip(partition.labels()) {
        for (s, &x) in sums[l * p..(l + 1) * p].iter_mut().zip(r) {
            *s += x;
        }
    }
    for (chunk, &nk) in sums.chunks_exact_mut(p).zip(&sizes) {
        if nk > 0 {
            chunk.iter_mut().for_each(|s| *s /= nk as f64);
        }
    }
    Ok(KmeansResult {
        partition,
        centroids: Centroids::new(k, p, sums)?,
        wcss: run.wcss,
        iters_used: run.iters,
        restart_index,
        wcss_trace: run.trace,
        repairs: run.repairs,
    })
}

/// Lloyd iterations from the given centroids until the relative WCSS
/// improvement falls below `cfg.tol`, assignments stop changing, or
/// `cfg.max_iters` is reached. `cfg.k` is taken from `init`.
pub fn lloyd_weighted(
    m: &DataMatrix,
    w: &FeatureWeights,
    init: &Centroids,
    cfg: &KmeansConfig,
) -> Result<KmeansResult> {
    let view = WeightedView::new(m, w)?;
    if init.p() != m.p() || init.k() == 0 {
        return Err(Error::InvalidShape(format!(
            "{}x{} centroids for {} features",
            init.k(),
            init.p(),
            m.p()
        )));
    }
    let run = lloyd(&view, view.compact(init), init.k(), cfg);
    finish(m, init.k(), run, 0)
}

/// Best of `cfg.restarts` independently seeded k-means++/Lloyd runs.
///
/// Restart `r` uses seed `derive_seed(cfg.seed, [r])`, so the result does not
/// depend on how restarts are scheduled across threads.
pub fn run_kmeans(m: &DataMatrix, w: &FeatureWeights, cfg: &KmeansConfig) -> Result<KmeansResult> {
    cfg.validate(m.n())?;
    let view = WeightedView::new(m, w)?;
    let k = cfg.k;
    let runs: Vec<LloydRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from(derive_seed(cfg.seed, &[r as u64]));
            let (rows, _) = seed_rows(&view, k, &mut rng);
            let init: Vec<f64> = rows
                .iter()
                .flat_map(|&i| view.row(i).iter().copied())
                .collect();
            lloyd(&view, init, k, cfg)
        })
        .collect();
    let (best, run) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1.wcss < a.1.wcss { b } else { a })
        .expect("at least one restart");
    finish(m, k, run, best)
}

/// Seed used by restart `r` of [`run_kmeans`].
pub fn restart_seed(cfg: &KmeansConfig, r: usize) -> u64 {
    derive_seed(cfg.seed, &[r as u64])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{weighted_wcss, WeightRegime};

    fn square() -> DataMatrix {
        DataMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 0.0],
            vec![10.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn four_point_example() {
        let m = square();
        let res = run_kmeans(
            &m,
            &FeatureWeights::ones(2),
            &KmeansConfig::new(2).with_seed(3),
        )
        .unwrap();
        let l = res.partition.labels();
        assert_eq!(l[0], l[1]);
        assert_eq!(l[2], l[3]);
        assert_ne!(l[0], l[2]);
        // ordered pairs: each cluster contributes (1/2)(1 + 1)
        assert!((res.wcss - 2.0).abs() < 1e-12);
    }

    #[test]
    fn seeding_k_equals_n_takes_every_row() {
        let m = square();
        let s = kmeans_pp_init(&m, &FeatureWeights::ones(2), 4, 11).unwrap();
        let mut rows = s.rows.clone();
        rows.sort();
        assert_eq!(rows, vec![0, 1, 2, 3]);
        assert!(!s.duplicates);
    }

    #[test]
    fn seeding_is_deterministic() {
        let m = square();
        let a = kmeans_pp_init(&m, &FeatureWeights::ones(2), 2, 5).unwrap();
        let b = kmeans_pp_init(&m, &FeatureWeights::ones(2), 2, 5).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn seeding_flags_duplicates() {
        let m = DataMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let s = kmeans_pp_init(&m, &FeatureWeights::ones(1), 2, 0).unwrap();
        assert!(s.duplicates);
        assert_ne!(s.rows[0], s.rows[1]);
    }

    #[test]
    fn zero_weights_are_rejected() {
        let m = square();
        let zero = FeatureWeights::new(vec![0.0, 0.0], WeightRegime::Uniform).unwrap();
        assert!(matches!(
            kmeans_pp_init(&m, &zero, 2, 0),
            Err(Error::AllZeroWeights)
        ));
        assert!(matches!(
            run_kmeans(&m, &zero, &KmeansConfig::new(2)),
            Err(Error::AllZeroWeights)
        ));
    }

    #[test]
    fn fixed_point_returns_after_one_iteration() {
        let m = square();
        let w = FeatureWeights::ones(2);
        let first = run_kmeans(&m, &w, &KmeansConfig::new(2).with_seed(1)).unwrap();
        let again = lloyd_weighted(&m, &w, &first.centroids, &KmeansConfig::new(2)).unwrap();
        assert_eq!(again.iters_used, 1);
        assert_eq!(again.partition, first.partition);
    }

    #[test]
    fn empty_cluster_is_repaired() {
        let m = square();
        // the third centroid is far from every sample and attracts nothing
        let init = Centroids::new(3, 2, vec![0.0, 0.5, 10.0, 0.5, 100.0, 100.0]).unwrap();
        let res =
            lloyd_weighted(&m, &FeatureWeights::ones(2), &init, &KmeansConfig::new(3)).unwrap();
        assert!(res.repairs >= 1);
        assert!(res.partition.ensure_nonempty().is_ok());
    }

    #[test]
    fn single_feature_weight_matches_single_column() {
        let m = DataMatrix::from_rows(&[
            vec![0.0, 5.0, 1.0],
            vec![0.2, -4.0, 2.0],
            vec![3.0, 7.0, -1.0],
            vec![3.1, 0.0, 0.0],
            vec![6.0, 1.0, 9.0],
        ])
        .unwrap();
        let w = FeatureWeights::new(vec![1.0, 0.0, 0.0], WeightRegime::Uniform).unwrap();
        let cfg = KmeansConfig::new(2).with_seed(42);
        let a = run_kmeans(&m, &w, &cfg).unwrap();
        let col = m.select_columns(&[0]).unwrap();
        let b = run_kmeans(&col, &FeatureWeights::ones(1), &cfg).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.wcss, b.wcss);
    }

    #[test]
    fn result_wcss_matches_direct_evaluation() {
        let m = square();
        let w = FeatureWeights::new(vec![0.3, 2.0], WeightRegime::Uniform).unwrap();
        let res = run_kmeans(&m, &w, &KmeansConfig::new(2)).unwrap();
        let direct = weighted_wcss(&m, &res.partition, &w).unwrap();
        assert!((res.wcss - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn single_restart_is_one_lloyd_run() {
        let m = square();
        let w = FeatureWeights::ones(2);
        let cfg = KmeansConfig::new(2).with_seed(9).with_restarts(1);
        let a = run_kmeans(&m, &w, &cfg).unwrap();
        let seeding = kmeans_pp_init(&m, &w, 2, restart_seed(&cfg, 0)).unwrap();
        let b = lloyd_weighted(&m, &w, &seeding.centroids, &cfg).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.wcss, b.wcss);
    }

    #[test]
    fn config_validation() {
        assert!(KmeansConfig::new(0).validate(4).is_err());
        assert!(KmeansConfig::new(5).validate(4).is_err());
        assert!(KmeansConfig::new(2).with_restarts(0).validate(4).is_err());
        assert!(KmeansConfig::new(4).validate(4).is_ok());
    }
}
