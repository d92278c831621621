//! Sparse feature-weighted k-means.
//!
//! Both methods alternate two steps: cluster with the current weights
//! applied to each feature's dissimilarity, then re-solve for the weights
//! with the partition held fixed, maximizing `Σ_j w_j a_j`.
//!
//! * `L0`: `‖w‖∞ ≤ 1, ‖w‖₀ ≤ ⌊s⌋, w ≥ 0`. The maximizer puts weight one on
//!   the `⌊s⌋` largest `a_j` (hard thresholding).
//! * `L1`: `‖w‖₂ ≤ 1, ‖w‖₁ ≤ s, w ≥ 0`. The maximizer is the normalized
//!   soft-thresholded vector `S(a, Δ)/‖S(a, Δ)‖₂` with the smallest `Δ ≥ 0`
//!   that satisfies the ℓ1 bound.
//!
//! The loop starts from uniform weights `1/√p` and stops when
//! `Σ|w_new − w_old| / Σ|w_old| < outer_tol` or after `max_outer_iters`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{
    bcss_per_feature, BcssVector, DataMatrix, FeatureWeights, Partition, WeightRegime,
};
use crate::error::{Error, Result};
use crate::kmeans::{run_kmeans, KmeansConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparseMethod {
    L0,
    L1,
}

impl SparseMethod {
    /// Valid range of the sparsity parameter for `p` features.
    pub fn s_range(self, p: usize) -> (f64, f64) {
        match self {
            SparseMethod::L0 => (1.0, p as f64),
            SparseMethod::L1 => (1.0, (p as f64).sqrt()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SparseMethod::L0 => "l0",
            SparseMethod::L1 => "l1",
        }
    }
}

impl std::str::FromStr for SparseMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l0" => Ok(SparseMethod::L0),
            "l1" => Ok(SparseMethod::L1),
            other => Err(Error::InvalidConfig(format!(
                "unknown sparse method `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseKmeansConfig {
    pub s: f64,
    pub method: SparseMethod,
    pub inner: KmeansConfig,
    pub max_outer_iters: usize,
    pub outer_tol: f64,
}

impl SparseKmeansConfig {
    pub fn new(method: SparseMethod, s: f64, inner: KmeansConfig) -> Self {
        Self {
            s,
            method,
            inner,
            max_outer_iters: 20,
            outer_tol: 1e-4,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        check_s(self.method, self.s, p)?;
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidConfig(
                "max_outer_iters must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn check_s(method: SparseMethod, s: f64, p: usize) -> Result<()> {
    let (min, max) = method.s_range(p);
    let ok = match method {
        SparseMethod::L0 => s.is_finite() && s >= 1.0 && s.floor() <= max,
        // tiny slack so that s = √p computed by the caller is accepted
        SparseMethod::L1 => s.is_finite() && s >= 1.0 && s <= max * (1.0 + 1e-12),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::SparsityOutOfRange { s, min, max })
    }
}

/// One pass of the alternating loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OuterStep {
    /// `Σ_j w_j a_j` with the weights that produced this pass's partition.
    pub objective_before: f64,
    /// `Σ_j w_j a_j` after re-solving for the weights.
    pub objective_after: f64,
    /// Relative ℓ1 change of the weights.
    pub change: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseKmeansResult {
    pub partition: Partition,
    pub weights: FeatureWeights,
    /// `a_j` at the final partition.
    pub bcss: BcssVector,
    /// `Σ_j w_j a_j` at the final partition.
    pub objective: f64,
    pub outer_iters: usize,
    pub converged: bool,
    /// Features with `w_j > 1e-12`, ascending.
    pub selected_features: Vec<usize>,
    pub history: Vec<OuterStep>,
}

fn by_value_then_index(a: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&i, &j| a[j].total_cmp(&a[i]).then(i.cmp(&j))
}

/// Hard thresholding: weight one on the `⌊s⌋` largest entries of `a`, ties
/// going to the smaller feature index.
///
/// Uses partial selection, `O(p)` on average plus `O(⌊s⌋ log ⌊s⌋)` to order
/// the selected set.
pub fn l0_weight_update(a: &BcssVector, s: f64) -> Result<FeatureWeights> {
    let p = a.len();
    check_s(SparseMethod::L0, s, p)?;
    let m = s.floor() as usize;
    let mut idx: Vec<usize> = (0..p).collect();
    let cmp = by_value_then_index(a.values());
    if m < p {
        idx.select_nth_unstable_by(m - 1, &cmp);
    }
    let mut w = vec![0.0; p];
    for &j in &idx[..m] {
        w[j] = 1.0;
    }
    FeatureWeights::new(w, WeightRegime::L0)
}

/// Indices of the `m` largest entries by full sort; reference ordering for
/// [`l0_weight_update`].
pub fn top_indices_by_sort(a: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(by_value_then_index(a));
    idx.truncate(m);
    idx.sort_unstable();
    idx
}

/// `S(a, Δ) / ‖S(a, Δ)‖₂` with `S(a, Δ)_j = max(a_j − Δ, 0)`.
///
/// When `Δ ≥ max a` the thresholded vector vanishes; the limit from below,
/// the normalized indicator of the maximal entries, is returned instead.
pub fn soft_threshold_weights(a: &[f64], delta: f64) -> Vec<f64> {
    let shrunk: Vec<f64> = a.iter().map(|&x| (x - delta).max(0.0)).collect();
    let norm = shrunk.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        return shrunk.into_iter().map(|x| x / norm).collect();
    }
    let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = a.iter().filter(|&&x| x == top).count() as f64;
    a.iter()
        .map(|&x| if x == top { 1.0 / ties.sqrt() } else { 0.0 })
        .collect()
}

fn l1_norm(w: &[f64]) -> f64 {
    w.iter().sum()
}

/// Soft-threshold level used by [`l1_weight_update`].
///
/// Zero when the unthresholded normalized vector already satisfies the ℓ1
/// bound; otherwise found by bisection on `[0, max a]`, along which the ℓ1
/// norm of the normalized vector is continuous and non-increasing.
pub fn l1_threshold(a: &BcssVector, s: f64) -> Result<f64> {
    let p = a.len();
    check_s(SparseMethod::L1, s, p)?;
    let top = a.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top <= 0.0 || top.is_nan() {
        return Err(Error::AllNonPositiveBcss);
    }
    if l1_norm(&soft_threshold_weights(a.values(), 0.0)) <= s {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..100 {
        if hi - lo < 1e-12 * top {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if l1_norm(&soft_threshold_weights(a.values(), mid)) > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Normalized soft thresholding at the level chosen by [`l1_threshold`].
pub fn l1_weight_update(a: &BcssVector, s: f64) -> Result<FeatureWeights> {
    let delta = l1_threshold(a, s)?;
    FeatureWeights::new(soft_threshold_weights(a.values(), delta), WeightRegime::L1)
}

fn relative_change(new: &FeatureWeights, old: &FeatureWeights) -> f64 {
    let num: f64 = new
        .values()
        .iter()
        .zip(old.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    let den: f64 = old.values().iter().map(|x| x.abs()).sum();
    num / den
}

fn alternate(m: &DataMatrix, cfg: &SparseKmeansConfig) -> Result<SparseKmeansResult> {
    cfg.validate(m.p())?;
    let update = |a: &BcssVector| match cfg.method {
        SparseMethod::L0 => l0_weight_update(a, cfg.s),
        SparseMethod::L1 => l1_weight_update(a, cfg.s),
    };
    let mut weights = FeatureWeights::uniform(m.p());
    let mut history = Vec::new();
    let mut converged = false;
    let mut last = None;
    for _ in 0..cfg.max_outer_iters {
        // every pass reuses the inner seed, so identical weights give an
        // identical partition
        let km = run_kmeans(m, &weights, &cfg.inner)?;
        let a = bcss_per_feature(m, &km.partition)?;
        let next = update(&a)?;
        let change = relative_change(&next, &weights);
        history.push(OuterStep {
            objective_before: a.dot(&weights),
            objective_after: a.dot(&next),
            change,
        });
        weights = next;
        last = Some((km.partition, a));
        if change < cfg.outer_tol {
            converged = true;
            break;
        }
    }
    let (partition, bcss) = last.expect("max_outer_iters is positive");
    let objective = bcss.dot(&weights);
    Ok(SparseKmeansResult {
        selected_features: weights.selected(),
        outer_iters: history.len(),
        partition,
        weights,
        bcss,
        objective,
        converged,
        history,
    })
}

/// Sparse k-means with hard-thresholded binary feature weights.
pub fn l0_kmeans(m: &DataMatrix, cfg: &SparseKmeansConfig) -> Result<SparseKmeansResult> {
    if cfg.method != SparseMethod::L0 {
        return Err(Error::InvalidConfig("l0_kmeans requires method l0".into()));
    }
    alternate(m, cfg)
}

/// Sparse k-means with normalized soft-thresholded feature weights.
pub fn l1_kmeans(m: &DataMatrix, cfg: &SparseKmeansConfig) -> Result<SparseKmeansResult> {
    if cfg.method != SparseMethod::L1 {
        return Err(Error::InvalidConfig("l1_kmeans requires method l1".into()));
    }
    alternate(m, cfg)
}

/// Dispatches on `cfg.method`.
pub fn sparse_kmeans(m: &DataMatrix, cfg: &SparseKmeansConfig) -> Result<SparseKmeansResult> {
    alternate(m, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(v: &[f64]) -> BcssVector {
        BcssVector::new(v.to_vec())
    }

    /// Best `wᵀa` over every binary support of size at most `m`.
    fn exhaustive_best(a: &[f64], m: usize) -> f64 {
        let p = a.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << p) {
            if mask.count_ones() as usize <= m {
                let v: f64 = (0..p).filter(|j| mask >> j & 1 == 1).map(|j| a[j]).sum();
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn hard_threshold_examples() {
        let w = l0_weight_update(&bv(&[5.0, 3.0, 2.0, 1.0]), 2.7).unwrap();
        assert_eq!(w.values(), &[1.0, 1.0, 0.0, 0.0]);
        let w = l0_weight_update(&bv(&[1.0, 1.0, 1.0]), 2.0).unwrap();
        assert_eq!(w.values(), &[1.0, 1.0, 0.0]);
        let w = l0_weight_update(&bv(&[0.0, 2.0]), 2.0).unwrap();
        assert_eq!(w.values(), &[1.0, 1.0]);
    }

    #[test]
    fn hard_threshold_range() {
        assert!(matches!(
            l0_weight_update(&bv(&[1.0, 2.0]), 0.5),
            Err(Error::SparsityOutOfRange { .. })
        ));
        assert!(l0_weight_update(&bv(&[1.0, 2.0]), 3.0).is_err());
        assert!(l0_weight_update(&bv(&[1.0, 2.0]), 2.9).is_ok());
    }

    #[test]
    fn hard_threshold_matches_subset_oracle_p8() {
        let mut rng = crate::rng::rng_from(17);
        use rand::Rng as _;
        for _ in 0..50 {
            let a: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..10.0)).collect();
            let w = l0_weight_update(&bv(&a), 3.0).unwrap();
            assert_eq!(bv(&a).dot(&w), exhaustive_best(&a, 3));
        }
    }

    #[test]
    fn soft_threshold_examples() {
        let w = l1_weight_update(&bv(&[4.0, 0.0, 0.0]), 1.0).unwrap();
        assert_eq!(w.values(), &[1.0, 0.0, 0.0]);

        let a = bv(&[3.0, 3.0, 0.0]);
        assert_eq!(l1_threshold(&a, 1.5).unwrap(), 0.0);
        let w = l1_weight_update(&a, 1.5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((w.values()[0] - h).abs() < 1e-12 && (w.values()[1] - h).abs() < 1e-12);
    }

    #[test]
    fn soft_threshold_bisection_matches_grid() {
        let a = bv(&[3.0, 1.0, 0.0]);
        let delta = l1_threshold(&a, 1.0).unwrap();
        // grid oracle: smallest grid Δ whose normalized vector meets the bound
        let grid_delta = (0..=300_000)
            .map(|i| i as f64 * 1e-5)
            .find(|&d| l1_norm(&soft_threshold_weights(a.values(), d)) <= 1.0 + 1e-12)
            .unwrap();
        assert!((delta - grid_delta).abs() < 2e-5, "{delta} vs {grid_delta}");
        let w = l1_weight_update(&a, 1.0).unwrap();
        assert!((w.values()[0] - 1.0).abs() < 1e-8);
        assert!(l1_norm(w.values()) <= 1.0 + 1e-6);
    }

    #[test]
    fn soft_threshold_errors() {
        assert!(matches!(
            l1_weight_update(&bv(&[0.0, -1.0, 0.0, 0.0]), 1.5),
            Err(Error::AllNonPositiveBcss)
        ));
        assert!(matches!(
            l1_weight_update(&bv(&[1.0, 2.0, 3.0, 4.0]), 2.5),
            Err(Error::SparsityOutOfRange { .. })
        ));
    }

    #[test]
    fn partial_selection_agrees_with_full_sort() {
        let a = [3.0, 1.0, 3.0, 7.0, 0.0, 7.0, 2.0];
        for m in 1..=a.len() {
            let w = l0_weight_update(&bv(&a), m as f64).unwrap();
            assert_eq!(w.selected(), top_indices_by_sort(&a, m));
        }
    }

    proptest! {
        #[test]
        fn hard_threshold_is_optimal(a in prop::collection::vec(0.0f64..20.0, 1..=10), frac in 0.0f64..1.0) {
            let p = a.len();
            let m = 1 + ((p - 1) as f64 * frac) as usize;
            let w = l0_weight_update(&bv(&a), m as f64 + 0.5).unwrap();
            prop_assert_eq!(w.selected().len(), m);
            prop_assert_eq!(bv(&a).dot(&w), exhaustive_best(&a, m));
        }

        #[test]
        fn soft_threshold_is_feasible(a in prop::collection::vec(0.0f64..10.0, 2..=30), t in 0.0f64..1.0) {
            prop_assume!(a.iter().any(|&x| x > 0.0));
            let smax = (a.len() as f64).sqrt();
            let s = 1.0 + t * (smax - 1.0);
            let w = l1_weight_update(&bv(&a), s).unwrap();
            let l2 = w.values().iter().map(|x| x * x).sum::<f64>().sqrt();
            let top = a.iter().copied().fold(0.0, f64::max);
            let ties = a.iter().filter(|&&x| x == top).count() as f64;
            prop_assert!((l2 - 1.0).abs() < 1e-9);
            prop_assert!(w.values().iter().all(|&x| x >= 0.0));
            // the bound is reachable unless several entries tie at the maximum
            if ties.sqrt() <= s {
                prop_assert!(l1_norm(w.values()) <= s + 1e-6);
            }
        }
    }
}
