//! Choosing the sparsity level with a permutation gap statistic.
//!
//! For every candidate `s` the sparse objective `O(s) = Σ_j w_j a_j` reached
//! on the data is compared with the objectives `O_t(s)` reached on `b`
//! copies whose columns were permuted independently (which destroys any
//! cluster structure shared between features):
//!
//! ```text
//! gap(s) = log O(s) − (1/b) Σ_t log O_t(s)
//! se(s)  = sd_t(log O_t(s)) · √(1 + 1/b)
//! ```
//!
//! Every fit at grid index `i`, on the data and on each null copy, uses the
//! same inner k-means seed `derive_seed(seed, [i])`. Null copies are
//! permuted with `derive_seed(seed, [PERMUTATION_STREAM, t])`.

use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kmeans::KmeansConfig;
use crate::rng::{derive_seed, rng_from};
use crate::sparse::{sparse_kmeans, SparseKmeansConfig, SparseMethod};

const PERMUTATION_STREAM: u64 = 0x7065_726d;

/// Permutes every column independently; the multiset of each column is
/// preserved exactly.
pub fn permute_columns(m: &DataMatrix, seed: u64) -> DataMatrix {
    let mut rng = rng_from(seed);
    let columns: Vec<Vec<f64>> = (0..m.p())
        .map(|j| {
            let mut c = m.column(j);
            c.shuffle(&mut rng);
            c
        })
        .collect();
    DataMatrix::from_columns(&columns).expect("permutation preserves shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// The grid point with the largest gap.
    MaxGap,
    /// The smallest `s` whose gap is within one standard error of the largest.
    OneStandardError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub method: SparseMethod,
    /// Strictly ascending candidate values of `s`.
    pub grid: Vec<f64>,
    /// Number of permuted null datasets `b`.
    pub permutations: usize,
    /// Inner k-means settings; its seed is replaced per grid cell.
    pub inner: KmeansConfig,
    pub max_outer_iters: usize,
    pub outer_tol: f64,
    pub rule: SelectionRule,
    pub seed: u64,
}

impl GapConfig {
    /// Default grid, 10 permutations, maximum-gap selection.
    pub fn new(method: SparseMethod, p: usize, inner: KmeansConfig) -> Self {
        Self {
            method,
            grid: default_grid(method, p),
            permutations: 10,
            inner,
            max_outer_iters: 20,
            outer_tol: 1e-4,
            rule: SelectionRule::MaxGap,
            seed: inner.seed,
        }
    }

    /// Sparse-fit settings for grid index `cell`.
    pub fn sparse_config(&self, s: f64, cell: usize) -> SparseKmeansConfig {
        let inner = self.inner.with_seed(derive_seed(self.seed, &[cell as u64]));
        let mut cfg = SparseKmeansConfig::new(self.method, s, inner);
        cfg.max_outer_iters = self.max_outer_iters;
        cfg.outer_tol = self.outer_tol;
        cfg
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.permutations < 2 {
            return Err(Error::InvalidConfig("need at least 2 permutations".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("empty grid".into()));
        }
        if self
            .grid
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidConfig(
                "grid must be strictly ascending".into(),
            ));
        }
        for &s in &self.grid {
            SparseKmeansConfig::new(self.method, s, self.inner).validate(p)?;
        }
        Ok(())
    }
}

/// 15 candidates: geometrically spaced integers in `[2, p]` for `L0`,
/// evenly spaced values in `[1.2, √p]` for `L1`.
pub fn default_grid(method: SparseMethod, p: usize) -> Vec<f64> {
    const POINTS: usize = 15;
    match method {
        SparseMethod::L0 => {
            if p < 2 {
                return vec![1.0];
            }
            let ratio = (p as f64 / 2.0).ln() / (POINTS - 1) as f64;
            let mut grid: Vec<f64> = (0..POINTS)
                .map(|i| {
                    (2.0 * (ratio * i as f64).exp())
                        .round()
                        .clamp(2.0, p as f64)
                })
                .collect();
            grid.dedup();
            grid
        }
        SparseMethod::L1 => {
            let hi = (p as f64).sqrt();
            if hi <= 1.2 {
                return vec![1.0_f64.max(hi.min(1.2))];
            }
            (0..POINTS)
                .map(|i| 1.2 + (hi - 1.2) * i as f64 / (POINTS - 1) as f64)
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub grid: Vec<f64>,
    /// `O(s)` on the data.
    pub objective: Vec<f64>,
    pub gap: Vec<f64>,
    pub se: Vec<f64>,
    pub chosen_s: f64,
    /// Grid values removed from contention because some objective was
    /// non-positive.
    pub excluded: Vec<f64>,
    pub warnings: Vec<String>,
}

impl GapProfile {
    pub fn chosen_index(&self) -> usize {
        self.grid
            .iter()
            .position(|&s| s == self.chosen_s)
            .expect("chosen_s is a grid value")
    }

    /// True when the best gap is within three standard errors of zero, i.e.
    /// the data look no more clustered than the permutation null.
    pub fn is_flat(&self) -> bool {
        let i = self.chosen_index();
        self.gap[i] <= 3.0 * self.se[i]
    }

    /// CSV with columns `s,objective,gap,se`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,objective,gap,se")?;
        for i in 0..self.grid.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.grid[i], self.objective[i], self.gap[i], self.se[i]
            )?;
        }
        Ok(())
    }
}

/// Null datasets used by [`gap_statistic`].
pub fn null_datasets(m: &DataMatrix, permutations: usize, seed: u64) -> Vec<DataMatrix> {
    (0..permutations)
        .map(|t| permute_columns(m, derive_seed(seed, &[PERMUTATION_STREAM, t as u64])))
        .collect()
}

pub fn gap_statistic(m: &DataMatrix, cfg: &GapConfig) -> Result<GapProfile> {
    cfg.validate(m.p())?;
    let nulls = null_datasets(m, cfg.permutations, cfg.seed);
    gap_statistic_with_nulls(m, &nulls, cfg)
}

/// Gap profile against caller-supplied null datasets (`cfg.permutations`
/// is ignored in favour of `nulls.len()`).
pub fn gap_statistic_with_nulls(
    m: &DataMatrix,
    nulls: &[DataMatrix],
    cfg: &GapConfig,
) -> Result<GapProfile> {
    let b = nulls.len();
    GapConfig {
        permutations: b,
        ..cfg.clone()
    }
    .validate(m.p())?;
    let datasets: Vec<&DataMatrix> = std::iter::once(m).chain(nulls).collect();
    let g = cfg.grid.len();
    let cells: Vec<(usize, usize)> = (0..g)
        .flat_map(|i| (0..datasets.len()).map(move |t| (i, t)))
        .collect();
    let objectives: Vec<f64> = cells
        .par_iter()
        .map(|&(i, t)| {
            sparse_kmeans(datasets[t], &cfg.sparse_config(cfg.grid[i], i)).map(|r| r.objective)
        })
        .collect::<Result<_>>()?;

    let mut objective = Vec::with_capacity(g);
    let mut gap = Vec::with_capacity(g);
    let mut se = Vec::with_capacity(g);
    let mut excluded = Vec::new();
    let mut warnings = Vec::new();
    for (i, row) in objectives.chunks_exact(b + 1).enumerate() {
        objective.push(row[0]);
        if row.iter().any(|&o| o <= 0.0 || o.is_nan()) {
            let msg = format!("non-positive objective at s = {}; excluded", cfg.grid[i]);
            log::warn!("{msg}");
            warnings.push(msg);
            excluded.push(cfg.grid[i]);
            gap.push(f64::NAN);
            se.push(f64::NAN);
            continue;
        }
        let logs: Vec<f64> = row[1..].iter().map(|o| o.ln()).collect();
        let mean = logs.iter().sum::<f64>() / b as f64;
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
        gap.push(row[0].ln() - mean);
        se.push(var.sqrt() * (1.0 + 1.0 / b as f64).sqrt());
    }

    let candidates: Vec<usize> = (0..g).filter(|&i| !gap[i].is_nan()).collect();
    let best = candidates
        .iter()
        .copied()
        .reduce(|a, c| if gap[c] > gap[a] { c } else { a })
        .ok_or(Error::NonPositiveObjective)?;
    let chosen = match cfg.rule {
        SelectionRule::MaxGap => best,
        SelectionRule::OneStandardError => candidates
            .iter()
            .copied()
            .find(|&i| gap[i] >= gap[best] - se[best])
            .unwrap_or(best),
    };
    Ok(GapProfile {
        grid: cfg.grid.clone(),
        objective,
        gap,
        se,
        chosen_s: cfg.grid[chosen],
        excluded,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DataMatrix {
        DataMatrix::new(
            6,
            2,
            vec![
                1.0, 10.0, 2.0, 20.0, 3.0, 30.0, 4.0, 40.0, 5.0, 50.0, 6.0, 60.0,
            ],
        )
        .unwrap()
    }

    #[test]
    fn permutation_preserves_column_multisets() {
        let m = sample();
        let q = permute_columns(&m, 3);
        for j in 0..m.p() {
            let mut a = m.column(j);
            let mut b = q.column(j);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
        assert_eq!(permute_columns(&m, 3), q);
    }

    #[test]
    fn permutations_are_uniform_on_three_elements() {
        let m = DataMatrix::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let mut counts = std::collections::HashMap::new();
        let seeds = 6000;
        for seed in 0..seeds {
            *counts
                .entry(
                    permute_columns(&m, seed)
                        .column(0)
                        .iter()
                        .map(|&x| x as u8)
                        .collect::<Vec<_>>(),
                )
                .or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            let f = c as f64 / seeds as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.02, "{f}");
        }
    }

    #[test]
    fn default_grids() {
        let g = default_grid(SparseMethod::L0, 2000);
        assert_eq!(g.len(), 15);
        assert_eq!((g[0], g[14]), (2.0, 2000.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let small = default_grid(SparseMethod::L0, 6);
        assert!(small.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*small.last().unwrap(), 6.0);
        let l1 = default_grid(SparseMethod::L1, 100);
        assert_eq!((l1[0], l1[14]), (1.2, 10.0));
    }

    #[test]
    fn identical_nulls_have_zero_spread() {
        let (m, _) = crate::synth::generate(
            &crate::synth::MixtureSpec::three_cluster(2.0, 6, 8, 3).with_seed(4),
        )
        .unwrap();
        let m = m.standardize(false).unwrap();
        let null = permute_columns(&m, 77);
        let mut cfg = GapConfig::new(
            SparseMethod::L0,
            m.p(),
            KmeansConfig::new(3).with_restarts(3),
        );
        cfg.grid = vec![2.0, 4.0];
        let profile = gap_statistic_with_nulls(&m, &[null.clone(), null], &cfg).unwrap();
        assert!(profile.se.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn config_errors() {
        let m = sample().standardize(false).unwrap();
        let mut cfg = GapConfig::new(SparseMethod::L0, 2, KmeansConfig::new(2));
        cfg.permutations = 1;
        assert!(gap_statistic(&m, &cfg).is_err());
        cfg.permutations = 2;
        cfg.grid = vec![2.0, 1.0];
        assert!(gap_statistic(&m, &cfg).is_err());
        cfg.grid = vec![3.0];
        assert!(matches!(
            gap_statistic(&m, &cfg),
            Err(Error::SparsityOutOfRange { .. })
        ));
    }
}
