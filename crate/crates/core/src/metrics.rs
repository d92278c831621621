//! Agreement between an estimated clustering and the truth, plus
//! feature-selection counts.

use serde::{Deserialize, Serialize};

use crate::data::SELECTION_EPS;
use crate::error::{Error, Result};

/// Above this many samples [`cer`] switches from pair enumeration to the
/// contingency-table identity.
pub const PAIRWISE_CER_LIMIT: usize = 5000;

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "{} estimated labels vs {} true labels",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Maps arbitrary labels onto `0..k` in order of first appearance.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Joint proportions `π_kk'` of samples in true cluster `k` and estimated
/// cluster `k'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionProportions {
    /// `k_true × k_est`, row-major.
    pub pi: Vec<Vec<f64>>,
}

impl ConfusionProportions {
    pub fn new(truth: &[usize], estimated: &[usize]) -> Result<Self> {
        check_lengths(estimated, truth)?;
        if truth.is_empty() {
            return Err(Error::LengthMismatch("no samples".into()));
        }
        let (t, kt) = compact(truth);
        let (e, ke) = compact(estimated);
        let mut pi = vec![vec![0.0; ke]; kt];
        let w = 1.0 / truth.len() as f64;
        for (&a, &b) in t.iter().zip(&e) {
            pi[a][b] += w;
        }
        Ok(Self { pi })
    }

    /// `π_k`, proportions of the true clusters.
    pub fn row_sums(&self) -> Vec<f64> {
        self.pi.iter().map(|r| r.iter().sum()).collect()
    }

    /// `π̃_k'`, proportions of the estimated clusters.
    pub fn col_sums(&self) -> Vec<f64> {
        let ke = self.pi.first().map_or(0, Vec::len);
        (0..ke)
            .map(|c| self.pi.iter().map(|r| r[c]).sum())
            .collect()
    }

    /// `Σ_k' max_k π_kk'`.
    pub fn purity(&self) -> f64 {
        let ke = self.pi.first().map_or(0, Vec::len);
        (0..ke)
            .map(|c| self.pi.iter().map(|r| r[c]).fold(0.0, f64::max))
            .sum()
    }
}

/// Fraction of sample pairs on which the two partitions disagree about
/// co-membership.
pub fn cer(estimated: &[usize], truth: &[usize]) -> Result<f64> {
    if estimated.len() <= PAIRWISE_CER_LIMIT {
        cer_pairwise(estimated, truth)
    } else {
        cer_contingency(estimated, truth)
    }
}

/// [`cer`] by direct enumeration of the `n(n−1)/2` pairs.
pub fn cer_pairwise(estimated: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(estimated, truth)?;
    let n = truth.len();
    if n < 2 {
        return Err(Error::LengthMismatch("need at least two samples".into()));
    }
    let mut disagree = 0u64;
    for i in 1..n {
        for j in 0..i {
            let same_est = estimated[i] == estimated[j];
            let same_true = truth[i] == truth[j];
            disagree += u64::from(same_est != same_true);
        }
    }
    Ok(disagree as f64 / (n * (n - 1) / 2) as f64)
}

/// [`cer`] from cluster-size counts: disagreements are pairs together in
/// exactly one partition, `C(est) + C(true) − 2·C(both)` where each `C`
/// counts co-clustered pairs.
pub fn cer_contingency(estimated: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(estimated, truth)?;
    let n = truth.len();
    if n < 2 {
        return Err(Error::LengthMismatch("need at least two samples".into()));
    }
    let (e, ke) = compact(estimated);
    let (t, kt) = compact(truth);
    let mut table = vec![0u64; ke * kt];
    let mut est_sizes = vec![0u64; ke];
    let mut true_sizes = vec![0u64; kt];
    for (&a, &b) in e.iter().zip(&t) {
        table[a * kt + b] += 1;
        est_sizes[a] += 1;
        true_sizes[b] += 1;
    }
    let pairs = |c: u64| c * c.saturating_sub(1) / 2;
    let both: u64 = table.iter().map(|&c| pairs(c)).sum();
    let est: u64 = est_sizes.iter().map(|&c| pairs(c)).sum();
    let tru: u64 = true_sizes.iter().map(|&c| pairs(c)).sum();
    Ok((est + tru - 2 * both) as f64 / pairs(n as u64) as f64)
}

/// One minus purity.
pub fn ecr(estimated: &[usize], truth: &[usize]) -> Result<f64> {
    Ok(1.0 - ConfusionProportions::new(truth, estimated)?.purity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCounts {
    /// Nonzero estimated weights.
    pub nw: usize,
    /// Noise features with zero estimated weight.
    pub pzw: usize,
    /// Relevant features with nonzero estimated weight.
    pub pnw: usize,
}

pub fn feature_counts(weights: &[f64], support: &[usize]) -> Result<FeatureCounts> {
    let p = weights.len();
    let mut relevant = vec![false; p];
    for &j in support {
        if j >= p {
            return Err(Error::IndexOutOfRange { index: j, len: p });
        }
        relevant[j] = true;
    }
    let mut counts = FeatureCounts {
        nw: 0,
        pzw: 0,
        pnw: 0,
    };
    for (&w, &rel) in weights.iter().zip(&relevant) {
        let nonzero = w > SELECTION_EPS;
        counts.nw += usize::from(nonzero);
        counts.pnw += usize::from(nonzero && rel);
        counts.pzw += usize::from(!nonzero && !rel);
    }
    Ok(counts)
}
