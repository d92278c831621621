//! Data matrix, partitions, feature weights and the sum-of-squares
//! quantities every clustering method in the crate is built on.
//!
//! Sum-of-squares conventions follow the ordered-pair form: the within
//! cluster sum of squares is `Σ_k (1/n_k) Σ_{i,i'∈C_k} Σ_j w_j (x_ij − x_i'j)²`
//! and the per-feature between-cluster term is
//! `a_j = (1/n) Σ_{i,i'} d_ii'j − Σ_k (1/n_k) Σ_{i,i'∈C_k} d_ii'j`.
//! Both are evaluated through cluster centroids in `O(np)`; every unordered
//! pair is counted twice, which makes them exactly twice the usual
//! centroid-based quantities.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights at or below this value count as "not selected".
pub const SELECTION_EPS: f64 = 1e-12;

/// Dense `n × p` matrix of observations, rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || p < 1 {
            return Err(Error::InvalidShape(format!(
                "need at least 2 rows and 1 column, got {n}x{p}"
            )));
        }
        if values.len() != n * p {
            return Err(Error::InvalidShape(format!(
                "{} values cannot fill a {n}x{p} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                row: pos / p,
                col: pos % p,
            });
        }
        Ok(Self { n, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::InvalidShape(format!(
                "row {i} has {} columns, expected {p}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// New matrix keeping only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&j) = cols.iter().find(|&&j| j >= self.p) {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.p,
            });
        }
        let values = self
            .rows()
            .flat_map(|r| cols.iter().map(move |&j| r[j]))
            .collect();
        Self::new(self.n, cols.len(), values)
    }

    /// Rebuilds a matrix from columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidShape("columns differ in length".into()));
        }
        let mut values = Vec::with_capacity(n * p);
        for i in 0..n {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(n, p, values)
    }

    fn column_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        let mut mean = vec![0.0; self.p];
        for r in self.rows() {
            for (m, &x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; self.p];
        for r in self.rows() {
            for ((v, &m), &x) in var.iter_mut().zip(&mean).zip(r) {
                *v += (x - m) * (x - m);
            }
        }
        var.iter_mut().for_each(|v| *v /= n - 1.0);
        (mean, var)
    }

    fn is_constant(mean: f64, var: f64) -> bool {
        var.sqrt() <= 1e-12 * (1.0 + mean.abs())
    }

    /// Indices of columns with (numerically) zero variance.
    pub fn constant_columns(&self) -> Vec<usize> {
        let (mean, var) = self.column_moments();
        (0..self.p)
            .filter(|&j| Self::is_constant(mean[j], var[j]))
            .collect()
    }

    /// Centers every column and scales it to unit sample standard deviation
    /// (divisor `n − 1`). Constant columns are rejected unless
    /// `allow_constant` is set, in which case they are only centered.
    pub fn standardize(&self, allow_constant: bool) -> Result<Self> {
        let (mean, var) = self.column_moments();
        let mut scale = vec![1.0; self.p];
        for j in 0..self.p {
            if Self::is_constant(mean[j], var[j]) {
                if !allow_constant {
                    return Err(Error::ConstantColumn(j));
                }
            } else {
                scale[j] = var[j].sqrt();
            }
        }
        let values = self
            .rows()
            .flat_map(|r| {
                r.iter()
                    .zip(&mean)
                    .zip(&scale)
                    .map(|((&x, &m), &s)| (x - m) / s)
            })
            .collect();
        Self::new(self.n, self.p, values)
    }

    /// Reads comma-separated reals, one row per sample.
    pub fn from_csv_reader<R: Read>(reader: R, has_header: bool, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut p = None;
        let mut n = 0;
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |pos| pos.line());
            let width = *p.get_or_insert(record.len());
            if record.len() != width {
                return Err(Error::parse(
                    format!("{source}:{line}"),
                    format!("expected {width} fields, found {}", record.len()),
                ));
            }
            for (col, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|e| {
                    Error::parse(
                        format!("{source}:{line}, column {}", col + 1),
                        format!("`{cell}`: {e}"),
                    )
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput { row: n, col });
                }
                values.push(v);
            }
            n += 1;
        }
        Self::new(n, p.unwrap_or(0), values)
    }

    pub fn read_csv(path: &Path, has_header: bool) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Open {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(
            std::io::BufReader::new(file),
            has_header,
            &path.display().to_string(),
        )
    }

    /// Writes the matrix as headerless CSV using shortest round-trip
    /// formatting, so equal matrices give byte-identical files.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        for r in self.rows() {
            line.clear();
            for (j, x) in r.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&x.to_string());
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Assignment of each sample to one of `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPartition("k must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidPartition(format!(
                "label {bad} is not below k = {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    /// Partition with `k` set to one past the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(1, |&m| m + 1);
        Self::new(labels, k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Errors with the first empty cluster, if any.
    pub fn ensure_nonempty(&self) -> Result<Vec<usize>> {
        let sizes = self.sizes();
        match sizes.iter().position(|&s| s == 0) {
            Some(k) => Err(Error::EmptyCluster(k)),
            None => Ok(sizes),
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.labels.len() != n {
            return Err(Error::LengthMismatch(format!(
                "partition covers {} samples, matrix has {n}",
                self.labels.len()
            )));
        }
        Ok(())
    }
}

/// Constraint set a weight vector was produced under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightRegime {
    /// Binary weights with at most `⌊s⌋` ones.
    L0,
    /// `‖w‖₂ ≤ 1`, `‖w‖₁ ≤ s`.
    L1,
    Uniform,
}

/// Nonnegative per-feature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    values: Vec<f64>,
    regime: WeightRegime,
}

impl FeatureWeights {
    pub fn new(values: Vec<f64>, regime: WeightRegime) -> Result<Self> {
        if let Some(j) = values.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weight {j} is {}, expected a finite nonnegative value",
                values[j]
            )));
        }
        if regime == WeightRegime::L0 && values.iter().any(|&w| w != 0.0 && w != 1.0) {
            return Err(Error::InvalidWeights("l0 weights must be binary".into()));
        }
        Ok(Self { values, regime })
    }

    /// `1/√p` on every feature.
    pub fn uniform(p: usize) -> Self {
        Self {
            values: vec![1.0 / (p as f64).sqrt(); p],
            regime: WeightRegime::Uniform,
        }
    }

    pub fn ones(p: usize) -> Self {
        Self {
            values: vec![1.0; p],
            regime: WeightRegime::Uniform,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn regime(&self) -> WeightRegime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Features with a weight above [`SELECTION_EPS`], ascending.
    pub fn selected(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&j| self.values[j] > SELECTION_EPS)
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|w| w * c).collect(),
            WeightRegime::Uniform,
        )
    }

    fn check_len(&self, p: usize) -> Result<()> {
        if self.values.len() != p {
            return Err(Error::LengthMismatch(format!(
                "{} weights for {p} features",
                self.values.len()
            )));
        }
        Ok(())
    }
}

/// Per-feature between-cluster sums of squares `a_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BcssVector(Vec<f64>);

impl BcssVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, w: &FeatureWeights) -> f64 {
        self.0.iter().zip(w.values()).map(|(a, w)| a * w).sum()
    }
}

/// Per-cluster column sums and sizes.
fn cluster_sums(m: &DataMatrix, c: &Partition) -> (Vec<f64>, Vec<usize>) {
    let p = m.p();
    let mut sums = vec![0.0; c.k() * p];
    for (r, &l) in m.rows().zip(c.labels()) {
        for (s, &x) in sums[l * p..(l + 1) * p].iter_mut().zip(r) {
            *s += x;
        }
    }
    (sums, c.sizes())
}

fn cluster_means(m: &DataMatrix, c: &Partition) -> Result<Vec<f64>> {
    let (mut sums, _) = cluster_sums(m, c);
    let sizes = c.ensure_nonempty()?;
    for (chunk, &nk) in sums.chunks_exact_mut(m.p()).zip(&sizes) {
        chunk.iter_mut().for_each(|s| *s /= nk as f64);
    }
    Ok(sums)
}

/// Per-feature `a_j` in the ordered-pair convention, computed from cluster
/// centroids as `2 Σ_k n_k (x̄_kj − x̄_j)²`.
pub fn bcss_per_feature(m: &DataMatrix, c: &Partition) -> Result<BcssVector> {
    c.check_len(m.n())?;
    let means = cluster_means(m, c)?;
    let sizes = c.sizes();
    let p = m.p();
    let n = m.n() as f64;
    let mut grand = vec![0.0; p];
    for r in m.rows() {
        for (g, &x) in grand.iter_mut().zip(r) {
            *g += x;
        }
    }
    grand.iter_mut().for_each(|g| *g /= n);
    let mut a = vec![0.0; p];
    for (centroid, &nk) in means.chunks_exact(p).zip(&sizes) {
        for ((aj, &mu), &g) in a.iter_mut().zip(centroid).zip(&grand) {
            *aj += nk as f64 * (mu - g) * (mu - g);
        }
    }
    a.iter_mut().for_each(|aj| *aj *= 2.0);
    Ok(BcssVector(a))
}

/// The centered-sum form `Σ_k (Σ_{i∈C_k} x_ij)² / n_k − (Σ_i x_ij)² / n`.
///
/// This counts each unordered pair once, so it is exactly half of
/// [`bcss_per_feature`]. It is also the scale on which a pure-noise
/// standardized feature has expectation `K − 1`.
pub fn bcss_centered_sums(m: &DataMatrix, c: &Partition) -> Result<Vec<f64>> {
    c.check_len(m.n())?;
    let sizes = c.ensure_nonempty()?;
    let (sums, _) = cluster_sums(m, c);
    let p = m.p();
    let n = m.n() as f64;
    let mut total = vec![0.0; p];
    for s in sums.chunks_exact(p) {
        for (t, &x) in total.iter_mut().zip(s) {
            *t += x;
        }
    }
    let mut out: Vec<f64> = total.iter().map(|t| -(t / n.sqrt()).powi(2)).collect();
    for (s, &nk) in sums.chunks_exact(p).zip(&sizes) {
        let root = (nk as f64).sqrt();
        for (o, &x) in out.iter_mut().zip(s) {
            *o += (x / root).powi(2);
        }
    }
    Ok(out)
}

/// Weighted within-cluster sum of squares (ordered-pair convention).
pub fn weighted_wcss(m: &DataMatrix, c: &Partition, w: &FeatureWeights) -> Result<f64> {
    c.check_len(m.n())?;
    w.check_len(m.p())?;
    let means = cluster_means(m, c)?;
    let p = m.p();
    let mut total = 0.0;
    for (r, &l) in m.rows().zip(c.labels()) {
        let centroid = &means[l * p..(l + 1) * p];
        total += r
            .iter()
            .zip(centroid)
            .zip(w.values())
            .map(|((&x, &mu), &wj)| wj * (x - mu) * (x - mu))
            .sum::<f64>();
    }
    Ok(2.0 * total)
}

/// `Σ_j w_j (1/n) Σ_{i,i'} (x_ij − x_i'j)²`, the partition-free part of BCSS.
pub fn total_ss(m: &DataMatrix, w: &FeatureWeights) -> Result<f64> {
    w.check_len(m.p())?;
    let single = Partition::new(vec![0; m.n()], 1)?;
    weighted_wcss(m, &single, w)
}
