//! Replication protocol for the synthetic benchmarks: for each parameter
//! cell and repetition, draw a dataset, standardize it, and compare plain
//! k-means with both sparse methods at their gap-selected sparsity.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FeatureWeights;
use crate::error::Result;
use crate::gap::{gap_statistic, GapConfig};
use crate::kmeans::{run_kmeans, KmeansConfig};
use crate::metrics::{cer, ecr, feature_counts};
use crate::rng::derive_seed;
use crate::sparse::{sparse_kmeans, SparseMethod};
use crate::synth::{benchmark_spec, generate, ExperimentId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kmeans,
    L0,
    L1,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Kmeans, Method::L0, Method::L1];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Kmeans => "kmeans",
            Method::L0 => "l0",
            Method::L1 => "l1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub reps: usize,
    pub seed: u64,
    /// Null datasets per gap profile.
    pub permutations: usize,
    /// k-means restarts for every clustering step.
    pub restarts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            reps: 20,
            seed: 0,
            permutations: 10,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub cell: String,
    pub rep: usize,
    pub method: Method,
    /// Gap-selected sparsity; `None` for plain k-means.
    pub s: Option<f64>,
    pub cer: f64,
    pub ecr: f64,
    pub nw: usize,
    pub pzw: usize,
    pub pnw: usize,
}

fn cell_key(id: ExperimentId) -> u64 {
    // FNV-1a of the cell name keeps seeds stable when cells are run alone
    id.to_string().bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
    })
}

/// All three methods on one dataset.
pub fn run_rep(id: ExperimentId, rep: usize, cfg: &ExperimentConfig) -> Result<Vec<RepRecord>> {
    let key = cell_key(id);
    let rep_seed = |stream: u64| derive_seed(cfg.seed, &[key, rep as u64, stream]);
    let spec = benchmark_spec(id)?.with_seed(rep_seed(0));
    let (raw, truth) = generate(&spec)?;
    let m = raw.standardize(true)?;
    let inner = KmeansConfig::new(spec.k).with_restarts(cfg.restarts);

    let record = |method, s, labels: &[usize], weights: &[f64]| -> Result<RepRecord> {
        let counts = feature_counts(weights, &truth.support)?;
        Ok(RepRecord {
            cell: id.to_string(),
            rep,
            method,
            s,
            cer: cer(labels, &truth.labels)?,
            ecr: ecr(labels, &truth.labels)?,
            nw: counts.nw,
            pzw: counts.pzw,
            pnw: counts.pnw,
        })
    };

    let ones = FeatureWeights::ones(m.p());
    let km = run_kmeans(&m, &ones, &inner.with_seed(rep_seed(1)))?;
    let mut out = vec![record(
        Method::Kmeans,
        None,
        km.partition.labels(),
        ones.values(),
    )?];
    for (method, sparse, stream) in [
        (Method::L0, SparseMethod::L0, 2),
        (Method::L1, SparseMethod::L1, 3),
    ] {
        let mut gap_cfg = GapConfig::new(sparse, m.p(), inner);
        gap_cfg.permutations = cfg.permutations;
        gap_cfg.seed = rep_seed(stream);
        let profile = gap_statistic(&m, &gap_cfg)?;
        let fit = sparse_kmeans(
            &m,
            &gap_cfg.sparse_config(profile.chosen_s, profile.chosen_index()),
        )?;
        out.push(record(
            method,
            Some(profile.chosen_s),
            fit.partition.labels(),
            fit.weights.values(),
        )?);
    }
    Ok(out)
}

/// Every repetition of one cell, ordered by repetition then method.
pub fn run_cell(id: ExperimentId, cfg: &ExperimentConfig) -> Result<Vec<RepRecord>> {
    let per_rep: Vec<Vec<RepRecord>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_rep(id, rep, cfg))
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Mean and sample standard deviation; the deviation is `None` for a
/// single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: Option<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.len() > 1)
            .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: String,
    pub method: Method,
    pub reps: usize,
    pub cer: Stat,
    pub ecr: Stat,
    pub nw: Stat,
    pub pzw: Stat,
    pub pnw: Stat,
}

/// Aggregates records by (cell, method), preserving first-appearance order.
pub fn summarize(records: &[RepRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(String, Method)> = Vec::new();
    for r in records {
        let key = (r.cell.clone(), r.method);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(cell, method)| {
            let rows: Vec<&RepRecord> = records
                .iter()
                .filter(|r| r.cell == cell && r.method == method)
                .collect();
            let stat = |f: &dyn Fn(&RepRecord) -> f64| {
                Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            CellSummary {
                reps: rows.len(),
                cer: stat(&|r| r.cer),
                ecr: stat(&|r| r.ecr),
                nw: stat(&|r| r.nw as f64),
                pzw: stat(&|r| r.pzw as f64),
                pnw: stat(&|r| r.pnw as f64),
                cell,
                method,
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_reps_csv<W: Write>(records: &[RepRecord], mut w: W) -> Result<()> {
    writeln!(w, "cell,rep,method,s,cer,ecr,nw,pzw,pnw")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.cell,
            r.rep,
            r.method,
            opt(r.s),
            r.cer,
            r.ecr,
            r.nw,
            r.pzw,
            r.pnw
        )?;
    }
    Ok(())
}

/// One row per (cell, method): mean and sd of each criterion. Standard
/// deviations are left empty for single-repetition cells.
pub fn write_summary_csv<W: Write>(summary: &[CellSummary], mut w: W) -> Result<()> {
    writeln!(
        w,
        "cell,method,reps,cer_mean,cer_sd,ecr_mean,ecr_sd,nw_mean,nw_sd,pzw_mean,pzw_sd,pnw_mean,pnw_sd"
    )?;
    for s in summary {
        write!(w, "{},{},{}", s.cell, s.method, s.reps)?;
        for st in [s.cer, s.ecr, s.nw, s.pzw, s.pnw] {
            write!(w, ",{},{}", st.mean, opt(st.sd))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Long format, one row per (cell, rep, method, metric), for box plots.
pub fn write_long_csv<W: Write>(records: &[RepRecord], mut w: W) -> Result<()> {
    writeln!(w, "cell,rep,method,metric,value")?;
    for r in records {
        let metrics = [
            ("cer", r.cer),
            ("ecr", r.ecr),
            ("nw", r.nw as f64),
            ("pzw", r.pzw as f64),
            ("pnw", r.pnw as f64),
        ];
        for (name, v) in metrics {
            writeln!(w, "{},{},{},{},{}", r.cell, r.rep, r.method, name, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_single_value_has_no_sd() {
        assert_eq!(
            Stat::of(&[2.0]),
            Stat {
                mean: 2.0,
                sd: None
            }
        );
        let s = Stat::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.sd.unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn small_cell_runs_and_summarizes() {
        let cfg = ExperimentConfig {
            reps: 2,
            seed: 3,
            permutations: 2,
            restarts: 2,
        };
        let recs = run_cell(ExperimentId::E3a, &cfg).unwrap();
        assert_eq!(recs.len(), 6);
        assert!(recs
            .iter()
            .filter(|r| r.method == Method::Kmeans)
            .all(|r| r.nw == 25 && r.pzw == 0));
        let summary = summarize(&recs);
        assert_eq!(summary.len(), 3);
        let mut buf = Vec::new();
        write_summary_csv(&summary, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
        assert_eq!(recs, run_cell(ExperimentId::E3a, &cfg).unwrap());
    }
}
