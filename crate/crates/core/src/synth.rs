//! Gaussian mixture benchmarks with a known relevant-feature support.
//!
//! Sample `i` of cluster `c` has mean `μ_cj` on the first `p*` features and
//! zero on the rest. Noise around the mean is either i.i.d. standard normal
//! (`rho = 0`) or an AR(1) sequence across features with
//! `Cov(v_a, v_b) = rho^|a−b|`, drawn by the recursion
//! `v_1 = z_1, v_t = rho·v_{t−1} + √(1−rho²)·z_t`.
//!
//! Rows come out grouped by cluster in label order. Draws use a ChaCha8
//! stream seeded from `MixtureSpec::seed`, so the same spec always yields
//! the same matrix bit for bit.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub k: usize,
    /// Samples per cluster.
    pub sizes: Vec<usize>,
    pub p: usize,
    /// Number of leading features that carry cluster structure.
    pub p_star: usize,
    /// `k × p_star` cluster means on the relevant features.
    pub means: Vec<Vec<f64>>,
    /// AR(1) correlation between adjacent features, in `[0, 1)`.
    pub rho: f64,
    pub seed: u64,
}

impl MixtureSpec {
    /// Three clusters with means `+mu`, `−mu` and `0` on every relevant feature.
    pub fn three_cluster(mu: f64, per_cluster: usize, p: usize, p_star: usize) -> Self {
        Self {
            k: 3,
            sizes: vec![per_cluster; 3],
            p,
            p_star,
            means: vec![vec![mu; p_star], vec![-mu; p_star], vec![0.0; p_star]],
            rho: 0.0,
            seed: 0,
        }
    }

    /// `k` clusters whose relevant-feature mean is `step · c` for cluster
    /// `c = 1..=k`.
    pub fn ladder(k: usize, per_cluster: usize, p: usize, p_star: usize, step: f64) -> Self {
        Self {
            k,
            sizes: vec![per_cluster; k],
            p,
            p_star,
            means: (1..=k).map(|c| vec![step * c as f64; p_star]).collect(),
            rho: 0.0,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// Same means and proportions with roughly `n` samples, split as evenly
    /// as possible (earlier clusters take the remainder).
    pub fn with_n(mut self, n: usize) -> Self {
        let k = self.k;
        self.sizes = (0..k).map(|c| n / k + usize::from(c < n % k)).collect();
        self
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidSpec(m));
        if self.k == 0 || self.sizes.len() != self.k {
            return fail(format!(
                "{} cluster sizes for k = {}",
                self.sizes.len(),
                self.k
            ));
        }
        if self.sizes.contains(&0) {
            return fail("every cluster needs at least one sample".into());
        }
        if self.n() < 2 {
            return fail("need at least two samples".into());
        }
        if self.p == 0 || self.p_star > self.p {
            return fail(format!("p* = {} with p = {}", self.p_star, self.p));
        }
        if self.means.len() != self.k || self.means.iter().any(|m| m.len() != self.p_star) {
            return fail("means must be a k × p* matrix".into());
        }
        if self.means.iter().flatten().any(|m| !m.is_finite()) {
            return fail("means must be finite".into());
        }
        if !(0.0..1.0).contains(&self.rho) {
            return fail(format!("rho = {} is outside [0, 1)", self.rho));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub labels: Vec<usize>,
    /// Relevant features, `0..p*`.
    pub support: Vec<usize>,
}

pub fn generate(spec: &MixtureSpec) -> Result<(DataMatrix, GroundTruth)> {
    spec.validate()?;
    let mut rng = rng_from(spec.seed);
    let n = spec.n();
    let p = spec.p;
    let innovation = (1.0 - spec.rho * spec.rho).sqrt();
    let mut values = Vec::with_capacity(n * p);
    let mut labels = Vec::with_capacity(n);
    for (c, &size) in spec.sizes.iter().enumerate() {
        for _ in 0..size {
            let mut prev = 0.0;
            for j in 0..p {
                let z: f64 = rng.sample(StandardNormal);
                let v = if j == 0 || spec.rho == 0.0 {
                    z
                } else {
                    spec.rho * prev + innovation * z
                };
                prev = v;
                let mu = if j < spec.p_star {
                    spec.means[c][j]
                } else {
                    0.0
                };
                values.push(mu + v);
            }
            labels.push(c);
        }
    }
    let truth = GroundTruth {
        labels,
        support: (0..spec.p_star).collect(),
    };
    Ok((DataMatrix::new(n, p, values)?, truth))
}

/// The simulation settings used to benchmark the methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExperimentId {
    /// 6 clusters × 20, p = 2000, p* = 200, means 0.5·k.
    E1,
    /// 3 clusters × 20 with means ±mu/0 on the first 50 of `p` features.
    E2 { mu: f64, p: usize },
    /// 3 clusters × 10, p = 25, p* = 5, mu = 1.
    E3a,
    /// 3 clusters × 20, p = 500, p* = 50, mu = 0.7.
    E3b,
    /// As E1 with means 1·k and AR(1) correlation `rho` across features.
    E4 { rho: f64 },
}

impl ExperimentId {
    /// Every parameter cell of a named experiment family (`E1`..`E4`).
    pub fn family(name: &str) -> Result<Vec<ExperimentId>> {
        match name.to_ascii_uppercase().as_str() {
            "E1" => Ok(vec![ExperimentId::E1]),
            "E2" => Ok([0.6, 0.7]
                .iter()
                .flat_map(|&mu| [200, 500, 1000].map(|p| ExperimentId::E2 { mu, p }))
                .collect()),
            "E3" => Ok(vec![ExperimentId::E3a, ExperimentId::E3b]),
            "E4" => Ok(vec![
                ExperimentId::E4 { rho: 0.1 },
                ExperimentId::E4 { rho: 0.3 },
            ]),
            _ => Err(Error::UnknownExperiment(name.to_string())),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentId::E1 => write!(f, "E1"),
            ExperimentId::E2 { mu, p } => write!(f, "E2:{mu}:{p}"),
            ExperimentId::E3a => write!(f, "E3a"),
            ExperimentId::E3b => write!(f, "E3b"),
            ExperimentId::E4 { rho } => write!(f, "E4:{rho}"),
        }
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    /// Accepts `E1`, `E2` (mu 0.7, p 500), `E2:<mu>:<p>`, `E3a`, `E3b`,
    /// `E4` (rho 0.3) and `E4:<rho>`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownExperiment(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| unknown());
        match (parts[0].to_ascii_uppercase().as_str(), &parts[1..]) {
            ("E1", []) => Ok(ExperimentId::E1),
            ("E2", []) => Ok(ExperimentId::E2 { mu: 0.7, p: 500 }),
            ("E2", [mu, p]) => Ok(ExperimentId::E2 {
                mu: num(mu)?,
                p: p.parse().map_err(|_| unknown())?,
            }),
            ("E3A", []) => Ok(ExperimentId::E3a),
            ("E3B", []) => Ok(ExperimentId::E3b),
            ("E4", []) => Ok(ExperimentId::E4 { rho: 0.3 }),
            ("E4", [rho]) => Ok(ExperimentId::E4 { rho: num(rho)? }),
            _ => Err(unknown()),
        }
    }
}

/// Mixture spec for a named benchmark.
pub fn benchmark_spec(id: ExperimentId) -> Result<MixtureSpec> {
    let spec = match id {
        ExperimentId::E1 => MixtureSpec::ladder(6, 20, 2000, 200, 0.5),
        ExperimentId::E2 { mu, p } => MixtureSpec::three_cluster(mu, 20, p, 50),
        ExperimentId::E3a => MixtureSpec::three_cluster(1.0, 10, 25, 5),
        ExperimentId::E3b => MixtureSpec::three_cluster(0.7, 20, 500, 50),
        ExperimentId::E4 { rho } => MixtureSpec::ladder(6, 20, 2000, 200, 1.0).with_rho(rho),
    };
    spec.validate()?;
    Ok(spec)
}
