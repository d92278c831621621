//! Monte Carlo checks of the consistency results for hard-thresholded
//! sparse k-means.
//!
//! Each trial draws a fresh independent-feature mixture, fits the `L0`
//! method at the true sparsity `s = p*`, and records three things: the
//! clustering error rate against the truth, whether every relevant feature's
//! `a_j` beats every noise feature's at the fitted partition (the *gap
//! event*), and whether the selected support is exactly the relevant set.
//! A sweep repeats this over increasing sample sizes so the frequencies can
//! be read as a trend in `n`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ecr;
use crate::rng::derive_seed;
use crate::sparse::{l0_kmeans, SparseKmeansConfig, SparseMethod};
use crate::synth::{generate, MixtureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub ecr: f64,
    pub gap_event: bool,
    pub exact_support: bool,
    pub seed: u64,
}

/// One dataset, one fit at `s = p*`. `cfg.s` is overwritten with `p*`.
pub fn run_trial(spec: &MixtureSpec, cfg: &SparseKmeansConfig) -> Result<TrialOutcome> {
    if spec.rho != 0.0 {
        return Err(Error::InvalidSpec(
            "trials assume independent features (rho = 0)".into(),
        ));
    }
    if cfg.method != SparseMethod::L0 {
        return Err(Error::InvalidConfig("trials use the l0 method".into()));
    }
    if spec.p_star == 0 || spec.p_star >= spec.p {
        return Err(Error::InvalidSpec("trials need 0 < p* < p".into()));
    }
    let (m, truth) = generate(spec)?;
    let cfg = SparseKmeansConfig {
        s: spec.p_star as f64,
        ..*cfg
    };
    let fit = l0_kmeans(&m, &cfg)?;
    let a = fit.bcss.values();
    let min_relevant = a[..spec.p_star]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max_noise = a[spec.p_star..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let w = fit.weights.values();
    let exact_support =
        w[..spec.p_star].iter().all(|&x| x == 1.0) && w[spec.p_star..].iter().all(|&x| x == 0.0);
    let outcome = TrialOutcome {
        ecr: ecr(fit.partition.labels(), &truth.labels)?,
        gap_event: min_relevant > max_noise,
        exact_support,
        seed: spec.seed,
    };
    debug_assert!(!outcome.exact_support || outcome.gap_event);
    Ok(outcome)
}

/// Wilson score interval for `successes` out of `trials` at 95% coverage.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lower = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let upper = if successes >= trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lower, upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Frequency {
    pub fn new(successes: usize, trials: usize) -> Self {
        let (lower, upper) = wilson_interval(successes, trials);
        Self {
            successes,
            trials,
            estimate: successes as f64 / trials as f64,
            lower,
            upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: usize,
    pub p_star: usize,
    pub freq_gap: Frequency,
    pub freq_support: Frequency,
    pub mean_ecr: f64,
    /// Standard error of `mean_ecr`.
    pub se_ecr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub seed: u64,
}

/// True unless some later frequency lies strictly below an earlier one with
/// non-overlapping Wilson intervals.
pub fn nondecreasing_within_intervals(freqs: &[&Frequency]) -> bool {
    freqs
        .iter()
        .enumerate()
        .all(|(i, a)| freqs[i + 1..].iter().all(|b| b.upper >= a.lower))
}

impl SweepReport {
    pub fn gap_trend_ok(&self) -> bool {
        nondecreasing_within_intervals(&self.rows.iter().map(|r| &r.freq_gap).collect::<Vec<_>>())
    }

    pub fn support_trend_ok(&self) -> bool {
        nondecreasing_within_intervals(
            &self
                .rows
                .iter()
                .map(|r| &r.freq_support)
                .collect::<Vec<_>>(),
        )
    }

    /// Mean ECR never rises by more than two combined standard errors.
    pub fn ecr_trend_ok(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, a)| {
            self.rows[i + 1..].iter().all(|b| {
                b.mean_ecr <= a.mean_ecr + 2.0 * (a.se_ecr.powi(2) + b.se_ecr.powi(2)).sqrt()
            })
        })
    }

    /// One row per setting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "n,p,p_star,trials,freq_gap,freq_gap_lower,freq_gap_upper,freq_support,freq_support_lower,freq_support_upper,mean_ecr,se_ecr"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.p,
                r.p_star,
                r.trials,
                r.freq_gap.estimate,
                r.freq_gap.lower,
                r.freq_gap.upper,
                r.freq_support.estimate,
                r.freq_support.lower,
                r.freq_support.upper,
                r.mean_ecr,
                r.se_ecr
            )?;
        }
        Ok(())
    }
}

/// Runs `trials` seeded trials at each sample size in `n_list`, keeping
/// `base`'s means, `p` and `p*`. Trial `t` of setting `i` uses data seed
/// `derive_seed(seed, [i, t])` and inner seed `derive_seed(seed, [i, t, 1])`.
pub fn sweep(
    base: &MixtureSpec,
    n_list: &[usize],
    trials: usize,
    cfg: &SparseKmeansConfig,
    seed: u64,
) -> Result<SweepReport> {
    if trials < 20 {
        return Err(Error::InvalidConfig(format!(
            "sweeps need at least 20 trials, got {trials}"
        )));
    }
    if n_list.is_empty() {
        return Err(Error::InvalidConfig("empty n list".into()));
    }
    let mut n_sorted = n_list.to_vec();
    n_sorted.sort_unstable();
    let mut rows = Vec::with_capacity(n_sorted.len());
    for (i, &n) in n_sorted.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let spec = base
                    .clone()
                    .with_n(n)
                    .with_seed(derive_seed(seed, &[i as u64, t as u64]));
                let mut trial_cfg = *cfg;
                trial_cfg.inner.seed = derive_seed(seed, &[i as u64, t as u64, 1]);
                run_trial(&spec, &trial_cfg)
            })
            .collect::<Result<_>>()?;
        let gaps = outcomes.iter().filter(|o| o.gap_event).count();
        let exact = outcomes.iter().filter(|o| o.exact_support).count();
        // hard thresholding at s = p* returns the support only when the
        // relevant a_j all beat the noise a_j
        assert!(
            outcomes.iter().all(|o| !o.exact_support || o.gap_event),
            "exact support without the gap event"
        );
        let tn = trials as f64;
        let mean_ecr = outcomes.iter().map(|o| o.ecr).sum::<f64>() / tn;
        let var = outcomes
            .iter()
            .map(|o| (o.ecr - mean_ecr).powi(2))
            .sum::<f64>()
            / (tn - 1.0);
        rows.push(SweepRow {
            n: base.clone().with_n(n).n(),
            p: base.p,
            p_star: base.p_star,
            freq_gap: Frequency::new(gaps, trials),
            freq_support: Frequency::new(exact, trials),
            mean_ecr,
            se_ecr: (var / tn).sqrt(),
            trials,
        });
    }
    Ok(SweepReport { rows, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::KmeansConfig;

    #[test]
    fn wilson_contains_estimate() {
        for (s, n) in [(0, 20), (20, 20), (7, 20), (49, 50)] {
            let f = Frequency::new(s, n);
            assert!(f.lower <= f.estimate && f.estimate <= f.upper, "{f:?}");
        }
        let (lo, hi) = wilson_interval(10, 20);
        assert!((lo - 0.2993).abs() < 1e-3 && (hi - 0.7007).abs() < 1e-3);
    }

    #[test]
    fn trend_check() {
        let up = [
            Frequency::new(2, 50),
            Frequency::new(20, 50),
            Frequency::new(48, 50),
        ];
        assert!(nondecreasing_within_intervals(
            &up.iter().collect::<Vec<_>>()
        ));
        let down = [Frequency::new(48, 50), Frequency::new(2, 50)];
        assert!(!nondecreasing_within_intervals(
            &down.iter().collect::<Vec<_>>()
        ));
        let wiggle = [Frequency::new(30, 50), Frequency::new(27, 50)];
        assert!(nondecreasing_within_intervals(
            &wiggle.iter().collect::<Vec<_>>()
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = SparseKmeansConfig::new(SparseMethod::L0, 2.0, KmeansConfig::new(3));
        let spec = MixtureSpec::three_cluster(1.0, 5, 10, 2).with_rho(0.2);
        assert!(run_trial(&spec, &cfg).is_err());
        let spec = MixtureSpec::three_cluster(1.0, 5, 10, 2);
        assert!(matches!(
            sweep(&spec, &[15], 19, &cfg, 0),
            Err(Error::InvalidConfig(_))
        ));
    }
}
