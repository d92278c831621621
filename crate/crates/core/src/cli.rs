//! The `sparsekm` command line.
//!
//! Every command writes its outputs next to a `--out` prefix (or into
//! `--outdir` for `experiment`) together with a run manifest. JSON documents
//! carry a versioned `schema` id; see the README for the field lists.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{bcss_per_feature, DataMatrix, FeatureWeights};
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig, RepRecord};
use crate::gap::{gap_statistic, GapConfig, GapProfile, SelectionRule};
use crate::kmeans::{run_kmeans, KmeansConfig};
use crate::lab::{self, SweepReport};
use crate::metrics::{cer, ecr, feature_counts};
use crate::sparse::{sparse_kmeans, SparseKmeansConfig, SparseKmeansResult, SparseMethod};
use crate::synth::{benchmark_spec, generate, ExperimentId, MixtureSpec};

pub const MANIFEST_SCHEMA: &str = "sparsekm.manifest/v1";
pub const TRUTH_SCHEMA: &str = "sparsekm.truth/v1";
pub const CLUSTER_SCHEMA: &str = "sparsekm.cluster-result/v1";
pub const TUNE_SCHEMA: &str = "sparsekm.tune-result/v1";
pub const METRICS_SCHEMA: &str = "sparsekm.metrics/v1";
pub const SWEEP_SCHEMA: &str = "sparsekm.sweep-report/v1";

#[derive(Debug, Parser)]
#[command(
    name = "sparsekm",
    version,
    about = "Sparse k-means clustering with l0 and l1 feature weights"
)]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "SPARSEKM_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Draw a synthetic dataset with its ground truth.
    Generate(GenerateArgs),
    /// Cluster a CSV with k-means or sparse k-means.
    Cluster(ClusterArgs),
    /// Choose the sparsity level with the permutation gap statistic.
    Tune(TuneArgs),
    /// Score a clustering result against ground truth.
    Evaluate(EvaluateArgs),
    /// Run the benchmark protocol for one synthetic experiment.
    Experiment(ExperimentArgs),
    /// Monte Carlo consistency sweep over sample sizes.
    Sweep(SweepArgs),
}

/// Mixture parameters; cluster `c` of `k` has relevant-feature mean
/// `mu · (c − (k−1)/2)`, so three clusters sit at `−mu, 0, +mu`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SpecArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 500)]
    pub p: usize,
    #[arg(long, default_value_t = 50)]
    pub p_star: usize,
    #[arg(long, default_value_t = 0.7)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
}

impl SpecArgs {
    pub fn to_spec(&self, seed: u64) -> Result<MixtureSpec> {
        let centre = (self.k as f64 - 1.0) / 2.0;
        let spec = MixtureSpec {
            k: self.k,
            sizes: vec![self.per_cluster; self.k],
            p: self.p,
            p_star: self.p_star,
            means: (0..self.k)
                .map(|c| vec![self.mu * (c as f64 - centre); self.p_star])
                .collect(),
            rho: self.rho,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Named benchmark (E1, E2[:mu:p], E3a, E3b, E4[:rho]); overrides the
    /// mixture flags.
    #[arg(long)]
    pub experiment: Option<String>,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// The first CSV row holds column names.
    #[arg(long)]
    pub header: bool,
    /// Cluster the values as given instead of centering and scaling each
    /// column.
    #[arg(long)]
    pub no_standardize: bool,
}

impl InputArgs {
    fn load(&self) -> Result<DataMatrix> {
        let m = DataMatrix::read_csv(&self.input, self.header)?;
        if self.no_standardize {
            Ok(m)
        } else {
            m.standardize(true)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    Kmeans,
    L0,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneMethod {
    L0,
    L1,
}

impl From<TuneMethod> for SparseMethod {
    fn from(m: TuneMethod) -> Self {
        match m {
            TuneMethod::L0 => SparseMethod::L0,
            TuneMethod::L1 => SparseMethod::L1,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: ClusterMethod,
    #[arg(long)]
    pub k: usize,
    /// Sparsity level; required for l0 and l1.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    MaxGap,
    OneSe,
}

#[derive(Debug, Args, Serialize)]
pub struct TuneArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: TuneMethod,
    #[arg(long)]
    pub k: usize,
    /// `geom:a:b:n`, `lin:a:b:n` or a comma-separated list.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub permutations: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::MaxGap)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Also fit at the chosen sparsity.
    #[arg(long)]
    pub fit: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Cluster result JSON.
    #[arg(long)]
    pub result: PathBuf,
    /// Truth JSON; `support` may be omitted, which skips the feature counts.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    /// E1, E2, E3 or E4.
    #[arg(long)]
    pub id: String,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub permutations: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long)]
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "UPPER")]
pub enum Theorem {
    /// Clustering error decreases with n.
    T2,
    /// Relevant features separate from noise features.
    T3,
    /// Exact support recovery.
    T4,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, ignore_case = true)]
    pub theorem: Theorem,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_delimiter = ',', default_value = "30,60,120")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub tool_version: &'static str,
    pub duration_secs: f64,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TruthDoc {
    pub schema: String,
    pub labels: Vec<usize>,
    #[serde(default)]
    pub support: Option<Vec<usize>>,
    #[serde(default)]
    pub spec: Option<MixtureSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterDoc {
    pub schema: String,
    pub method: String,
    pub k: usize,
    pub s: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub assignments: Vec<usize>,
    pub weights: Vec<f64>,
    pub selected: Vec<usize>,
    pub objective: f64,
    pub outer_iters: usize,
    pub converged: bool,
    /// Per-feature between-cluster sum of squares at the final partition.
    pub bcss: Vec<f64>,
}

impl ClusterDoc {
    fn from_sparse(
        method: SparseMethod,
        s: f64,
        k: usize,
        m: &DataMatrix,
        r: &SparseKmeansResult,
    ) -> Self {
        Self {
            schema: CLUSTER_SCHEMA.into(),
            method: method.name().into(),
            k,
            s: Some(s),
            n: m.n(),
            p: m.p(),
            assignments: r.partition.labels().to_vec(),
            weights: r.weights.values().to_vec(),
            selected: r.selected_features.clone(),
            objective: r.objective,
            outer_iters: r.outer_iters,
            converged: r.converged,
            bcss: r.bcss.values().to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
struct TuneDoc<'a> {
    schema: &'static str,
    method: &'static str,
    chosen_s: f64,
    flat: bool,
    permutations: usize,
    profile: &'a GapProfile,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub schema: String,
    pub cer: f64,
    pub ecr: f64,
    pub nw: usize,
    pub pzw: Option<usize>,
    pub pnw: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SweepDoc<'a> {
    schema: &'static str,
    theorem: Theorem,
    trend_ok: bool,
    report: &'a SweepReport,
}

/// Outputs and warnings gathered while a command runs.
#[derive(Default)]
struct Run {
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
}

impl Run {
    fn create(&mut self, path: PathBuf) -> Result<BufWriter<File>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let f = File::create(&path)?;
        if !self.outputs.contains(&path) {
            self.outputs.push(path);
        }
        Ok(BufWriter::new(f))
    }

    fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        let mut w = self.create(path)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Parses `geom:a:b:n`, `lin:a:b:n` or `s1,s2,...`. Geometric grids for
/// `l0` are rounded to integers and deduplicated.
pub fn parse_grid(spec: &str, method: SparseMethod) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidConfig(format!("malformed grid {spec:?}: {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid: Vec<f64> = match parts.as_slice() {
        [kind @ ("geom" | "lin"), a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| bad("point count must be an integer"))?;
            if n < 2 || !(a > 0.0 && b > a) {
                return Err(bad("need 0 < a < b and at least two points"));
            }
            let t = |i: usize| i as f64 / (n - 1) as f64;
            let mut g: Vec<f64> = if *kind == "geom" {
                (0..n).map(|i| a * (b / a).powf(t(i))).collect()
            } else {
                (0..n).map(|i| a + (b - a) * t(i)).collect()
            };
            if method == SparseMethod::L0 && *kind == "geom" {
                g.iter_mut().for_each(|s| *s = s.round());
                g.dedup();
            }
            g
        }
        [list] => list.split(',').map(num).collect::<Result<_>>()?,
        _ => return Err(bad("expected geom:a:b:n, lin:a:b:n or a comma list")),
    };
    if grid
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(bad("values must be strictly ascending"));
    }
    Ok(grid)
}

fn cmd_generate(a: &GenerateArgs, run: &mut Run) -> Result<()> {
    let spec = match &a.experiment {
        Some(id) => benchmark_spec(id.parse::<ExperimentId>()?)?.with_seed(a.seed),
        None => a.spec.to_spec(a.seed)?,
    };
    let (m, truth) = generate(&spec)?;
    let mut w = run.create(with_suffix(&a.out, ".csv"))?;
    m.write_csv(&mut w)?;
    w.flush()?;
    let doc = TruthDoc {
        schema: TRUTH_SCHEMA.into(),
        labels: truth.labels,
        support: Some(truth.support),
        spec: Some(spec),
    };
    run.json(with_suffix(&a.out, ".truth.json"), &doc)
}

fn fit_kmeans(m: &DataMatrix, k: usize, seed: u64, restarts: usize) -> Result<ClusterDoc> {
    let ones = FeatureWeights::ones(m.p());
    let r = run_kmeans(
        m,
        &ones,
        &KmeansConfig::new(k).with_seed(seed).with_restarts(restarts),
    )?;
    let bcss = bcss_per_feature(m, &r.partition)?;
    Ok(ClusterDoc {
        schema: CLUSTER_SCHEMA.into(),
        method: "kmeans".into(),
        k,
        s: None,
        n: m.n(),
        p: m.p(),
        assignments: r.partition.labels().to_vec(),
        weights: ones.values().to_vec(),
        selected: (0..m.p()).collect(),
        objective: bcss.dot(&ones),
        outer_iters: 0,
        converged: true,
        bcss: bcss.values().to_vec(),
    })
}

fn cmd_cluster(a: &ClusterArgs, run: &mut Run) -> Result<()> {
    let m = a.input.load()?;
    let doc = match a.method {
        ClusterMethod::Kmeans => fit_kmeans(&m, a.k, a.seed, a.restarts)?,
        ClusterMethod::L0 | ClusterMethod::L1 => {
            let method = if a.method == ClusterMethod::L0 {
                SparseMethod::L0
            } else {
                SparseMethod::L1
            };
            let s = a.s.ok_or_else(|| {
                Error::InvalidConfig(format!("--s is required for --method {}", method.name()))
            })?;
            let inner = KmeansConfig::new(a.k)
                .with_seed(a.seed)
                .with_restarts(a.restarts);
            let r = sparse_kmeans(&m, &SparseKmeansConfig::new(method, s, inner))?;
            ClusterDoc::from_sparse(method, s, a.k, &m, &r)
        }
    };
    run.json(with_suffix(&a.out, ".json"), &doc)
}

fn cmd_tune(a: &TuneArgs, run: &mut Run) -> Result<()> {
    let method = SparseMethod::from(a.method);
    let m = a.input.load()?;
    let inner = KmeansConfig::new(a.k).with_restarts(a.restarts);
    let mut cfg = GapConfig::new(method, m.p(), inner);
    if let Some(g) = &a.grid {
        cfg.grid = parse_grid(g, method)?;
    }
    cfg.permutations = a.permutations;
    cfg.seed = a.seed;
    cfg.rule = match a.rule {
        RuleArg::MaxGap => SelectionRule::MaxGap,
        RuleArg::OneSe => SelectionRule::OneStandardError,
    };
    let profile = gap_statistic(&m, &cfg)?;
    run.warnings.extend(profile.warnings.iter().cloned());
    if profile.is_flat() {
        run.warnings.push(format!(
            "gap is flat: the best gap at s = {} is within three standard errors of zero",
            profile.chosen_s
        ));
    }
    let mut w = run.create(with_suffix(&a.out, ".gap.csv"))?;
    profile.write_csv(&mut w)?;
    w.flush()?;
    let doc = TuneDoc {
        schema: TUNE_SCHEMA,
        method: method.name(),
        chosen_s: profile.chosen_s,
        flat: profile.is_flat(),
        permutations: cfg.permutations,
        profile: &profile,
    };
    run.json(with_suffix(&a.out, ".tune.json"), &doc)?;
    if a.fit {
        let r = sparse_kmeans(
            &m,
            &cfg.sparse_config(profile.chosen_s, profile.chosen_index()),
        )?;
        let fit = ClusterDoc::from_sparse(method, profile.chosen_s, a.k, &m, &r);
        run.json(with_suffix(&a.out, ".cluster.json"), &fit)?;
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_reader(std::io::BufReader::new(f)).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })
}

fn cmd_evaluate(a: &EvaluateArgs, run: &mut Run) -> Result<()> {
    let result: ClusterDoc = read_json(&a.result)?;
    let truth: TruthDoc = read_json(&a.truth)?;
    let cer = cer(&result.assignments, &truth.labels)?;
    let ecr = ecr(&result.assignments, &truth.labels)?;
    let (nw, pzw, pnw) = match &truth.support {
        Some(support) => {
            let c = feature_counts(&result.weights, support)?;
            (c.nw, Some(c.pzw), Some(c.pnw))
        }
        None => (result.selected.len(), None, None),
    };
    let doc = MetricsDoc {
        schema: METRICS_SCHEMA.into(),
        cer,
        ecr,
        nw,
        pzw,
        pnw,
    };
    run.json(with_suffix(&a.out, ".json"), &doc)?;
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = run.create(with_suffix(&a.out, ".csv"))?;
    writeln!(w, "cer,ecr,nw,pzw,pnw")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        doc.cer,
        doc.ecr,
        doc.nw,
        opt(doc.pzw),
        opt(doc.pnw)
    )?;
    w.flush()?;
    Ok(())
}

fn write_experiment_tables(dir: &Path, records: &[RepRecord], run: &mut Run) -> Result<()> {
    let mut w = run.create(dir.join("reps.csv"))?;
    experiment::write_reps_csv(records, &mut w)?;
    w.flush()?;
    let mut w = run.create(dir.join("summary.csv"))?;
    experiment::write_summary_csv(&experiment::summarize(records), &mut w)?;
    w.flush()?;
    let mut w = run.create(dir.join("long.csv"))?;
    experiment::write_long_csv(records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs, run: &mut Run) -> Result<()> {
    if a.reps == 0 {
        return Err(Error::InvalidConfig("--reps must be at least 1".into()));
    }
    let cells = ExperimentId::family(&a.id)?;
    let cfg = ExperimentConfig {
        reps: a.reps,
        seed: a.seed,
        permutations: a.permutations,
        restarts: a.restarts,
    };
    let mut records = Vec::new();
    for id in cells {
        let start = Instant::now();
        records.extend(experiment::run_cell(id, &cfg)?);
        log::info!("cell {id}: {} reps in {:.1?}", a.reps, start.elapsed());
        // rewrite after every cell so an interrupted run keeps what finished
        write_experiment_tables(&a.outdir, &records, run)?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, run: &mut Run) -> Result<()> {
    let base = a.spec.to_spec(a.seed)?;
    let inner = KmeansConfig::new(base.k).with_restarts(a.restarts);
    let cfg = SparseKmeansConfig::new(SparseMethod::L0, base.p_star as f64, inner);
    let report = lab::sweep(&base, &a.n_list, a.trials, &cfg, a.seed)?;
    let trend_ok = match a.theorem {
        Theorem::T2 => report.ecr_trend_ok(),
        Theorem::T3 => report.gap_trend_ok(),
        Theorem::T4 => report.support_trend_ok(),
    };
    if !trend_ok {
        run.warnings
            .push(format!("{:?} trend check failed", a.theorem));
    }
    let mut w = run.create(with_suffix(&a.out, ".csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let doc = SweepDoc {
        schema: SWEEP_SCHEMA,
        theorem: a.theorem,
        trend_ok,
        report: &report,
    };
    run.json(with_suffix(&a.out, ".json"), &doc)
}

impl Command {
    fn seed(&self) -> u64 {
        match self {
            Command::Generate(a) => a.seed,
            Command::Cluster(a) => a.seed,
            Command::Tune(a) => a.seed,
            Command::Evaluate(_) => 0,
            Command::Experiment(a) => a.seed,
            Command::Sweep(a) => a.seed,
        }
    }

    fn manifest_path(&self) -> PathBuf {
        match self {
            Command::Generate(GenerateArgs { out, .. })
            | Command::Cluster(ClusterArgs { out, .. })
            | Command::Tune(TuneArgs { out, .. })
            | Command::Evaluate(EvaluateArgs { out, .. })
            | Command::Sweep(SweepArgs { out, .. }) => with_suffix(out, ".manifest.json"),
            Command::Experiment(a) => a.outdir.join("manifest.json"),
        }
    }

    fn execute(&self, run: &mut Run) -> Result<()> {
        match self {
            Command::Generate(a) => cmd_generate(a, run),
            Command::Cluster(a) => cmd_cluster(a, run),
            Command::Tune(a) => cmd_tune(a, run),
            Command::Evaluate(a) => cmd_evaluate(a, run),
            Command::Experiment(a) => cmd_experiment(a, run),
            Command::Sweep(a) => cmd_sweep(a, run),
        }
    }
}

fn execute_with_manifest(cli: &Cli, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let mut run = Run::default();
    cli.command.execute(&mut run)?;
    for w in &run.warnings {
        log::warn!("{w}");
    }
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        command: argv,
        config: serde_json::to_value(&cli.command)?,
        seed: cli.command.seed(),
        tool_version: env!("CARGO_PKG_VERSION"),
        duration_secs: start.elapsed().as_secs_f64(),
        outputs: run.outputs.clone(),
        warnings: run.warnings.clone(),
    };
    Run::default().json(cli.command.manifest_path(), &manifest)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let argv = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let outcome = match cli.threads {
        Some(0) => Err(Error::InvalidConfig("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))
            .and_then(|pool| pool.install(|| execute_with_manifest(&cli, argv))),
        None => execute_with_manifest(&cli, argv),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let class = e.class();
            eprintln!("error ({}): {e}", format!("{class:?}").to_lowercase());
            class.exit_code()
        }
    }
}
