//! Benchmark harness for the `aarc` solver family.
//!
//! The library side of the `bench` binary: it resolves a [`BenchSpec`] into
//! oracle + start point, runs each requested solver in its own worker thread
//! (capped by the `BENCH_THREADS` environment variable), and writes one CSV
//! trace plus one JSON summary per solver. Everything except wall-clock
//! timing is deterministic in the spec, so re-running the same spec
//! reproduces every trace byte-for-byte once the `wall_time_s` column is
//! masked out.
//!
//! Column order of the CSV traces and key order of the JSON summaries are
//! stable contracts; downstream tooling indexes by position.

pub mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use aarc::solver::{
    solve_aagd, solve_aarc, solve_aarcq, solve_agd_baseline, solve_arc_baseline,
    solve_hybrid_aarc, HessianMode, DEFAULT_SWITCH_RATIO, DEFAULT_SWITCH_WINDOW,
};
use aarc::{Dataset, Objective, RunStatus, SolverConfig, SolverRun};
use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// CSV column order for trace files. Fixed contract; see [`csv_row`].
pub const CSV_HEADER: &str =
    "phase,outer_index,successful,l,f,grad_norm,sigma,varsigma,wall_time_s,values,gradients,hvps,fd_gradients";

/// Zero-based index of the `wall_time_s` column, the single nondeterministic
/// field in a trace. Tests mask it before byte comparisons.
pub const WALL_TIME_COLUMN: usize = 8;

/// Fixed seed for generated stand-in datasets, kept independent of the bench
/// `--seed` (which drives the start point) so that changing the start point
/// never changes the data.
pub const DEFAULT_DATA_SEED: u64 = 1;

/// Default inverse step estimate handed to the momentum baseline.
pub const DEFAULT_AGD_STEP_ESTIMATE: f64 = 1.0;

/// Default iteration budget for the momentum baseline, which needs far more
/// iterations than the regularized solvers on ill-conditioned problems.
pub const DEFAULT_AGD_BUDGET: u64 = 500_000;

// ---------------------------------------------------------------------------
// Solver registry
// ---------------------------------------------------------------------------

/// Canonical solver names accepted by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverName {
    /// Two-phase adaptive cubic regularization with exact curvature.
    Aarc,
    /// Two-phase adaptive cubic regularization with finite-difference
    /// curvature built from gradient probes.
    Aarcq,
    /// Monotone adaptive cubic regularization baseline.
    Arc,
    /// Two-phase adaptive gradient method (quadratic regularization).
    Aagd,
    /// Momentum gradient baseline with doubling backtracking.
    Agd,
    /// Accelerated phase with a monotone fallback once progress stalls.
    HybridAarc,
}

/// All canonical names, in registry order.
pub const ALL_SOLVERS: [SolverName; 6] = [
    SolverName::Aarc,
    SolverName::Aarcq,
    SolverName::Arc,
    SolverName::Aagd,
    SolverName::Agd,
    SolverName::HybridAarc,
];

impl SolverName {
    /// Canonical lowercase name; used for output file names and the JSON
    /// `solver` field.
    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::Aarc => "aarc",
            SolverName::Aarcq => "aarcq",
            SolverName::Arc => "arc",
            SolverName::Aagd => "aagd",
            SolverName::Agd => "agd",
            SolverName::HybridAarc => "hybrid_aarc",
        }
    }

    /// Parse a user-supplied name. Case-insensitive; `-` and `_` are
    /// interchangeable and a few common aliases are accepted.
    pub fn parse(name: &str) -> Result<Self> {
        let norm = name.trim().to_ascii_lowercase().replace('-', "_");
        let out = match norm.as_str() {
            "aarc" => SolverName::Aarc,
            "aarcq" | "aarc_q" => SolverName::Aarcq,
            "arc" | "arc_baseline" => SolverName::Arc,
            "aagd" => SolverName::Aagd,
            "agd" | "agd_baseline" => SolverName::Agd,
            "hybrid_aarc" | "aarc_hybrid" | "hybrid" => SolverName::HybridAarc,
            _ => bail!(
                "unknown solver {name:?}; known solvers: {}",
                ALL_SOLVERS.map(|s| s.as_str()).join(", ")
            ),
        };
        Ok(out)
    }
}

impl fmt::Display for SolverName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---------------------------------------------------------------------------
// Data source and start point
// ---------------------------------------------------------------------------

/// Where the objective comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// A libsvm-format file on disk (plain or gzip).
    File(PathBuf),
    /// A registered generated stand-in dataset, by name.
    StandIn(String),
    /// A synthetic test function, independent of any dataset.
    Synthetic(aarc::objective::SyntheticKind),
}

impl DataSource {
    /// Resolve a `--data` argument. `synthetic:` prefixes parse the synthetic
    /// grammar; an existing path wins over a registry name; anything else
    /// must be a registered stand-in.
    pub fn parse(data: &str) -> Result<Self> {
        if let Some(rest) = data.strip_prefix("synthetic:") {
            return Ok(DataSource::Synthetic(parse_synthetic(rest)?));
        }
        let path = Path::new(data);
        if path.is_file() {
            return Ok(DataSource::File(path.to_path_buf()));
        }
        if aarc::datagen::lookup(data).is_some() {
            return Ok(DataSource::StandIn(data.to_string()));
        }
        bail!(
            "dataset {data:?} is neither an existing file, a registered stand-in \
             ({}), nor a synthetic spec (synthetic:<kind>:k=v,...)",
            aarc::datagen::dataset_names().join(", ")
        )
    }
}

/// Parse `quadratic:dim=50,cond=100`, `logsumexp:dim=20,terms=40`, or
/// `quartic:dim=3` into a synthetic kind.
fn parse_synthetic(spec: &str) -> Result<aarc::objective::SyntheticKind> {
    use aarc::objective::SyntheticKind;
    let (kind, params) = match spec.split_once(':') {
        Some((k, p)) => (k, p),
        None => (spec, ""),
    };
    let mut dim: Option<usize> = None;
    let mut cond: Option<f64> = None;
    let mut terms: Option<usize> = None;
    for part in params.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("synthetic parameter {part:?} is not of the form key=value"))?;
        match key {
            "dim" | "d" => dim = Some(value.parse().context("parsing dim")?),
            "cond" => cond = Some(value.parse().context("parsing cond")?),
            "terms" => terms = Some(value.parse().context("parsing terms")?),
            _ => bail!("unknown synthetic parameter {key:?} (expected dim, cond, or terms)"),
        }
    }
    let out = match kind {
        "quadratic" => SyntheticKind::Quadratic {
            dim: dim.ok_or_else(|| anyhow!("quadratic requires dim=<n>"))?,
            cond: cond.unwrap_or(100.0),
        },
        "logsumexp" => SyntheticKind::LogSumExp {
            dim: dim.ok_or_else(|| anyhow!("logsumexp requires dim=<n>"))?,
            terms: terms.unwrap_or(0).max(1),
        },
        "quartic" => SyntheticKind::SeparableConvexQuartic {
            dim: dim.ok_or_else(|| anyhow!("quartic requires dim=<n>"))?,
        },
        _ => bail!("unknown synthetic kind {kind:?} (expected quadratic, logsumexp, or quartic)"),
    };
    Ok(out)
}

/// How the start point is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// Each coordinate i.i.d. normal with mean zero and this *variance*.
    FarNormal(f64),
    /// The origin.
    Zeros,
    /// Whitespace-separated coordinates read from a text file.
    File(PathBuf),
}

impl InitSpec {
    /// Parse `far_normal:<variance>`, `zeros`, or `file:<path>`.
    pub fn parse(init: &str) -> Result<Self> {
        if let Some(v) = init.strip_prefix("far_normal:") {
            let variance: f64 = v.parse().context("parsing far_normal variance")?;
            if !(variance >= 0.0) {
                bail!("far_normal variance must be nonnegative, got {variance}");
            }
            return Ok(InitSpec::FarNormal(variance));
        }
        if init == "zeros" {
            return Ok(InitSpec::Zeros);
        }
        if let Some(p) = init.strip_prefix("file:") {
            return Ok(InitSpec::File(PathBuf::from(p)));
        }
        bail!("unknown init {init:?} (expected far_normal:<variance>, zeros, or file:<path>)")
    }

    fn materialize(&self, d: usize, seed: u64) -> Result<DVector<f64>> {
        match self {
            InitSpec::FarNormal(variance) => Ok(aarc::datagen::far_normal_init(d, *variance, seed)),
            InitSpec::Zeros => Ok(DVector::zeros(d)),
            InitSpec::File(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading init file {}", path.display()))?;
                let coords: Vec<f64> = text
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().context("parsing init coordinate"))
                    .collect::<Result<_>>()?;
                if coords.len() != d {
                    bail!(
                        "init file {} has {} coordinates but the objective has dimension {d}",
                        path.display(),
                        coords.len()
                    );
                }
                Ok(DVector::from_vec(coords))
            }
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::FarNormal(v) => write!(f, "far_normal:{v}"),
            InitSpec::Zeros => f.write_str("zeros"),
            InitSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

// ---------------------------------------------------------------------------
// Bench spec and overrides
// ---------------------------------------------------------------------------

/// Harness-level knobs that sit outside [`SolverConfig`]. All of them are
/// echoed into each summary's `config` object so no resolved default stays
/// implicit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarnessExtras {
    /// Seed for generated stand-in datasets (not the start point).
    pub data_seed: u64,
    /// Inverse initial step estimate for the momentum baseline.
    pub agd_step_estimate: f64,
    /// Iteration budget for the momentum baseline.
    pub agd_budget: u64,
    /// Stall-detection window for the hybrid solver.
    pub switch_window: u64,
    /// Stall-detection relative-progress threshold for the hybrid solver.
    pub switch_ratio: f64,
}

impl Default for HarnessExtras {
    fn default() -> Self {
        HarnessExtras {
            data_seed: DEFAULT_DATA_SEED,
            agd_step_estimate: DEFAULT_AGD_STEP_ESTIMATE,
            agd_budget: DEFAULT_AGD_BUDGET,
            switch_window: DEFAULT_SWITCH_WINDOW,
            switch_ratio: DEFAULT_SWITCH_RATIO,
        }
    }
}

/// A fully resolved benchmark request: one dataset, one start point, any
/// number of solvers.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    /// Original `--data` argument (echoed as the summary `dataset` field).
    pub data: String,
    /// Ridge weight for logistic objectives; ignored by synthetics.
    pub lambda: f64,
    pub solvers: Vec<SolverName>,
    /// Seed for the start point (and the synthetic instance, if any).
    pub seed: u64,
    pub init: InitSpec,
    pub out_dir: PathBuf,
    /// Solver configuration after `--set` overrides.
    pub config: SolverConfig,
    pub extras: HarnessExtras,
}

impl BenchSpec {
    /// Build a spec from raw CLI strings, applying `--set` overrides.
    pub fn from_args(
        data: &str,
        lambda: f64,
        solvers: &[String],
        seed: u64,
        init: &str,
        out_dir: PathBuf,
        set: &[String],
    ) -> Result<Self> {
        if !(lambda >= 0.0) {
            bail!("lambda must be nonnegative, got {lambda}");
        }
        DataSource::parse(data)?; // validate eagerly so errors surface before any run
        let mut names = Vec::new();
        for s in solvers {
            for piece in s.split(',').filter(|p| !p.is_empty()) {
                let name = SolverName::parse(piece)?;
                if !names.contains(&name) {
                    names.push(name);
                }
            }
        }
        if names.is_empty() {
            bail!("no solvers requested");
        }
        let mut config = SolverConfig::default();
        let mut extras = HarnessExtras::default();
        for kv in set {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("--set argument {kv:?} is not of the form key=value"))?;
            apply_override(&mut config, &mut extras, key.trim(), value.trim())?;
        }
        config
            .validate()
            .map_err(|e| anyhow!("invalid solver configuration after --set overrides: {e}"))?;
        Ok(BenchSpec {
            data: data.to_string(),
            lambda,
            solvers: names,
            seed,
            init: InitSpec::parse(init)?,
            out_dir,
            config,
            extras,
        })
    }
}

/// Apply one `key=value` override. Harness keys are matched first; everything
/// else is a dotted path into the serialized [`SolverConfig`], with the value
/// parsed as JSON when possible and as a bare string otherwise (so enum
/// variants can be written without quotes: `escalation_rule=raise_while_above`).
pub fn apply_override(
    config: &mut SolverConfig,
    extras: &mut HarnessExtras,
    key: &str,
    value: &str,
) -> Result<()> {
    match key {
        "data_seed" => {
            extras.data_seed = value.parse().context("parsing data_seed")?;
            return Ok(());
        }
        "agd_step_estimate" => {
            extras.agd_step_estimate = value.parse().context("parsing agd_step_estimate")?;
            return Ok(());
        }
        "agd_budget" => {
            extras.agd_budget = value.parse().context("parsing agd_budget")?;
            return Ok(());
        }
        "switch_window" => {
            extras.switch_window = value.parse().context("parsing switch_window")?;
            return Ok(());
        }
        "switch_ratio" => {
            extras.switch_ratio = value.parse().context("parsing switch_ratio")?;
            return Ok(());
        }
        _ => {}
    }

    let parsed: Value = serde_json::from_str(value).unwrap_or(Value::String(value.to_string()));
    let mut tree = serde_json::to_value(&*config).expect("config serializes");

    if key == "subsolver.kind" {
        // Switching the variant replaces the whole object (each variant has
        // its own parameter set); parameters can then be overridden by
        // further --set flags, in order.
        let fresh = match parsed.as_str().unwrap_or_default() {
            "dense" => json!({ "kind": "dense" }),
            "lanczos" => json!({ "kind": "lanczos", "max_dim": 0 }),
            "gradient_descent" => json!({ "kind": "gradient_descent", "max_iters": 100_000 }),
            other => bail!(
                "unknown subsolver kind {other:?} (expected dense, lanczos, or gradient_descent)"
            ),
        };
        tree["subsolver"] = fresh;
    } else {
        let pointer = format!("/{}", key.replace('.', "/"));
        let node = tree
            .pointer_mut(&pointer)
            .ok_or_else(|| anyhow!("unknown config key {key:?}"))?;
        *node = parsed;
    }

    *config = serde_json::from_value(tree)
        .map_err(|e| anyhow!("value {value:?} is invalid for config key {key:?}: {e}"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Objective construction
// ---------------------------------------------------------------------------

/// Cheap per-worker objective factory. Dataset-backed objectives share one
/// [`Dataset`] allocation; each worker still gets its own oracle value so no
/// state (counters, caches) is shared between solvers.
pub enum ObjectiveFactory {
    Logistic { data: Arc<Dataset>, lambda: f64 },
    Synthetic { kind: aarc::objective::SyntheticKind, seed: u64 },
}

impl ObjectiveFactory {
    /// Resolve a data source into a factory. `seed` is the bench seed (used
    /// by synthetic instances); `data_seed` drives stand-in generation.
    pub fn new(source: &DataSource, lambda: f64, seed: u64, data_seed: u64) -> Result<Self> {
        match source {
            DataSource::File(path) => {
                let ds = aarc::libsvm::read_libsvm_file(path)
                    .with_context(|| format!("reading dataset {}", path.display()))?;
                Ok(ObjectiveFactory::Logistic { data: Arc::new(ds), lambda })
            }
            DataSource::StandIn(name) => {
                let ds = aarc::datagen::generate_by_name(name, data_seed)
                    .ok_or_else(|| anyhow!("unknown stand-in dataset {name:?}"))?;
                Ok(ObjectiveFactory::Logistic { data: Arc::new(ds), lambda })
            }
            DataSource::Synthetic(kind) => {
                Ok(ObjectiveFactory::Synthetic { kind: *kind, seed })
            }
        }
    }

    /// Build a fresh oracle. Deterministic: every call yields an identical
    /// objective.
    pub fn build(&self) -> Box<dyn Objective> {
        match self {
            ObjectiveFactory::Logistic { data, lambda } => {
                Box::new(aarc::objective::make_logistic(Arc::clone(data), *lambda))
            }
            ObjectiveFactory::Synthetic { kind, seed } => {
                aarc::objective::make_synthetic(*kind, *seed)
            }
        }
    }

    /// Problem dimension.
    pub fn dim(&self) -> usize {
        match self {
            ObjectiveFactory::Logistic { data, .. } => data.dim(),
            ObjectiveFactory::Synthetic { .. } => self.build().dim(),
        }
    }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Result of one solver's bench run, with the paths it was written to.
pub struct SolverOutcome {
    pub solver: SolverName,
    pub run: SolverRun,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Dispatch one solver on one oracle.
pub fn run_solver(
    name: SolverName,
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    extras: &HarnessExtras,
) -> SolverRun {
    match name {
        SolverName::Aarc => solve_aarc(oracle, x0, cfg),
        SolverName::Aarcq => solve_aarcq(oracle, x0, cfg),
        SolverName::Arc => solve_arc_baseline(oracle, x0, cfg, HessianMode::Exact),
        SolverName::Aagd => solve_aagd(oracle, x0, cfg),
        SolverName::Agd => {
            solve_agd_baseline(oracle, x0, extras.agd_step_estimate, extras.agd_budget)
        }
        SolverName::HybridAarc => {
            solve_hybrid_aarc(oracle, x0, cfg, extras.switch_window, extras.switch_ratio)
        }
    }
}

/// Number of worker threads to use for `n_solvers` solvers, honoring the
/// `BENCH_THREADS` environment variable (minimum 1).
pub fn worker_cap(n_solvers: usize) -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = match std::env::var("BENCH_THREADS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n >= 1).unwrap_or(hw),
        Err(_) => hw,
    };
    cap.min(n_solvers).max(1)
}

/// Run every solver in the spec and write its trace + summary under
/// `spec.out_dir`. Solvers run concurrently, one worker per solver (capped by
/// `BENCH_THREADS`), each with an isolated oracle and trace buffer. Output
/// content does not depend on the scheduling.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<SolverOutcome>> {
    let source = DataSource::parse(&spec.data)?;
    let factory = ObjectiveFactory::new(&source, spec.lambda, spec.seed, spec.extras.data_seed)?;
    let dim = factory.dim();
    let x0 = spec.init.materialize(dim, spec.seed)?;
    fs::create_dir_all(&spec.out_dir)
        .with_context(|| format!("creating output directory {}", spec.out_dir.display()))?;

    let threads = worker_cap(spec.solvers.len());
    let mut runs: Vec<Option<SolverRun>> = Vec::new();
    runs.resize_with(spec.solvers.len(), || None);

    for (chunk_idx, chunk) in spec.solvers.chunks(threads).enumerate() {
        let start = chunk_idx * threads;
        let chunk_runs = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&name| {
                    let factory = &factory;
                    let x0 = &x0;
                    let cfg = &spec.config;
                    let extras = &spec.extras;
                    scope.spawn(move || {
                        let oracle = factory.build();
                        run_solver(name, oracle.as_ref(), x0, cfg, extras)
                    })
                })
                .collect();
            handles
                .into_iter()
                .enumerate()
                .map(|(i, h)| h.join().map_err(|_| anyhow!("solver {} panicked", chunk[i])))
                .collect::<Result<Vec<_>>>()
        })?;
        for (offset, run) in chunk_runs.into_iter().enumerate() {
            runs[start + offset] = Some(run);
        }
    }

    let mut outcomes = Vec::new();
    for (name, run) in spec.solvers.iter().zip(runs.into_iter()) {
        let run = run.expect("every scheduled solver produced a run");
        let csv_path = spec.out_dir.join(format!("{name}.csv"));
        let json_path = spec.out_dir.join(format!("{name}.json"));
        fs::write(&csv_path, render_csv(&run))
            .with_context(|| format!("writing {}", csv_path.display()))?;
        let summary = Summary::new(*name, &run, spec);
        let mut doc = serde_json::to_string_pretty(&summary)?;
        doc.push('\n');
        fs::write(&json_path, doc).with_context(|| format!("writing {}", json_path.display()))?;
        outcomes.push(SolverOutcome { solver: *name, run, csv_path, json_path });
    }
    Ok(outcomes)
}

// ---------------------------------------------------------------------------
// CSV trace
// ---------------------------------------------------------------------------

/// Render one trace row in the fixed column order.
pub fn csv_row(
    phase: &str,
    outer_index: u64,
    successful: bool,
    l: u64,
    f: f64,
    grad_norm: f64,
    sigma: f64,
    varsigma: Option<f64>,
    wall_time_s: f64,
    counters: aarc::objective::CounterSnapshot,
) -> String {
    let vs = varsigma.map(|v| v.to_string()).unwrap_or_default();
    format!(
        "{phase},{outer_index},{successful},{l},{f},{grad_norm},{sigma},{vs},{wall_time_s},{},{},{},{}",
        counters.values, counters.gradients, counters.hvps, counters.fd_gradients
    )
}

/// Render a full trace CSV: header, one row per outer iteration, and a final
/// terminal-state row whose fields mirror the JSON summary (same `f`,
/// gradient norm, counters, `l`, and wall time), so the last CSV row and the
/// summary always agree exactly.
pub fn render_csv(run: &SolverRun) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &run.trace {
        out.push_str(&csv_row(
            r.phase.as_str(),
            r.outer_index,
            r.successful,
            r.l,
            r.f,
            r.grad_norm,
            r.sigma,
            r.varsigma,
            r.wall_time_s,
            r.counters,
        ));
        out.push('\n');
    }
    let (phase, next_index) = match run.trace.last() {
        Some(r) => (r.phase.as_str(), r.outer_index + 1),
        None => ("SAS", 0),
    };
    out.push_str(&csv_row(
        phase,
        next_index,
        run.status == RunStatus::Converged,
        run.l,
        run.f_final,
        run.grad_norm_final,
        run.sigma_final,
        run.varsigma_final,
        run.wall_time_s,
        run.counters,
    ));
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// JSON summary
// ---------------------------------------------------------------------------

/// Per-solver summary document. Field declaration order is the JSON key
/// order, which is a stable contract.
#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub solver: String,
    pub status: RunStatus,
    pub f_final: f64,
    pub grad_norm_final: f64,
    #[serde(rename = "T1")]
    pub t1: u64,
    #[serde(rename = "T2")]
    pub t2: u64,
    #[serde(rename = "T3")]
    pub t3: u64,
    #[serde(rename = "T4")]
    pub t4: u64,
    pub l: u64,
    pub wall_time_s: f64,
    /// Every resolved setting that influenced the run: the full solver
    /// configuration plus harness-level knobs. Nothing is defaulted silently.
    pub config: Value,
    pub seed: u64,
    pub dataset: String,
}

impl Summary {
    pub fn new(solver: SolverName, run: &SolverRun, spec: &BenchSpec) -> Self {
        let config = json!({
            "lambda": spec.lambda,
            "init": spec.init.to_string(),
            "solver_config": &spec.config,
            "harness": &spec.extras,
        });
        Summary {
            solver: solver.as_str().to_string(),
            status: run.status,
            f_final: run.f_final,
            grad_norm_final: run.grad_norm_final,
            t1: run.t1,
            t2: run.t2,
            t3: run.t3,
            t4: run.t4,
            l: run.l,
            wall_time_s: run.wall_time_s,
            config,
            seed: spec.seed,
            dataset: spec.data.clone(),
        }
    }
}

/// Write a human-readable one-line digest of an outcome to `w` (used by the
/// CLI after each run).
pub fn write_digest(w: &mut impl std::io::Write, o: &SolverOutcome) -> std::io::Result<()> {
    writeln!(
        w,
        "{:<12} {:<18} f={:.12e} |g|={:.3e} T1={} T2={} T3={} T4={} l={} wall={:.3}s",
        o.solver.as_str(),
        format!("{:?}", o.run.status),
        o.run.f_final,
        o.run.grad_norm_final,
        o.run.t1,
        o.run.t2,
        o.run.t3,
        o.run.t4,
        o.run.l,
        o.run.wall_time_s,
    )
}
