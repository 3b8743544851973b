//! Convergence-rate reports computed from bench traces.
//!
//! For every summary/trace pair in a directory this module extracts the
//! successful-step sequence `(l, f_l)`, subtracts a reference optimum, and
//! reports the scaled-gap envelopes `max_{j <= l} (f_j - f*) * j^p` for
//! `p in {2, 3}` together with a log-log regression slope over the tail half
//! of the sequence. A first-order method tracking a `1/l^2` rate shows a
//! slope near `-2`, the cubic-regularized solvers near `-3`, and a constant
//! (non-converging) sequence yields a slope of exactly `0`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use aarc::SolverConfig;
use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::{DataSource, ObjectiveFactory, Summary, CSV_HEADER};

/// Where the reference optimum `f*` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FStarSource {
    /// A fresh high-accuracy run (hybrid solver at gradient tolerance 1e-12)
    /// on the same objective.
    Ref,
    /// The objective's own metadata (available for synthetic instances whose
    /// optimum is known in closed form).
    Meta,
}

impl FStarSource {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ref" => Ok(FStarSource::Ref),
            "meta" => Ok(FStarSource::Meta),
            other => bail!("unknown fstar source {other:?} (expected ref or meta)"),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            FStarSource::Ref => "ref",
            FStarSource::Meta => "meta",
        }
    }
}

/// One `(l, gap)` point with its scaled values and running envelopes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub l: u64,
    pub gap: f64,
    pub gap_l2: f64,
    pub gap_l3: f64,
    pub env_l2: f64,
    pub env_l3: f64,
}

/// Per-trace rate summary.
#[derive(Debug, Serialize)]
pub struct RateEntry {
    pub solver: String,
    pub dataset: String,
    pub seed: u64,
    pub status: String,
    pub f_star: f64,
    /// Number of successful-step points used.
    pub points: usize,
    /// Supremum of `(f_l - f*) * l^2` over the run.
    pub envelope_sup_l2: f64,
    /// Supremum of `(f_l - f*) * l^3` over the run.
    pub envelope_sup_l3: f64,
    /// Log-log regression slope of the gap over the tail half of the
    /// sequence; `None` when fewer than two usable points remain.
    pub slope_tail_half: Option<f64>,
    /// Path of the per-point rates CSV written next to the trace.
    pub rates_csv: PathBuf,
}

/// The full report document serialized to `report.json`.
#[derive(Debug, Serialize)]
pub struct ReportDoc {
    pub f_star_source: String,
    pub entries: Vec<RateEntry>,
}

/// Minimal parsed trace row (only the columns the report consumes).
struct Row {
    phase: String,
    successful: bool,
    l: u64,
    f: f64,
}

fn parse_trace(path: &Path) -> Result<Vec<Row>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("{} is empty", path.display()))?;
    if header != CSV_HEADER {
        bail!("{} has an unexpected header: {header}", path.display());
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 13 {
            bail!("{} row {} has {} columns, expected 13", path.display(), i + 2, cols.len());
        }
        rows.push(Row {
            phase: cols[0].to_string(),
            successful: cols[2] == "true",
            l: cols[3].parse().with_context(|| format!("row {} column l", i + 2))?,
            f: cols[4].parse().with_context(|| format!("row {} column f", i + 2))?,
        });
    }
    Ok(rows)
}

/// Successful-step `(l, f)` sequence of a trace. Second-phase successes are
/// preferred; traces without any (the monotone and momentum baselines label
/// everything as the first phase) fall back to all successful rows. The
/// trailing terminal-state row is excluded — it duplicates the final state.
fn success_sequence(rows: &[Row]) -> Vec<(u64, f64)> {
    let body = &rows[..rows.len().saturating_sub(1)];
    let aas: Vec<(u64, f64)> =
        body.iter().filter(|r| r.successful && r.phase == "AAS").map(|r| (r.l, r.f)).collect();
    if !aas.is_empty() {
        return aas;
    }
    body.iter().filter(|r| r.successful).map(|r| (r.l, r.f)).collect()
}

/// Least-squares slope of `ln(gap)` against `ln(l)` over the tail half of the
/// positive-gap points. A constant gap sequence gives exactly zero; fewer
/// than two usable points give `None`.
pub fn tail_half_slope(points: &[(u64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(l, gap)| l >= 1 && gap > 0.0)
        .map(|&(l, gap)| ((l as f64).ln(), gap.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let tail = &usable[usable.len() - usable.len().div_ceil(2)..];
    let n = tail.len() as f64;
    let (sx, sy) = tail.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in tail {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None; // a single distinct l value carries no rate information
    }
    Some(sxy / sxx)
}

/// Scaled gaps and running envelopes for a successful-step sequence.
pub fn rate_points(seq: &[(u64, f64)], f_star: f64) -> Vec<RatePoint> {
    let mut env2 = f64::NEG_INFINITY;
    let mut env3 = f64::NEG_INFINITY;
    seq.iter()
        .map(|&(l, f)| {
            let gap = f - f_star;
            let lf = l as f64;
            let gap_l2 = gap * lf * lf;
            let gap_l3 = gap * lf * lf * lf;
            env2 = env2.max(gap_l2);
            env3 = env3.max(gap_l3);
            RatePoint { l, gap, gap_l2, gap_l3, env_l2: env2, env_l3: env3 }
        })
        .collect()
}

struct LoadedTrace {
    summary: Summary,
    rows: Vec<Row>,
    csv_path: PathBuf,
}

/// Objective identity: traces with the same key share one `f*`.
fn group_key(s: &Summary) -> String {
    let lambda = s.config.get("lambda").and_then(Value::as_f64).unwrap_or(f64::NAN);
    let data_seed = s
        .config
        .get("harness")
        .and_then(|h| h.get("data_seed"))
        .and_then(Value::as_u64)
        .unwrap_or(0);
    format!("{}|seed={}|lambda={}|data_seed={}", s.dataset, s.seed, lambda, data_seed)
}

fn fstar_for_group(traces: &[&LoadedTrace], source: FStarSource) -> Result<f64> {
    let s = &traces[0].summary;
    let lambda = s
        .config
        .get("lambda")
        .and_then(Value::as_f64)
        .ok_or_else(|| anyhow!("summary for {} lacks config.lambda", s.solver))?;
    let data_seed = s
        .config
        .get("harness")
        .and_then(|h| h.get("data_seed"))
        .and_then(Value::as_u64)
        .unwrap_or(crate::DEFAULT_DATA_SEED);
    let ds = DataSource::parse(&s.dataset)?;
    let factory = ObjectiveFactory::new(&ds, lambda, s.seed, data_seed)?;
    let oracle = factory.build();

    let candidate = match source {
        FStarSource::Meta => oracle
            .meta()
            .and_then(|m| m.min_value)
            .ok_or_else(|| anyhow!("objective {:?} provides no reference minimum", s.dataset))?,
        FStarSource::Ref => {
            let mut cfg: SolverConfig = serde_json::from_value(
                s.config.get("solver_config").cloned().unwrap_or(Value::Null),
            )
            .unwrap_or_default();
            cfg.grad_tol = cfg.grad_tol.min(1e-12);
            cfg.max_successes = None;
            cfg.max_outer = cfg.max_outer.max(200_000);
            let window = s
                .config
                .get("harness")
                .and_then(|h| h.get("switch_window"))
                .and_then(Value::as_u64)
                .unwrap_or(aarc::solver::DEFAULT_SWITCH_WINDOW);
            let ratio = s
                .config
                .get("harness")
                .and_then(|h| h.get("switch_ratio"))
                .and_then(Value::as_f64)
                .unwrap_or(aarc::solver::DEFAULT_SWITCH_RATIO);
            let x0 = nalgebra::DVector::zeros(factory.dim());
            let reference =
                aarc::solver::solve_hybrid_aarc(oracle.as_ref(), &x0, &cfg, window, ratio);
            if reference.status != aarc::RunStatus::Converged {
                bail!(
                    "reference run on {:?} did not converge (status {:?}); \
                     f* is not bracketed",
                    s.dataset,
                    reference.status
                );
            }
            reference.f_final
        }
    };

    // A trace may have dipped below the reference value (the reference stops
    // at its own tolerance); never report a negative gap.
    let trace_min = traces
        .iter()
        .flat_map(|t| t.rows.iter().map(|r| r.f))
        .fold(f64::INFINITY, f64::min);
    Ok(candidate.min(trace_min))
}

/// Build the report for every summary/trace pair in `traces_dir` and write
/// `report.json` plus one `<solver>.rates.csv` per trace. Returns the
/// document that was written.
pub fn write_report(traces_dir: &Path, source: FStarSource) -> Result<ReportDoc> {
    let mut loaded = Vec::new();
    let mut names: Vec<PathBuf> = fs::read_dir(traces_dir)
        .with_context(|| format!("reading {}", traces_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().is_some_and(|n| n != "report.json")
        })
        .collect();
    names.sort();
    if names.is_empty() {
        bail!("no trace summaries (*.json) found in {}", traces_dir.display());
    }
    for json_path in names {
        let summary: Summary = serde_json::from_str(
            &fs::read_to_string(&json_path)
                .with_context(|| format!("reading {}", json_path.display()))?,
        )
        .with_context(|| format!("parsing {}", json_path.display()))?;
        let csv_path = json_path.with_extension("csv");
        let rows = parse_trace(&csv_path)?;
        loaded.push(LoadedTrace { summary, rows, csv_path });
    }

    let mut groups: BTreeMap<String, Vec<&LoadedTrace>> = BTreeMap::new();
    for t in &loaded {
        groups.entry(group_key(&t.summary)).or_default().push(t);
    }

    let mut entries = Vec::new();
    for traces in groups.values() {
        let f_star = fstar_for_group(traces, source)?;
        for t in traces {
            let seq = success_sequence(&t.rows);
            let pts = rate_points(&seq, f_star);
            let rates_csv = t.csv_path.with_extension("rates.csv");
            let mut body = String::from("l,gap,gap_l2,gap_l3,env_l2,env_l3\n");
            for p in &pts {
                body.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.l, p.gap, p.gap_l2, p.gap_l3, p.env_l2, p.env_l3
                ));
            }
            fs::write(&rates_csv, body)
                .with_context(|| format!("writing {}", rates_csv.display()))?;
            entries.push(RateEntry {
                solver: t.summary.solver.clone(),
                dataset: t.summary.dataset.clone(),
                seed: t.summary.seed,
                status: format!("{:?}", t.summary.status),
                f_star,
                points: pts.len(),
                envelope_sup_l2: pts.last().map_or(0.0, |p| p.env_l2),
                envelope_sup_l3: pts.last().map_or(0.0, |p| p.env_l3),
                slope_tail_half: tail_half_slope(&seq.iter().map(|&(l, f)| (l, f - f_star)).collect::<Vec<_>>()),
                rates_csv,
            });
        }
    }

    let doc = ReportDoc { f_star_source: source.as_str().to_string(), entries };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(traces_dir.join("report.json"), text)
        .with_context(|| format!("writing {}", traces_dir.join("report.json").display()))?;
    Ok(doc)
}

/// Render the report as an aligned text table for terminal output.
pub fn render_table(doc: &ReportDoc) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:<34} {:>4} {:>12} {:>13} {:>13} {:>8}\n",
        "solver", "dataset", "seed", "points", "sup gap*l^2", "sup gap*l^3", "slope"
    ));
    for e in &doc.entries {
        let slope = e.slope_tail_half.map_or("n/a".to_string(), |s| format!("{s:+.2}"));
        out.push_str(&format!(
            "{:<12} {:<34} {:>4} {:>12} {:>13.4e} {:>13.4e} {:>8}\n",
            e.solver, e.dataset, e.seed, e.points, e.envelope_sup_l2, e.envelope_sup_l3, slope
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_recovers_power_law() {
        let pts: Vec<(u64, f64)> = (1..=40).map(|l| (l, 7.0 / (l as f64).powi(3))).collect();
        let slope = tail_half_slope(&pts).unwrap();
        assert!((slope + 3.0).abs() <= 1e-9, "slope {slope}");
        let pts2: Vec<(u64, f64)> = (1..=40).map(|l| (l, 0.5 / (l as f64).powi(2))).collect();
        let slope2 = tail_half_slope(&pts2).unwrap();
        assert!((slope2 + 2.0).abs() <= 1e-9, "slope {slope2}");
    }

    #[test]
    fn slope_of_constant_sequence_is_exactly_zero() {
        let pts: Vec<(u64, f64)> = (1..=10).map(|l| (l, 4.0)).collect();
        assert_eq!(tail_half_slope(&pts), Some(0.0));
    }

    #[test]
    fn slope_needs_two_usable_points() {
        assert_eq!(tail_half_slope(&[(1, 1.0)]), None);
        assert_eq!(tail_half_slope(&[(1, 0.0), (2, 0.0)]), None);
        // Same l twice: no spread in the regressor.
        assert_eq!(tail_half_slope(&[(3, 1.0), (3, 2.0)]), None);
    }

    #[test]
    fn envelopes_are_running_maxima() {
        let seq = vec![(1, 8.0), (2, 1.0), (3, 0.5), (4, 0.01)];
        let pts = rate_points(&seq, 0.0);
        for w in pts.windows(2) {
            assert!(w[1].env_l2 >= w[0].env_l2);
            assert!(w[1].env_l3 >= w[0].env_l3);
        }
        assert_eq!(pts[0].gap_l2, 8.0);
        assert_eq!(pts[1].gap_l3, 8.0);
        assert_eq!(pts.last().unwrap().env_l2, 8.0);
    }
}
