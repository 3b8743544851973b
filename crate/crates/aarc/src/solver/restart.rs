//! Scheduled-restart wrapper for the accelerated solvers.
//!
//! Under strong convexity, running an accelerated solver for a fixed number
//! of successes shrinks the objective gap by a constant factor, so restarting
//! it from the incumbent every `m` successes for `k` rounds converges
//! linearly. Each round is a complete run of the inner solver (warm-up phase
//! included) truncated at `m` accelerated successes; the estimate sequence
//! and the regularization weights restart from the configured initial values
//! every round. See [`super::bounds::cubic_restart_schedule`] and
//! [`super::bounds::quad_restart_schedule`] for round lengths that guarantee
//! a per-round contraction.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::objective::{CounterSnapshot, Objective};

use super::cubic::{solve_aarc, solve_aarcq};
use super::quad::solve_aagd;
use super::{Phase, RunStatus, SolverConfig, SolverRun};

/// Which accelerated solver runs inside each restart round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    /// Accelerated adaptive cubic regularization with exact curvature.
    Aarc,
    /// Accelerated adaptive cubic regularization with finite-difference
    /// curvature built from gradient probes.
    Aarcq,
    /// Accelerated adaptive gradient descent (quadratic regularization).
    Aagd,
}

/// Summary of one restart round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundStat {
    /// 1-based round number.
    pub round: u64,
    /// Objective value at the round's final iterate.
    pub f_end: f64,
    /// Gradient norm at the round's final iterate.
    pub grad_norm_end: f64,
    /// Accelerated-phase successes completed in the round.
    pub successes: u64,
    /// Terminal status of the round's inner run.
    pub status: RunStatus,
}

fn add_counters(a: CounterSnapshot, b: CounterSnapshot) -> CounterSnapshot {
    CounterSnapshot {
        values: a.values + b.values,
        gradients: a.gradients + b.gradients,
        hvps: a.hvps + b.hvps,
        fd_gradients: a.fd_gradients + b.fd_gradients,
    }
}

/// Restarted accelerated solver: `k` rounds of `m` successes each.
///
/// Equivalent to [`restart_wrapper_with_rounds`] with the per-round
/// summaries discarded.
pub fn restart_wrapper(
    inner: InnerSolver,
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    m: u64,
    k: u64,
) -> SolverRun {
    restart_wrapper_with_rounds(inner, oracle, x0, cfg, m, k).0
}

/// Restarted accelerated solver, also returning per-round summaries.
///
/// Each round runs the inner solver from the previous round's final iterate
/// with `max_successes` forced to `m`; `sigma0` and `varsigma1` reset to the
/// configured values at every restart. The stitched [`SolverRun`] carries the
/// concatenated trace (outer indices, wall times, and counters offset so both
/// stay globally monotone), summed budget counters `t1..t4`, and the last
/// round's final iterate. With `k = 1` the result is exactly the inner solver
/// truncated at `m` successes.
///
/// Rounds stop early when a round converges (status `Converged`) or stalls
/// (ends without converging and without completing its `m` successes, in
/// which case that round's status and failure note are propagated). A
/// schedule that completes all `k` rounds without converging reports
/// `BudgetExhausted` with a note that the schedule ran to completion.
pub fn restart_wrapper_with_rounds(
    inner: InnerSolver,
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    m: u64,
    k: u64,
) -> (SolverRun, Vec<RoundStat>) {
    assert!(m >= 1, "each restart round needs at least one success");
    assert!(k >= 1, "the schedule needs at least one round");
    cfg.validate().expect("invalid solver configuration");

    let mut round_cfg = cfg.clone();
    round_cfg.max_successes = Some(m);

    let mut x = x0.clone();
    let mut outer_base = 0u64;
    let mut time_base = 0.0f64;
    let mut counter_base = CounterSnapshot::default();
    let mut trace = Vec::new();
    let mut diags = Vec::new();
    let mut stats: Vec<RoundStat> = Vec::new();
    let (mut t1, mut t2, mut t3, mut t4) = (0u64, 0u64, 0u64, 0u64);
    let mut xbar1_first = None;
    let mut last_run: Option<SolverRun> = None;
    let mut stalled = false;

    for round in 1..=k {
        let mut run = match inner {
            InnerSolver::Aarc => solve_aarc(oracle, &x, &round_cfg),
            InnerSolver::Aarcq => solve_aarcq(oracle, &x, &round_cfg),
            InnerSolver::Aagd => solve_aagd(oracle, &x, &round_cfg),
        };

        // The success budget `m` counts accelerated-phase successes, so the
        // stall test below must count the same thing.
        let successes = run
            .trace
            .iter()
            .filter(|r| r.phase == Phase::Aas && r.successful)
            .count() as u64;

        let round_own_max = run.trace.last().map(|r| r.outer_index).unwrap_or(0);
        for row in &mut run.trace {
            row.outer_index += outer_base;
            row.wall_time_s += time_base;
            row.counters = add_counters(counter_base, row.counters);
        }
        for d in &mut run.success_diags {
            d.outer_index += outer_base;
        }
        trace.append(&mut run.trace);
        diags.append(&mut run.success_diags);
        outer_base += round_own_max;
        time_base += run.wall_time_s;
        counter_base = add_counters(counter_base, run.counters);
        t1 += run.t1;
        t2 += run.t2;
        t3 += run.t3;
        t4 += run.t4;
        if round == 1 {
            xbar1_first = run.xbar1.clone();
        }

        stats.push(RoundStat {
            round,
            f_end: run.f_final,
            grad_norm_end: run.grad_norm_final,
            successes,
            status: run.status,
        });

        x = run.x_final.clone();
        let converged = run.status == RunStatus::Converged;
        stalled = !converged && successes < m;
        last_run = Some(run);
        if converged || stalled {
            break;
        }
    }

    let last = last_run.expect("k >= 1 guarantees at least one round ran");
    let (status, failure) = if last.status == RunStatus::Converged {
        (RunStatus::Converged, None)
    } else if stalled {
        (last.status, last.failure.clone())
    } else {
        (
            RunStatus::BudgetExhausted,
            Some(format!(
                "restart schedule completed: {k} rounds of {m} successes"
            )),
        )
    };

    let run = SolverRun {
        x_final: last.x_final,
        f_final: last.f_final,
        grad_norm_final: last.grad_norm_final,
        t1,
        t2,
        t3,
        t4,
        l: last.l,
        trace,
        status,
        xbar1: xbar1_first,
        sigma_final: last.sigma_final,
        varsigma_final: last.varsigma_final,
        success_diags: diags,
        failure,
        wall_time_s: time_base,
        counters: counter_base,
    };
    (run, stats)
}
