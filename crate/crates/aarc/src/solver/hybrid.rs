//! Hybrid variant: run the accelerated cubic solver until its per-success
//! relative progress flattens, then abandon the estimate machinery and
//! finish with the monotone adaptive loop from the current incumbent.

use nalgebra::DVector;

use crate::objective::Objective;

use super::baseline::{arc_loop, ArcSeed};
use super::cubic::{
    finish_phase_one_only, finish_run, phase_one, phase_two_cubic, PhaseOneEnd, SwitchRule,
};
use super::{Ctx, HessianMode, Phase, SolverConfig, SolverRun};

/// Successes to complete before the progress test is consulted.
pub const DEFAULT_SWITCH_WINDOW: u64 = 10;
/// Relative per-success progress at or below which the switch fires.
pub const DEFAULT_SWITCH_RATIO: f64 = 0.1;

/// Accelerated cubic solver with a switch to the monotone loop.
///
/// After `switch_window` successes, any success whose relative objective
/// change `|f_new - f_prev| / |f_prev|` is at most `switch_ratio` hands the
/// current incumbent, gradient, and `sigma` to the monotone adaptive loop,
/// which runs to the gradient tolerance. Post-switch trace rows keep the
/// accelerated-phase label (the phase column stays monotone within a run)
/// with the success-count convention for `l`.
pub fn solve_hybrid_aarc(
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    switch_window: u64,
    switch_ratio: f64,
) -> SolverRun {
    cfg.validate().expect("invalid solver configuration");
    assert!(switch_ratio > 0.0, "switch_ratio must be positive");
    assert_eq!(x0.len(), oracle.dim(), "start point dimension mismatch");
    let mut ctx = Ctx::new(oracle);
    let mut fd = None;
    let mut diags = Vec::new();
    let p1 = phase_one(
        &mut ctx,
        cfg,
        HessianMode::Exact,
        x0,
        cfg.sigma0,
        &mut fd,
        &mut diags,
    );
    if matches!(p1.end, PhaseOneEnd::Succeeded) {
        let p2 = phase_two_cubic(
            &mut ctx,
            cfg,
            HessianMode::Exact,
            &p1.x,
            Some(p1.f),
            p1.sigma,
            &mut fd,
            &mut diags,
            Some(SwitchRule { window: switch_window, ratio: switch_ratio }),
        );
        match p2.handoff {
            Some(ref handoff) => {
                let seed = ArcSeed {
                    x: handoff.x.clone(),
                    fg: Some((handoff.f, handoff.g.clone())),
                    sigma: handoff.sigma,
                    l_base: handoff.l,
                    phase: Phase::Aas,
                };
                let out = arc_loop(&mut ctx, cfg, HessianMode::Exact, &mut fd, seed, &mut diags);
                let wall_time_s = ctx.elapsed();
                let counters = ctx.snapshot();
                SolverRun {
                    x_final: out.x,
                    f_final: out.f,
                    grad_norm_final: out.grad_norm,
                    t1: p1.t1,
                    t2: p2.t2 + out.iters,
                    t3: p2.t3,
                    t4: 0,
                    l: handoff.l + out.successes,
                    trace: ctx.trace,
                    status: out.status,
                    xbar1: Some(p1.x),
                    sigma_final: out.sigma,
                    varsigma_final: Some(p2.varsigma_final),
                    success_diags: diags,
                    failure: out.failure,
                    wall_time_s,
                    counters,
                }
            }
            None => finish_run(ctx, diags, p1.t1, Some(p1.x), 0, p2),
        }
    } else {
        finish_phase_one_only(ctx, diags, cfg, p1, 0)
    }
}
