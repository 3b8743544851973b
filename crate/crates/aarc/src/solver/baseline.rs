//! Non-accelerated baselines: the monotone adaptive cubic loop (repeated
//! first-phase-style steps run to convergence) and classical momentum
//! gradient descent with a backtracked step size.

use nalgebra::DVector;

use crate::objective::{GradientOnly, Objective};
use crate::subproblem::condition1_threshold;

use super::cubic::{cubic_step, make_point, FdState};
use super::{
    decrease_slack, sigma_after_success, step_is_tiny, Ctx, HessianMode, Phase, RunStatus,
    SolverConfig, SolverRun, SuccessDiag, DEFAULT_GRAD_TOL,
};

/// Starting state for the monotone adaptive loop.
pub(crate) struct ArcSeed {
    pub x: DVector<f64>,
    /// Known `(f, grad)` at `x`, if the caller already evaluated there.
    pub fg: Option<(f64, DVector<f64>)>,
    pub sigma: f64,
    /// Trace rows carry `l = l_base + successes_so_far` (failures) or
    /// `l_base + successes_after` (successes), mirroring the accelerated
    /// phase's estimate-index convention.
    pub l_base: u64,
    pub phase: Phase,
}

pub(crate) struct ArcOutcome {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iters: u64,
    pub successes: u64,
    pub status: RunStatus,
    pub failure: Option<String>,
    pub sigma: f64,
}

/// Monotone adaptive cubic loop: accept whenever the objective lands below
/// the model value (which itself is at most the current value), shrink
/// `sigma` on success, inflate on failure, until the gradient tolerance or
/// a budget stops it. Accepted steps decrease `f` up to working precision
/// (see [`decrease_slack`]).
pub(crate) fn arc_loop(
    ctx: &mut Ctx<'_>,
    cfg: &SolverConfig,
    mode: HessianMode,
    fd: &mut Option<FdState>,
    seed: ArcSeed,
    diags: &mut Vec<SuccessDiag>,
) -> ArcOutcome {
    let (f0, g0) = match seed.fg {
        Some(fg) => fg,
        None => ctx.value_grad(&seed.x),
    };
    let mut point = make_point(ctx, mode, seed.x, f0, g0);
    let mut sigma = seed.sigma;
    let mut successes = 0u64;
    let mut warm = 1usize;
    for i in 0..cfg.max_outer {
        if point.g_norm <= cfg.grad_tol {
            return ArcOutcome {
                x: point.x,
                f: point.f,
                grad_norm: point.g_norm,
                iters: i,
                successes,
                status: RunStatus::Converged,
                failure: None,
                sigma,
            };
        }
        let step = match cubic_step(ctx, cfg, &point, sigma, fd, warm) {
            Ok(step) => step,
            Err(msg) => {
                return ArcOutcome {
                    x: point.x,
                    f: point.f,
                    grad_norm: point.g_norm,
                    iters: i + 1,
                    successes,
                    status: RunStatus::SubsolverFailure,
                    failure: Some(msg),
                    sigma,
                };
            }
        };
        let s_norm = step.sol.s.norm();
        if step_is_tiny(s_norm, point.x.norm()) {
            ctx.push_row(seed.phase, false, seed.l_base + successes, point.f, sigma, None);
            sigma *= cfg.gamma1;
            warm = step.sol.krylov_dim.max(1);
            continue;
        }
        let x_trial = &point.x + &step.sol.s;
        let f_trial = ctx.value(&x_trial);
        let rho = f_trial - step.sol.model_value;
        if rho < decrease_slack(point.f) {
            // The next iteration needs the gradient at the accepted point
            // anyway, so compute it now and reuse the trial value.
            let g_trial = ctx.grad(&x_trial);
            let g_trial_norm = g_trial.norm();
            let s_dot = step.sol.s.dot(&g_trial);
            successes += 1;
            let l_row = seed.l_base + successes;
            let outer_index = ctx.push_row(seed.phase, true, l_row, f_trial, sigma, None);
            diags.push(SuccessDiag {
                phase: seed.phase,
                outer_index,
                l: l_row,
                y: point.x.clone(),
                s: step.sol.s.clone(),
                sigma,
                rho,
                h: step.h,
                model_grad_norm: step.sol.model_grad_norm,
                model_grad_bound: condition1_threshold(s_norm, point.g_norm, cfg.kappa_theta),
                escalations: 0,
                psi_min: None,
                weighted_f: None,
                varsigma: None,
                f_new: f_trial,
                grad_new_norm: Some(g_trial_norm),
                s_dot_grad_new: Some(s_dot),
            });
            sigma = sigma_after_success(cfg, sigma);
            point = make_point(ctx, mode, x_trial, f_trial, g_trial);
            warm = 1;
        } else {
            ctx.push_row(seed.phase, false, seed.l_base + successes, point.f, sigma, None);
            sigma *= cfg.gamma1;
            warm = step.sol.krylov_dim.max(1);
        }
    }
    ArcOutcome {
        x: point.x,
        f: point.f,
        grad_norm: point.g_norm,
        iters: cfg.max_outer,
        successes,
        status: RunStatus::BudgetExhausted,
        failure: Some(format!(
            "monotone loop budget of {} iterations exhausted",
            cfg.max_outer
        )),
        sigma,
    }
}

/// Monotone adaptive cubic baseline run to convergence. Reported `t1` is the
/// total iteration count (this solver has no second phase); `l` is `0`
/// because no estimate sequence exists — trace rows carry the
/// success-count convention instead.
pub fn solve_arc_baseline(
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    hessian_mode: HessianMode,
) -> SolverRun {
    cfg.validate().expect("invalid solver configuration");
    assert_eq!(x0.len(), oracle.dim(), "start point dimension mismatch");
    let guard;
    let obj: &dyn Objective = match hessian_mode {
        HessianMode::Exact => oracle,
        HessianMode::FiniteDifference => {
            guard = GradientOnly(oracle);
            &guard
        }
    };
    let mut ctx = Ctx::new(obj);
    let mut fd = match hessian_mode {
        HessianMode::Exact => None,
        HessianMode::FiniteDifference => Some(FdState::new(&cfg.fd)),
    };
    let mut diags = Vec::new();
    let seed = ArcSeed {
        x: x0.clone(),
        fg: None,
        sigma: cfg.sigma0,
        l_base: 0,
        phase: Phase::Sas,
    };
    let out = arc_loop(&mut ctx, cfg, hessian_mode, &mut fd, seed, &mut diags);
    let wall_time_s = ctx.elapsed();
    let counters = ctx.snapshot();
    SolverRun {
        x_final: out.x,
        f_final: out.f,
        grad_norm_final: out.grad_norm,
        t1: out.iters,
        t2: 0,
        t3: 0,
        t4: fd.as_ref().map_or(0, |s| s.shrinks),
        l: 0,
        trace: ctx.trace,
        status: out.status,
        xbar1: None,
        sigma_final: out.sigma,
        varsigma_final: None,
        success_diags: diags,
        failure: out.failure,
        wall_time_s,
        counters,
    }
}

/// Classical momentum gradient descent with monotone backtracking on the
/// inverse step size.
///
/// `step_estimate` seeds the step size (its inverse seeds the Lipschitz
/// estimate, which only grows). When the oracle's metadata exposes a strong
/// convexity modulus, the momentum coefficient uses the stationary
/// `(1 - sqrt(q)) / (1 + sqrt(q))` form; otherwise the `k / (k + 3)`
/// schedule. Stops at the shared default gradient tolerance. Trace rows are
/// labeled with the accelerated phase (every completed iteration moves the
/// iterate) and put the current Lipschitz estimate in the `sigma` column.
pub fn solve_agd_baseline(
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    step_estimate: f64,
    budget: u64,
) -> SolverRun {
    assert!(step_estimate > 0.0, "step_estimate must be positive");
    assert_eq!(x0.len(), oracle.dim(), "start point dimension mismatch");
    let mu = oracle
        .meta()
        .and_then(|m| m.strong_convexity)
        .filter(|&m| m > 0.0);
    let guard = GradientOnly(oracle);
    let obj: &dyn Objective = &guard;
    let mut ctx = Ctx::new(obj);
    let grad_tol = DEFAULT_GRAD_TOL;
    let mut lhat = 1.0 / step_estimate;
    let mut x_cur = x0.clone();
    let mut f_cur = f64::NAN;
    let mut y = x0.clone();
    let mut iters = 0u64;
    let mut terminal: Option<(RunStatus, Option<String>, DVector<f64>, f64, f64)> = None;

    for k in 0..budget {
        let (fy, gy) = ctx.value_grad(&y);
        let gy_norm = gy.norm();
        if gy_norm <= grad_tol {
            terminal = Some((RunStatus::Converged, None, y.clone(), fy, gy_norm));
            break;
        }
        let g2 = gy_norm * gy_norm;
        let mut doublings = 0u32;
        let (x_next, f_next) = loop {
            let x_trial = &y - &gy / lhat;
            let f_trial = ctx.value(&x_trial);
            if f_trial <= fy - g2 / (2.0 * lhat) + decrease_slack(fy) {
                break (x_trial, f_trial);
            }
            lhat *= 2.0;
            doublings += 1;
            if doublings > 200 {
                break (y.clone(), fy);
            }
        };
        if doublings > 200 {
            terminal = Some((
                RunStatus::SubsolverFailure,
                Some("backtracking could not find a decreasing step".to_string()),
                x_cur.clone(),
                f_cur,
                gy_norm,
            ));
            break;
        }
        iters = k + 1;
        let beta = match mu {
            Some(mu) => {
                let q = (mu / lhat).min(1.0);
                let sq = q.sqrt();
                (1.0 - sq) / (1.0 + sq)
            }
            None => k as f64 / (k as f64 + 3.0),
        };
        let x_prev = std::mem::replace(&mut x_cur, x_next);
        f_cur = f_next;
        y = &x_cur + (&x_cur - &x_prev) * beta;
        ctx.push_row(Phase::Aas, true, iters, f_cur, lhat, None);
    }

    let (status, failure, x_final, f_final, grad_norm_final) = match terminal {
        Some(t) => t,
        None => {
            // Budget ran out: report the last accepted iterate with a fresh
            // (counted) gradient, or the start point when nothing ran.
            if iters == 0 {
                let (f0, g0) = ctx.value_grad(&x_cur);
                (
                    RunStatus::BudgetExhausted,
                    Some("momentum budget of 0 iterations".to_string()),
                    x_cur.clone(),
                    f0,
                    g0.norm(),
                )
            } else {
                let g = ctx.grad(&x_cur);
                (
                    RunStatus::BudgetExhausted,
                    Some(format!("momentum budget of {budget} iterations exhausted")),
                    x_cur.clone(),
                    f_cur,
                    g.norm(),
                )
            }
        }
    };
    let wall_time_s = ctx.elapsed();
    let counters = ctx.snapshot();
    SolverRun {
        x_final,
        f_final,
        grad_norm_final,
        t1: 0,
        t2: iters,
        t3: 0,
        t4: 0,
        l: 0,
        trace: ctx.trace,
        status,
        xbar1: None,
        sigma_final: lhat,
        varsigma_final: None,
        success_diags: Vec::new(),
        failure,
        wall_time_s,
        counters,
    }
}
