//! Cubic-model two-phase engine: exact-curvature and finite-difference
//! variants share the same Phase I / Phase II code, differing only in how
//! each subproblem obtains its curvature operator.

use nalgebra::DVector;

use crate::estimate::{Degree, EstimateState};
use crate::fdhess::{search_step_pair, FdCache};
use crate::objective::{GradientOnly, Objective};
use crate::subproblem::{
    condition1_threshold, solve_dense, solve_gradient_descent, solve_lanczos_from, CubicModel,
    SubproblemError, SubproblemSolution, REDUCED_SOLVE_TOL,
};

use super::{
    decrease_slack, escalate_estimate, mix_toward, sigma_after_success, step_is_tiny, Ctx,
    CountedCurvature, HessianMode, LinearAnchor, Phase, RunStatus, SolverConfig, SolverRun,
    SubsolverKind, SuccessDiag, TraceRecord,
};

/// Mutable finite-difference machinery carried across subproblem solves:
/// the one-slot Hessian cache, the current difference interval (which only
/// shrinks), and the cumulative shrink count feeding `T4`.
pub(crate) struct FdState {
    pub cache: FdCache,
    pub h: f64,
    pub shrinks: u64,
}

impl FdState {
    pub(crate) fn new(cfg: &crate::fdhess::FDHessianConfig) -> Self {
        FdState { cache: FdCache::new(), h: cfg.h_init, shrinks: 0 }
    }
}

/// Cached evaluation data at the current model center. The curvature
/// operator is built once per center in exact mode and reused across
/// `sigma` backtracking at the same point.
pub(crate) struct PointData<'a> {
    pub x: DVector<f64>,
    pub f: f64,
    pub g: DVector<f64>,
    pub g_norm: f64,
    op: Option<CountedCurvature<'a>>,
}

pub(crate) fn make_point<'a>(
    ctx: &Ctx<'a>,
    mode: HessianMode,
    x: DVector<f64>,
    f: f64,
    g: DVector<f64>,
) -> PointData<'a> {
    let op = match mode {
        HessianMode::Exact => Some(ctx.curvature(&x)),
        HessianMode::FiniteDifference => None,
    };
    let g_norm = g.norm();
    PointData { x, f, g, g_norm, op }
}

/// One accepted or rejected subproblem solve.
pub(crate) struct StepData {
    pub sol: SubproblemSolution,
    /// Difference interval used for the curvature build, in
    /// finite-difference mode.
    pub h: Option<f64>,
}

fn meets_model_grad_bound(sol: &SubproblemSolution, g_norm: f64, kappa_theta: f64) -> bool {
    sol.model_grad_norm <= condition1_threshold(sol.s.norm(), g_norm, kappa_theta)
}

/// Solve the cubic subproblem at `point` with weight `sigma`.
///
/// Exact mode dispatches the configured subsolver directly; a subsolver that
/// runs out of budget is still accepted when its best step satisfies the
/// relative model-gradient bound, and is a hard failure otherwise.
/// Finite-difference mode delegates to the interval/step coupling search,
/// which owns its own subproblem retries.
pub(crate) fn cubic_step(
    ctx: &Ctx<'_>,
    cfg: &SolverConfig,
    point: &PointData<'_>,
    sigma: f64,
    fd: &mut Option<FdState>,
    warm: usize,
) -> Result<StepData, String> {
    let d = point.x.len();
    match point.op {
        Some(ref op) => {
            let model = CubicModel::new(point.f, point.g.clone(), op, sigma);
            let res = match cfg.subsolver {
                SubsolverKind::Dense => solve_dense(&model, REDUCED_SOLVE_TOL),
                SubsolverKind::Lanczos { max_dim } => {
                    let lim = if max_dim == 0 { d } else { max_dim.min(d) };
                    solve_lanczos_from(&model, cfg.kappa_theta, lim, warm.clamp(1, lim))
                }
                SubsolverKind::GradientDescent { max_iters } => {
                    solve_gradient_descent(&model, cfg.kappa_theta, max_iters)
                }
            };
            let sol = match res {
                Ok(sol) => sol,
                Err(SubproblemError::MaxDimExhausted { best, .. })
                | Err(SubproblemError::GradientDescentExhausted { best, .. })
                    if meets_model_grad_bound(&best, point.g_norm, cfg.kappa_theta) =>
                {
                    *best
                }
                Err(e) => return Err(format!("cubic subproblem solve failed: {e}")),
            };
            Ok(StepData { sol, h: None })
        }
        None => {
            let fd_state = fd
                .as_mut()
                .expect("finite-difference mode requires finite-difference state");
            let grad_fn = ctx.fd_grad_fn();
            let kappa_theta = cfg.kappa_theta;
            let subsolver_kind = cfg.subsolver;
            let mut subsolver = move |model: &CubicModel, warm_dim: usize| match subsolver_kind {
                SubsolverKind::Dense => solve_dense(model, REDUCED_SOLVE_TOL),
                SubsolverKind::Lanczos { max_dim } => {
                    let lim = if max_dim == 0 { d } else { max_dim.min(d) };
                    solve_lanczos_from(model, kappa_theta, lim, warm_dim.clamp(1, lim))
                }
                SubsolverKind::GradientDescent { max_iters } => {
                    solve_gradient_descent(model, kappa_theta, max_iters)
                }
            };
            let pair = search_step_pair(
                &grad_fn,
                &point.x,
                point.f,
                &point.g,
                sigma,
                &cfg.fd,
                fd_state.h,
                &mut fd_state.cache,
                &mut subsolver,
            )
            .map_err(|e| format!("finite-difference step search failed: {e}"))?;
            fd_state.h = pair.h;
            fd_state.shrinks += pair.shrink_count as u64;
            Ok(StepData { sol: pair.solution, h: Some(pair.h) })
        }
    }
}

/// How Phase I ended.
pub(crate) enum PhaseOneEnd {
    /// The single decrease test passed; `x`/`f` describe the accepted point.
    Succeeded,
    /// The start point already met the gradient tolerance.
    ConvergedAtStart,
    /// `max_outer` rejections without a success.
    OutOfBudget,
    /// The subproblem machinery failed.
    Failed(String),
}

pub(crate) struct PhaseOneOut {
    pub end: PhaseOneEnd,
    /// Incumbent after the phase (the start point unless `Succeeded`).
    pub x: DVector<f64>,
    pub f: f64,
    /// Gradient norm at `x` when the phase never moved (`None` after a
    /// success, where the gradient at the new point has not been computed).
    pub grad_norm_at_x: Option<f64>,
    /// `sigma` to carry into the next phase (post-success rule applied).
    pub sigma: f64,
    pub t1: u64,
}

/// Monotone first phase: adapt `sigma` at a fixed center until one step
/// passes the plain decrease test `f(x+s) < m(x, s, sigma)`, then stop.
pub(crate) fn phase_one(
    ctx: &mut Ctx<'_>,
    cfg: &SolverConfig,
    mode: HessianMode,
    x0: &DVector<f64>,
    sigma0: f64,
    fd: &mut Option<FdState>,
    diags: &mut Vec<SuccessDiag>,
) -> PhaseOneOut {
    let (f0, g0) = ctx.value_grad(x0);
    let g0_norm = g0.norm();
    if g0_norm <= cfg.grad_tol {
        return PhaseOneOut {
            end: PhaseOneEnd::ConvergedAtStart,
            x: x0.clone(),
            f: f0,
            grad_norm_at_x: Some(g0_norm),
            sigma: sigma0,
            t1: 0,
        };
    }
    let point = make_point(ctx, mode, x0.clone(), f0, g0);
    let mut sigma = sigma0;
    let mut warm = 1usize;
    for i in 0..cfg.max_outer {
        let step = match cubic_step(ctx, cfg, &point, sigma, fd, warm) {
            Ok(step) => step,
            Err(msg) => {
                return PhaseOneOut {
                    end: PhaseOneEnd::Failed(msg),
                    x: point.x,
                    f: point.f,
                    grad_norm_at_x: Some(point.g_norm),
                    sigma,
                    t1: i + 1,
                };
            }
        };
        let s_norm = step.sol.s.norm();
        if step_is_tiny(s_norm, point.x.norm()) {
            // The model offers no step at working precision while the
            // gradient is still above tolerance; treat as a rejection.
            ctx.push_row(Phase::Sas, false, 1, point.f, sigma, None);
            sigma *= cfg.gamma1;
            warm = step.sol.krylov_dim.max(1);
            continue;
        }
        let x_trial = &point.x + &step.sol.s;
        let f_trial = ctx.value(&x_trial);
        let rho = f_trial - step.sol.model_value;
        if rho < decrease_slack(point.f) {
            let outer_index = ctx.push_row(Phase::Sas, true, 1, f_trial, sigma, None);
            diags.push(SuccessDiag {
                phase: Phase::Sas,
                outer_index,
                l: 1,
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
                grad_new_norm: None,
                s_dot_grad_new: None,
            });
            return PhaseOneOut {
                end: PhaseOneEnd::Succeeded,
                x: x_trial,
                f: f_trial,
                grad_norm_at_x: None,
                sigma: sigma_after_success(cfg, sigma),
                t1: i + 1,
            };
        }
        ctx.push_row(Phase::Sas, false, 1, point.f, sigma, None);
        sigma *= cfg.gamma1;
        warm = step.sol.krylov_dim.max(1);
    }
    PhaseOneOut {
        end: PhaseOneEnd::OutOfBudget,
        x: point.x,
        f: point.f,
        grad_norm_at_x: Some(point.g_norm),
        sigma,
        t1: cfg.max_outer,
    }
}

/// Hybrid switch rule: fire after `window` successes once the relative
/// per-success progress drops to `ratio` or below.
pub(crate) struct SwitchRule {
    pub window: u64,
    pub ratio: f64,
}

/// State handed to the monotone continuation when the switch fires.
pub(crate) struct Handoff {
    pub x: DVector<f64>,
    pub f: f64,
    pub g: DVector<f64>,
    pub sigma: f64,
    pub l: u64,
}

pub(crate) struct PhaseTwoOut {
    pub x_final: DVector<f64>,
    pub f_final: f64,
    pub grad_norm_final: f64,
    pub t2: u64,
    pub t3: u64,
    pub l: u64,
    pub status: RunStatus,
    pub failure: Option<String>,
    pub sigma_final: f64,
    pub varsigma_final: f64,
    /// Set when the switch rule fired; the terminal fields then describe the
    /// state at the switch point and the caller continues from `handoff`.
    pub handoff: Option<Handoff>,
}

/// Accelerated second phase with the cubic estimate.
///
/// Maintains the triple `(xbar, y, z)` and the estimate state; each success
/// accepts `x_new = y + s`, folds a weighted linear lower bound into the
/// estimate, escalates the estimate regularizer per the configured rule, and
/// re-mixes `y` between the incumbent and the estimate minimizer.
///
/// `f1_hint` carries the Phase-I objective value at `xbar1`: the first `y`
/// coincides with `xbar1` bitwise, so the engine only needs a gradient there.
pub(crate) fn phase_two_cubic(
    ctx: &mut Ctx<'_>,
    cfg: &SolverConfig,
    mode: HessianMode,
    xbar1: &DVector<f64>,
    f1_hint: Option<f64>,
    sigma_in: f64,
    fd: &mut Option<FdState>,
    diags: &mut Vec<SuccessDiag>,
    switch: Option<SwitchRule>,
) -> PhaseTwoOut {
    let (f1, g1) = match f1_hint {
        Some(f) => (f, ctx.grad(xbar1)),
        None => ctx.value_grad(xbar1),
    };
    let mut est = EstimateState::init(Degree::Cubic, xbar1.clone(), f1, cfg.varsigma1);
    let mut xbar = xbar1.clone();
    let mut fbar = f1;
    let mut gbar = g1.clone();
    let mut z = xbar1.clone();
    // First mixing: z coincides with xbar, so y == xbar bitwise and the
    // evaluation above is exactly the first model center.
    let mut y = mix_toward(&xbar, &z, 3.0 / 4.0);
    let mut point = Some(make_point(ctx, mode, y.clone(), f1, g1));

    let mut sigma = sigma_in;
    let mut successes = 0u64;
    let mut t2 = 0u64;
    let mut t3 = 0u64;
    let mut warm = 1usize;
    let mut handoff: Option<Handoff> = None;
    // status, failure detail, x, f, grad norm
    let mut terminal: Option<(RunStatus, Option<String>, DVector<f64>, f64, f64)> = None;

    for _ in 0..cfg.max_outer {
        if point.is_none() {
            let (fy, gy) = ctx.value_grad(&y);
            point = Some(make_point(ctx, mode, y.clone(), fy, gy));
        }
        let p = point.as_ref().unwrap();
        if p.g_norm <= cfg.grad_tol {
            terminal = Some((RunStatus::Converged, None, p.x.clone(), p.f, p.g_norm));
            break;
        }
        let step = match cubic_step(ctx, cfg, p, sigma, fd, warm) {
            Ok(step) => step,
            Err(msg) => {
                terminal = Some((
                    RunStatus::SubsolverFailure,
                    Some(msg),
                    xbar.clone(),
                    fbar,
                    gbar.norm(),
                ));
                break;
            }
        };
        t2 += 1;
        let s_norm = step.sol.s.norm();
        if step_is_tiny(s_norm, p.x.norm()) {
            ctx.push_row(Phase::Aas, false, est.l(), fbar, sigma, Some(est.varsigma()));
            sigma *= cfg.gamma1;
            warm = step.sol.krylov_dim.max(1);
            continue;
        }
        let x_trial = &p.x + &step.sol.s;
        let g_trial = ctx.grad(&x_trial);
        let s_dot = step.sol.s.dot(&g_trial);
        let rho = -s_dot / (s_norm * s_norm * s_norm);
        if rho >= cfg.eta {
            let f_new = ctx.value(&x_trial);
            let f_prev = fbar;
            let sigma_used = sigma;
            sigma = sigma_after_success(cfg, sigma);
            let weight = est.next_weight();
            match cfg.linear_anchor {
                LinearAnchor::NewIterate => est.add_linear(weight, &x_trial, f_new, &g_trial),
                LinearAnchor::PreviousIterate => est.add_linear(weight, &xbar, fbar, &gbar),
            }
            let g_trial_norm = g_trial.norm();
            let model_grad_bound = condition1_threshold(s_norm, p.g_norm, cfg.kappa_theta);
            let y_used = p.x.clone();
            match escalate_estimate(&mut est, f_new, cfg) {
                Ok(out) => {
                    t3 += out.count;
                    z = out.z;
                    xbar = x_trial;
                    fbar = f_new;
                    gbar = g_trial;
                    successes += 1;
                    let l = est.l();
                    let outer_index =
                        ctx.push_row(Phase::Aas, true, l, f_new, sigma_used, Some(est.varsigma()));
                    diags.push(SuccessDiag {
                        phase: Phase::Aas,
                        outer_index,
                        l,
                        y: y_used,
                        s: step.sol.s.clone(),
                        sigma: sigma_used,
                        rho,
                        h: step.h,
                        model_grad_norm: step.sol.model_grad_norm,
                        model_grad_bound,
                        escalations: out.count,
                        psi_min: Some(out.psi_min),
                        weighted_f: Some(est.weight_sum() * f_new),
                        varsigma: Some(est.varsigma()),
                        f_new,
                        grad_new_norm: Some(g_trial_norm),
                        s_dot_grad_new: Some(s_dot),
                    });
                    if g_trial_norm <= cfg.grad_tol {
                        terminal = Some((
                            RunStatus::Converged,
                            None,
                            xbar.clone(),
                            fbar,
                            g_trial_norm,
                        ));
                        break;
                    }
                    if let Some(max_successes) = cfg.max_successes {
                        if successes >= max_successes {
                            terminal = Some((
                                RunStatus::BudgetExhausted,
                                Some(format!("success budget of {max_successes} reached")),
                                xbar.clone(),
                                fbar,
                                g_trial_norm,
                            ));
                            break;
                        }
                    }
                    if let Some(rule) = &switch {
                        let scale = f_prev.abs();
                        if l > rule.window
                            && scale > 0.0
                            && (f_new - f_prev).abs() / scale <= rule.ratio
                        {
                            handoff = Some(Handoff {
                                x: xbar.clone(),
                                f: fbar,
                                g: gbar.clone(),
                                sigma,
                                l,
                            });
                            break;
                        }
                    }
                    y = mix_toward(&xbar, &z, 3.0 / (l as f64 + 3.0));
                    point = None;
                    warm = 1;
                }
                Err(msg) => {
                    // The step itself was accepted before the escalation
                    // budget tripped; record it, then stop.
                    t3 += cfg.max_escalations_per_success;
                    let (_, psi_cur) = est.minimize();
                    xbar = x_trial;
                    fbar = f_new;
                    gbar = g_trial;
                    let l = est.l();
                    let outer_index =
                        ctx.push_row(Phase::Aas, true, l, f_new, sigma_used, Some(est.varsigma()));
                    diags.push(SuccessDiag {
                        phase: Phase::Aas,
                        outer_index,
                        l,
                        y: y_used,
                        s: step.sol.s.clone(),
                        sigma: sigma_used,
                        rho,
                        h: step.h,
                        model_grad_norm: step.sol.model_grad_norm,
                        model_grad_bound,
                        escalations: cfg.max_escalations_per_success,
                        psi_min: Some(psi_cur),
                        weighted_f: Some(est.weight_sum() * f_new),
                        varsigma: Some(est.varsigma()),
                        f_new,
                        grad_new_norm: Some(g_trial_norm),
                        s_dot_grad_new: Some(s_dot),
                    });
                    terminal = Some((
                        RunStatus::BudgetExhausted,
                        Some(msg),
                        xbar.clone(),
                        fbar,
                        gbar.norm(),
                    ));
                    break;
                }
            }
        } else {
            ctx.push_row(Phase::Aas, false, est.l(), fbar, sigma, Some(est.varsigma()));
            sigma *= cfg.gamma1;
            warm = step.sol.krylov_dim.max(1);
        }
    }

    let (status, failure, x_final, f_final, grad_norm_final) = match terminal {
        Some(t) => t,
        // Switch fired: terminal fields describe the switch point; the
        // caller overrides status and final state with the continuation's.
        None if handoff.is_some() => {
            (RunStatus::Converged, None, xbar.clone(), fbar, gbar.norm())
        }
        None => (
            RunStatus::BudgetExhausted,
            Some(format!(
                "second-phase budget of {} iterations exhausted",
                cfg.max_outer
            )),
            xbar.clone(),
            fbar,
            gbar.norm(),
        ),
    };
    PhaseTwoOut {
        x_final,
        f_final,
        grad_norm_final,
        t2,
        t3,
        l: est.l(),
        status,
        failure,
        sigma_final: sigma,
        varsigma_final: est.varsigma(),
        handoff,
    }
}

/// Shared assembly for the full two-phase cubic solvers.
pub(crate) fn run_cubic(
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    mode: HessianMode,
) -> SolverRun {
    cfg.validate().expect("invalid solver configuration");
    assert_eq!(x0.len(), oracle.dim(), "start point dimension mismatch");
    let mut ctx = Ctx::new(oracle);
    let mut fd = match mode {
        HessianMode::Exact => None,
        HessianMode::FiniteDifference => Some(FdState::new(&cfg.fd)),
    };
    let mut diags = Vec::new();
    let p1 = phase_one(&mut ctx, cfg, mode, x0, cfg.sigma0, &mut fd, &mut diags);
    if matches!(p1.end, PhaseOneEnd::Succeeded) {
        let p2 = phase_two_cubic(
            &mut ctx,
            cfg,
            mode,
            &p1.x,
            Some(p1.f),
            p1.sigma,
            &mut fd,
            &mut diags,
            None,
        );
        let t4 = fd.as_ref().map_or(0, |s| s.shrinks);
        finish_run(ctx, diags, p1.t1, Some(p1.x), t4, p2)
    } else {
        let t4 = fd.as_ref().map_or(0, |s| s.shrinks);
        finish_phase_one_only(ctx, diags, cfg, p1, t4)
    }
}

/// Assemble a `SolverRun` from a completed second phase.
pub(crate) fn finish_run(
    ctx: Ctx<'_>,
    diags: Vec<SuccessDiag>,
    t1: u64,
    xbar1: Option<DVector<f64>>,
    t4: u64,
    p2: PhaseTwoOut,
) -> SolverRun {
    let wall_time_s = ctx.elapsed();
    let counters = ctx.snapshot();
    SolverRun {
        x_final: p2.x_final,
        f_final: p2.f_final,
        grad_norm_final: p2.grad_norm_final,
        t1,
        t2: p2.t2,
        t3: p2.t3,
        t4,
        l: p2.l,
        trace: ctx.trace,
        status: p2.status,
        xbar1,
        sigma_final: p2.sigma_final,
        varsigma_final: Some(p2.varsigma_final),
        success_diags: diags,
        failure: p2.failure,
        wall_time_s,
        counters,
    }
}

/// Assemble a `SolverRun` for a run that never reached the second phase.
pub(crate) fn finish_phase_one_only(
    ctx: Ctx<'_>,
    diags: Vec<SuccessDiag>,
    cfg: &SolverConfig,
    p1: PhaseOneOut,
    t4: u64,
) -> SolverRun {
    let PhaseOneOut { end, x, f, grad_norm_at_x, sigma, t1 } = p1;
    let (status, failure) = match end {
        PhaseOneEnd::ConvergedAtStart => (RunStatus::Converged, None),
        PhaseOneEnd::OutOfBudget => (
            RunStatus::BudgetExhausted,
            Some(format!(
                "first-phase budget of {} iterations exhausted",
                cfg.max_outer
            )),
        ),
        PhaseOneEnd::Failed(msg) => (RunStatus::SubsolverFailure, Some(msg)),
        PhaseOneEnd::Succeeded => unreachable!("successful phase one proceeds to phase two"),
    };
    let wall_time_s = ctx.elapsed();
    let counters = ctx.snapshot();
    SolverRun {
        x_final: x,
        f_final: f,
        grad_norm_final: grad_norm_at_x.expect("gradient known at unmoved start"),
        t1,
        t2: 0,
        t3: 0,
        t4,
        l: 0,
        trace: ctx.trace,
        status,
        xbar1: None,
        sigma_final: sigma,
        varsigma_final: None,
        success_diags: diags,
        failure,
        wall_time_s,
        counters,
    }
}

/// Standalone first phase: adapt `sigma` at the start point until one
/// decrease-test success, then return the accepted point, the carried
/// `sigma`, the iteration count, and the trace.
///
/// On a non-success terminal (stationary start, exhausted budget, subsolver
/// failure) the returned point is the unchanged start point and the count
/// reflects the iterations attempted.
pub fn sas_cubic(
    oracle: &dyn Objective,
    x0: &DVector<f64>,
    sigma0: f64,
    cfg: &SolverConfig,
    hessian_mode: HessianMode,
) -> (DVector<f64>, f64, u64, Vec<TraceRecord>) {
    cfg.validate().expect("invalid solver configuration");
    assert!(
        sigma0 >= cfg.sigma_min,
        "sigma0 ({sigma0}) must be at least sigma_min ({})",
        cfg.sigma_min
    );
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
    let p1 = phase_one(&mut ctx, cfg, hessian_mode, x0, sigma0, &mut fd, &mut diags);
    (p1.x, p1.sigma, p1.t1, ctx.trace)
}

/// Standalone second phase from a given incumbent and carried `sigma`.
///
/// The returned run has `t1 = 0`: the first-phase work that produced
/// `xbar1` happened in the caller (see [`sas_cubic`]).
pub fn aas_cubic(
    oracle: &dyn Objective,
    xbar1: &DVector<f64>,
    sigma_in: f64,
    cfg: &SolverConfig,
    hessian_mode: HessianMode,
) -> SolverRun {
    cfg.validate().expect("invalid solver configuration");
    assert!(sigma_in > 0.0, "sigma_in must be positive");
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
    let p2 = phase_two_cubic(
        &mut ctx,
        cfg,
        hessian_mode,
        xbar1,
        None,
        sigma_in,
        &mut fd,
        &mut diags,
        None,
    );
    let t4 = fd.as_ref().map_or(0, |s| s.shrinks);
    finish_run(ctx, diags, 0, Some(xbar1.clone()), t4, p2)
}

/// Full two-phase solver with exact curvature.
pub fn solve_aarc(oracle: &dyn Objective, x0: &DVector<f64>, cfg: &SolverConfig) -> SolverRun {
    run_cubic(oracle, x0, cfg, HessianMode::Exact)
}

/// Full two-phase solver with finite-difference curvature built from
/// gradient probes; the oracle's analytic second order is never touched
/// (enforced by a guard that panics on any Hessian access).
pub fn solve_aarcq(oracle: &dyn Objective, x0: &DVector<f64>, cfg: &SolverConfig) -> SolverRun {
    let guard = GradientOnly(oracle);
    run_cubic(&guard, x0, cfg, HessianMode::FiniteDifference)
}
