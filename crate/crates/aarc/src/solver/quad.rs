//! Gradient-only two-phase solver with a quadratic model: steps are closed
//! form (`s = -grad/sigma`), the estimate is quadratic, and acceptance in
//! the second phase uses the squared-norm normalization.

use nalgebra::DVector;

use crate::estimate::{Degree, EstimateState};
use crate::objective::{GradientOnly, Objective};
use crate::subproblem::condition1_threshold;

use super::cubic::{finish_phase_one_only, finish_run, PhaseOneEnd, PhaseOneOut, PhaseTwoOut};
use super::{
    decrease_slack, escalate_estimate, mix_toward, sigma_after_success, step_is_tiny, Ctx,
    LinearAnchor, Phase, RunStatus, SolverConfig, SolverRun, SuccessDiag,
};

/// Quadratic-model value at the closed-form step: `f - |g|^2 / (2 sigma)`.
fn quad_model_value(f: f64, g_norm: f64, sigma: f64) -> f64 {
    f - g_norm * g_norm / (2.0 * sigma)
}

/// Monotone first phase with the quadratic model.
fn phase_one_quad(
    ctx: &mut Ctx<'_>,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
    sigma0: f64,
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
    let x_norm = x0.norm();
    let mut sigma = sigma0;
    for i in 0..cfg.max_outer {
        let s = -&g0 / sigma;
        let s_norm = g0_norm / sigma;
        if step_is_tiny(s_norm, x_norm) {
            ctx.push_row(Phase::Sas, false, 1, f0, sigma, None);
            sigma *= cfg.gamma1;
            continue;
        }
        let x_trial = x0 + &s;
        let f_trial = ctx.value(&x_trial);
        let model_value = quad_model_value(f0, g0_norm, sigma);
        let rho = f_trial - model_value;
        if rho < decrease_slack(f0) {
            let outer_index = ctx.push_row(Phase::Sas, true, 1, f_trial, sigma, None);
            let model_grad_norm = (&g0 + &s * sigma).norm();
            diags.push(SuccessDiag {
                phase: Phase::Sas,
                outer_index,
                l: 1,
                y: x0.clone(),
                s,
                sigma,
                rho,
                h: None,
                model_grad_norm,
                model_grad_bound: condition1_threshold(s_norm, g0_norm, cfg.kappa_theta),
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
        ctx.push_row(Phase::Sas, false, 1, f0, sigma, None);
        sigma *= cfg.gamma1;
    }
    PhaseOneOut {
        end: PhaseOneEnd::OutOfBudget,
        x: x0.clone(),
        f: f0,
        grad_norm_at_x: Some(g0_norm),
        sigma,
        t1: cfg.max_outer,
    }
}

/// Accelerated second phase with the quadratic estimate.
fn phase_two_quad(
    ctx: &mut Ctx<'_>,
    cfg: &SolverConfig,
    xbar1: &DVector<f64>,
    f1_hint: Option<f64>,
    sigma_in: f64,
    diags: &mut Vec<SuccessDiag>,
) -> PhaseTwoOut {
    let (f1, g1) = match f1_hint {
        Some(f) => (f, ctx.grad(xbar1)),
        None => ctx.value_grad(xbar1),
    };
    let g1_norm = g1.norm();
    let mut est = EstimateState::init(Degree::Quadratic, xbar1.clone(), f1, cfg.varsigma1);
    let mut xbar = xbar1.clone();
    let mut fbar = f1;
    let mut gbar = g1.clone();
    let mut z = xbar1.clone();
    // z coincides with xbar, so y == xbar bitwise and (f1, g1) is the first
    // model-center evaluation.
    let mut y = mix_toward(&xbar, &z, 2.0 / 3.0);
    let mut cached: Option<(f64, DVector<f64>, f64)> = Some((f1, g1, g1_norm));

    let mut sigma = sigma_in;
    let mut successes = 0u64;
    let mut t2 = 0u64;
    let mut t3 = 0u64;
    let mut terminal: Option<(RunStatus, Option<String>, DVector<f64>, f64, f64)> = None;

    for _ in 0..cfg.max_outer {
        if cached.is_none() {
            let (fy, gy) = ctx.value_grad(&y);
            let n = gy.norm();
            cached = Some((fy, gy, n));
        }
        let (fy, gy, gy_norm) = cached.as_ref().map(|(f, g, n)| (*f, g, *n)).unwrap();
        if gy_norm <= cfg.grad_tol {
            terminal = Some((RunStatus::Converged, None, y.clone(), fy, gy_norm));
            break;
        }
        t2 += 1;
        let s = -gy / sigma;
        let s_norm = gy_norm / sigma;
        if step_is_tiny(s_norm, y.norm()) {
            ctx.push_row(Phase::Aas, false, est.l(), fbar, sigma, Some(est.varsigma()));
            sigma *= cfg.gamma1;
            continue;
        }
        let x_trial = &y + &s;
        let g_trial = ctx.grad(&x_trial);
        let s_dot = s.dot(&g_trial);
        let rho = -s_dot / (s_norm * s_norm);
        if rho >= cfg.eta {
            let f_new = ctx.value(&x_trial);
            let sigma_used = sigma;
            sigma = sigma_after_success(cfg, sigma);
            let weight = est.next_weight();
            match cfg.linear_anchor {
                LinearAnchor::NewIterate => est.add_linear(weight, &x_trial, f_new, &g_trial),
                LinearAnchor::PreviousIterate => est.add_linear(weight, &xbar, fbar, &gbar),
            }
            let g_trial_norm = g_trial.norm();
            let model_grad_norm = (gy + &s * sigma_used).norm();
            let model_grad_bound = condition1_threshold(s_norm, gy_norm, cfg.kappa_theta);
            let y_used = y.clone();
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
                        s,
                        sigma: sigma_used,
                        rho,
                        h: None,
                        model_grad_norm,
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
                        terminal =
                            Some((RunStatus::Converged, None, xbar.clone(), fbar, g_trial_norm));
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
                    y = mix_toward(&xbar, &z, 2.0 / (l as f64 + 2.0));
                    cached = None;
                }
                Err(msg) => {
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
                        s,
                        sigma: sigma_used,
                        rho,
                        h: None,
                        model_grad_norm,
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
        }
    }

    let (status, failure, x_final, f_final, grad_norm_final) = match terminal {
        Some(t) => t,
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
        handoff: None,
    }
}

/// Full two-phase gradient-only solver with the quadratic model and
/// estimate. Never requests second-order information (enforced by a guard
/// that panics on any Hessian access).
pub fn solve_aagd(oracle: &dyn Objective, x0: &DVector<f64>, cfg: &SolverConfig) -> SolverRun {
    cfg.validate().expect("invalid solver configuration");
    assert_eq!(x0.len(), oracle.dim(), "start point dimension mismatch");
    let guard = GradientOnly(oracle);
    let obj: &dyn Objective = &guard;
    let mut ctx = Ctx::new(obj);
    let mut diags = Vec::new();
    let p1 = phase_one_quad(&mut ctx, cfg, x0, cfg.sigma0, &mut diags);
    if matches!(p1.end, PhaseOneEnd::Succeeded) {
        let p2 = phase_two_quad(&mut ctx, cfg, &p1.x, Some(p1.f), p1.sigma, &mut diags);
        finish_run(ctx, diags, p1.t1, Some(p1.x), 0, p2)
    } else {
        finish_phase_one_only(ctx, diags, cfg, p1, 0)
    }
}
