//! Diagnostic calculators for the a-priori complexity guarantees of the
//! two-phase solvers on *instrumented* instances — problems whose gradient
//! and curvature Lipschitz constants (and optimum) are known exactly.
//!
//! These are analysis-side formulas, not used by the solvers themselves:
//! the test suite evaluates them from instance metadata and checks the
//! corresponding run statistics (phase iteration counts, escalation totals,
//! objective-gap envelopes, restart contraction) against them.

use super::SolverConfig;

/// A-priori caps on the adaptive regularization weight: `sigma_bar1` bounds
/// `sigma` during the first phase, `sigma_bar2` during the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaCaps {
    pub sigma_bar1: f64,
    pub sigma_bar2: f64,
}

/// Caps for the cubic model with exact curvature, from the gradient and
/// Hessian Lipschitz constants over the relevant level set.
pub fn cubic_sigma_caps(cfg: &SolverConfig, sigma0: f64, _l_g: f64, l_h: f64) -> SigmaCaps {
    let sigma_bar1 = sigma0.max(cfg.gamma2 * l_h / 2.0);
    let sigma_bar2 =
        sigma_bar1.max(cfg.gamma2 * l_h / 2.0 + cfg.gamma2 * cfg.kappa_theta + cfg.gamma2 * cfg.eta);
    SigmaCaps { sigma_bar1, sigma_bar2 }
}

/// Caps for the cubic model with finite-difference curvature. `kappa_e`
/// bounds the forward-difference truncation error (zero on quadratics);
/// `kappa_c` and `kappa_hs` come from the finite-difference configuration.
pub fn fd_sigma_caps(
    cfg: &SolverConfig,
    sigma0: f64,
    _l_g: f64,
    l_h: f64,
    kappa_e: f64,
) -> SigmaCaps {
    let kc = cfg.fd.kappa_c;
    let khs = cfg.fd.kappa_hs;
    let sigma_bar1 = sigma0.max((3.0 * cfg.gamma2 * l_h + cfg.gamma2 * (kappa_e + kc) * khs) / 2.0);
    let sigma_bar2 = sigma_bar1.max(
        cfg.gamma2 * l_h / 2.0
            + cfg.gamma2 * cfg.kappa_theta
            + cfg.gamma2 * (kappa_e + kc) * khs
            + cfg.gamma2 * cfg.eta,
    );
    SigmaCaps { sigma_bar1, sigma_bar2 }
}

/// Caps for the quadratic (gradient-only) model.
pub fn quad_sigma_caps(cfg: &SolverConfig, sigma0: f64, l_g: f64) -> SigmaCaps {
    let sigma_bar1 = sigma0.max(cfg.gamma2 * l_g);
    let sigma_bar2 = sigma_bar1.max(cfg.gamma2 * l_g + cfg.gamma2 * cfg.eta);
    SigmaCaps { sigma_bar1, sigma_bar2 }
}

/// Upper bound on first-phase iterations: the adaptive weight can only be
/// multiplied by `gamma1` so many times before crossing its cap.
pub fn phase_one_bound(cfg: &SolverConfig, sigma_bar1: f64) -> f64 {
    1.0 + (2.0 / cfg.gamma1.ln()) * (sigma_bar1 / cfg.sigma_min).ln()
}

/// Upper bound on second-phase iterations given the number of successes:
/// between successes the weight walk is bounded by the same cap argument.
pub fn phase_two_bound(cfg: &SolverConfig, sigma_bar2: f64, successes: u64) -> f64 {
    (1.0 + (2.0 / cfg.gamma1.ln()) * (sigma_bar2 / cfg.sigma_min).ln()) * successes as f64
}

/// Upper bound on total escalations for the cubic estimate: the estimate
/// regularizer stops rising once it crosses a cap assembled from the
/// problem constants.
pub fn cubic_escalation_bound(cfg: &SolverConfig, caps: &SigmaCaps, l_g: f64, l_h: f64) -> f64 {
    let cap = cubic_varsigma_cap(cfg, caps, l_g, l_h);
    ((1.0 / cfg.gamma3.ln()) * (cap / cfg.varsigma1).ln()).ceil().max(0.0)
}

/// The cubic estimate-regularizer cap itself.
pub fn cubic_varsigma_cap(cfg: &SolverConfig, caps: &SigmaCaps, l_g: f64, l_h: f64) -> f64 {
    let num = l_h + 2.0 * caps.sigma_bar2 + 2.0 * cfg.kappa_theta * l_g;
    (num / (1.0 - cfg.kappa_theta)).powi(3) / (cfg.eta * cfg.eta)
}

/// Upper bound on total escalations for the quadratic estimate.
pub fn quad_escalation_bound(cfg: &SolverConfig, caps: &SigmaCaps, l_g: f64) -> f64 {
    let cap = quad_varsigma_cap(cfg, caps, l_g);
    ((1.0 / cfg.gamma3.ln()) * (cap / cfg.varsigma1).ln()).ceil().max(0.0)
}

/// The quadratic estimate-regularizer cap itself.
pub fn quad_varsigma_cap(cfg: &SolverConfig, caps: &SigmaCaps, l_g: f64) -> f64 {
    4.0 * (l_g + caps.sigma_bar2).powi(2) / cfg.eta
}

/// Upper bound on total difference-interval shrinks for the
/// finite-difference solver, in terms of the gradient tolerance `eps` that
/// ends the run.
pub fn aarcq_shrink_bound(cfg: &SolverConfig, caps: &SigmaCaps, l_g: f64, kappa_e: f64, eps: f64) -> f64 {
    let kc = cfg.fd.kappa_c;
    let khs = cfg.fd.kappa_hs;
    let num = (l_g + (kappa_e + kc) * khs + caps.sigma_bar2) * cfg.fd.h_init;
    let arg = num / ((1.0 - cfg.kappa_theta) * khs * eps);
    (-(1.0 / cfg.fd.gamma4.ln()) * arg.ln()).ceil().max(0.0)
}

/// Constant for the cubic objective-gap envelope
/// `f(xbar_l) - f* <= C / (l (l+1) (l+2)) <= C / l^3`,
/// assembled from the instance constants and start/incumbent distances.
pub fn cubic_distance_constant(
    cfg: &SolverConfig,
    caps: &SigmaCaps,
    l_g: f64,
    l_h: f64,
    dist_x0: f64,
    dist_xbar1: f64,
) -> f64 {
    (2.0 * l_h + 2.0 * caps.sigma_bar1) * dist_x0.powi(3)
        + cubic_varsigma_cap(cfg, caps, l_g, l_h) * dist_xbar1.powi(3)
        + 12.0 * cfg.kappa_theta * (1.0 + cfg.kappa_theta) * l_g * l_g / cfg.sigma_min
            * dist_x0.powi(2)
}

/// Constant for the quadratic objective-gap envelope
/// `f(xbar_l) - f* <= C / (l (l+1)) <= C / l^2`.
pub fn quad_distance_constant(caps: &SigmaCaps, l_g: f64, dist_x0: f64, dist_xbar1: f64) -> f64 {
    (l_g + caps.sigma_bar1) * dist_x0.powi(2)
        + 2.0 * (l_g + caps.sigma_bar2).powi(2) * dist_xbar1.powi(2)
}

/// A restart schedule for strongly convex problems: run the inner solver
/// for `m_successes` successes per round; each round then contracts the
/// objective gap by at least `contraction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartSchedule {
    pub m_successes: u64,
    pub contraction: f64,
}

/// Schedule for the cubic solver on a `mu`-strongly-convex instance whose
/// level set has radius at most `level_radius` around the optimum.
pub fn cubic_restart_schedule(
    cfg: &SolverConfig,
    caps: &SigmaCaps,
    l_g: f64,
    l_h: f64,
    mu: f64,
    level_radius: f64,
) -> RestartSchedule {
    let tau1 = 2.0 * l_h + 2.0 * caps.sigma_bar1 + cubic_varsigma_cap(cfg, caps, l_g, l_h);
    let tau2 = 12.0 * cfg.kappa_theta * (1.0 + cfg.kappa_theta) * l_g * l_g / cfg.sigma_min;
    let m = (8.0 * (tau1 * level_radius + tau2) / mu).powf(1.0 / 3.0).ceil();
    RestartSchedule { m_successes: m.max(1.0) as u64, contraction: 0.25 }
}

/// Schedule for the gradient-only solver on a `mu`-strongly-convex instance.
pub fn quad_restart_schedule(_cfg: &SolverConfig, caps: &SigmaCaps, l_g: f64, mu: f64) -> RestartSchedule {
    let m = (2.0 * ((l_g + caps.sigma_bar1 + 2.0 * (l_g + caps.sigma_bar2).powi(2)) / mu).sqrt())
        .ceil();
    RestartSchedule { m_successes: m.max(1.0) as u64, contraction: 0.5 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn cubic_caps_reduce_to_sigma0_when_smooth() {
        // L_h = 0: the first-phase cap is just sigma0; the second adds the
        // fixed gamma2 (kappa_theta + eta) allowance.
        let cfg = cfg();
        let caps = cubic_sigma_caps(&cfg, 1.0, 5.0, 0.0);
        assert_eq!(caps.sigma_bar1, 1.0);
        let expect2 = 3.0 * 0.5 + 3.0 * 1e-3;
        assert_eq!(caps.sigma_bar2, 1.0_f64.max(expect2));
    }

    #[test]
    fn phase_one_bound_matches_hand_value() {
        // sigma_bar1 / sigma_min = 1e8 under defaults with sigma_bar1 = 1:
        // bound = 1 + (2 / ln 2) * ln(1e8) ~ 54.15.
        let cfg = cfg();
        let b = phase_one_bound(&cfg, 1.0);
        let expect = 1.0 + 2.0 / 2.0_f64.ln() * (1e8_f64).ln();
        assert!((b - expect).abs() < 1e-9);
        assert!(b > 54.0 && b < 55.0);
    }

    #[test]
    fn phase_two_bound_scales_with_successes() {
        let cfg = cfg();
        let per = phase_two_bound(&cfg, 2.0, 1);
        let ten = phase_two_bound(&cfg, 2.0, 10);
        assert!((ten - 10.0 * per).abs() < 1e-9);
    }

    #[test]
    fn escalation_bound_is_nonnegative_and_monotone_in_constants() {
        let cfg = cfg();
        let caps_small = cubic_sigma_caps(&cfg, 1.0, 1.0, 0.0);
        let caps_large = cubic_sigma_caps(&cfg, 1.0, 1.0, 100.0);
        let small = cubic_escalation_bound(&cfg, &caps_small, 1.0, 0.0);
        let large = cubic_escalation_bound(&cfg, &caps_large, 1.0, 100.0);
        assert!(small >= 0.0);
        assert!(large >= small);
    }

    #[test]
    fn quad_caps_hand_value() {
        let cfg = cfg();
        let caps = quad_sigma_caps(&cfg, 1.0, 10.0);
        assert_eq!(caps.sigma_bar1, 30.0);
        assert_eq!(caps.sigma_bar2, 30.0 + 3.0 * 1e-3);
    }

    #[test]
    fn distance_constants_are_positive_and_grow_with_distance() {
        let cfg = cfg();
        let caps = cubic_sigma_caps(&cfg, 1.0, 2.0, 1.0);
        let near = cubic_distance_constant(&cfg, &caps, 2.0, 1.0, 1.0, 1.0);
        let far = cubic_distance_constant(&cfg, &caps, 2.0, 1.0, 10.0, 10.0);
        assert!(near > 0.0);
        assert!(far > near);
        let qcaps = quad_sigma_caps(&cfg, 1.0, 2.0);
        assert!(quad_distance_constant(&qcaps, 2.0, 3.0, 3.0) > 0.0);
    }

    #[test]
    fn restart_schedules_have_sane_shape() {
        let cfg = cfg();
        let caps = cubic_sigma_caps(&cfg, 1.0, 2.0, 1.0);
        let sched = cubic_restart_schedule(&cfg, &caps, 2.0, 1.0, 0.5, 10.0);
        assert!(sched.m_successes >= 1);
        assert_eq!(sched.contraction, 0.25);
        let qcaps = quad_sigma_caps(&cfg, 1.0, 2.0);
        let qsched = quad_restart_schedule(&cfg, &qcaps, 2.0, 0.5);
        assert!(qsched.m_successes >= 1);
        assert_eq!(qsched.contraction, 0.5);
        // Stronger convexity needs fewer successes per round.
        let easier = quad_restart_schedule(&cfg, &qcaps, 2.0, 2.0);
        assert!(easier.m_successes <= qsched.m_successes);
    }

    #[test]
    fn shrink_bound_tracks_tolerance() {
        let cfg = cfg();
        let caps = fd_sigma_caps(&cfg, 1.0, 2.0, 0.0, 0.0);
        let loose = aarcq_shrink_bound(&cfg, &caps, 2.0, 0.0, 1e-3);
        let tight = aarcq_shrink_bound(&cfg, &caps, 2.0, 0.0, 1e-9);
        assert!(tight >= loose);
        assert!(loose >= 0.0);
    }
}
