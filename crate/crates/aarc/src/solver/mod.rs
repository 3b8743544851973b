//! Two-phase adaptive solvers built on the cubic/quadratic subproblem machinery.
//!
//! Every solver here follows the same skeleton: a monotone first phase that
//! adapts the regularization weight `sigma` until a single decrease test
//! passes, then an accelerated second phase that maintains a global lower
//! estimate (see [`crate::estimate`]) alongside the iterate triple
//! `(xbar, y, z)`. The solvers differ in the model degree (cubic with exact
//! or finite-difference curvature, quadratic for the gradient-only variant)
//! and in how the second phase is cut short (baselines, hybrid switch,
//! scheduled restarts).
//!
//! All entry points return a [`SolverRun`]: the final iterate plus a
//! per-iteration [`TraceRecord`] log and per-success diagnostics rich enough
//! to re-verify the acceptance conditions offline (step decrease, model
//! gradient bound, estimate/objective coupling) without re-running the
//! solver.

mod baseline;
mod bounds;
mod cubic;
mod hybrid;
mod quad;
mod restart;

pub use baseline::{solve_agd_baseline, solve_arc_baseline};
pub use bounds::{
    aarcq_shrink_bound, cubic_distance_constant, cubic_escalation_bound, cubic_restart_schedule,
    cubic_sigma_caps, cubic_varsigma_cap, fd_sigma_caps, phase_one_bound, phase_two_bound,
    quad_distance_constant, quad_escalation_bound, quad_restart_schedule, quad_sigma_caps,
    quad_varsigma_cap, RestartSchedule, SigmaCaps,
};
pub use cubic::{aas_cubic, sas_cubic, solve_aarc, solve_aarcq};
pub use hybrid::{solve_hybrid_aarc, DEFAULT_SWITCH_RATIO, DEFAULT_SWITCH_WINDOW};
pub use quad::solve_aagd;
pub use restart::{restart_wrapper, restart_wrapper_with_rounds, InnerSolver, RoundStat};

use std::cell::Cell;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::estimate::EstimateState;
use crate::fdhess::FDHessianConfig;
use crate::objective::{CounterSnapshot, CurvatureOp, Objective, OracleCounters};

/// Default gradient-norm stopping tolerance shared by the solvers.
pub const DEFAULT_GRAD_TOL: f64 = 1e-9;

/// Relative step size below which a proposed step is treated as numerically
/// zero (the model has no descent left to offer at working precision).
pub(crate) const TINY_STEP_REL: f64 = 1e-14;

/// Relative slack applied to objective-difference acceptance tests.
///
/// Near a minimizer the true decrease `f(x) - f(x + s)` shrinks like
/// `||s||^2` while both values are only representable to about
/// `eps * |f|`, so an exact `< 0` comparison on the measured difference
/// becomes a rounding coin flip (and a persistently unlucky one stalls the
/// loop while the regularizer inflates without bound). Accepting any step
/// whose measured increase is below a few ulps of `|f|` restores the
/// mathematically guaranteed outcome without admitting genuine ascent
/// beyond working precision. The factor covers accumulation across chunked
/// sums in the data-parallel objective evaluations.
pub(crate) const RHO_NOISE_REL: f64 = 32.0 * f64::EPSILON;

/// Acceptance slack for a measured objective difference at scale `|f|`.
pub(crate) fn decrease_slack(f_scale: f64) -> f64 {
    RHO_NOISE_REL * (1.0 + f_scale.abs())
}

/// Which phase of the two-phase scheme produced a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// Monotone first phase (single-success warm-up, or the monotone
    /// baseline loop which reuses the same decrease test).
    Sas,
    /// Accelerated second phase (or any iteration after the hybrid switch,
    /// which keeps the phase label monotone within a run).
    Aas,
}

impl Phase {
    /// Stable uppercase label used by the CSV trace format.
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Sas => "SAS",
            Phase::Aas => "AAS",
        }
    }
}

/// Terminal state of a solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// The gradient norm at the final iterate met the tolerance.
    Converged,
    /// An iteration or escalation budget ran out before convergence
    /// (including deliberate truncation via `max_successes`).
    BudgetExhausted,
    /// The inner subproblem solver could not produce an acceptable step.
    SubsolverFailure,
}

/// How second-order information is obtained for the cubic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianMode {
    /// Ask the oracle for exact curvature (Hessian or Hessian-vector products).
    Exact,
    /// Build a forward-difference Hessian from gradient probes, with the
    /// step/difference coupling search from [`crate::fdhess`].
    FiniteDifference,
}

/// Inner solver used for the cubic model minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubsolverKind {
    /// Dense factorization plus secular root find; exact to tight tolerance.
    Dense,
    /// Krylov subspace method; `max_dim == 0` means "up to the full dimension".
    Lanczos { max_dim: usize },
    /// Projected gradient descent on the model; slow, used as a cross-check.
    GradientDescent { max_iters: usize },
}

/// Update applied to `sigma` after a successful second-phase step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnSuccessSigma {
    /// `sigma <- max(sigma_min, sigma / gamma1)` (the default adaptive rule).
    ShrinkByGamma1,
    /// Keep `sigma` unchanged on success (monotone variant).
    Hold,
}

/// Direction of the estimate-weight escalation loop after each success.
///
/// The estimate minimum `min_z psi(z)` is non-decreasing in the regularizer
/// weight `varsigma`, so only one direction of the loop can terminate:
/// raising `varsigma` *until* the minimum reaches the weighted objective
/// value. The opposite direction (raise while the minimum is already at or
/// above the weighted value) can never exit by its own test and is kept only
/// so that its budget-exhaustion behaviour can be demonstrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscalationRule {
    /// Raise `varsigma` while `min_z psi(z) < W_l * f_ref` (terminating form).
    RaiseWhileBelow,
    /// Raise `varsigma` while `min_z psi(z) >= W_l * f_ref` (non-terminating
    /// form; always ends in a budget error once entered).
    RaiseWhileAbove,
}

/// Which point anchors the linear lower bound folded into the estimate after
/// a successful step. Both choices are valid convex lower bounds; they differ
/// in whether the bound is taken at the newly accepted iterate or at the
/// previous incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearAnchor {
    /// Anchor at the newly accepted iterate (default; matches the stepwise
    /// operation order of the accelerated scheme).
    NewIterate,
    /// Anchor at the previous incumbent.
    PreviousIterate,
}

/// Full configuration for the two-phase solvers.
///
/// `Default` gives the reference parameter set used throughout the test
/// suite; [`SolverConfig::validate`] checks the mutual constraints
/// (`gamma2 > gamma1 > 1`, positive tolerances, and so on).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Multiplicative `sigma` update on failure (and divisor on success).
    pub gamma1: f64,
    /// Headroom factor appearing in the a-priori `sigma` caps; must exceed
    /// `gamma1`.
    pub gamma2: f64,
    /// Multiplicative `varsigma` update inside the escalation loop.
    pub gamma3: f64,
    /// Acceptance threshold for the normalized second-phase decrease ratio.
    pub eta: f64,
    /// Floor for `sigma`.
    pub sigma_min: f64,
    /// Initial `sigma` for the first phase.
    pub sigma0: f64,
    /// Initial estimate regularizer weight `varsigma_1`.
    pub varsigma1: f64,
    /// Relative model-gradient tolerance for inexact subproblem solves.
    pub kappa_theta: f64,
    /// Gradient-norm stopping tolerance.
    pub grad_tol: f64,
    /// Iteration budget per phase (and for the baseline loops).
    pub max_outer: u64,
    /// Budget for the escalation loop after a single success.
    pub max_escalations_per_success: u64,
    /// Finite-difference Hessian controls (used by the gradient-only cubic
    /// solver and ignored by the exact-curvature solvers).
    pub fd: FDHessianConfig,
    /// `sigma` update applied after a successful second-phase step.
    pub on_success_sigma: OnSuccessSigma,
    /// Escalation loop direction (see [`EscalationRule`]).
    pub escalation_rule: EscalationRule,
    /// Anchor point for the per-success linear bound (see [`LinearAnchor`]).
    pub linear_anchor: LinearAnchor,
    /// Inner minimizer for the cubic model.
    pub subsolver: SubsolverKind,
    /// Optional cap on the number of successful second-phase steps; used by
    /// the restart wrapper to truncate rounds.
    pub max_successes: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gamma1: 2.0,
            gamma2: 3.0,
            gamma3: 2.0,
            eta: 1e-3,
            sigma_min: 1e-8,
            sigma0: 1.0,
            varsigma1: 1.0,
            kappa_theta: 0.5,
            grad_tol: DEFAULT_GRAD_TOL,
            // A hang guard, not a tuning knob: generous enough that the
            // accelerated solvers reach tight gradient tolerances on
            // ill-conditioned problems before tripping it.
            max_outer: 100_000,
            max_escalations_per_success: 100,
            fd: FDHessianConfig::default(),
            on_success_sigma: OnSuccessSigma::ShrinkByGamma1,
            escalation_rule: EscalationRule::RaiseWhileBelow,
            linear_anchor: LinearAnchor::NewIterate,
            subsolver: SubsolverKind::Lanczos { max_dim: 0 },
            max_successes: None,
        }
    }
}

impl SolverConfig {
    /// Check mutual parameter constraints; returns a human-readable reason
    /// on the first violation.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma1 > 1.0) {
            return Err(format!("gamma1 must exceed 1, got {}", self.gamma1));
        }
        if !(self.gamma2 > self.gamma1) {
            return Err(format!(
                "gamma2 must exceed gamma1 ({} <= {})",
                self.gamma2, self.gamma1
            ));
        }
        if !(self.gamma3 > 1.0) {
            return Err(format!("gamma3 must exceed 1, got {}", self.gamma3));
        }
        if !(self.eta > 0.0) {
            return Err(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.sigma_min > 0.0) {
            return Err(format!("sigma_min must be positive, got {}", self.sigma_min));
        }
        if !(self.sigma0 >= self.sigma_min) {
            return Err(format!(
                "sigma0 must be at least sigma_min ({} < {})",
                self.sigma0, self.sigma_min
            ));
        }
        if !(self.varsigma1 > 0.0) {
            return Err(format!("varsigma1 must be positive, got {}", self.varsigma1));
        }
        if !(self.kappa_theta > 0.0 && self.kappa_theta < 1.0) {
            return Err(format!(
                "kappa_theta must lie in (0, 1), got {}",
                self.kappa_theta
            ));
        }
        if !(self.grad_tol > 0.0) {
            return Err(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if self.max_outer == 0 {
            return Err("max_outer must be at least 1".to_string());
        }
        if let SubsolverKind::GradientDescent { max_iters } = self.subsolver {
            if max_iters == 0 {
                return Err("gradient-descent subsolver needs max_iters >= 1".to_string());
            }
        }
        if let Some(ms) = self.max_successes {
            if ms == 0 {
                return Err("max_successes, when set, must be at least 1".to_string());
            }
        }
        self.fd.validate()?;
        Ok(())
    }
}

/// One row of the per-iteration trace.
///
/// `f` is the objective value at the incumbent *after* the iteration: the
/// accepted point on success, the unchanged incumbent on failure.
/// `grad_norm` is the norm of the most recently computed gradient at the
/// time the row is written. `counters` is a cumulative snapshot of oracle
/// work. Rows are appended in iteration order, so `outer_index`,
/// `wall_time_s`, and every counter are non-decreasing within a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: Phase,
    pub outer_index: u64,
    pub successful: bool,
    /// Estimate index (second phase), or `successes + 1` for first-phase and
    /// baseline rows.
    pub l: u64,
    pub f: f64,
    pub grad_norm: f64,
    /// Regularization weight used by the iteration (the backtracking
    /// Lipschitz estimate for the momentum baseline).
    pub sigma: f64,
    /// Estimate regularizer weight; `None` outside the second phase.
    pub varsigma: Option<f64>,
    pub wall_time_s: f64,
    pub counters: CounterSnapshot,
}

/// Everything needed to re-verify one accepted step offline.
#[derive(Debug, Clone)]
pub struct SuccessDiag {
    /// Phase that accepted the step.
    pub phase: Phase,
    /// `outer_index` of the accepting trace row.
    pub outer_index: u64,
    /// Estimate index after the success (or `successes` so far for
    /// first-phase/baseline successes).
    pub l: u64,
    /// Model expansion point.
    pub y: DVector<f64>,
    /// Accepted step.
    pub s: DVector<f64>,
    /// `sigma` used by the accepting solve.
    pub sigma: f64,
    /// Acceptance ratio: plain model decrease in the first phase, the
    /// normalized directional ratio in the second.
    pub rho: f64,
    /// Finite-difference interval used to build the curvature, if any.
    pub h: Option<f64>,
    /// Model gradient norm reported by the subproblem solve.
    pub model_grad_norm: f64,
    /// Right-hand side of the relative model-gradient bound at this step.
    pub model_grad_bound: f64,
    /// Escalations performed after this success.
    pub escalations: u64,
    /// Estimate minimum after escalation (second phase only).
    pub psi_min: Option<f64>,
    /// Scheduled weight times the new objective value (second phase only).
    pub weighted_f: Option<f64>,
    /// Estimate regularizer weight after escalation (second phase only).
    pub varsigma: Option<f64>,
    /// Objective value at the accepted point.
    pub f_new: f64,
    /// Gradient norm at the accepted point (second phase; first-phase and
    /// baseline successes fill it when the gradient is computed anyway).
    pub grad_new_norm: Option<f64>,
    /// Inner product between the step and the gradient at the accepted
    /// point; strictly negative on every second-phase success.
    pub s_dot_grad_new: Option<f64>,
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub x_final: DVector<f64>,
    pub f_final: f64,
    pub grad_norm_final: f64,
    /// First-phase iterations (total iterations for the monotone baseline).
    pub t1: u64,
    /// Second-phase iterations.
    pub t2: u64,
    /// Total escalation steps across the run.
    pub t3: u64,
    /// Total finite-difference interval shrinks across the run.
    pub t4: u64,
    /// Final estimate index (successful second-phase steps plus one) once
    /// the second phase has been entered; `0` for runs that never reach it.
    pub l: u64,
    pub trace: Vec<TraceRecord>,
    pub status: RunStatus,
    /// First-phase output point (the second phase's starting incumbent),
    /// when the run got that far.
    pub xbar1: Option<DVector<f64>>,
    /// Final `sigma` (the final Lipschitz estimate for the momentum
    /// baseline).
    pub sigma_final: f64,
    /// Final estimate regularizer weight, when a second phase ran.
    pub varsigma_final: Option<f64>,
    /// Per-success diagnostics in acceptance order.
    pub success_diags: Vec<SuccessDiag>,
    /// Failure detail for non-converged statuses, when one is known.
    pub failure: Option<String>,
    pub wall_time_s: f64,
    /// Final cumulative oracle counters.
    pub counters: CounterSnapshot,
}

impl SolverRun {
    /// Number of successful iterations recorded in the trace.
    pub fn successful_steps(&self) -> u64 {
        self.trace.iter().filter(|r| r.successful).count() as u64
    }
}

/// Curvature operator wrapper that counts applications and materializations
/// against the run's oracle counters.
pub(crate) struct CountedCurvature<'a> {
    inner: Box<dyn CurvatureOp + 'a>,
    counters: Arc<OracleCounters>,
}

impl<'a> CurvatureOp for CountedCurvature<'a> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.counters.hvps.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.apply(v)
    }

    fn materialize(&self) -> nalgebra::DMatrix<f64> {
        self.counters
            .hessians
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.materialize()
    }
}

/// Shared run context: the oracle, its counters, the trace, and timing.
///
/// Evaluation methods count every oracle call they make; gradient probes for
/// finite differences go through [`Ctx::fd_grad_fn`], which counts them
/// separately so exact-gradient and probe-gradient totals stay distinct.
pub(crate) struct Ctx<'a> {
    obj: &'a dyn Objective,
    counters: Arc<OracleCounters>,
    started: Instant,
    pub(crate) trace: Vec<TraceRecord>,
    outer: u64,
    last_grad_norm: Cell<f64>,
}

impl<'a> Ctx<'a> {
    pub(crate) fn new(obj: &'a dyn Objective) -> Self {
        Ctx {
            obj,
            counters: Arc::new(OracleCounters::default()),
            started: Instant::now(),
            trace: Vec::new(),
            outer: 0,
            last_grad_norm: Cell::new(f64::NAN),
        }
    }

    pub(crate) fn value(&self, x: &DVector<f64>) -> f64 {
        self.counters
            .values
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.obj.value(x)
    }

    pub(crate) fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        self.counters
            .gradients
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let g = self.obj.gradient(x);
        self.last_grad_norm.set(g.norm());
        g
    }

    pub(crate) fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        self.counters
            .values
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.counters
            .gradients
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let (f, g) = self.obj.value_grad(x);
        self.last_grad_norm.set(g.norm());
        (f, g)
    }

    pub(crate) fn curvature(&self, x: &DVector<f64>) -> CountedCurvature<'a> {
        CountedCurvature {
            inner: self.obj.curvature(x),
            counters: Arc::clone(&self.counters),
        }
    }

    /// Gradient-probe closure for finite-difference Hessian construction.
    /// Counts each call as a probe gradient, not an exact gradient.
    pub(crate) fn fd_grad_fn(&self) -> impl Fn(&DVector<f64>) -> DVector<f64> + Sync + 'a {
        let obj = self.obj;
        let counters = Arc::clone(&self.counters);
        move |p: &DVector<f64>| {
            counters.count_fd_gradient();
            obj.gradient(p)
        }
    }

    pub(crate) fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    pub(crate) fn snapshot(&self) -> CounterSnapshot {
        self.counters.snapshot()
    }

    pub(crate) fn next_outer(&mut self) -> u64 {
        self.outer += 1;
        self.outer
    }

    /// Append a trace row stamped with the current gradient norm, elapsed
    /// time, and counter snapshot; returns the row's `outer_index`.
    pub(crate) fn push_row(
        &mut self,
        phase: Phase,
        successful: bool,
        l: u64,
        f: f64,
        sigma: f64,
        varsigma: Option<f64>,
    ) -> u64 {
        let outer_index = self.next_outer();
        let row = TraceRecord {
            phase,
            outer_index,
            successful,
            l,
            f,
            grad_norm: self.last_grad_norm.get(),
            sigma,
            varsigma,
            wall_time_s: self.elapsed(),
            counters: self.snapshot(),
        };
        self.trace.push(row);
        outer_index
    }
}

/// Apply the configured post-success `sigma` update.
pub(crate) fn sigma_after_success(cfg: &SolverConfig, sigma: f64) -> f64 {
    match cfg.on_success_sigma {
        OnSuccessSigma::ShrinkByGamma1 => (sigma / cfg.gamma1).max(cfg.sigma_min),
        OnSuccessSigma::Hold => sigma,
    }
}

/// Outcome of the post-success escalation loop.
#[derive(Debug)]
pub(crate) struct EscalationOutcome {
    /// Estimate minimizer after the loop.
    pub z: DVector<f64>,
    /// Estimate minimum after the loop.
    pub psi_min: f64,
    /// Number of weight raises performed.
    pub count: u64,
}

/// Raise the estimate regularizer weight until the estimate minimum and the
/// weighted objective value satisfy the configured coupling, within the
/// per-success budget.
pub(crate) fn escalate_estimate(
    est: &mut EstimateState,
    f_ref: f64,
    cfg: &SolverConfig,
) -> Result<EscalationOutcome, String> {
    let target = est.weight_sum() * f_ref;
    let (mut z, mut psi) = est.minimize();
    let mut count = 0u64;
    loop {
        let keep_raising = match cfg.escalation_rule {
            // Near a minimizer `psi` and `target` agree to rounding (both
            // accumulate weighted near-optimal values), while the supremum
            // of the estimate minimum over the regularizer weight is a
            // finite limit: an exact comparison that rounds the wrong way
            // could then never exit. The noise allowance restores the
            // mathematically guaranteed termination.
            EscalationRule::RaiseWhileBelow => psi < target - decrease_slack(target),
            EscalationRule::RaiseWhileAbove => psi >= target,
        };
        if !keep_raising {
            break;
        }
        if count >= cfg.max_escalations_per_success {
            return Err(format!(
                "escalation budget of {} exhausted: estimate minimum {:.6e} vs weighted objective {:.6e} at regularizer weight {:.3e}; raising the weight can only increase the minimum, so this loop direction cannot reach the exit test",
                cfg.max_escalations_per_success,
                psi,
                target,
                est.varsigma()
            ));
        }
        est.raise_varsigma(est.varsigma() * cfg.gamma3);
        count += 1;
        let (z_new, psi_new) = est.minimize();
        z = z_new;
        psi = psi_new;
    }
    Ok(EscalationOutcome { z, psi_min: psi, count })
}

/// Accelerated mixing update `y = xbar + t * (z - xbar)`.
///
/// Written in difference form so that `z == xbar` (bitwise) yields
/// `y == xbar` (bitwise), which the second phase relies on at its first
/// iteration to reuse the first-phase objective value.
pub(crate) fn mix_toward(xbar: &DVector<f64>, z: &DVector<f64>, t: f64) -> DVector<f64> {
    xbar + (z - xbar) * t
}

/// `true` when the step is numerically zero relative to the iterate.
pub(crate) fn step_is_tiny(s_norm: f64, x_norm: f64) -> bool {
    s_norm <= TINY_STEP_REL * (1.0 + x_norm)
}
