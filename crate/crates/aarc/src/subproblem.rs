//! The cubic-regularized local model and its minimizers.
//!
//! The model around a point `x` is
//!
//! ```text
//! m(s) = f0 + s'g + s'Hs/2 + (sigma/3)|s|^3
//! ```
//!
//! with `H` symmetric positive semidefinite (the problems in scope are
//! convex). Two minimizers are provided:
//!
//! - [`solve_dense`]: eigendecomposes `H` and solves the scalar secular
//!   equation in `theta = |s|` — the brute-force reference, exact to a
//!   requested tolerance.
//! - [`solve_lanczos`]: builds a Krylov space of `H` from `g`, solves the
//!   reduced tridiagonal model at each dimension, and stops as soon as the
//!   inexactness test below holds in the full space.
//!
//! A step `s` is accepted as an approximate minimizer when
//!
//! ```text
//! |grad m(s)| <= kappa_theta * min(1, |s|) * min(|s|, |g|)        (*)
//! ```
//!
//! Solutions of either solver additionally satisfy the stationarity
//! identity `s'g + s'Hs + sigma|s|^3 = 0` up to solve tolerance — for the
//! Krylov path this holds at every subspace dimension, not just at
//! convergence, because the reduced gradient is orthogonal to the step's
//! complement.

use crate::objective::{CurvatureOp, MatrixCurvature};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Default inexactness parameter used to stamp `satisfied_condition1` on
/// dense solves (which take no explicit parameter because they drive the
/// residual to `tol` anyway). Callers with a different parameter should
/// re-check via [`CubicModel::condition1_holds`].
pub const DEFAULT_KAPPA_THETA: f64 = 0.5;

/// Relative tolerance on the stationarity identity used to stamp
/// `satisfied_stationarity`.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// Fixed tolerance of the reduced (Krylov) solves.
pub const REDUCED_SOLVE_TOL: f64 = 1e-10;

/// Basis-vector norm below which Lanczos declares breakdown (the Krylov
/// space is invariant and the reduced solve is exact).
pub const BREAKDOWN_TOL: f64 = 1e-12;

const MAX_ROOT_ITERS: usize = 200;

/// The cubic-regularized model `m(s) = f0 + s'g + s'Hs/2 + (sigma/3)|s|^3`.
pub struct CubicModel<'a> {
    /// Objective value at the expansion point.
    pub f0: f64,
    /// Gradient at the expansion point.
    pub g: DVector<f64>,
    /// Symmetric PSD curvature (exact Hessian or an approximation).
    pub curvature: &'a dyn CurvatureOp,
    /// Cubic regularization weight, strictly positive.
    pub sigma: f64,
}

impl<'a> CubicModel<'a> {
    pub fn new(f0: f64, g: DVector<f64>, curvature: &'a dyn CurvatureOp, sigma: f64) -> Self {
        assert!(sigma > 0.0, "cubic weight must be positive");
        assert_eq!(g.len(), curvature.dim(), "gradient/curvature dimension mismatch");
        CubicModel { f0, g, curvature, sigma }
    }

    /// `m(s)`; one curvature application.
    pub fn model_value(&self, s: &DVector<f64>) -> f64 {
        let hs = self.curvature.apply(s);
        self.model_value_with_hs(s, &hs)
    }

    /// `m(s)` with `Hs` already computed.
    pub fn model_value_with_hs(&self, s: &DVector<f64>, hs: &DVector<f64>) -> f64 {
        self.f0 + self.g.dot(s) + 0.5 * hs.dot(s) + self.sigma / 3.0 * s.norm().powi(3)
    }

    /// `grad m(s) = g + Hs + sigma*|s|*s`; one curvature application.
    pub fn model_gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        let hs = self.curvature.apply(s);
        self.model_gradient_with_hs(s, &hs)
    }

    /// `grad m(s)` with `Hs` already computed.
    pub fn model_gradient_with_hs(&self, s: &DVector<f64>, hs: &DVector<f64>) -> DVector<f64> {
        &self.g + hs + self.sigma * s.norm() * s
    }

    /// The inexactness test `(*)`; one curvature application.
    pub fn condition1_holds(&self, s: &DVector<f64>, kappa_theta: f64) -> bool {
        let hs = self.curvature.apply(s);
        self.condition1_with_hs(s, &hs, kappa_theta)
    }

    /// The inexactness test `(*)` with `Hs` already computed.
    pub fn condition1_with_hs(
        &self,
        s: &DVector<f64>,
        hs: &DVector<f64>,
        kappa_theta: f64,
    ) -> bool {
        let grad_norm = self.model_gradient_with_hs(s, hs).norm();
        grad_norm <= condition1_threshold(s.norm(), self.g.norm(), kappa_theta)
    }

    /// Stationarity residual `s'g + s'Hs + sigma|s|^3` with `Hs` given.
    fn stationarity_residual(&self, s: &DVector<f64>, hs: &DVector<f64>) -> f64 {
        s.dot(&self.g) + s.dot(hs) + self.sigma * s.norm().powi(3)
    }
}

/// Right-hand side of the inexactness test `(*)`.
pub fn condition1_threshold(s_norm: f64, g_norm: f64, kappa_theta: f64) -> f64 {
    kappa_theta * s_norm.min(1.0) * s_norm.min(g_norm)
}

/// Result of a subproblem solve.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    /// The step.
    pub s: DVector<f64>,
    /// `m(s)`, recomputable from the model.
    pub model_value: f64,
    /// `|grad m(s)|`, evaluated in the full space.
    pub model_grad_norm: f64,
    /// Krylov dimension used (0 for the dense path).
    pub krylov_dim: usize,
    /// Whether the inexactness test `(*)` held on return.
    pub satisfied_condition1: bool,
    /// Whether the stationarity identity held to `STATIONARITY_TOL`.
    pub satisfied_stationarity: bool,
}

/// Errors from the subproblem solvers.
#[derive(Debug, Error)]
pub enum SubproblemError {
    #[error("curvature matrix is not symmetric")]
    NonSymmetric,
    #[error("curvature has negative eigenvalue {0}; only convex models are supported")]
    Indefinite(f64),
    #[error("secular root find did not converge within {MAX_ROOT_ITERS} iterations (tolerance too tight)")]
    RootFindStalled,
    #[error("krylov budget of {max_dim} dimensions exhausted before the termination test held")]
    MaxDimExhausted {
        max_dim: usize,
        /// Best step found, for diagnostics.
        best: Box<SubproblemSolution>,
    },
    #[error("gradient-descent subsolver budget of {max_iters} iterations exhausted")]
    GradientDescentExhausted {
        max_iters: usize,
        best: Box<SubproblemSolution>,
    },
}

/// Solves the model exactly via eigendecomposition and the secular equation
/// `phi(theta) = |(Lambda + sigma*theta)^-1 Q'g| - theta = 0`, safeguarded
/// Newton inside the bracket `(0, sqrt(|g|/sigma)]`.
///
/// Termination: `|phi| <= tol` and `|grad m| <= tol * (1 + |g|)`.
pub fn solve_dense(model: &CubicModel, tol: f64) -> Result<SubproblemSolution, SubproblemError> {
    let h = model.curvature.materialize();
    check_symmetric(&h)?;
    let d = model.g.len();
    let sigma = model.sigma;
    let g_norm = model.g.norm();

    if g_norm == 0.0 {
        // PSD curvature and zero gradient: s = 0 is the global minimizer.
        return Ok(SubproblemSolution {
            s: DVector::zeros(d),
            model_value: model.f0,
            model_grad_norm: 0.0,
            krylov_dim: 0,
            satisfied_condition1: true,
            satisfied_stationarity: true,
        });
    }

    let eig = h.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut lam = eig.eigenvalues.clone();
    for v in lam.iter_mut() {
        if *v < 0.0 {
            if *v >= -1e-10 * (1.0 + scale) {
                *v = 0.0; // roundoff from the eigensolver
            } else {
                return Err(SubproblemError::Indefinite(*v));
            }
        }
    }
    let q = eig.eigenvectors;
    let ghat = q.transpose() * &model.g;

    // phi(theta) = w(theta) - theta with w(theta) = |(Lambda+sigma*theta)^-1 ghat|.
    // phi is strictly decreasing, phi(0+) > 0, phi(theta_hi) <= 0.
    let w_of = |theta: f64| -> f64 {
        let mut sq = 0.0;
        for i in 0..d {
            let denom = lam[i] + sigma * theta;
            if denom <= 0.0 {
                return f64::INFINITY; // only reachable at theta = 0 with a null eigenvalue
            }
            sq += (ghat[i] / denom).powi(2);
        }
        sq.sqrt()
    };
    let theta_hi = (g_norm / sigma).sqrt();
    let mut lo = 0.0;
    let mut hi = theta_hi;
    let mut theta = theta_hi;
    let mut converged = false;
    for _ in 0..MAX_ROOT_ITERS {
        let w = w_of(theta);
        let phi = w - theta;
        // |grad m| = sigma * |s| * |phi| at s(theta); see below.
        if phi.is_finite()
            && phi.abs() <= tol
            && sigma * w * phi.abs() <= tol * (1.0 + g_norm)
        {
            converged = true;
            break;
        }
        if phi > 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let mut next = f64::NAN;
        if phi.is_finite() {
            // phi'(theta) = w'(theta) - 1 with
            // w'(theta) = -sigma * sum ghat_i^2 (lam_i+sigma*theta)^-3 / w.
            let mut cube = 0.0;
            for i in 0..d {
                let denom = lam[i] + sigma * theta;
                cube += ghat[i].powi(2) / denom.powi(3);
            }
            if w > 0.0 {
                let dphi = -sigma * cube / w - 1.0;
                next = theta - phi / dphi;
            }
        }
        theta = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    if !converged {
        return Err(SubproblemError::RootFindStalled);
    }

    // s = -Q (Lambda + sigma*theta)^-1 ghat.
    let mut u = DVector::zeros(d);
    for i in 0..d {
        u[i] = -ghat[i] / (lam[i] + sigma * theta);
    }
    let s = &q * &u;
    let hs = &h * &s;
    finish_solution(model, s, hs, 0, DEFAULT_KAPPA_THETA)
}

fn check_symmetric(h: &DMatrix<f64>) -> Result<(), SubproblemError> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(SubproblemError::NonSymmetric);
    }
    let mut scale = 0.0_f64;
    for v in h.iter() {
        scale = scale.max(v.abs());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (h[(i, j)] - h[(j, i)]).abs() > 1e-8 * (1.0 + scale) {
                return Err(SubproblemError::NonSymmetric);
            }
        }
    }
    Ok(())
}

/// Assembles a `SubproblemSolution` from a step and its (already computed)
/// curvature application, stamping the quality flags honestly.
fn finish_solution(
    model: &CubicModel,
    s: DVector<f64>,
    hs: DVector<f64>,
    krylov_dim: usize,
    kappa_theta: f64,
) -> Result<SubproblemSolution, SubproblemError> {
    let model_value = model.model_value_with_hs(&s, &hs);
    let grad = model.model_gradient_with_hs(&s, &hs);
    let grad_norm = grad.norm();
    let satisfied_condition1 =
        grad_norm <= condition1_threshold(s.norm(), model.g.norm(), kappa_theta);
    let resid = model.stationarity_residual(&s, &hs);
    let satisfied_stationarity = resid.abs() <= STATIONARITY_TOL * (1.0 + model.f0.abs());
    Ok(SubproblemSolution {
        s,
        model_value,
        model_grad_norm: grad_norm,
        krylov_dim,
        satisfied_condition1,
        satisfied_stationarity,
    })
}

/// Krylov (Lanczos) solver: grows an orthonormal basis of
/// `span{g, Hg, H^2 g, ...}` with full reorthogonalization, solves the
/// reduced tridiagonal model at each dimension, and returns as soon as the
/// inexactness test `(*)` holds in the full space (verified with one extra
/// curvature application per check).
///
/// Requires `g != 0`; callers handle the zero-gradient case themselves.
pub fn solve_lanczos(
    model: &CubicModel,
    kappa_theta: f64,
    max_dim: usize,
) -> Result<SubproblemSolution, SubproblemError> {
    solve_lanczos_from(model, kappa_theta, max_dim, 1)
}

/// [`solve_lanczos`] with a warm-start hint: reduced solves and full-space
/// checks begin only once the basis has `initial_dim` vectors (earlier
/// dimensions are built but not solved). Useful when a previous solve on a
/// nearby model needed `initial_dim` dimensions.
pub fn solve_lanczos_from(
    model: &CubicModel,
    kappa_theta: f64,
    max_dim: usize,
    initial_dim: usize,
) -> Result<SubproblemSolution, SubproblemError> {
    let d = model.g.len();
    let g_norm = model.g.norm();
    assert!(g_norm > 0.0, "krylov solver requires a nonzero gradient");
    assert!(max_dim >= 1, "krylov budget must be at least one dimension");
    let kmax = max_dim.min(d);
    let first_check = initial_dim.max(1).min(kmax);

    let mut basis: Vec<DVector<f64>> = vec![&model.g / g_norm];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut best: Option<SubproblemSolution> = None;

    for k in 1..=kmax {
        // Process basis vector k (1-based): one curvature application.
        let vk = basis[k - 1].clone();
        let mut w = model.curvature.apply(&vk);
        let alpha = vk.dot(&w);
        w -= alpha * &vk;
        if k >= 2 {
            w -= betas[k - 2] * &basis[k - 2];
        }
        // Full reorthogonalization, two passes for robustness.
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&w);
                w -= c * v;
            }
        }
        alphas.push(alpha);
        let beta = w.norm();
        let breakdown = beta < BREAKDOWN_TOL;

        let do_solve = k >= first_check || breakdown || k == kmax;
        if do_solve {
            let sol = reduced_solve(model, &basis, &alphas, &betas, g_norm, kappa_theta)?;
            if sol.satisfied_condition1 || breakdown {
                return Ok(sol);
            }
            best = Some(sol);
        }

        if breakdown {
            // Invariant subspace: the reduced solve above was exact, and
            // the loop returned it. (Only reachable if the quality check
            // returned false, which the exactness of the solve prevents in
            // practice; return the best effort.)
            break;
        }
        if k < kmax {
            betas.push(beta);
            basis.push(w / beta);
        }
    }

    let best = best.expect("at least one reduced solve must have run");
    Err(SubproblemError::MaxDimExhausted { max_dim, best: Box::new(best) })
}

/// Solves the reduced model on the current Krylov basis and lifts the step
/// to the full space, stamping the quality flags with one honest curvature
/// application.
fn reduced_solve(
    model: &CubicModel,
    basis: &[DVector<f64>],
    alphas: &[f64],
    betas: &[f64],
    g_norm: f64,
    kappa_theta: f64,
) -> Result<SubproblemSolution, SubproblemError> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    // In the Krylov basis the gradient is |g| * e1.
    let mut g_red = DVector::zeros(k);
    g_red[0] = g_norm;
    let t_op = MatrixCurvature(t);
    let reduced = CubicModel {
        f0: model.f0,
        g: g_red,
        curvature: &t_op,
        sigma: model.sigma,
    };
    let red_sol = solve_dense(&reduced, REDUCED_SOLVE_TOL)?;

    let d = model.g.len();
    let mut s = DVector::zeros(d);
    for (j, v) in basis.iter().enumerate() {
        s += red_sol.s[j] * v;
    }
    let hs = model.curvature.apply(&s);
    finish_solution(model, s, hs, k, kappa_theta)
}

/// Optional gradient-descent subsolver (not the default): minimizes the
/// model by backtracking gradient steps, terminating on the inexactness
/// test `(*)`. One curvature application per iteration plus one per
/// backtracking probe.
pub fn solve_gradient_descent(
    model: &CubicModel,
    kappa_theta: f64,
    max_iters: usize,
) -> Result<SubproblemSolution, SubproblemError> {
    let d = model.g.len();
    let g_norm = model.g.norm();
    if g_norm == 0.0 {
        let s = DVector::zeros(d);
        let hs = model.curvature.apply(&s);
        return finish_solution(model, s, hs, 0, kappa_theta);
    }
    let mut s = DVector::zeros(d);
    let mut hs = model.curvature.apply(&s);
    let mut m_val = model.model_value_with_hs(&s, &hs);
    let mut step = 1.0 / model.sigma.max(1e-12);
    let mut best: Option<SubproblemSolution> = None;
    for _ in 0..max_iters {
        let grad = model.model_gradient_with_hs(&s, &hs);
        if grad.norm() <= condition1_threshold(s.norm(), g_norm, kappa_theta) {
            return finish_solution(model, s, hs, 0, kappa_theta);
        }
        // Backtracking on the model value (Armijo with c = 1e-4).
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &s - step * &grad;
            let hc = model.curvature.apply(&cand);
            let mc = model.model_value_with_hs(&cand, &hc);
            if mc <= m_val - 1e-4 * step * grad.norm_squared() {
                s = cand;
                hs = hc;
                m_val = mc;
                accepted = true;
                // Gentle growth so the step can recover after shrinking.
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // step underflow: return best effort below
        }
        best = Some(finish_solution(model, s.clone(), hs.clone(), 0, kappa_theta)?);
    }
    let best = match best {
        Some(b) => b,
        None => finish_solution(model, s, hs, 0, kappa_theta)?,
    };
    if best.satisfied_condition1 {
        Ok(best)
    } else {
        Err(SubproblemError::GradientDescentExhausted { max_iters, best: Box::new(best) })
    }
}
