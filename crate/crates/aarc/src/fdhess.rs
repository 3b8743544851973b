//! Finite-difference Hessian approximation and the stepsize search loop
//! coupling the difference stepsize `h` to the trial step `s`.
//!
//! The approximation at `x` with stepsize `h` is
//!
//! ```text
//! A[:, j] = (grad f(x + h e_j) - grad f(x)) / h
//! H = (A + A') / 2 + kappa_c * h * I
//! ```
//!
//! costing exactly `d + 1` gradient evaluations. The diagonal shift keeps
//! `H` positive semidefinite for convex objectives once `kappa_c` dominates
//! the difference error constant; the search loop additionally verifies
//! positive semidefiniteness numerically and shrinks `h` when the check
//! fails.
//!
//! [`search_step_pair`] alternates building `H` and solving the cubic model
//! until the coupling `h <= kappa_hs * |s|` holds, shrinking `h` by
//! `gamma4` otherwise. Each shrink is counted (the solver's T4 counter).

use crate::parallel::map_indices;
use crate::subproblem::{CubicModel, SubproblemError, SubproblemSolution};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Configuration of the finite-difference Hessian machinery.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FDHessianConfig {
    /// Diagonal shift weight; must dominate the difference-error constant
    /// for the PSD guarantee on convex objectives.
    pub kappa_c: f64,
    /// Step-coupling constant in `h <= kappa_hs * |s|`.
    pub kappa_hs: f64,
    /// Stepsize shrink factor, in (0, 1).
    pub gamma4: f64,
    /// Initial stepsize, in (0, 1].
    pub h_init: f64,
    /// Shrink budget per search (counts toward T4).
    pub max_shrinks: usize,
}

impl Default for FDHessianConfig {
    fn default() -> Self {
        FDHessianConfig {
            kappa_c: 1.0,
            kappa_hs: 1.0,
            gamma4: 0.5,
            h_init: 1e-2,
            max_shrinks: 200,
        }
    }
}

impl FDHessianConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.kappa_c > 0.0) {
            return Err("kappa_c must be positive".into());
        }
        if !(self.kappa_hs > 0.0) {
            return Err("kappa_hs must be positive".into());
        }
        if !(self.gamma4 > 0.0 && self.gamma4 < 1.0) {
            return Err("gamma4 must lie in (0, 1)".into());
        }
        if !(self.h_init > 0.0 && self.h_init <= 1.0) {
            return Err("h_init must lie in (0, 1]".into());
        }
        if self.max_shrinks == 0 {
            return Err("max_shrinks must be at least 1".into());
        }
        Ok(())
    }
}

/// Errors from the finite-difference machinery.
#[derive(Debug, Error)]
pub enum FdError {
    #[error("gradient at probe point {index} is not finite")]
    NonFiniteGradient { index: usize },
    #[error(
        "stepsize shrink budget of {max_shrinks} exceeded at h = {h:.3e} \
         (step is collapsing; the iterate is stationary beyond the outer tolerance)"
    )]
    ShrinkBudgetExceeded { max_shrinks: usize, h: f64 },
    #[error("subproblem failure during stepsize search: {0}")]
    Subproblem(#[from] SubproblemError),
}

/// Builds the symmetrized, shifted finite-difference Hessian. Costs exactly
/// `d + 1` gradient evaluations; the `d` probe evaluations are independent
/// and run through the deterministic parallel map.
pub fn fd_hessian<G>(
    gradient_fn: &G,
    x: &DVector<f64>,
    h: f64,
    kappa_c: f64,
) -> Result<DMatrix<f64>, FdError>
where
    G: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    assert!(h > 0.0, "difference stepsize must be positive");
    let d = x.len();
    let g0 = gradient_fn(x);
    if g0.iter().any(|v| !v.is_finite()) {
        return Err(FdError::NonFiniteGradient { index: usize::MAX });
    }
    let columns: Vec<DVector<f64>> = map_indices(d, |j| {
        let mut xp = x.clone();
        xp[j] += h;
        let gj = gradient_fn(&xp);
        (gj - &g0) / h
    });
    for (j, col) in columns.iter().enumerate() {
        if col.iter().any(|v| !v.is_finite()) {
            return Err(FdError::NonFiniteGradient { index: j });
        }
    }
    let mut hmat = DMatrix::zeros(d, d);
    for (j, col) in columns.iter().enumerate() {
        hmat.set_column(j, col);
    }
    // Symmetrize and shift.
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = 0.5 * (hmat[(i, j)] + hmat[(j, i)]);
        }
        out[(i, i)] += kappa_c * h;
    }
    Ok(out)
}

/// One-slot cache of the last finite-difference build, keyed on the exact
/// bits of `(x, h)`. Rebuilding at an unchanged iterate (e.g. after a
/// rejected step inflates sigma) would reproduce the same matrix, so the
/// solver reuses it and the gradient-call count stays honest: a cache hit
/// consumes zero evaluations.
#[derive(Default)]
pub struct FdCache {
    entry: Option<(DVector<f64>, f64, DMatrix<f64>)>,
}

impl FdCache {
    pub fn new() -> Self {
        FdCache { entry: None }
    }

    pub fn get(&self, x: &DVector<f64>, h: f64) -> Option<&DMatrix<f64>> {
        match &self.entry {
            Some((cx, ch, m)) if *ch == h && cx == x => Some(m),
            _ => None,
        }
    }

    pub fn put(&mut self, x: DVector<f64>, h: f64, m: DMatrix<f64>) {
        self.entry = Some((x, h, m));
    }
}

/// Outcome of [`search_step_pair`].
pub struct StepPair {
    /// Final stepsize, satisfying `h <= kappa_hs * |s|`.
    pub h: f64,
    /// The accepted trial step.
    pub solution: SubproblemSolution,
    /// The Hessian approximation used for the accepted step.
    pub hessian: DMatrix<f64>,
    /// Shrinks performed in this search (contributes to T4).
    pub shrink_count: usize,
}

/// Runs the coupled stepsize search at the expansion point `x`: build `H`
/// at the current `h`, solve the cubic model, and shrink `h` by `gamma4`
/// while `h > kappa_hs * |s|` (or while the PSD check fails). Returns the
/// first `(h, s, H)` with the coupling satisfied.
///
/// `subsolver` maps a model and a warm-start dimension hint (the previous
/// solve's Krylov dimension, 1 on the first call) to a solution.
#[allow(clippy::too_many_arguments)]
pub fn search_step_pair<G, S>(
    gradient_fn: &G,
    x: &DVector<f64>,
    f0: f64,
    g: &DVector<f64>,
    sigma: f64,
    cfg: &FDHessianConfig,
    h_start: f64,
    cache: &mut FdCache,
    subsolver: &mut S,
) -> Result<StepPair, FdError>
where
    G: Fn(&DVector<f64>) -> DVector<f64> + Sync,
    S: FnMut(&CubicModel, usize) -> Result<SubproblemSolution, SubproblemError>,
{
    assert!(h_start > 0.0);
    assert!(sigma > 0.0);
    let mut h = h_start;
    let mut shrink_count = 0usize;
    let mut warm_dim = 1usize;
    loop {
        let hessian = match cache.get(x, h) {
            Some(m) => m.clone(),
            None => {
                let m = fd_hessian(gradient_fn, x, h, cfg.kappa_c)?;
                cache.put(x.clone(), h, m.clone());
                m
            }
        };
        // PSD verification: shrink once more if the shifted matrix still
        // has curvature below -tol (difference error exceeded kappa_c*h).
        let tol = 1e-10 * (1.0 + hessian.diagonal().amax());
        let shifted = &hessian + DMatrix::from_diagonal_element(x.len(), x.len(), tol);
        if shifted.cholesky().is_none() {
            shrink_count += 1;
            if shrink_count > cfg.max_shrinks {
                return Err(FdError::ShrinkBudgetExceeded { max_shrinks: cfg.max_shrinks, h });
            }
            h *= cfg.gamma4;
            continue;
        }

        let op = crate::objective::MatrixCurvature(hessian.clone());
        let model = CubicModel::new(f0, g.clone(), &op, sigma);
        let solution = subsolver(&model, warm_dim)?;
        warm_dim = solution.krylov_dim.max(1);

        if h <= cfg.kappa_hs * solution.s.norm() {
            return Ok(StepPair { h, solution, hessian, shrink_count });
        }
        shrink_count += 1;
        if shrink_count > cfg.max_shrinks {
            return Err(FdError::ShrinkBudgetExceeded { max_shrinks: cfg.max_shrinks, h });
        }
        h *= cfg.gamma4;
    }
}
