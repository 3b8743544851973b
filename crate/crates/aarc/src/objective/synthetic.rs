//! Synthetic convex test functions with known constants.
//!
//! Three families are provided:
//!
//! - `quadratic`: `f(x) = x'Ax/2 - b'x` with a seeded SPD matrix of chosen
//!   dimension and condition number; the minimizer and all constants are
//!   exact.
//! - `log_sum_exp`: a symmetrized soft-max `ln sum_i (e^{a_i'x} + e^{-a_i'x})`
//!   minimized at the origin; smooth, not strongly convex.
//! - `separable_convex_quartic`: `f(x) = sum_i x_i^4 / 12`, whose Hessian
//!   `diag(x_i^2)` has a Lipschitz constant `2R` on the box `|x_i| <= R`, so
//!   curvature-adaptation behavior can be checked against known constants.

use super::{Capabilities, CurvatureOp, MatrixCurvature, Objective, TestFunctionMeta};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Which synthetic family to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// SPD quadratic with the given condition number (eigenvalues log-spaced
    /// in `[1, cond]`, random orthogonal basis).
    Quadratic { dim: usize, cond: f64 },
    /// Symmetrized log-sum-exp over `terms` random directions.
    LogSumExp { dim: usize, terms: usize },
    /// Separable quartic in the given dimension.
    SeparableConvexQuartic { dim: usize },
}

/// Builds a synthetic instance deterministically from `seed`.
pub fn make_synthetic(kind: SyntheticKind, seed: u64) -> Box<dyn Objective> {
    match kind {
        SyntheticKind::Quadratic { dim, cond } => {
            Box::new(QuadraticObjective::seeded(dim, cond, seed))
        }
        SyntheticKind::LogSumExp { dim, terms } => {
            Box::new(LogSumExpObjective::seeded(dim, terms, seed))
        }
        SyntheticKind::SeparableConvexQuartic { dim } => {
            Box::new(SeparableQuarticObjective::new(dim))
        }
    }
}

/// `f(x) = x'Ax/2 - b'x` with SPD `A`.
pub struct QuadraticObjective {
    a: DMatrix<f64>,
    b: DVector<f64>,
    xstar: DVector<f64>,
    fstar: f64,
    lambda_min: f64,
    lambda_max: f64,
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    m.qr().q()
}

impl QuadraticObjective {
    /// Seeded instance: eigenvalues log-spaced in `[1, cond]`, minimizer
    /// sampled from a unit Gaussian, `b = A x*`.
    pub fn seeded(dim: usize, cond: f64, seed: u64) -> Self {
        assert!(dim >= 1);
        assert!(cond >= 1.0, "condition number must be >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(dim, &mut rng);
        let eigs: Vec<f64> = (0..dim)
            .map(|i| {
                if dim == 1 {
                    1.0
                } else {
                    let t = i as f64 / (dim - 1) as f64;
                    cond.powf(t)
                }
            })
            .collect();
        let lam = DMatrix::from_diagonal(&DVector::from_vec(eigs));
        let a = &q * lam * q.transpose();
        // Force exact symmetry (QR roundoff otherwise leaves ~1e-16 skew).
        let a = 0.5 * (&a + a.transpose());
        let xstar = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let b = &a * &xstar;
        Self::from_parts(a, b, xstar)
    }

    /// Builds from an explicit SPD matrix and right-hand side `b = A x*`.
    pub fn from_matrix(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let chol = a.clone().cholesky().expect("quadratic matrix must be SPD");
        let xstar = chol.solve(&b);
        Self::from_parts(a, b, xstar)
    }

    fn from_parts(a: DMatrix<f64>, b: DVector<f64>, xstar: DVector<f64>) -> Self {
        let eig = a.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lambda_min > 0.0, "quadratic matrix must be positive definite");
        let fstar = 0.5 * (&a * &xstar).dot(&xstar) - b.dot(&xstar);
        QuadraticObjective { a, b, xstar, fstar, lambda_min, lambda_max }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn minimizer(&self) -> &DVector<f64> {
        &self.xstar
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * (&self.a * x).dot(x) - self.b.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let ax = &self.a * x;
        let f = 0.5 * ax.dot(x) - self.b.dot(x);
        (f, ax - &self.b)
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }

    fn hvp(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.a * v
    }

    fn curvature<'a>(&'a self, _x: &DVector<f64>) -> Box<dyn CurvatureOp + 'a> {
        Box::new(MatrixCurvature(self.a.clone()))
    }

    fn meta(&self) -> Option<TestFunctionMeta> {
        Some(TestFunctionMeta {
            lipschitz_grad: Some(self.lambda_max),
            lipschitz_hess: Some(0.0),
            strong_convexity: Some(self.lambda_min),
            minimizer: Some(self.xstar.clone()),
            min_value: Some(self.fstar),
        })
    }
}

/// `f(x) = ln sum_i (e^{a_i'x} + e^{-a_i'x})`, minimized at the origin.
pub struct LogSumExpObjective {
    /// `terms x dim`; the effective direction set is the rows and their
    /// negations.
    a: DMatrix<f64>,
    sigma_max: f64,
}

impl LogSumExpObjective {
    pub fn seeded(dim: usize, terms: usize, seed: u64) -> Self {
        assert!(dim >= 1 && terms >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(terms, dim, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g / (dim as f64).sqrt()
        });
        let svd = a.clone().svd(false, false);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        LogSumExpObjective { a, sigma_max }
    }

    /// Exponent arguments for the 2*terms signed directions, and their max.
    fn exponents(&self, x: &DVector<f64>) -> (Vec<f64>, f64) {
        let ax = &self.a * x;
        let mut e = Vec::with_capacity(2 * ax.len());
        for v in ax.iter() {
            e.push(*v);
            e.push(-*v);
        }
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (e, m)
    }

    /// Softmax probabilities over the signed directions.
    fn probabilities(&self, x: &DVector<f64>) -> Vec<f64> {
        let (e, m) = self.exponents(x);
        let mut p: Vec<f64> = e.iter().map(|v| (v - m).exp()).collect();
        let z: f64 = p.iter().sum();
        for v in &mut p {
            *v /= z;
        }
        p
    }
}

impl Objective for LogSumExpObjective {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let (e, m) = self.exponents(x);
        let z: f64 = e.iter().map(|v| (v - m).exp()).sum();
        m + z.ln()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let p = self.probabilities(x);
        let mut g = DVector::zeros(self.dim());
        for (i, row) in self.a.row_iter().enumerate() {
            let w = p[2 * i] - p[2 * i + 1];
            g += w * row.transpose();
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let p = self.probabilities(x);
        let d = self.dim();
        let g = self.gradient(x);
        let mut h = DMatrix::zeros(d, d);
        for (i, row) in self.a.row_iter().enumerate() {
            let r = row.transpose();
            let w = p[2 * i] + p[2 * i + 1];
            h += w * &r * r.transpose();
        }
        h -= &g * g.transpose();
        h
    }

    fn meta(&self) -> Option<TestFunctionMeta> {
        Some(TestFunctionMeta {
            // diag(p) - pp' <= I on the probability simplex, so sigma_max^2
            // is a valid (conservative) gradient-Lipschitz bound.
            lipschitz_grad: Some(self.sigma_max * self.sigma_max),
            // Conservative third-derivative bound for soft-max compositions.
            lipschitz_hess: Some(2.0 * self.sigma_max.powi(3)),
            strong_convexity: Some(0.0),
            minimizer: Some(DVector::zeros(self.dim())),
            min_value: Some((2.0 * self.a.nrows() as f64).ln()),
        })
    }
}

/// `f(x) = sum_i x_i^4 / 12`: convex, with `f''(x) = diag(x_i^2)` whose
/// Lipschitz constant on the box `|x_i| <= R` is `2R`.
pub struct SeparableQuarticObjective {
    dim: usize,
}

impl SeparableQuarticObjective {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        SeparableQuarticObjective { dim }
    }

    /// Hessian-Lipschitz constant valid on the box `|x_i| <= r`.
    pub fn lipschitz_hess_in_box(r: f64) -> f64 {
        2.0 * r
    }

    /// Gradient-Lipschitz constant valid on the box `|x_i| <= r`.
    pub fn lipschitz_grad_in_box(r: f64) -> f64 {
        r * r
    }
}

impl Objective for SeparableQuarticObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::second_order()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        x.iter().map(|v| v.powi(4)).sum::<f64>() / 12.0
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| v.powi(3) / 3.0)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&x.map(|v| v * v))
    }

    fn hvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        x.zip_map(v, |xi, vi| xi * xi * vi)
    }

    fn meta(&self) -> Option<TestFunctionMeta> {
        Some(TestFunctionMeta {
            lipschitz_grad: None, // box-local; see lipschitz_grad_in_box
            lipschitz_hess: None, // box-local; see lipschitz_hess_in_box
            strong_convexity: Some(0.0),
            minimizer: Some(DVector::zeros(self.dim)),
            min_value: Some(0.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::test_util::{central_diff_gradient, central_diff_hessian};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_known_values() {
        // A = diag(1, 10), b = (1, 10): x* = (1, 1), f* = -5.5.
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 10.0]));
        let b = DVector::from_vec(vec![1.0, 10.0]);
        let q = QuadraticObjective::from_matrix(a, b);
        let meta = q.meta().unwrap();
        assert_relative_eq!(meta.minimizer.as_ref().unwrap()[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(meta.minimizer.as_ref().unwrap()[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(meta.min_value.unwrap(), -5.5, epsilon = 1e-12);
        assert_eq!(meta.lipschitz_grad.unwrap(), 10.0);
        assert_eq!(meta.strong_convexity.unwrap(), 1.0);
        assert_relative_eq!(q.value(q.minimizer()), -5.5, epsilon = 1e-12);
        assert!(q.gradient(q.minimizer()).norm() < 1e-12);
    }

    #[test]
    fn seeded_quadratic_has_requested_spectrum() {
        let q = QuadraticObjective::seeded(8, 100.0, 42);
        let meta = q.meta().unwrap();
        assert_relative_eq!(meta.strong_convexity.unwrap(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(meta.lipschitz_grad.unwrap(), 100.0, max_relative = 1e-10);
        // Gradient vanishes at the stored minimizer.
        assert!(q.gradient(q.minimizer()).norm() < 1e-10);
        // Determinism: the same seed rebuilds the same instance.
        let q2 = QuadraticObjective::seeded(8, 100.0, 42);
        assert_eq!(q.matrix(), q2.matrix());
    }

    #[test]
    fn log_sum_exp_minimized_at_origin() {
        let o = LogSumExpObjective::seeded(5, 9, 3);
        let zero = DVector::zeros(5);
        assert!(o.gradient(&zero).norm() < 1e-14);
        assert_relative_eq!(o.value(&zero), (18.0_f64).ln(), epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let x = DVector::from_fn(5, |_, _| rng.gen_range(-2.0..2.0_f64));
            assert!(o.value(&x) >= o.value(&zero) - 1e-12);
        }
    }

    #[test]
    fn log_sum_exp_derivatives_match_differences() {
        let o = LogSumExpObjective::seeded(4, 6, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let x = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0_f64));
            let g = o.gradient(&x);
            let g_fd = central_diff_gradient(&o, &x, 1e-6);
            assert_relative_eq!(g, g_fd, epsilon = 1e-8, max_relative = 1e-6);
            let h = o.hessian(&x);
            let h_fd = central_diff_hessian(&o, &x, 1e-5);
            assert_relative_eq!(h, h_fd, epsilon = 1e-7, max_relative = 1e-5);
        }
    }

    #[test]
    fn log_sum_exp_value_stable_far_out() {
        let o = LogSumExpObjective::seeded(3, 4, 1);
        let x = DVector::from_vec(vec![500.0, -400.0, 300.0]);
        assert!(o.value(&x).is_finite());
        assert!(o.gradient(&x).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn quartic_derivatives() {
        let o = SeparableQuarticObjective::new(3);
        let x = DVector::from_vec(vec![2.0, -1.0, 0.5]);
        assert_relative_eq!(o.value(&x), (16.0 + 1.0 + 0.0625) / 12.0, epsilon = 1e-15);
        let g = o.gradient(&x);
        assert_relative_eq!(g[0], 8.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(g[1], -1.0 / 3.0, epsilon = 1e-15);
        let h = o.hessian(&x);
        assert_eq!(h[(0, 0)], 4.0);
        assert_eq!(h[(1, 1)], 1.0);
        assert_eq!(h[(2, 2)], 0.25);
        let g_fd = central_diff_gradient(&o, &x, 1e-6);
        assert_relative_eq!(g, g_fd, epsilon = 1e-9, max_relative = 1e-8);
    }

    #[test]
    fn quartic_hessian_lipschitz_on_box() {
        // |H(x) - H(y)| = max_i |x_i^2 - y_i^2| <= 2R * |x - y| on the box:
        // spot-check the constant with pairs on the box boundary.
        let r = 3.0;
        let l = SeparableQuarticObjective::lipschitz_hess_in_box(r);
        let o = SeparableQuarticObjective::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let x = DVector::from_fn(2, |_, _| rng.gen_range(-r..r));
            let y = DVector::from_fn(2, |_, _| rng.gen_range(-r..r));
            // Frobenius norm of a d-dim diagonal difference is at most
            // sqrt(d) times the spectral norm, hence the sqrt(2) slack.
            let dh = (o.hessian(&x) - o.hessian(&y)).norm();
            let bound = l * (&x - &y).norm() * (2.0_f64).sqrt();
            assert!(dh <= bound + 1e-12, "dh={dh} bound={bound}");
        }
    }
}
