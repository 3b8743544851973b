//! Objective oracles: the [`Objective`] trait, dense datasets, evaluation
//! helpers, and call counting.
//!
//! Every solver in this crate consumes a `&dyn Objective`. Implementations
//! must be deterministic: repeated evaluation at the same point returns
//! bit-identical results (the bundled oracles reduce over samples in a fixed
//! chunk order, see [`crate::parallel`]).

mod logistic;
mod synthetic;

pub use logistic::{make_logistic, LogisticObjective};
pub use synthetic::{
    make_synthetic, LogSumExpObjective, QuadraticObjective, SeparableQuarticObjective,
    SyntheticKind,
};

use nalgebra::{DMatrix, DVector};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;

/// A dense binary-classification dataset: `n` rows of `d` features plus
/// labels in `{-1.0, +1.0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from row-major features. Panics if the buffer length
    /// is not `n * d` or a label is not exactly `-1.0` or `+1.0`.
    pub fn new(features: Vec<f64>, labels: Vec<f64>, n: usize, d: usize) -> Self {
        assert_eq!(features.len(), n * d, "feature buffer must be n*d");
        assert_eq!(labels.len(), n, "one label per row");
        assert!(
            labels.iter().all(|&b| b == 1.0 || b == -1.0),
            "labels must be -1/+1"
        );
        Dataset { features, labels, n, d }
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// The `i`-th feature row.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub(crate) fn features_mut(&mut self) -> &mut Vec<f64> {
        &mut self.features
    }
}

/// What an oracle can compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub value: bool,
    pub gradient: bool,
    pub hessian: bool,
    pub hessian_vector_product: bool,
}

impl Capabilities {
    pub fn second_order() -> Self {
        Capabilities { value: true, gradient: true, hessian: true, hessian_vector_product: true }
    }

    pub fn first_order() -> Self {
        Capabilities { value: true, gradient: true, hessian: false, hessian_vector_product: false }
    }
}

/// Known constants of a test instance, for instrumented tests and rate
/// envelopes. All fields are global unless the doc on the producing oracle
/// says otherwise (the separable quartic reports box-local constants).
#[derive(Debug, Clone, Default)]
pub struct TestFunctionMeta {
    /// Lipschitz constant of the gradient (an upper bound is acceptable).
    pub lipschitz_grad: Option<f64>,
    /// Lipschitz constant of the Hessian (an upper bound is acceptable).
    pub lipschitz_hess: Option<f64>,
    /// Strong-convexity modulus.
    pub strong_convexity: Option<f64>,
    /// A global minimizer.
    pub minimizer: Option<DVector<f64>>,
    /// The minimum value.
    pub min_value: Option<f64>,
}

/// Result of [`evaluate`].
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Option<DVector<f64>>,
    pub hessian: Option<DMatrix<f64>>,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle does not support derivative order {requested}")]
    UnsupportedOrder { requested: u8 },
    #[error("point has dimension {got}, oracle expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// The Hessian of an objective at a fixed point, exposed as an operator.
///
/// Solvers that only need Hessian-vector products (the Lanczos subproblem
/// solver) use [`apply`](CurvatureOp::apply); the dense subproblem solver
/// calls [`materialize`](CurvatureOp::materialize) once.
pub trait CurvatureOp {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
    fn materialize(&self) -> DMatrix<f64>;
}

/// An explicit symmetric matrix used as a curvature operator.
pub struct MatrixCurvature(pub DMatrix<f64>);

impl CurvatureOp for MatrixCurvature {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    fn materialize(&self) -> DMatrix<f64> {
        self.0.clone()
    }
}

/// A smooth objective `R^d -> R`.
///
/// Implementations panic on dimension mismatch (callers are expected to pass
/// points of the declared dimension; silently truncating would corrupt a
/// solve). Capability violations (asking for a Hessian from a first-order
/// oracle) also panic; use [`evaluate`] for a checked entry point.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn capabilities(&self) -> Capabilities {
        Capabilities::second_order()
    }

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Value and gradient in one pass. Implementations that share work
    /// between the two should override this.
    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.value(x), self.gradient(x))
    }

    /// Dense Hessian at `x`. Panics for first-order oracles.
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Hessian-vector product at `x`.
    fn hvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.hessian(x) * v
    }

    /// The Hessian at `x` as a reusable operator. Oracles with structure
    /// (logistic regression) precompute per-sample weights here so repeated
    /// products are cheap.
    fn curvature<'a>(&'a self, x: &DVector<f64>) -> Box<dyn CurvatureOp + 'a> {
        Box::new(MatrixCurvature(self.hessian(x)))
    }

    /// Known constants, when this is a synthetic instance.
    fn meta(&self) -> Option<TestFunctionMeta> {
        None
    }
}

/// Checked evaluation up to derivative `order` (0 = value, 1 = +gradient,
/// 2 = +Hessian).
pub fn evaluate(obj: &dyn Objective, x: &DVector<f64>, order: u8) -> Result<Evaluation, OracleError> {
    if x.len() != obj.dim() {
        return Err(OracleError::DimensionMismatch { got: x.len(), expected: obj.dim() });
    }
    let caps = obj.capabilities();
    match order {
        0 => Ok(Evaluation { value: obj.value(x), gradient: None, hessian: None }),
        1 => {
            if !caps.gradient {
                return Err(OracleError::UnsupportedOrder { requested: 1 });
            }
            let (value, gradient) = obj.value_grad(x);
            Ok(Evaluation { value, gradient: Some(gradient), hessian: None })
        }
        2 => {
            if !caps.hessian {
                return Err(OracleError::UnsupportedOrder { requested: 2 });
            }
            let (value, gradient) = obj.value_grad(x);
            Ok(Evaluation { value, gradient: Some(gradient), hessian: Some(obj.hessian(x)) })
        }
        o => Err(OracleError::UnsupportedOrder { requested: o }),
    }
}

/// Cumulative oracle-call counters, shared between a [`CountingObjective`]
/// and the trace records of a run.
#[derive(Debug, Default)]
pub struct OracleCounters {
    pub values: AtomicU64,
    pub gradients: AtomicU64,
    pub hvps: AtomicU64,
    /// Gradient probes made on behalf of a finite-difference Hessian build;
    /// kept separate from `gradients` so derivative-free runs can be audited.
    pub fd_gradients: AtomicU64,
    /// Dense Hessian materializations (not part of the trace schema; used to
    /// assert that derivative-free solvers never touch the analytic Hessian).
    pub hessians: AtomicU64,
}

/// A point-in-time copy of [`OracleCounters`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct CounterSnapshot {
    pub values: u64,
    pub gradients: u64,
    pub hvps: u64,
    pub fd_gradients: u64,
}

impl OracleCounters {
    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            values: self.values.load(Ordering::Relaxed),
            gradients: self.gradients.load(Ordering::Relaxed),
            hvps: self.hvps.load(Ordering::Relaxed),
            fd_gradients: self.fd_gradients.load(Ordering::Relaxed),
        }
    }

    pub fn hessian_count(&self) -> u64 {
        self.hessians.load(Ordering::Relaxed)
    }

    pub fn count_fd_gradient(&self) {
        self.fd_gradients.fetch_add(1, Ordering::Relaxed);
    }
}

/// Wraps an oracle and counts calls. `value_grad` counts one value and one
/// gradient; curvature products count as Hessian-vector products.
pub struct CountingObjective<'a> {
    inner: &'a dyn Objective,
    counters: Arc<OracleCounters>,
}

impl<'a> CountingObjective<'a> {
    pub fn new(inner: &'a dyn Objective) -> Self {
        CountingObjective { inner, counters: Arc::new(OracleCounters::default()) }
    }

    pub fn counters(&self) -> Arc<OracleCounters> {
        Arc::clone(&self.counters)
    }
}

struct CountingCurvature<'a> {
    inner: Box<dyn CurvatureOp + 'a>,
    counters: Arc<OracleCounters>,
}

impl CurvatureOp for CountingCurvature<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.counters.hvps.fetch_add(1, Ordering::Relaxed);
        self.inner.apply(v)
    }

    fn materialize(&self) -> DMatrix<f64> {
        self.counters.hessians.fetch_add(1, Ordering::Relaxed);
        self.inner.materialize()
    }
}

impl Objective for CountingObjective<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.counters.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.counters.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }

    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        self.counters.values.fetch_add(1, Ordering::Relaxed);
        self.counters.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.value_grad(x)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.counters.hessians.fetch_add(1, Ordering::Relaxed);
        self.inner.hessian(x)
    }

    fn hvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.counters.hvps.fetch_add(1, Ordering::Relaxed);
        self.inner.hvp(x, v)
    }

    fn curvature<'b>(&'b self, x: &DVector<f64>) -> Box<dyn CurvatureOp + 'b> {
        Box::new(CountingCurvature {
            inner: self.inner.curvature(x),
            counters: Arc::clone(&self.counters),
        })
    }

    fn meta(&self) -> Option<TestFunctionMeta> {
        self.inner.meta()
    }
}

/// Hides second-order capabilities of an oracle. Derivative-free solvers wrap
/// their input in this adapter so any accidental Hessian access fails loudly.
pub struct GradientOnly<'a>(pub &'a dyn Objective);

impl Objective for GradientOnly<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::first_order()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.0.value(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.gradient(x)
    }

    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        self.0.value_grad(x)
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        panic!("Hessian requested through a gradient-only adapter");
    }

    fn hvp(&self, _x: &DVector<f64>, _v: &DVector<f64>) -> DVector<f64> {
        panic!("Hessian-vector product requested through a gradient-only adapter");
    }

    fn curvature<'b>(&'b self, _x: &DVector<f64>) -> Box<dyn CurvatureOp + 'b> {
        panic!("curvature operator requested through a gradient-only adapter");
    }

    fn meta(&self) -> Option<TestFunctionMeta> {
        self.0.meta()
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    /// Central-difference gradient with step `h`, for derivative checks.
    pub fn central_diff_gradient(obj: &dyn Objective, x: &DVector<f64>, h: f64) -> DVector<f64> {
        let d = obj.dim();
        let mut g = DVector::zeros(d);
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            g[j] = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
        }
        g
    }

    /// Central-difference Hessian from gradients with step `h`.
    pub fn central_diff_hessian(obj: &dyn Objective, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
        let d = obj.dim();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = (obj.gradient(&xp) - obj.gradient(&xm)) / (2.0 * h);
            m.set_column(j, &col);
        }
        // Symmetrize: the analytic Hessian is symmetric, the numerical one is
        // symmetric up to truncation error.
        0.5 * (&m + m.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Paraboloid;

    impl Objective for Paraboloid {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, x: &DVector<f64>) -> f64 {
            0.5 * x.norm_squared()
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            x.clone()
        }
        fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(2, 2)
        }
    }

    #[test]
    fn evaluate_orders() {
        let obj = Paraboloid;
        let x = DVector::from_vec(vec![3.0, 4.0]);
        let e0 = evaluate(&obj, &x, 0).unwrap();
        assert_eq!(e0.value, 12.5);
        assert!(e0.gradient.is_none());
        let e2 = evaluate(&obj, &x, 2).unwrap();
        assert_eq!(e2.gradient.unwrap(), x);
        assert_eq!(e2.hessian.unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let obj = Paraboloid;
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        match evaluate(&obj, &x, 0) {
            Err(OracleError::DimensionMismatch { got: 3, expected: 2 }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn evaluate_rejects_unsupported_order() {
        let obj = Paraboloid;
        let wrapped = GradientOnly(&obj);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(
            evaluate(&wrapped, &x, 2),
            Err(OracleError::UnsupportedOrder { requested: 2 })
        ));
        assert!(evaluate(&wrapped, &x, 1).is_ok());
    }

    #[test]
    fn counting_objective_tracks_calls() {
        let obj = Paraboloid;
        let counting = CountingObjective::new(&obj);
        let x = DVector::from_vec(vec![1.0, 1.0]);
        counting.value(&x);
        counting.value_grad(&x);
        counting.hvp(&x, &x);
        let op = counting.curvature(&x);
        op.apply(&x);
        assert_eq!(counting.counters().hessian_count(), 0);
        op.materialize();
        let snap = counting.counters().snapshot();
        assert_eq!(snap.values, 2);
        assert_eq!(snap.gradients, 1);
        assert_eq!(snap.hvps, 2);
        assert_eq!(snap.fd_gradients, 0);
        assert_eq!(counting.counters().hessian_count(), 1);
    }

    #[test]
    #[should_panic(expected = "gradient-only adapter")]
    fn gradient_only_blocks_hessian() {
        let obj = Paraboloid;
        let wrapped = GradientOnly(&obj);
        let _ = wrapped.hessian(&DVector::zeros(2));
    }
}
