//! L2-regularized logistic regression over a dense dataset:
//!
//! ```text
//! f(x) = (1/n) * sum_i ln(1 + exp(-b_i * a_i' x)) + (lambda/2) * |x|^2
//! ```
//!
//! The log-loss is evaluated through the numerically stable branch
//! `ln(1 + e^t) = max(t, 0) + ln(1 + e^{-|t|})`, so saturated samples neither
//! overflow nor lose the tail. Value, gradient, and curvature share one pass
//! over the samples per call; reductions are chunk-ordered and deterministic.

use super::{Capabilities, CurvatureOp, Dataset, Objective, TestFunctionMeta};
use crate::parallel::map_chunks;
use nalgebra::{DMatrix, DVector};
use std::sync::{Arc, OnceLock};

/// See the module docs for the objective definition.
pub struct LogisticObjective {
    data: Arc<Dataset>,
    lambda: f64,
    lipschitz_grad: OnceLock<f64>,
}

/// Builds the regularized logistic objective for `data`. `lambda` must be
/// nonnegative; `lambda > 0` makes the problem strongly convex.
pub fn make_logistic(data: Arc<Dataset>, lambda: f64) -> LogisticObjective {
    assert!(lambda >= 0.0, "lambda must be nonnegative");
    assert!(data.n_samples() > 0, "dataset is empty");
    LogisticObjective { data, lambda, lipschitz_grad: OnceLock::new() }
}

/// `ln(1 + e^{-t})` without overflow for large |t|.
#[inline]
fn log1p_exp_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// `sigma(-t) = 1 / (1 + e^t)` without overflow.
#[inline]
fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

impl LogisticObjective {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    /// Per-sample margins `t_i = b_i * a_i' x`.
    fn margins(&self, x: &DVector<f64>) -> Vec<f64> {
        let d = self.data.dim();
        assert_eq!(x.len(), d, "point dimension must match the dataset");
        let xs = x.as_slice();
        let partials = map_chunks(self.data.n_samples(), |r| {
            let mut out = Vec::with_capacity(r.len());
            for i in r {
                let row = self.data.row(i);
                let mut dot = 0.0;
                for (a, xv) in row.iter().zip(xs) {
                    dot += a * xv;
                }
                out.push(self.data.labels()[i] * dot);
            }
            out
        });
        let mut t = Vec::with_capacity(self.data.n_samples());
        for p in partials {
            t.extend_from_slice(&p);
        }
        t
    }

    /// Exact Lipschitz constant of the gradient:
    /// `lambda_max((1/(4n)) A'A) + lambda`. Computed once, then cached.
    pub fn lipschitz_grad_exact(&self) -> f64 {
        *self.lipschitz_grad.get_or_init(|| {
            let d = self.data.dim();
            let n = self.data.n_samples();
            let mut gram = DMatrix::zeros(d, d);
            for i in 0..n {
                let row = self.data.row(i);
                for p in 0..d {
                    for q in 0..d {
                        gram[(p, q)] += row[p] * row[q];
                    }
                }
            }
            gram /= 4.0 * n as f64;
            let eig = gram.symmetric_eigen();
            let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
            lmax + self.lambda
        })
    }
}

impl Objective for LogisticObjective {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::second_order()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let t = self.margins(x);
        let partials = map_chunks(t.len(), |r| t[r].iter().map(|&ti| log1p_exp_neg(ti)).sum::<f64>());
        let loss: f64 = partials.iter().sum();
        loss / self.data.n_samples() as f64 + 0.5 * self.lambda * x.norm_squared()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.value_grad(x).1
    }

    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let d = self.data.dim();
        let n = self.data.n_samples();
        let t = self.margins(x);
        let partials = map_chunks(n, |r| {
            let mut loss = 0.0;
            let mut g = vec![0.0; d];
            for i in r {
                let ti = t[i];
                loss += log1p_exp_neg(ti);
                // d/dx ln(1+exp(-b a'x)) = -b * sigma(-t) * a
                let w = -self.data.labels()[i] * sigmoid_neg(ti);
                let row = self.data.row(i);
                for (gj, aj) in g.iter_mut().zip(row) {
                    *gj += w * aj;
                }
            }
            (loss, g)
        });
        let inv_n = 1.0 / n as f64;
        let mut loss = 0.0;
        let mut g = DVector::zeros(d);
        for (pl, pg) in partials {
            loss += pl;
            for (gj, pj) in g.iter_mut().zip(&pg) {
                *gj += pj;
            }
        }
        loss *= inv_n;
        g *= inv_n;
        let f = loss + 0.5 * self.lambda * x.norm_squared();
        g += self.lambda * x;
        (f, g)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.curvature(x).materialize()
    }

    fn hvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.curvature(x).apply(v)
    }

    fn curvature<'a>(&'a self, x: &DVector<f64>) -> Box<dyn CurvatureOp + 'a> {
        let t = self.margins(x);
        // sigma(t)(1-sigma(t)) = sigma(t) * sigma(-t); symmetric in the sign
        // of t, so the label factor b_i^2 = 1 drops out of the Hessian.
        let weights: Vec<f64> =
            t.iter().map(|&ti| sigmoid_neg(ti) * sigmoid_neg(-ti)).collect();
        Box::new(LogisticCurvature { obj: self, weights })
    }

    fn meta(&self) -> Option<TestFunctionMeta> {
        Some(TestFunctionMeta {
            lipschitz_grad: Some(self.lipschitz_grad_exact()),
            lipschitz_hess: None,
            strong_convexity: Some(self.lambda),
            minimizer: None,
            min_value: None,
        })
    }
}

struct LogisticCurvature<'a> {
    obj: &'a LogisticObjective,
    /// `sigma_i (1 - sigma_i)` per sample, at the point of construction.
    weights: Vec<f64>,
}

impl CurvatureOp for LogisticCurvature<'_> {
    fn dim(&self) -> usize {
        self.obj.data.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let data = &self.obj.data;
        let d = data.dim();
        let n = data.n_samples();
        assert_eq!(v.len(), d);
        let vs = v.as_slice();
        let partials = map_chunks(n, |r| {
            let mut out = vec![0.0; d];
            for i in r {
                let row = data.row(i);
                let mut dot = 0.0;
                for (a, vv) in row.iter().zip(vs) {
                    dot += a * vv;
                }
                let w = self.weights[i] * dot;
                for (oj, aj) in out.iter_mut().zip(row) {
                    *oj += w * aj;
                }
            }
            out
        });
        let mut hv = DVector::zeros(d);
        for p in partials {
            for (hj, pj) in hv.iter_mut().zip(&p) {
                *hj += pj;
            }
        }
        hv /= n as f64;
        hv += self.obj.lambda * v;
        hv
    }

    fn materialize(&self) -> DMatrix<f64> {
        let data = &self.obj.data;
        let d = data.dim();
        let n = data.n_samples();
        let partials = map_chunks(n, |r| {
            let mut m = DMatrix::<f64>::zeros(d, d);
            for i in r {
                let row = data.row(i);
                let w = self.weights[i];
                for p in 0..d {
                    let wp = w * row[p];
                    for q in 0..d {
                        m[(p, q)] += wp * row[q];
                    }
                }
            }
            m
        });
        let mut h = DMatrix::<f64>::zeros(d, d);
        for p in partials {
            h += p;
        }
        h /= n as f64;
        for i in 0..d {
            h[(i, i)] += self.obj.lambda;
        }
        h
    }
}
