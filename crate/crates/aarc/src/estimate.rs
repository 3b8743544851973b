//! The auxiliary estimate function driving the accelerated phase.
//!
//! The state represents
//!
//! ```text
//! psi(z) = a + b'z + reg(|z - anchor|)
//! ```
//!
//! with `reg(r) = (varsigma/6) r^3` for the cubic degree and
//! `(varsigma/4) r^2` for the quadratic degree. Affine lower bounds of the
//! objective are accumulated into `(a, b)` with scheduled weights; the
//! regularizer weight `varsigma` only ever grows (the escalation loop).
//! Storing the affine part as a single `(a, b)` pair keeps every operation
//! exact and O(d).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Regularizer degree of the estimate function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Degree {
    /// `(varsigma/6) |z - anchor|^3` — pairs with the cubic-regularized
    /// Newton solvers; success weights `l(l+1)/2`, total `l(l+1)(l+2)/6`.
    Cubic,
    /// `(varsigma/4) |z - anchor|^2` — pairs with the adaptive gradient
    /// solver; success weights `l`, total `l(l+1)/2`.
    Quadratic,
}

/// The estimate function state. Value semantics: operations mutate in
/// place; clone to branch.
#[derive(Debug, Clone)]
pub struct EstimateState {
    degree: Degree,
    anchor: DVector<f64>,
    /// Accumulated affine constant.
    a: f64,
    /// Accumulated affine gradient.
    b: DVector<f64>,
    /// Regularizer weight; non-decreasing over a run.
    varsigma: f64,
    /// Success count: 1 after construction, +1 per accumulated bound.
    l: u64,
    /// Sum of accumulated weights including the constructor's implicit 1.
    weight_sum: f64,
    /// How many times the regularizer weight was raised.
    raise_count: u64,
}

impl EstimateState {
    /// Initial state: `psi_1(z) = f_anchor + reg(|z - anchor|)`.
    pub fn init(degree: Degree, anchor: DVector<f64>, f_anchor: f64, varsigma1: f64) -> Self {
        assert!(varsigma1 > 0.0, "initial regularizer weight must be positive");
        let d = anchor.len();
        EstimateState {
            degree,
            anchor,
            a: f_anchor,
            b: DVector::zeros(d),
            varsigma: varsigma1,
            l: 1,
            weight_sum: 1.0,
            raise_count: 0,
        }
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    pub fn varsigma(&self) -> f64 {
        self.varsigma
    }

    /// Success count (1 after construction).
    pub fn l(&self) -> u64 {
        self.l
    }

    /// Sum of accumulated weights, including the constructor's 1.
    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    /// Times the regularizer weight has been raised.
    pub fn raise_count(&self) -> u64 {
        self.raise_count
    }

    /// The scheduled weight for the NEXT accumulation at the current count:
    /// with `l` the post-increment success count, `l(l+1)/2` (cubic) or `l`
    /// (quadratic).
    pub fn next_weight(&self) -> f64 {
        let l_next = (self.l + 1) as f64;
        match self.degree {
            Degree::Cubic => l_next * (l_next + 1.0) / 2.0,
            Degree::Quadratic => l_next,
        }
    }

    /// Total scheduled weight at the current count: `l(l+1)(l+2)/6` (cubic)
    /// or `l(l+1)/2` (quadratic). Equals `weight_sum` when the caller has
    /// always used [`EstimateState::next_weight`].
    pub fn scheduled_weight_sum(&self) -> f64 {
        let l = self.l as f64;
        match self.degree {
            Degree::Cubic => l * (l + 1.0) * (l + 2.0) / 6.0,
            Degree::Quadratic => l * (l + 1.0) / 2.0,
        }
    }

    /// Accumulates `weight * (f_point + (z - point)'grad_point)` into the
    /// affine part and bumps the success count.
    pub fn add_linear(
        &mut self,
        weight: f64,
        point: &DVector<f64>,
        f_point: f64,
        grad_point: &DVector<f64>,
    ) {
        assert!(weight > 0.0, "weight must be positive");
        assert_eq!(point.len(), self.anchor.len(), "point dimension mismatch");
        assert_eq!(grad_point.len(), self.anchor.len(), "gradient dimension mismatch");
        self.a += weight * (f_point - point.dot(grad_point));
        self.b += weight * grad_point;
        self.weight_sum += weight;
        self.l += 1;
    }

    /// Replaces the regularizer weight with a larger one. The affine part
    /// is untouched: adding `((new - old)/6)|z - anchor|^3` to the old
    /// estimate is exactly this replacement.
    pub fn raise_varsigma(&mut self, new_varsigma: f64) {
        assert!(
            new_varsigma >= self.varsigma,
            "regularizer weight must not decrease ({} -> {})",
            self.varsigma,
            new_varsigma
        );
        if new_varsigma > self.varsigma {
            self.raise_count += 1;
        }
        self.varsigma = new_varsigma;
    }

    /// Evaluates the estimate at `z`.
    pub fn eval(&self, z: &DVector<f64>) -> f64 {
        assert_eq!(z.len(), self.anchor.len(), "dimension mismatch");
        let r = (z - &self.anchor).norm();
        self.a + self.b.dot(z) + self.regularizer(r)
    }

    fn regularizer(&self, r: f64) -> f64 {
        match self.degree {
            Degree::Cubic => self.varsigma / 6.0 * r.powi(3),
            Degree::Quadratic => self.varsigma / 4.0 * r * r,
        }
    }

    /// Closed-form global minimizer and its value.
    ///
    /// Cubic: `z = anchor - sqrt(2|b|/varsigma) b/|b|` (the anchor when
    /// `b = 0`). Quadratic: `z = anchor - (2/varsigma) b`.
    pub fn minimize(&self) -> (DVector<f64>, f64) {
        let bn = self.b.norm();
        let z = match self.degree {
            Degree::Cubic => {
                if bn == 0.0 {
                    self.anchor.clone()
                } else {
                    let t = (2.0 * bn / self.varsigma).sqrt();
                    &self.anchor - t / bn * &self.b
                }
            }
            Degree::Quadratic => &self.anchor - (2.0 / self.varsigma) * &self.b,
        };
        let v = self.eval(&z);
        (z, v)
    }
}
