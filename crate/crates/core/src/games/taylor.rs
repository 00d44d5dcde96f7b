//! Degree-truncated Taylor (forward-mode) arithmetic.
//!
//! Cost families evaluate generically over [`Scalar`], so the same code
//! path produces plain values (`f64`), values with exact gradients
//! ([`Dual1`]), and values with exact gradients and Hessians ([`Dual2`]).
//! Derivatives propagate by the chain rule through every operation,
//! including the softmax family; nothing is ever differenced numerically
//! on the production path.

use crate::linalg::Mat;

/// Arithmetic needed to evaluate a game cost. Implementors carry the
/// derivative order in their representation.
pub trait Scalar: Clone {
    /// A constant with the same derivative shape as `self` (all
    /// derivatives zero).
    fn const_like(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplication by a plain constant.
    fn scale(&self, c: f64) -> Self;
    fn exp(&self) -> Self;
    fn recip(&self) -> Self;

    /// Nonnegative integer power by repeated multiplication; exponents
    /// here never exceed the polynomial degree cap.
    fn powi(&self, e: u32) -> Self {
        let mut acc = self.const_like(1.0);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Scalar for f64 {
    fn const_like(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
}

/// First-order jet: value plus full gradient of length `m`.
#[derive(Clone, Debug)]
pub struct Dual1 {
    pub val: f64,
    pub grad: Vec<f64>,
}

impl Dual1 {
    /// Seeds the `i`-th of `m` variables.
    pub fn variable(val: f64, i: usize, m: usize) -> Self {
        let mut grad = vec![0.0; m];
        grad[i] = 1.0;
        Self { val, grad }
    }

    pub fn seed_point(x: &[f64]) -> Vec<Self> {
        let m = x.len();
        x.iter().enumerate().map(|(i, &v)| Self::variable(v, i, m)).collect()
    }
}

impl Scalar for Dual1 {
    fn const_like(&self, c: f64) -> Self {
        Self { val: c, grad: vec![0.0; self.grad.len()] }
    }

    fn value(&self) -> f64 {
        self.val
    }

    fn add(&self, rhs: &Self) -> Self {
        Self {
            val: self.val + rhs.val,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Self {
            val: self.val - rhs.val,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        // (fg)' = f'g + fg'
        Self {
            val: self.val * rhs.val,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a * rhs.val + self.val * b)
                .collect(),
        }
    }

    fn neg(&self) -> Self {
        Self { val: -self.val, grad: self.grad.iter().map(|a| -a).collect() }
    }

    fn scale(&self, c: f64) -> Self {
        Self { val: self.val * c, grad: self.grad.iter().map(|a| a * c).collect() }
    }

    fn exp(&self) -> Self {
        let e = self.val.exp();
        Self { val: e, grad: self.grad.iter().map(|a| a * e).collect() }
    }

    fn recip(&self) -> Self {
        // (1/f)' = -f'/f^2
        let inv = 1.0 / self.val;
        let neg_inv_sq = -inv * inv;
        Self { val: inv, grad: self.grad.iter().map(|a| a * neg_inv_sq).collect() }
    }
}

/// Second-order jet: value, gradient, and Hessian. The Hessian is kept
/// exactly symmetric by computing the upper triangle and mirroring.
#[derive(Clone, Debug)]
pub struct Dual2 {
    pub val: f64,
    pub grad: Vec<f64>,
    pub hess: Mat,
}

impl Dual2 {
    pub fn variable(val: f64, i: usize, m: usize) -> Self {
        let mut grad = vec![0.0; m];
        grad[i] = 1.0;
        Self { val, grad, hess: Mat::zeros(m, m) }
    }

    pub fn seed_point(x: &[f64]) -> Vec<Self> {
        let m = x.len();
        x.iter().enumerate().map(|(i, &v)| Self::variable(v, i, m)).collect()
    }

    fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Builds a symmetric Hessian from a closure giving the (i, j)
    /// entry for i <= j.
    fn hess_sym(m: usize, entry: impl Fn(usize, usize) -> f64) -> Mat {
        let mut h = Mat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = entry(i, j);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }
}

impl Scalar for Dual2 {
    fn const_like(&self, c: f64) -> Self {
        let m = self.dim();
        Self { val: c, grad: vec![0.0; m], hess: Mat::zeros(m, m) }
    }

    fn value(&self) -> f64 {
        self.val
    }

    fn add(&self, rhs: &Self) -> Self {
        Self {
            val: self.val + rhs.val,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.add(&rhs.hess),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Self {
            val: self.val - rhs.val,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.add(&rhs.hess.scale(-1.0)),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        // (fg)'' = f''g + f'⊗g' + g'⊗f' + fg''
        let m = self.dim();
        let hess = Self::hess_sym(m, |i, j| {
            self.hess[(i, j)] * rhs.val
                + self.grad[i] * rhs.grad[j]
                + self.grad[j] * rhs.grad[i]
                + self.val * rhs.hess[(i, j)]
        });
        Self {
            val: self.val * rhs.val,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a * rhs.val + self.val * b)
                .collect(),
            hess,
        }
    }

    fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            val: self.val * c,
            grad: self.grad.iter().map(|a| a * c).collect(),
            hess: self.hess.scale(c),
        }
    }

    fn exp(&self) -> Self {
        // exp(f)'' = exp(f) (f'' + f'⊗f')
        let e = self.val.exp();
        let m = self.dim();
        let hess = Self::hess_sym(m, |i, j| e * (self.hess[(i, j)] + self.grad[i] * self.grad[j]));
        Self { val: e, grad: self.grad.iter().map(|a| a * e).collect(), hess }
    }

    fn recip(&self) -> Self {
        // (1/f)' = -f'/f^2,  (1/f)'' = -f''/f^2 + 2 f'⊗f'/f^3
        let inv = 1.0 / self.val;
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        let m = self.dim();
        let hess = Self::hess_sym(m, |i, j| {
            -self.hess[(i, j)] * inv2 + 2.0 * self.grad[i] * self.grad[j] * inv3
        });
        Self { val: inv, grad: self.grad.iter().map(|a| -a * inv2).collect(), hess }
    }
}
