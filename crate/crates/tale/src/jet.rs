//! Forward-mode differentiation scalars.
//!
//! Metric evaluators are written once over a generic [`Real`] scalar and then
//! run with plain `f64` for values, [`Jet`] for exact first derivatives, or
//! [`Jet2`] for exact first and second derivatives. Every chart built from
//! rational operations and square roots therefore carries derivatives that are
//! exact to machine precision.
//!
//! Jets hold their derivatives in fixed-size arrays (dimension at most
//! [`MAX_DIM`]); they are `Copy` and allocation-free, which keeps the geodesic
//! and transport inner loops cheap.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest chart dimension supported by the jet types.
pub const MAX_DIM: usize = 6;

/// Scalar type that supports the operations used by metric evaluators.
pub trait Real:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Sized
{
    /// A constant with the same derivative shape as `self`.
    fn constant_like(&self, x: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn scale(&self, c: f64) -> Self;

    fn powi(&self, n: i32) -> Self {
        debug_assert!(n >= 1);
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc * self.clone();
        }
        acc
    }

    fn recip(&self) -> Self {
        self.constant_like(1.0) / self.clone()
    }
}

impl Real for f64 {
    fn constant_like(&self, x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
}

/// First-order jet: value and gradient.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub v: f64,
    dim: usize,
    g: [f64; MAX_DIM],
}

impl Jet {
    pub fn variable(x: f64, index: usize, dim: usize) -> Self {
        assert!(dim <= MAX_DIM && index < dim);
        let mut g = [0.0; MAX_DIM];
        g[index] = 1.0;
        Jet { v: x, dim, g }
    }

    pub fn constant(x: f64, dim: usize) -> Self {
        Jet { v: x, dim, g: [0.0; MAX_DIM] }
    }

    pub fn from_parts(v: f64, grad: &[f64]) -> Self {
        let mut g = [0.0; MAX_DIM];
        g[..grad.len()].copy_from_slice(grad);
        Jet { v, dim: grad.len(), g }
    }

    /// Seed one jet per coordinate of `p`.
    pub fn seed(p: &[f64]) -> Vec<Jet> {
        (0..p.len()).map(|i| Jet::variable(p[i], i, p.len())).collect()
    }

    #[inline]
    pub fn g(&self, a: usize) -> f64 {
        self.g[a]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for a in 0..self.dim {
            self.g[a] += o.g[a];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, o: Jet) -> Jet {
        self.v -= o.v;
        for a in 0..self.dim {
            self.g[a] -= o.g[a];
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let mut out = self;
        out.v = self.v * o.v;
        for a in 0..self.dim {
            out.g[a] = self.g[a] * o.v + o.g[a] * self.v;
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, o: Jet) -> Jet {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut out = self;
        out.v = v;
        for a in 0..self.dim {
            out.g[a] = (self.g[a] - o.g[a] * v) * inv;
        }
        out
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(mut self) -> Jet {
        self.v = -self.v;
        for a in 0..self.dim {
            self.g[a] = -self.g[a];
        }
        self
    }
}

impl Real for Jet {
    fn constant_like(&self, x: f64) -> Self {
        Jet::constant(x, self.dim)
    }
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        let w = 0.5 / s;
        let mut out = *self;
        out.v = s;
        for a in 0..self.dim {
            out.g[a] *= w;
        }
        out
    }
    #[inline]
    fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.v *= c;
        for a in 0..self.dim {
            out.g[a] *= c;
        }
        out
    }
}

/// Second-order jet: value, gradient and Hessian.
#[derive(Clone, Copy, Debug)]
pub struct Jet2 {
    pub v: f64,
    dim: usize,
    g: [f64; MAX_DIM],
    h: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet2 {
    pub fn variable(x: f64, index: usize, dim: usize) -> Self {
        assert!(dim <= MAX_DIM && index < dim);
        let mut g = [0.0; MAX_DIM];
        g[index] = 1.0;
        Jet2 { v: x, dim, g, h: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn constant(x: f64, dim: usize) -> Self {
        Jet2 { v: x, dim, g: [0.0; MAX_DIM], h: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn from_parts(v: f64, grad: &[f64], hess: &[f64]) -> Self {
        let dim = grad.len();
        let mut g = [0.0; MAX_DIM];
        g[..dim].copy_from_slice(grad);
        let mut h = [[0.0; MAX_DIM]; MAX_DIM];
        for a in 0..dim {
            for b in 0..dim {
                h[a][b] = hess[a * dim + b];
            }
        }
        Jet2 { v, dim, g, h }
    }

    pub fn seed(p: &[f64]) -> Vec<Jet2> {
        (0..p.len()).map(|i| Jet2::variable(p[i], i, p.len())).collect()
    }

    #[inline]
    pub fn g(&self, a: usize) -> f64 {
        self.g[a]
    }

    #[inline]
    pub fn h(&self, a: usize, b: usize) -> f64 {
        self.h[a][b]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn recip_jet(&self) -> Jet2 {
        let inv = 1.0 / self.v;
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        let mut out = *self;
        out.v = inv;
        for a in 0..self.dim {
            out.g[a] = -self.g[a] * inv2;
        }
        for a in 0..self.dim {
            for b in 0..self.dim {
                out.h[a][b] = -self.h[a][b] * inv2 + 2.0 * self.g[a] * self.g[b] * inv3;
            }
        }
        out
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(mut self, o: Jet2) -> Jet2 {
        self.v += o.v;
        for a in 0..self.dim {
            self.g[a] += o.g[a];
            for b in 0..self.dim {
                self.h[a][b] += o.h[a][b];
            }
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(mut self, o: Jet2) -> Jet2 {
        self.v -= o.v;
        for a in 0..self.dim {
            self.g[a] -= o.g[a];
            for b in 0..self.dim {
                self.h[a][b] -= o.h[a][b];
            }
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = self;
        out.v = self.v * o.v;
        for a in 0..self.dim {
            out.g[a] = self.g[a] * o.v + o.g[a] * self.v;
        }
        for a in 0..self.dim {
            for b in 0..self.dim {
                out.h[a][b] = self.h[a][b] * o.v
                    + o.h[a][b] * self.v
                    + self.g[a] * o.g[b]
                    + o.g[a] * self.g[b];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip_jet()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(mut self) -> Jet2 {
        self.v = -self.v;
        for a in 0..self.dim {
            self.g[a] = -self.g[a];
            for b in 0..self.dim {
                self.h[a][b] = -self.h[a][b];
            }
        }
        self
    }
}

impl Real for Jet2 {
    fn constant_like(&self, x: f64) -> Self {
        Jet2::constant(x, self.dim)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        let w = 0.5 / s;
        let w2 = 0.25 / (s * s * s);
        let mut out = *self;
        out.v = s;
        for a in 0..self.dim {
            out.g[a] = self.g[a] * w;
        }
        for a in 0..self.dim {
            for b in 0..self.dim {
                out.h[a][b] = self.h[a][b] * w - self.g[a] * self.g[b] * w2;
            }
        }
        out
    }
    fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.v *= c;
        for a in 0..self.dim {
            out.g[a] *= c;
            for b in 0..self.dim {
                out.h[a][b] *= c;
            }
        }
        out
    }
    fn recip(&self) -> Self {
        self.recip_jet()
    }
}
