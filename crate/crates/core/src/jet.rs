//! Second-order forward-mode jets in up to [`MAX_VARS`] variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_VARS: usize = 3;

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub n: usize,
    pub v: f64,
    pub g: [f64; MAX_VARS],
    pub h: [[f64; MAX_VARS]; MAX_VARS],
}

impl Jet {
    pub fn constant(n: usize, v: f64) -> Self {
        assert!(n <= MAX_VARS, "jets support at most {MAX_VARS} variables");
        Jet {
            n,
            v,
            g: [0.0; MAX_VARS],
            h: [[0.0; MAX_VARS]; MAX_VARS],
        }
    }

    /// The coordinate function `x_i` at `x`.
    pub fn variable(n: usize, i: usize, x: f64) -> Self {
        let mut j = Jet::constant(n, x);
        j.g[i] = 1.0;
        j
    }

    /// The linear function `<c, x>`.
    pub fn linear(c: &[f64], x: &[f64]) -> Self {
        let mut j = Jet::constant(c.len(), c.iter().zip(x).map(|(a, b)| a * b).sum());
        j.g[..c.len()].copy_from_slice(c);
        j
    }

    pub fn gradient(&self) -> Vec<f64> {
        self.g[..self.n].to_vec()
    }

    pub fn hessian(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, k| self.h[i][k])
    }

    /// Composes a scalar function given its value and first two derivatives
    /// at `self.v`.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(self.n, f0);
        for i in 0..self.n {
            out.g[i] = f1 * self.g[i];
            for k in 0..self.n {
                out.h[i][k] = f2 * self.g[i] * self.g[k] + f1 * self.h[i][k];
            }
        }
        out
    }

    pub fn scale(self, s: f64) -> Self {
        self.chain(s * self.v, s, 0.0)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }

    pub fn powi(self, k: i32) -> Self {
        match k {
            0 => Jet::constant(self.n, 1.0),
            1 => self,
            _ => {
                let x = self.v;
                let f0 = x.powi(k);
                let f1 = k as f64 * x.powi(k - 1);
                let f2 = (k * (k - 1)) as f64 * x.powi(k - 2);
                self.chain(f0, f1, f2)
            }
        }
    }

    pub fn powf(self, e: f64) -> Self {
        let x = self.v;
        self.chain(x.powf(e), e * x.powf(e - 1.0), e * (e - 1.0) * x.powf(e - 2.0))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for i in 0..self.n {
            self.g[i] += o.g[i];
            for k in 0..self.n {
                self.h[i][k] += o.h[i][k];
            }
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.v = -self.v;
        for i in 0..self.n {
            self.g[i] = -self.g[i];
            for k in 0..self.n {
                self.h[i][k] = -self.h[i][k];
            }
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.n, self.v * o.v);
        for i in 0..self.n {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for k in 0..self.n {
                out.h[i][k] = self.v * o.h[i][k]
                    + o.v * self.h[i][k]
                    + self.g[i] * o.g[k]
                    + o.g[i] * self.g[k];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = o.chain(1.0 / o.v, -1.0 / (o.v * o.v), 2.0 / (o.v * o.v * o.v));
        self * inv
    }
}
