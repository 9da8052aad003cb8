//! Weyl-invariant functions on `a` with exact second-order jets.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::catalog::SymmetricSpace;
use crate::expr::{Expr, ExprError, Var, VarSet};
use crate::jet::Jet;

/// A Weyl-invariant function on `a` with value, gradient and Hessian in
/// Killing-orthonormal chamber coordinates.
pub trait RadialFunction: Send + Sync {
    fn rank(&self) -> usize;

    fn jet(&self, r: &[f64]) -> Jet;

    fn value(&self, r: &[f64]) -> f64 {
        self.jet(r).v
    }

    fn label(&self) -> String {
        "radial function".into()
    }
}

impl<T: RadialFunction + ?Sized> RadialFunction for Arc<T> {
    fn rank(&self) -> usize {
        (**self).rank()
    }
    fn jet(&self, r: &[f64]) -> Jet {
        (**self).jet(r)
    }
    fn value(&self, r: &[f64]) -> f64 {
        (**self).value(r)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// Power sums and elementary symmetric functions of the spectral weights.
#[derive(Debug, Clone)]
pub struct InvariantGenerators {
    weights: DMatrix<f64>,
}

impl InvariantGenerators {
    pub fn new(space: &SymmetricSpace) -> Self {
        InvariantGenerators {
            weights: space.spectral_weights().clone(),
        }
    }

    pub fn rank(&self) -> usize {
        self.weights.ncols()
    }

    fn weight_values<T: crate::expr::Scalar>(&self, r: &[T]) -> Vec<T> {
        let zero = r[0].lift(0.0);
        (0..self.weights.nrows())
            .map(|j| {
                let mut acc = zero;
                for (i, ri) in r.iter().enumerate() {
                    acc = acc + ri.lift(self.weights[(j, i)]) * *ri;
                }
                acc
            })
            .collect()
    }

    /// Values of `r2`, `p1..=pk_max`, `e1..=ek_max` at the point `r`, given
    /// as jets or plain numbers.
    pub fn evaluate<T: crate::expr::Scalar>(&self, r: &[T], k_max: usize) -> GeneratorValues<T> {
        let lam = self.weight_values(r);
        let one = r[0].lift(1.0);
        let mut r2 = r[0].lift(0.0);
        for x in r {
            r2 = r2 + *x * *x;
        }
        let mut p = vec![r[0].lift(0.0); k_max + 1];
        p[0] = one.lift(lam.len() as f64);
        for x in &lam {
            let mut pw = one;
            for pk in p.iter_mut().skip(1) {
                pw = pw * *x;
                *pk = *pk + pw;
            }
        }
        let mut e = vec![r[0].lift(0.0); k_max + 1];
        e[0] = one;
        for x in &lam {
            for k in (1..=k_max).rev() {
                e[k] = e[k] + e[k - 1] * *x;
            }
        }
        GeneratorValues { r2, p, e }
    }
}

pub struct GeneratorValues<T> {
    pub r2: T,
    pub p: Vec<T>,
    pub e: Vec<T>,
}

impl<T: Copy> GeneratorValues<T> {
    fn lookup(&self, v: Var) -> T {
        match v {
            Var::R2 => self.r2,
            Var::Power(k) => self.p[k as usize],
            Var::Elem(k) => self.e[k as usize],
            Var::Z => unreachable!("profile variable in a radial expression"),
        }
    }
}

/// A radial function given by an expression in the invariant generators.
#[derive(Debug, Clone)]
pub struct ExprFunction {
    expr: Expr,
    gens: InvariantGenerators,
    k_max: usize,
}

impl ExprFunction {
    pub fn new(space: &SymmetricSpace, expr: Expr) -> Self {
        let k_max = expr
            .variables()
            .iter()
            .map(|v| match v {
                Var::Elem(k) | Var::Power(k) => *k as usize,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        ExprFunction {
            expr,
            gens: InvariantGenerators::new(space),
            k_max,
        }
    }

    pub fn parse(space: &SymmetricSpace, src: &str) -> Result<Self, ExprError> {
        Ok(Self::new(space, Expr::parse(src, VarSet::Radial)?))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl RadialFunction for ExprFunction {
    fn rank(&self) -> usize {
        self.gens.rank()
    }

    fn jet(&self, r: &[f64]) -> Jet {
        let n = r.len();
        let x: Vec<Jet> = (0..n).map(|i| Jet::variable(n, i, r[i])).collect();
        let g = self.gens.evaluate(&x, self.k_max);
        self.expr.eval(Jet::constant(n, 0.0), &|v| g.lookup(v))
    }

    fn value(&self, r: &[f64]) -> f64 {
        let g = self.gens.evaluate(r, self.k_max);
        self.expr.eval_f64(&|v| g.lookup(v))
    }

    fn label(&self) -> String {
        self.expr.source().to_string()
    }
}

/// `scale/2 * |r|^2`.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    pub rank: usize,
    pub scale: f64,
}

impl RadialFunction for Quadratic {
    fn rank(&self) -> usize {
        self.rank
    }

    fn jet(&self, r: &[f64]) -> Jet {
        let mut j = Jet::constant(r.len(), 0.5 * self.scale * r.iter().map(|x| x * x).sum::<f64>());
        for i in 0..r.len() {
            j.g[i] = self.scale * r[i];
            j.h[i][i] = self.scale;
        }
        j
    }

    fn label(&self) -> String {
        format!("{}/2 |r|^2", self.scale)
    }
}

/// A radial function from a closure returning jets. Invariance is the
/// caller's responsibility.
pub struct JetFn<F> {
    rank: usize,
    f: F,
    label: String,
}

impl<F: Fn(&[f64]) -> Jet + Send + Sync> JetFn<F> {
    pub fn new(rank: usize, label: &str, f: F) -> Self {
        JetFn {
            rank,
            f,
            label: label.to_string(),
        }
    }
}

impl<F: Fn(&[f64]) -> Jet + Send + Sync> RadialFunction for JetFn<F> {
    fn rank(&self) -> usize {
        self.rank
    }
    fn jet(&self, r: &[f64]) -> Jet {
        (self.f)(r)
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `f(r) * c + d`, used for rescaling densities.
pub struct Affine<U> {
    pub inner: U,
    pub scale: f64,
    pub shift: f64,
}

impl<U: RadialFunction> RadialFunction for Affine<U> {
    fn rank(&self) -> usize {
        self.inner.rank()
    }
    fn jet(&self, r: &[f64]) -> Jet {
        let j = self.inner.jet(r).scale(self.scale);
        j + Jet::constant(r.len(), self.shift)
    }
    fn value(&self, r: &[f64]) -> f64 {
        self.inner.value(r) * self.scale + self.shift
    }
    fn label(&self) -> String {
        format!("{} * ({}) + {}", self.scale, self.inner.label(), self.shift)
    }
}

/// `exp(h)` of a radial function.
pub struct ExpOf<U>(pub U);

impl<U: RadialFunction> RadialFunction for ExpOf<U> {
    fn rank(&self) -> usize {
        self.0.rank()
    }
    fn jet(&self, r: &[f64]) -> Jet {
        self.0.jet(r).exp()
    }
    fn value(&self, r: &[f64]) -> f64 {
        self.0.value(r).exp()
    }
    fn label(&self) -> String {
        format!("exp({})", self.0.label())
    }
}
