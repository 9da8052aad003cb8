//! Smooth Weyl-invariant least-squares fits of grid data.
//!
//! The basis is products of Chebyshev polynomials in normalized invariants:
//! `x = 2 |r|^2 / R^2 - 1` and, for rank two, `y = p3(r) / max_{|r|=R} |p3|`
//! with `p3` the cubic power sum of the spectral weights. The fit is smooth
//! across walls and the origin, which grid interpolants are not.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::catalog::SymmetricSpace;
use crate::expr::Scalar;
use crate::jet::Jet;
use crate::radialops::{InvariantGenerators, RadialFunction};

use super::SolverError;

#[derive(Debug, Clone)]
pub struct InvariantFit {
    rank: usize,
    radius: f64,
    gens: InvariantGenerators,
    cubic_scale: f64,
    /// Chebyshev degrees in `(x, y)` per basis function.
    terms: Vec<(usize, usize)>,
    coeffs: Vec<f64>,
    rms_residual: f64,
}

fn chebyshev<T: Scalar>(x: T, n: usize) -> Vec<T> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(x.lift(1.0));
    if n >= 1 {
        t.push(x);
    }
    for k in 1..n {
        let next = x.lift(2.0) * x * t[k] - t[k - 1];
        t.push(next);
    }
    t
}

impl InvariantFit {
    /// Fits `values` at chamber points `points` inside the ball of radius
    /// `radius` with basis functions of total degree `<= degree` in `r`.
    pub fn fit(
        space: &SymmetricSpace,
        points: &[Vec<f64>],
        values: &[f64],
        radius: f64,
        degree: usize,
    ) -> Result<Self, SolverError> {
        let rank = space.rank();
        if rank > 2 {
            return Err(SolverError::Rank(rank));
        }
        let gens = InvariantGenerators::new(space);
        let cubic_scale = if rank == 2 {
            (0..720)
                .map(|k| {
                    let t = PI * k as f64 / 360.0;
                    let r = [radius * t.cos(), radius * t.sin()];
                    gens.evaluate(&r, 3).p[3].abs()
                })
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        let mut terms = Vec::new();
        for a in 0..=degree / 2 {
            if rank == 1 || cubic_scale < 1e-12 {
                terms.push((a, 0));
                continue;
            }
            for b in 0..=(degree - 2 * a) / 3 {
                terms.push((a, b));
            }
        }
        if points.len() < 2 * terms.len() {
            return Err(SolverError::Config(format!(
                "{} samples are too few for a fit with {} terms",
                points.len(),
                terms.len()
            )));
        }
        let mut fit = InvariantFit {
            rank,
            radius,
            gens,
            cubic_scale,
            terms,
            coeffs: Vec::new(),
            rms_residual: 0.0,
        };
        let k = fit.terms.len();
        let a = DMatrix::from_fn(points.len(), k, |i, j| fit.basis(&points[i])[j]);
        let b = DVector::from_column_slice(values);
        let svd = a.clone().svd(true, true);
        let c = svd
            .solve(&b, 1e-14)
            .map_err(|e| SolverError::Config(format!("least-squares fit failed: {e}")))?;
        let resid = &a * &c - &b;
        fit.rms_residual = (resid.norm_squared() / points.len() as f64).sqrt();
        fit.coeffs = c.iter().copied().collect();
        Ok(fit)
    }

    pub fn rms_residual(&self) -> f64 {
        self.rms_residual
    }

    pub fn terms(&self) -> usize {
        self.terms.len()
    }

    fn basis<T: Scalar>(&self, r: &[T]) -> Vec<T> {
        let mut r2 = r[0].lift(0.0);
        for v in r {
            r2 = r2 + *v * *v;
        }
        let x = r2 * r[0].lift(2.0 / (self.radius * self.radius)) - r[0].lift(1.0);
        let amax = self.terms.iter().map(|t| t.0).max().unwrap_or(0);
        let bmax = self.terms.iter().map(|t| t.1).max().unwrap_or(0);
        let tx = chebyshev(x, amax);
        let ty = if bmax > 0 {
            let p3 = self.gens.evaluate(r, 3).p[3];
            chebyshev(p3 * r[0].lift(1.0 / self.cubic_scale), bmax)
        } else {
            vec![r[0].lift(1.0)]
        };
        self.terms.iter().map(|&(a, b)| tx[a] * ty[b]).collect()
    }

    fn eval<T: Scalar>(&self, r: &[T]) -> T {
        let mut acc = r[0].lift(0.0);
        for (c, phi) in self.coeffs.iter().zip(self.basis(r)) {
            acc = acc + phi * r[0].lift(*c);
        }
        acc
    }
}

impl RadialFunction for InvariantFit {
    fn rank(&self) -> usize {
        self.rank
    }

    fn jet(&self, r: &[f64]) -> Jet {
        let n = r.len();
        let x: Vec<Jet> = (0..n).map(|i| Jet::variable(n, i, r[i])).collect();
        self.eval(&x)
    }

    fn value(&self, r: &[f64]) -> f64 {
        self.eval(r)
    }

    fn label(&self) -> String {
        format!("invariant fit ({} terms)", self.terms.len())
    }
}
