//! Brute-force Monge-Ampère oracle from geodesic second differences.
//!
//! The Riemannian Hessian at `x` is recovered from second derivatives of `u`
//! along geodesics `t -> x exp(t V)` for a Killing-orthonormal frame of `p`
//! and its pairwise sums and differences, then `M_g(u) = det Hess` in that
//! frame. Nothing here uses the radial formulas.

use nalgebra::DMatrix;

use crate::catalog::SymmetricSpace;
use crate::liealg::{matfun, AlgebraElement, CMat, C64};

use super::{MetricProfile, RadialError, RadialFunction};

/// Geodesic step used by the oracle. Smaller steps are round-off limited:
/// with one Richardson level the error is smallest near 5e-3.
pub const ORACLE_STEP: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Straight lines in `p` with the Killing inner product.
    Flat,
    /// Geodesics of the noncompact dual `G*/K`, through `p -> e^{ip} K`.
    Dual,
}

impl Geometry {
    pub fn for_profile(profile: &MetricProfile) -> Result<Self, RadialError> {
        match profile {
            MetricProfile::Flat => Ok(Geometry::Flat),
            MetricProfile::Hyperbolic => Ok(Geometry::Dual),
            MetricProfile::Custom(_) => Err(RadialError::UnsupportedOracle),
        }
    }
}

/// Chamber coordinates of every stencil point around one base point, so
/// that many functions can be differentiated without redoing the geometry.
#[derive(Debug, Clone)]
pub struct GeodesicStencil {
    dim: usize,
    step: f64,
    center: Vec<f64>,
    /// Per direction: coordinates at `t = -h, -h/2, h/2, h`.
    lines: Vec<[Vec<f64>; 4]>,
}

fn exp_i(m: &CMat, t: f64) -> CMat {
    matfun::expm(&(m * C64::new(0.0, t)))
}

impl GeodesicStencil {
    /// Stencil around the point `p = a_element(r)`.
    pub fn new(space: &SymmetricSpace, geometry: Geometry, r: &[f64], step: f64) -> Self {
        let base = space.a_element(r);
        Self::at(space, geometry, &base, step)
    }

    pub fn at(space: &SymmetricSpace, geometry: Geometry, base: &AlgebraElement, step: f64) -> Self {
        let frame = space.p_frame();
        let dim = frame.len();
        let mut dirs: Vec<CMat> = Vec::with_capacity(dim * dim);
        for k in 0..dim {
            dirs.push(frame[k].matrix.clone());
        }
        for k in 0..dim {
            for l in k + 1..dim {
                dirs.push(&frame[k].matrix + &frame[l].matrix);
                dirs.push(&frame[k].matrix - &frame[l].matrix);
            }
        }
        let e_base = exp_i(&base.matrix, 1.0);
        let coords = |v: &CMat, t: f64| -> Vec<f64> {
            match geometry {
                Geometry::Flat => {
                    let m = (&base.matrix + v * C64::new(t, 0.0)) * C64::new(0.0, 1.0);
                    space.radial_from_hermitian(&m)
                }
                Geometry::Dual => {
                    let x = &e_base * exp_i(v, t);
                    let pos = &x * x.adjoint();
                    space.radial_from_positive(&pos, 2.0)
                }
            }
        };
        let center = match geometry {
            Geometry::Flat => space.radial_from_hermitian(&(&base.matrix * C64::new(0.0, 1.0))),
            Geometry::Dual => space.radial_from_positive(&(&e_base * e_base.adjoint()), 2.0),
        };
        let lines = dirs
            .iter()
            .map(|v| {
                [
                    coords(v, -step),
                    coords(v, -0.5 * step),
                    coords(v, 0.5 * step),
                    coords(v, step),
                ]
            })
            .collect();
        GeodesicStencil {
            dim,
            step,
            center,
            lines,
        }
    }

    /// Chamber coordinates of the base point itself.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Riemannian Hessian of `u` in the orthonormal frame.
    pub fn hessian(&self, u: &dyn RadialFunction) -> DMatrix<f64> {
        let u0 = u.value(&self.center);
        let h = self.step;
        let second = |pts: &[Vec<f64>; 4]| {
            let v: Vec<f64> = pts.iter().map(|p| u.value(p)).collect();
            let coarse = (v[0] - 2.0 * u0 + v[3]) / (h * h);
            let fine = (v[1] - 2.0 * u0 + v[2]) / (0.25 * h * h);
            (4.0 * fine - coarse) / 3.0
        };
        let n = self.dim;
        let mut hess = DMatrix::zeros(n, n);
        for k in 0..n {
            hess[(k, k)] = second(&self.lines[k]);
        }
        let mut idx = n;
        for k in 0..n {
            for l in k + 1..n {
                let plus = second(&self.lines[idx]);
                let minus = second(&self.lines[idx + 1]);
                idx += 2;
                let v = 0.25 * (plus - minus);
                hess[(k, l)] = v;
                hess[(l, k)] = v;
            }
        }
        hess
    }

    /// `det Hess` in an orthonormal frame, i.e. `(det g)^{-1} det Ddu`.
    pub fn monge_ampere(&self, u: &dyn RadialFunction) -> f64 {
        self.hessian(u).determinant()
    }
}

/// One-shot oracle value of `M_g(u)` at the chamber point `r`.
pub fn oracle_ma(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    u: &dyn RadialFunction,
    r: &[f64],
) -> Result<f64, RadialError> {
    let g = Geometry::for_profile(profile)?;
    Ok(GeodesicStencil::new(space, g, r, ORACLE_STEP).monge_ampere(u))
}
