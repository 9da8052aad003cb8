//! Rank-one reduction to quadratures.
//!
//! For rank one every root satisfies `alpha(grad u) / alpha(r) = u'/r`, so
//! `M_g(u) = u'' (u'/r)^d F(r)` with `d` the total multiplicity and `F` the
//! metric factor. Multiplying by `r^d / F` gives
//! `(u'^{d+1})' = (d+1) f r^d / F`, integrated from `u'(0) = 0`.

use std::sync::Arc;

use crate::catalog::{RestrictedRoot, SymmetricSpace};
use crate::jet::Jet;
use crate::radialops::{MetricProfile, RadialFunction};

use super::SolverError;

/// Absolute tolerance of the adaptive Simpson quadratures.
pub const QUAD_TOL: f64 = 1e-10;
const TABLE_CELLS: usize = 256;
const CELL_TOL: f64 = QUAD_TOL / TABLE_CELLS as f64;
const MAX_DEPTH: u32 = 40;

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// Quadrature solution of the rank-one reduced equation on `[0, R]`.
pub struct Rank1Solution<'a> {
    f: Arc<dyn RadialFunction + 'a>,
    profile: MetricProfile,
    roots: Vec<RestrictedRoot>,
    /// Sign of the chamber direction in chamber coordinates.
    orient: f64,
    d: f64,
    radius: f64,
    boundary_value: f64,
    curvature0: f64,
    cell: f64,
    /// `int_0^{r_k} f s^d / F ds` on the uniform mesh.
    slope_table: Vec<f64>,
    /// `int_0^{r_k} u' ds` on the same mesh.
    primitive_table: Vec<f64>,
}

impl<'a> Rank1Solution<'a> {
    fn factor(&self, r: f64) -> f64 {
        self.roots
            .iter()
            .map(|a| self.profile.wall_term(a.eval(&[self.orient * r])).powi(a.d_alpha as i32))
            .product()
    }

    fn density(&self, r: f64) -> f64 {
        self.f.value(&[self.orient * r]) / self.factor(r)
    }

    fn integrand(&self, s: f64) -> f64 {
        self.density(s) * s.powf(self.d)
    }

    fn cell_of(&self, r: f64) -> (usize, f64) {
        let k = ((r / self.cell).floor() as usize).min(TABLE_CELLS - 1);
        (k, k as f64 * self.cell)
    }

    fn slope_integral(&self, r: f64) -> f64 {
        let (k, a) = self.cell_of(r);
        self.slope_table[k] + adaptive_simpson(&|s| self.integrand(s), a, r, CELL_TOL)
    }

    fn primitive(&self, r: f64) -> f64 {
        let (k, a) = self.cell_of(r);
        self.primitive_table[k] + adaptive_simpson(&|s| self.slope(s), a, r, CELL_TOL)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `u'(|r|)`.
    pub fn slope(&self, r: f64) -> f64 {
        let v = (self.d + 1.0) * self.slope_integral(r.abs()).max(0.0);
        v.powf(1.0 / (self.d + 1.0))
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let r = r.abs().min(self.radius);
        self.boundary_value - (self.primitive_table[TABLE_CELLS] - self.primitive(r))
    }

    /// `u''` read off the equation.
    pub fn curvature(&self, r: f64) -> f64 {
        let r = r.abs();
        if r < 1e-6 * self.radius {
            return self.curvature0;
        }
        let v = self.slope(r);
        self.density(r) * (r / v).powf(self.d)
    }
}

impl RadialFunction for Rank1Solution<'_> {
    fn rank(&self) -> usize {
        1
    }

    fn jet(&self, r: &[f64]) -> Jet {
        let x = r[0];
        let mut j = Jet::constant(1, self.value_at(x));
        j.g[0] = self.slope(x) * x.signum();
        j.h[0][0] = self.curvature(x);
        j
    }

    fn value(&self, r: &[f64]) -> f64 {
        self.value_at(r[0])
    }

    fn label(&self) -> String {
        format!("rank-one quadrature solution on [0, {}]", self.radius)
    }
}

/// Solves `M_g(u) = f` on `[0, R]` with `u'(0) = 0` and `u(R) =
/// boundary_value`.
pub fn solve_rank1_ode<'a>(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    f: Arc<dyn RadialFunction + 'a>,
    radius: f64,
    boundary_value: f64,
) -> Result<Rank1Solution<'a>, SolverError> {
    if space.rank() != 1 {
        return Err(SolverError::Rank(space.rank()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(SolverError::Config(format!("radius must be positive, got {radius}")));
    }
    let orient = space.roots()[0].alpha[0].signum();
    let samples = 4 * TABLE_CELLS;
    for k in 0..=samples {
        let r = orient * radius * k as f64 / samples as f64;
        let v = f.value(&[r]);
        if !(v > 0.0 && v.is_finite()) {
            return Err(SolverError::NonPositiveDensity { at: vec![r], value: v });
        }
    }
    let mut sol = Rank1Solution {
        f,
        profile: profile.clone(),
        roots: space.roots().to_vec(),
        orient,
        d: space.angular_dim() as f64,
        radius,
        boundary_value,
        curvature0: 0.0,
        cell: radius / TABLE_CELLS as f64,
        slope_table: vec![0.0; TABLE_CELLS + 1],
        primitive_table: vec![0.0; TABLE_CELLS + 1],
    };
    sol.curvature0 = sol.density(0.0).powf(1.0 / (sol.d + 1.0));
    for k in 0..TABLE_CELLS {
        let a = k as f64 * sol.cell;
        let piece = adaptive_simpson(&|s| sol.integrand(s), a, a + sol.cell, CELL_TOL);
        sol.slope_table[k + 1] = sol.slope_table[k] + piece;
    }
    for k in 0..TABLE_CELLS {
        let a = k as f64 * sol.cell;
        let piece = adaptive_simpson(&|s| sol.slope(s), a, a + sol.cell, CELL_TOL);
        sol.primitive_table[k + 1] = sol.primitive_table[k] + piece;
    }
    Ok(sol)
}
