//! Finite-difference checks on the complexification `G^C / K^C`.
//!
//! Points are parametrized by the chart `(a + ib) -> e^{a+ib} e^{ip}` with
//! `a, b` in Killing-orthonormal frame coordinates of `p`. An invariant
//! function `w` is evaluated through `Phi(x) = x theta(x)^{-1}`, which is
//! constant on `K^C`-cosets. Left translation by `G` conjugates
//! `Phi^* Phi` by a unitary, and on the fiber `x = e^{ip}` its spectrum on
//! the spectral block is that of `e^{4ip}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::SymmetricSpace;
use crate::liealg::{matfun, CMat, GroupElement, GroupTag, LieError, C64};
use crate::radialops::{symmetric_ma, MetricProfile, RadialFunction};

/// Default chart step for Levy forms.
pub const CHART_STEP: f64 = 1e-3;
/// Inner step of the nested Ricci stencil. Both levels are limited by
/// roundoff of the inner second differences, so the steps are larger than
/// `CHART_STEP`.
pub const RICCI_STEP: f64 = 5e-3;
/// Ratio of outer to inner step in nested stencils.
pub const OUTER_FACTOR: f64 = 16.0;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("non-finite sample of w at chart offset {offset:?}")]
    NonFinite { offset: Vec<f64> },
    #[error("Levy form is not positive definite (w is not strictly plurisubharmonic at this point)")]
    NotPlurisubharmonic,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("step must be positive, got {0}")]
    BadStep(f64),
}

/// A `G`-invariant function on `G^C/K^C` determined by its radial profile.
#[derive(Clone)]
pub struct InvariantFunctionSpec<'a> {
    space: &'a SymmetricSpace,
    radial: Arc<dyn RadialFunction + 'a>,
}

impl<'a> InvariantFunctionSpec<'a> {
    pub fn new(space: &'a SymmetricSpace, radial: Arc<dyn RadialFunction + 'a>) -> Self {
        InvariantFunctionSpec { space, radial }
    }

    pub fn radial(&self) -> &dyn RadialFunction {
        &*self.radial
    }

    pub fn space(&self) -> &SymmetricSpace {
        self.space
    }

    /// Chamber coordinates of the fiber point through `x`.
    pub fn radial_coords(&self, x: &CMat) -> Result<Vec<f64>, ComplexError> {
        let theta = self.space.model().involution().on_group(x)?;
        let inv = theta.try_inverse().ok_or(LieError::Singular("theta(x)"))?;
        let phi = x * inv;
        let psi = phi.adjoint() * &phi;
        let r = self.space.radial_from_positive(&psi, 4.0);
        if r.iter().any(|v| !v.is_finite()) {
            return Err(ComplexError::NonFinite { offset: vec![] });
        }
        Ok(r)
    }

    pub fn eval(&self, x: &CMat) -> Result<f64, ComplexError> {
        let r = self.radial_coords(x)?;
        Ok(self.radial.value(&r))
    }

    /// Evaluation of a point of `G*` through its Cartan decomposition
    /// `x = k e^{iz}`.
    pub fn eval_dual(&self, x: &GroupElement) -> Result<f64, ComplexError> {
        let cd = self.space.model().cartan_decompose_star(x)?;
        Ok(self.radial.value(&self.space.radial_coords(&cd.z)))
    }
}

/// Step-halving study of the unextrapolated Levy form against the
/// extrapolated `(1/4) Hess_b` reference.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceStudy {
    /// Identity deviation at `CHART_STEP` with extrapolation.
    pub deviation: f64,
    pub steps: Vec<f64>,
    /// Max entry error of the plain Levy form at each step.
    pub errors: Vec<f64>,
    /// `log2` of successive error ratios.
    pub orders: Vec<f64>,
}

impl ConvergenceStudy {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn convergence_study(
    w: &InvariantFunctionSpec<'_>,
    p: &[f64],
    coarse: f64,
    levels: usize,
) -> Result<ConvergenceStudy, ComplexError> {
    let coords: Vec<usize> = (0..w.space.p_dim()).collect();
    convergence_study_on(w, p, &coords, coarse, levels)
}

/// [`convergence_study`] restricted to the chart coordinates `coords`.
pub fn convergence_study_on(
    w: &InvariantFunctionSpec<'_>,
    p: &[f64],
    coords: &[usize],
    coarse: f64,
    levels: usize,
) -> Result<ConvergenceStudy, ComplexError> {
    let reference = verify_key_identity_on(w, p, coords, Stencil::new(CHART_STEP))?;
    let target = reference.b_hessian.map(|v| 0.25 * v);
    let mut steps = Vec::with_capacity(levels);
    let mut errors = Vec::with_capacity(levels);
    let mut h = coarse;
    for _ in 0..levels {
        let l = levy_form_fd_on(w, p, coords, Stencil::plain(h))?;
        let err = l
            .matrix
            .iter()
            .zip(target.iter())
            .map(|(z, t)| (z - C64::new(*t, 0.0)).norm())
            .fold(0.0, f64::max);
        steps.push(h);
        errors.push(err);
        h *= 0.5;
    }
    let orders = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    Ok(ConvergenceStudy {
        deviation: reference.deviation,
        steps,
        errors,
        orders,
    })
}

/// `e^{a+ib} e^{ip}` for frame coordinates `a, b, p`.
pub fn chart_point(space: &SymmetricSpace, a: &[f64], b: &[f64], p: &[f64]) -> GroupElement {
    let ea = space.p_from_frame(a);
    let eb = space.p_from_frame(b);
    let ep = space.p_from_frame(p);
    let z = &ea.matrix + &eb.matrix * C64::new(0.0, 1.0);
    let m = matfun::expm(&z) * matfun::expm(&(&ep.matrix * C64::new(0.0, 1.0)));
    let tag = if a.iter().all(|v| *v == 0.0) {
        GroupTag::Dual
    } else {
        GroupTag::Complex
    };
    GroupElement { matrix: m, tag }
}

/// Hermitian matrix of `d^2 w / dz_k dzbar_l` in chart coordinates.
#[derive(Debug, Clone)]
pub struct LevyFormMatrix {
    pub matrix: DMatrix<C64>,
    /// Chart frame indices the rows refer to.
    pub coords: Vec<usize>,
}

impl LevyFormMatrix {
    pub fn hermitian_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        matfun::herm_eigenvalues(&self.matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Real determinant of the Hermitian matrix.
    pub fn determinant(&self) -> f64 {
        matfun::herm_eigenvalues(&self.matrix).into_iter().product()
    }
}

/// Finite-difference stencil: centered second differences at `step`,
/// optionally combined with `step / 2` by one Richardson level.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub step: f64,
    pub richardson: bool,
}

impl Stencil {
    pub fn new(step: f64) -> Self {
        Stencil {
            step,
            richardson: true,
        }
    }

    pub fn plain(step: f64) -> Self {
        Stencil {
            step,
            richardson: false,
        }
    }

    fn check(&self) -> Result<(), ComplexError> {
        if self.step > 0.0 && self.step.is_finite() {
            Ok(())
        } else {
            Err(ComplexError::BadStep(self.step))
        }
    }
}

/// Real Hessian of `f` at `x0` over the selected coordinates.
fn real_hessian<F>(f: &F, x0: &[f64], coords: &[usize], st: Stencil) -> Result<DMatrix<f64>, ComplexError>
where
    F: Fn(&[f64]) -> Result<f64, ComplexError> + Sync,
{
    let m = coords.len();
    let f0 = f(x0)?;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let at = |di: f64, dj: f64| -> Result<f64, ComplexError> {
                let mut x = x0.to_vec();
                x[coords[i]] += di;
                x[coords[j]] += dj;
                let v = f(&x)?;
                if !v.is_finite() {
                    return Err(ComplexError::NonFinite { offset: x });
                }
                Ok(v)
            };
            let second = |h: f64| -> Result<f64, ComplexError> {
                if i == j {
                    Ok((at(h, 0.0)? - 2.0 * f0 + at(-h, 0.0)?) / (h * h))
                } else {
                    Ok((at(h, h)? - at(h, -h)? - at(-h, h)? + at(-h, -h)?) / (4.0 * h * h))
                }
            };
            let coarse = second(st.step)?;
            if !st.richardson {
                return Ok(coarse);
            }
            let fine = second(0.5 * st.step)?;
            Ok((4.0 * fine - coarse) / 3.0)
        })
        .collect::<Result<_, ComplexError>>()?;
    let mut h = DMatrix::zeros(m, m);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        h[(i, j)] = v;
        h[(j, i)] = v;
    }
    Ok(h)
}

/// Levy form of a function of `2n` real chart coordinates `(a, b)` at `x0`,
/// restricted to the frame indices `coords`.
fn levy_of<F>(f: &F, n: usize, x0: &[f64], coords: &[usize], st: Stencil) -> Result<LevyFormMatrix, ComplexError>
where
    F: Fn(&[f64]) -> Result<f64, ComplexError> + Sync,
{
    st.check()?;
    let m = coords.len();
    let mut real: Vec<usize> = coords.to_vec();
    real.extend(coords.iter().map(|c| c + n));
    let h = real_hessian(f, x0, &real, st)?;
    let mut l = DMatrix::<C64>::zeros(m, m);
    for k in 0..m {
        for q in 0..m {
            let re = h[(k, q)] + h[(m + k, m + q)];
            let im = h[(k, m + q)] - h[(m + k, q)];
            l[(k, q)] = C64::new(0.25 * re, 0.25 * im);
        }
    }
    Ok(LevyFormMatrix {
        matrix: l,
        coords: coords.to_vec(),
    })
}

/// `w` as a function of chart coordinates `(a, b)` around base `p`.
fn chart_fn<'s>(
    w: &'s InvariantFunctionSpec<'s>,
    p: &'s [f64],
) -> impl Fn(&[f64]) -> Result<f64, ComplexError> + Sync + 's {
    let n = w.space.p_dim();
    let ep = {
        let el = w.space.p_from_frame(p);
        matfun::expm(&(&el.matrix * C64::new(0.0, 1.0)))
    };
    move |x: &[f64]| {
        let a = w.space.p_from_frame(&x[..n]);
        let b = w.space.p_from_frame(&x[n..]);
        let z = &a.matrix + &b.matrix * C64::new(0.0, 1.0);
        let m = matfun::expm(&z) * &ep;
        w.eval(&m)
    }
}

/// Levy form of `w` at the chart origin over `e^{ip}`, all frame
/// coordinates.
pub fn levy_form_fd(
    w: &InvariantFunctionSpec<'_>,
    p: &[f64],
    step: f64,
) -> Result<LevyFormMatrix, ComplexError> {
    let coords: Vec<usize> = (0..w.space.p_dim()).collect();
    levy_form_fd_on(w, p, &coords, Stencil::new(step))
}

/// Levy form restricted to the frame coordinates `coords`.
pub fn levy_form_fd_on(
    w: &InvariantFunctionSpec<'_>,
    p: &[f64],
    coords: &[usize],
    st: Stencil,
) -> Result<LevyFormMatrix, ComplexError> {
    let n = w.space.p_dim();
    let f = chart_fn(w, p);
    levy_of(&f, n, &vec![0.0; 2 * n], coords, st)
}

/// Hessian in `b` of `w(e^{ib} e^{ip})` at `b = 0`, computed on its own
/// stencil.
pub fn b_hessian_fd(
    w: &InvariantFunctionSpec<'_>,
    p: &[f64],
    coords: &[usize],
    st: Stencil,
) -> Result<DMatrix<f64>, ComplexError> {
    st.check()?;
    let n = w.space.p_dim();
    let ep = {
        let el = w.space.p_from_frame(p);
        matfun::expm(&(&el.matrix * C64::new(0.0, 1.0)))
    };
    let f = |b: &[f64]| {
        let eb = w.space.p_from_frame(b);
        let x = GroupElement {
            matrix: matfun::expm(&(&eb.matrix * C64::new(0.0, 1.0))) * &ep,
            tag: GroupTag::Dual,
        };
        w.eval_dual(&x)
    };
    real_hessian(&f, &vec![0.0; n], coords, st)
}

/// Outcome of the Levy-form identity check.
#[derive(Debug, Clone)]
pub struct KeyIdentity {
    pub deviation: f64,
    pub levy: LevyFormMatrix,
    pub b_hessian: DMatrix<f64>,
}

/// Entrywise max `|Lw - (1/4) Hess_b w(e^{ib} e^{ip})|` over `coords`.
pub fn verify_key_identity_on(
    w: &InvariantFunctionSpec<'_>,
    p: &[f64],
    coords: &[usize],
    st: Stencil,
) -> Result<KeyIdentity, ComplexError> {
    let levy = levy_form_fd_on(w, p, coords, st)?;
    let hb = b_hessian_fd(w, p, coords, st)?;
    let mut dev: f64 = 0.0;
    for k in 0..coords.len() {
        for q in 0..coords.len() {
            dev = dev.max((levy.matrix[(k, q)] - C64::new(0.25 * hb[(k, q)], 0.0)).norm());
        }
    }
    Ok(KeyIdentity {
        deviation: dev,
        levy,
        b_hessian: hb,
    })
}

pub fn verify_key_identity(
    w: &InvariantFunctionSpec<'_>,
    p: &[f64],
    step: f64,
) -> Result<f64, ComplexError> {
    let coords: Vec<usize> = (0..w.space.p_dim()).collect();
    Ok(verify_key_identity_on(w, p, &coords, Stencil::new(step))?.deviation)
}

/// `det Lw / M_g(w)` at `e^{ip}` for the Killing metric of the dual.
pub fn ma_ratio(w: &InvariantFunctionSpec<'_>, p: &[f64]) -> Result<f64, ComplexError> {
    let l = levy_form_fd(w, p, CHART_STEP)?;
    if !l.is_positive_definite() {
        return Err(ComplexError::NotPlurisubharmonic);
    }
    let r = w.space.radial_coords(&w.space.p_from_frame(p));
    let m = symmetric_ma(w.space, &MetricProfile::Hyperbolic, w.radial(), &r);
    Ok(l.determinant() / m)
}

/// `sum_alpha d_alpha log cosh alpha(r)`: the log of `|Omega|^2 / dvol_g`
/// along the fiber, up to a constant, where `Omega` is the invariant
/// holomorphic volume form. `log det Lu` equals `log M_g(u) - 2 *` this
/// plus a pluriharmonic function.
pub fn log_volume_density(space: &SymmetricSpace, r: &[f64]) -> f64 {
    space
        .roots()
        .iter()
        .map(|a| a.d_alpha as f64 * a.eval(r).cosh().ln())
        .sum()
}

/// `log det Lu - h` at chart coordinates `x` around `p`.
fn ricci_potential(
    u: &InvariantFunctionSpec<'_>,
    h: &InvariantFunctionSpec<'_>,
    p: &[f64],
    x: &[f64],
    step: f64,
) -> Result<f64, ComplexError> {
    let n = u.space.p_dim();
    let f = chart_fn(u, p);
    let coords: Vec<usize> = (0..n).collect();
    let l = levy_of(&f, n, x, &coords, Stencil::new(step))?;
    if !l.is_positive_definite() {
        return Err(ComplexError::NotPlurisubharmonic);
    }
    let hx = chart_fn(h, p)(x)?;
    Ok(l.determinant().ln() - hx)
}

/// Largest entry of the complex Hessian of `log det Lu - h` at `e^{ip}`;
/// it vanishes when the Ricci form of the Kähler metric with potential `u`
/// is `-i d dbar h`. `step` is the inner stencil step; the outer stencil
/// uses `OUTER_FACTOR * step`.
pub fn ricci_residual(
    u: &InvariantFunctionSpec<'_>,
    h: &InvariantFunctionSpec<'_>,
    p: &[f64],
    step: f64,
) -> Result<f64, ComplexError> {
    ricci_residual_with(u, h, p, step, OUTER_FACTOR * step)
}

pub fn ricci_residual_with(
    u: &InvariantFunctionSpec<'_>,
    h: &InvariantFunctionSpec<'_>,
    p: &[f64],
    inner: f64,
    outer: f64,
) -> Result<f64, ComplexError> {
    let n = u.space.p_dim();
    let g = |x: &[f64]| ricci_potential(u, h, p, x, inner);
    let coords: Vec<usize> = (0..n).collect();
    let l = levy_of(&g, n, &vec![0.0; 2 * n], &coords, Stencil::new(outer))?;
    Ok(l.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
