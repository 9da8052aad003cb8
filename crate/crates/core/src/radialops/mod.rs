//! Radial reduction of the Hessian and Monge-Ampère operators for
//! `K`-invariant functions.
//!
//! For a metric `sum dr_i^2 + sum_j F_j(alpha_j(r)) theta_j^2` the
//! Riemannian Hessian of an invariant function is block diagonal: the
//! Euclidean Hessian on `a` and one entry `F_j'(alpha_j) alpha_j(grad u) / 2`
//! per angular direction `j = (alpha, m)`, where each root appears `d_alpha`
//! times.

mod function;
pub mod oracle;
mod profile;
pub mod testfns;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::catalog::{RestrictedRoot, SymmetricSpace};
use crate::expr::ExprError;
use crate::jet::Jet;

pub use function::{
    Affine, ExpOf, ExprFunction, GeneratorValues, InvariantGenerators, JetFn, Quadratic,
    RadialFunction,
};
pub use profile::{CustomProfile, MetricProfile, WALL_EPS};

#[derive(Debug, Error)]
pub enum RadialError {
    #[error("metric determinant vanishes: root value {root_value:e} on a wall")]
    ZeroDeterminant { root_value: f64 },
    #[error("invalid metric profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(
        "convexity verdicts disagree at r = {point:?}: flat minimum {flat_min:e}, {profile} minimum {profile_min:e}"
    )]
    ConvexityDisagreement {
        point: Vec<f64>,
        flat_min: f64,
        profile: String,
        profile_min: f64,
    },
    #[error("the geodesic oracle supports the flat and hyperbolic profiles only")]
    UnsupportedOracle,
}

/// Riemannian Hessian of an invariant function at a chamber point, in the
/// coordinates `(r_i, theta_j)`.
#[derive(Debug, Clone)]
pub struct RadialHessian {
    pub radial_block: DMatrix<f64>,
    /// One entry per angular index, roots repeated by multiplicity.
    pub angular_entries: Vec<f64>,
}

impl RadialHessian {
    pub fn determinant(&self) -> f64 {
        self.radial_block.determinant() * self.angular_entries.iter().product::<f64>()
    }
}

/// `alpha(grad u) / alpha(r)`, with the wall limit
/// `alpha^T Hess u alpha / |alpha|^2` when `|alpha(r)| < WALL_EPS`.
pub fn root_ratio(root: &RestrictedRoot, u: &Jet, r: &[f64]) -> f64 {
    let ar = root.eval(r);
    if ar.abs() < WALL_EPS * root.norm() {
        let a = &root.alpha;
        let mut q = 0.0;
        for i in 0..a.len() {
            for k in 0..a.len() {
                q += a[i] * u.h[i][k] * a[k];
            }
        }
        q / root.norm_sq()
    } else {
        root.eval(&u.g[..r.len()]) / ar
    }
}

/// `prod_j F_j(alpha_j(r))`.
pub fn metric_determinant(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    r: &[f64],
) -> Result<f64, RadialError> {
    let mut det = 1.0;
    for root in space.roots() {
        let z = root.eval(r);
        let fz = profile.value(z);
        if fz == 0.0 {
            return Err(RadialError::ZeroDeterminant { root_value: z });
        }
        det *= fz.powi(root.d_alpha as i32);
    }
    Ok(det)
}

pub fn radial_hessian(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    u: &dyn RadialFunction,
    r: &[f64],
) -> RadialHessian {
    let j = u.jet(r);
    let mut angular = Vec::with_capacity(space.angular_dim());
    for root in space.roots() {
        let e = 0.5 * profile.derivative(root.eval(r)) * root.eval(&j.g[..r.len()]);
        angular.extend(std::iter::repeat(e).take(root.d_alpha));
    }
    RadialHessian {
        radial_block: j.hessian(),
        angular_entries: angular,
    }
}

/// The factor `F` with `M_g = F * M_flat` on invariant functions:
/// `prod_j alpha_j F_j'(alpha_j) / (2 F_j(alpha_j))`. It depends only on the
/// space and the profile and extends smoothly across the walls.
pub fn factor_f(space: &SymmetricSpace, profile: &MetricProfile, r: &[f64]) -> f64 {
    space
        .roots()
        .iter()
        .map(|root| profile.wall_term(root.eval(r)).powi(root.d_alpha as i32))
        .product()
}

/// Flat Monge-Ampère operator of an invariant function at a chamber point:
/// `det Hess_a u * prod_j alpha_j(grad u) / alpha_j(r)`.
pub fn euclidean_ma_reduced(space: &SymmetricSpace, u: &dyn RadialFunction, r: &[f64]) -> f64 {
    let j = u.jet(r);
    euclidean_ma_from_jet(space, &j, r)
}

pub(crate) fn euclidean_ma_from_jet(space: &SymmetricSpace, j: &Jet, r: &[f64]) -> f64 {
    let mut v = j.hessian().determinant();
    for root in space.roots() {
        v *= root_ratio(root, j, r).powi(root.d_alpha as i32);
    }
    v
}

/// `M_g(u) = F * M_flat(u)`.
pub fn symmetric_ma(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    u: &dyn RadialFunction,
    r: &[f64],
) -> f64 {
    factor_f(space, profile, r) * euclidean_ma_reduced(space, u, r)
}

/// Smallest eigenvalue of the metric-normalized Hessian: the radial block's
/// eigenvalues and `wall_term(alpha) * alpha(grad u) / alpha(r)` per root.
pub fn min_normalized_eigenvalue(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    u: &dyn RadialFunction,
    r: &[f64],
) -> f64 {
    let j = u.jet(r);
    min_normalized_from_jet(space, profile, &j, r)
}

pub(crate) fn min_normalized_from_jet(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    j: &Jet,
    r: &[f64],
) -> f64 {
    let radial = j.hessian().symmetric_eigenvalues().min();
    space
        .roots()
        .iter()
        .map(|root| profile.wall_term(root.eval(r)) * root_ratio(root, j, r))
        .fold(radial, f64::min)
}

/// Margin below which flat and curved verdicts may legitimately differ.
pub const VERDICT_MARGIN: f64 = 1e-10;

/// Whether the Hessian is positive definite at every sample, computed for
/// the flat profile and for `profile`; the two verdicts must agree.
pub fn is_strictly_convex(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    u: &dyn RadialFunction,
    sample: &[Vec<f64>],
) -> Result<bool, RadialError> {
    let mut all = true;
    for r in sample {
        let j = u.jet(r);
        let flat = min_normalized_from_jet(space, &MetricProfile::Flat, &j, r);
        let curved = min_normalized_from_jet(space, profile, &j, r);
        let (a, b) = (flat > 0.0, curved > 0.0);
        if a != b && flat.abs().min(curved.abs()) > VERDICT_MARGIN {
            return Err(RadialError::ConvexityDisagreement {
                point: r.clone(),
                flat_min: flat,
                profile: profile.name(),
                profile_min: curved,
            });
        }
        all &= a && b;
    }
    Ok(all)
}

#[cfg(test)]
mod tests;
