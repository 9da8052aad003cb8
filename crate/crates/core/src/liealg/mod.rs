//! Matrix Lie algebra engine.
//!
//! A [`MatrixModel`] realizes a compact Lie algebra `g = k + p` as a real span
//! of skew-Hermitian matrices. Basis matrices are orthonormal for the
//! Frobenius inner product `<X, Y> = Re tr(X^* Y)`, which makes coefficient
//! extraction a trace and makes every `ad X` a real skew-symmetric matrix.
//! Elements of the complexification carry complex coefficients over the same
//! basis.

mod decompose;
pub mod matfun;

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub use decompose::{CartanDecomposition, CoshSinhSplit, PolarDecomposition};
pub use matfun::{CMat, C64};

/// Membership tolerance for projections onto the basis span.
pub const SPAN_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("matrix is not in the span of the model basis (residual {residual:.3e})")]
    NotInSpan { residual: f64 },
    #[error("element expected in {expected} has a {other} component of norm {residual:.3e}")]
    WrongSubspace {
        expected: &'static str,
        other: &'static str,
        residual: f64,
    },
    #[error("{what} did not converge (residual {residual:.3e})")]
    NoConvergence { what: &'static str, residual: f64 },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("cosh(ad ip) lost positive definiteness on k")]
    NotPositiveDefinite,
    #[error("group element fails membership in {group} (residual {residual:.3e})")]
    NotInGroup { group: GroupTag, residual: f64 },
    #[error("model inconsistency: {0}")]
    Model(String),
}

/// Holomorphic involution of the complex group whose fixed points form `K^C`.
#[derive(Debug, Clone)]
pub enum Involution {
    /// `x -> S x S` with `S^2 = I`.
    Inner(CMat),
    /// `x -> (x^T)^{-1}` on the group, `X -> -X^T` on the algebra.
    InverseTranspose,
}

impl Involution {
    pub fn on_group(&self, x: &CMat) -> Result<CMat, LieError> {
        match self {
            Involution::Inner(s) => Ok(s * x * s),
            Involution::InverseTranspose => x
                .transpose()
                .try_inverse()
                .ok_or(LieError::Singular("involution")),
        }
    }

    pub fn on_algebra(&self, x: &CMat) -> CMat {
        match self {
            Involution::Inner(s) => s * x * s,
            Involution::InverseTranspose => -x.transpose(),
        }
    }
}

/// Which real or complex group a matrix claims to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GroupTag {
    /// The compact group `G`.
    Compact,
    /// The noncompact dual `G*` with Lie algebra `k + ip`.
    Dual,
    /// The complexification `G^C`.
    Complex,
}

impl std::fmt::Display for GroupTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GroupTag::Compact => "G",
            GroupTag::Dual => "G*",
            GroupTag::Complex => "G^C",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct GroupElement {
    pub matrix: CMat,
    pub tag: GroupTag,
}

/// Element of `g^C` with complex coefficients over the `k`-then-`p` basis.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub coeffs: DVector<C64>,
    pub matrix: CMat,
    k_dim: usize,
}

impl AlgebraElement {
    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn k_coeffs(&self) -> DVector<C64> {
        self.coeffs.rows(0, self.k_dim).into_owned()
    }

    pub fn p_coeffs(&self) -> DVector<C64> {
        self.coeffs
            .rows(self.k_dim, self.dim() - self.k_dim)
            .into_owned()
    }

    /// Real parts of the `p` coefficients; meaningful for elements of `p`.
    pub fn p_real(&self) -> Vec<f64> {
        self.p_coeffs().iter().map(|z| z.re).collect()
    }

    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest imaginary part among the coefficients.
    pub fn imag_residual(&self) -> f64 {
        self.coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> AlgebraElement {
        AlgebraElement {
            coeffs: &self.coeffs * s,
            matrix: &self.matrix * s,
            k_dim: self.k_dim,
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            coeffs: &self.coeffs + &other.coeffs,
            matrix: &self.matrix + &other.matrix,
            k_dim: self.k_dim,
        }
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Multiplication by the imaginary unit.
    pub fn times_i(&self) -> AlgebraElement {
        self.scale(C64::new(0.0, 1.0))
    }
}

/// Explicit matrix realization of a compact Lie algebra with a Cartan
/// decomposition.
#[derive(Debug, Clone)]
pub struct MatrixModel {
    size: usize,
    basis: Vec<CMat>,
    k_dim: usize,
    involution: Involution,
    spectral_block: Range<usize>,
    ad: Vec<DMatrix<f64>>,
    killing: DMatrix<f64>,
}

fn frob_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn gram_schmidt(mats: Vec<CMat>) -> Vec<CMat> {
    let mut out: Vec<CMat> = Vec::with_capacity(mats.len());
    for mut m in mats {
        for q in &out {
            let c = frob_inner(q, &m);
            m -= q * c;
        }
        let n = matfun::fro(&m);
        assert!(n > 1e-12, "linearly dependent basis matrices");
        out.push(m / C64::new(n, 0.0));
    }
    out
}

impl MatrixModel {
    /// Builds a model from spanning matrices of `k` and `p`. The matrices are
    /// orthonormalized; structure constants and the Killing form are cached.
    pub fn new(
        size: usize,
        k_span: Vec<CMat>,
        p_span: Vec<CMat>,
        involution: Involution,
        spectral_block: Range<usize>,
    ) -> Result<Self, LieError> {
        let k_dim = k_span.len();
        let mut all = gram_schmidt(k_span);
        all.extend(gram_schmidt(p_span));
        let basis = gram_schmidt(all);
        let n = basis.len();
        let mut model = MatrixModel {
            size,
            basis,
            k_dim,
            involution,
            spectral_block,
            ad: Vec::new(),
            killing: DMatrix::zeros(n, n),
        };
        for b in &model.basis {
            let skew = matfun::fro(&(b + b.adjoint()));
            if skew > 1e-12 {
                return Err(LieError::Model(format!(
                    "basis matrix is not skew-Hermitian ({skew:.2e})"
                )));
            }
        }
        let mut ad = Vec::with_capacity(n);
        for k in 0..n {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let br = &model.basis[k] * &model.basis[j] - &model.basis[j] * &model.basis[k];
                let el = model.project(&br)?;
                for i in 0..n {
                    m[(i, j)] = el.coeffs[i].re;
                }
            }
            ad.push(m);
        }
        model.ad = ad;
        let mut killing = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = (&model.ad[i] * &model.ad[j]).trace();
                killing[(i, j)] = v;
                killing[(j, i)] = v;
            }
        }
        model.killing = killing;
        for (idx, b) in model.basis.iter().enumerate() {
            let want = if idx < k_dim { b.clone() } else { -b.clone() };
            let res = matfun::fro(&(model.involution.on_algebra(b) - want));
            if res > 1e-12 {
                return Err(LieError::Model(format!(
                    "involution does not split basis element {idx} ({res:.2e})"
                )));
            }
        }
        Ok(model)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    pub fn p_dim(&self) -> usize {
        self.dim() - self.k_dim
    }

    pub fn k_range(&self) -> Range<usize> {
        0..self.k_dim
    }

    pub fn p_range(&self) -> Range<usize> {
        self.k_dim..self.dim()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn involution(&self) -> &Involution {
        &self.involution
    }

    /// Diagonal block whose spectrum separates `K`-orbits in `p`.
    pub fn spectral_block(&self) -> Range<usize> {
        self.spectral_block.clone()
    }

    /// Killing form Gram matrix `tr(ad B_i ad B_j)` over the basis.
    pub fn killing_gram(&self) -> &DMatrix<f64> {
        &self.killing
    }

    /// Real matrix of `ad B_k` over the basis.
    pub fn ad_basis(&self, k: usize) -> &DMatrix<f64> {
        &self.ad[k]
    }

    pub fn element(&self, coeffs: DVector<C64>) -> AlgebraElement {
        assert_eq!(coeffs.len(), self.dim());
        let mut matrix = CMat::zeros(self.size, self.size);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != C64::new(0.0, 0.0) {
                matrix += b * *c;
            }
        }
        AlgebraElement {
            coeffs,
            matrix,
            k_dim: self.k_dim,
        }
    }

    pub fn real_element(&self, coeffs: &[f64]) -> AlgebraElement {
        self.element(DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().map(|&c| C64::new(c, 0.0)),
        ))
    }

    pub fn zero(&self) -> AlgebraElement {
        self.element(DVector::zeros(self.dim()))
    }

    /// Element of `p` from its coefficients over the `p` basis.
    pub fn p_element(&self, p_coeffs: &[f64]) -> AlgebraElement {
        assert_eq!(p_coeffs.len(), self.p_dim());
        let mut c = vec![0.0; self.dim()];
        c[self.k_dim..].copy_from_slice(p_coeffs);
        self.real_element(&c)
    }

    /// Element of `k` from its coefficients over the `k` basis.
    pub fn k_element(&self, k_coeffs: &[f64]) -> AlgebraElement {
        assert_eq!(k_coeffs.len(), self.k_dim);
        let mut c = vec![0.0; self.dim()];
        c[..self.k_dim].copy_from_slice(k_coeffs);
        self.real_element(&c)
    }

    /// Recovers coefficients of a matrix in `g^C`; fails if the matrix leaves
    /// the span.
    pub fn project(&self, m: &CMat) -> Result<AlgebraElement, LieError> {
        let coeffs =
            DVector::from_iterator(self.dim(), self.basis.iter().map(|b| frob_inner(b, m)));
        let el = self.element(coeffs);
        let residual = matfun::fro(&(&el.matrix - m));
        if residual > SPAN_TOL * (1.0 + matfun::fro(m)) {
            return Err(LieError::NotInSpan { residual });
        }
        Ok(el)
    }

    pub fn k_part(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut c = x.coeffs.clone();
        c.rows_mut(self.k_dim, self.p_dim()).fill(C64::new(0.0, 0.0));
        self.element(c)
    }

    pub fn p_part(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut c = x.coeffs.clone();
        c.rows_mut(0, self.k_dim).fill(C64::new(0.0, 0.0));
        self.element(c)
    }

    /// `[X, Y] = XY - YX`, re-expressed in the basis.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, LieError> {
        let m = &x.matrix * &y.matrix - &y.matrix * &x.matrix;
        self.project(&m)
    }

    /// Complex matrix of `ad X` over the basis.
    pub fn ad_matrix(&self, x: &AlgebraElement) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (c, a) in x.coeffs.iter().zip(&self.ad) {
            if *c != C64::new(0.0, 0.0) {
                m += a.map(|v| C64::new(v, 0.0)) * *c;
            }
        }
        m
    }

    /// Real matrix of `ad X` for `X` in the real form `g`.
    pub fn ad_real(&self, x: &AlgebraElement) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (c, a) in x.coeffs.iter().zip(&self.ad) {
            if c.re != 0.0 {
                m += a * c.re;
            }
        }
        m
    }

    /// Complex-bilinear Killing form `tr(ad X ad Y)`.
    pub fn killing_complex(&self, x: &AlgebraElement, y: &AlgebraElement) -> C64 {
        let kc = self.killing.map(|v| C64::new(v, 0.0));
        (x.coeffs.transpose() * kc * &y.coeffs)[(0, 0)]
    }

    /// Killing form `tr(ad X ad Y)`; real for arguments in `g` or `ig`.
    pub fn killing_form(&self, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
        self.killing_complex(x, y).re
    }

    /// Matrix exponential of `scale * X`, tagged by the real form it lands in.
    pub fn exp_matrix(&self, x: &AlgebraElement, scale: f64) -> GroupElement {
        let matrix = matfun::expm(&(&x.matrix * C64::new(scale, 0.0)));
        let tol = 1e-14 * (1.0 + x.coeff_norm());
        let k_real = x.k_coeffs().iter().all(|z| z.im.abs() <= tol);
        let p_real = x.p_coeffs().iter().all(|z| z.im.abs() <= tol);
        let p_imag = x.p_coeffs().iter().all(|z| z.re.abs() <= tol);
        let tag = if k_real && p_real {
            GroupTag::Compact
        } else if k_real && p_imag {
            GroupTag::Dual
        } else {
            GroupTag::Complex
        };
        GroupElement { matrix, tag }
    }

    /// Defining-relation residual of `x` for the group named by `tag`:
    /// unitarity and unit determinant for `G`, fixedness under the
    /// involution composed with `x -> (x^*)^{-1}` for `G*`, and a polar
    /// reconstruction with both factors in range for `G^C`.
    pub fn membership_residual(&self, x: &CMat, tag: GroupTag) -> f64 {
        let n = self.size;
        let ident = CMat::identity(n, n);
        let det_res = (x.determinant() - C64::new(1.0, 0.0)).norm();
        match tag {
            GroupTag::Compact => matfun::fro(&(x.adjoint() * x - ident)) + det_res,
            GroupTag::Dual => {
                let Some(inv_adj) = x.adjoint().try_inverse() else {
                    return f64::INFINITY;
                };
                match self.involution.on_group(&inv_adj) {
                    Ok(t) => matfun::fro(&(t - x)) / (1.0 + matfun::fro(x)) + det_res,
                    Err(_) => f64::INFINITY,
                }
            }
            GroupTag::Complex => match self.polar_decompose(&GroupElement {
                matrix: x.clone(),
                tag,
            }) {
                Ok(pd) => pd.residual + det_res,
                Err(_) => f64::INFINITY,
            },
        }
    }

    /// Random element of `g` with standard normal coefficients.
    pub fn random_real<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        let c: Vec<f64> = (0..self.dim()).map(|_| scale * gaussian(rng)).collect();
        self.real_element(&c)
    }

    pub fn random_p<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        let c: Vec<f64> = (0..self.p_dim()).map(|_| scale * gaussian(rng)).collect();
        self.p_element(&c)
    }

    pub fn random_k<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        let c: Vec<f64> = (0..self.k_dim).map(|_| scale * gaussian(rng)).collect();
        self.k_element(&c)
    }
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[cfg(test)]
mod tests;
