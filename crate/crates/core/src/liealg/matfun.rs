//! Dense complex matrix functions: exponential, logarithm, Hermitian spectral
//! calculus and the Newton polar iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::LieError;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

pub fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn fro(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scaled(a: &CMat, s: f64) -> CMat {
    a.map(|z| z * s)
}

/// Matrix exponential by scaling and squaring with a fixed degree-13 Padé
/// approximant.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scaled(a, 0.5f64.powi(squarings));
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let ident = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k, k - 1)] = beta;
        jac[(k - 1, k)] = beta;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            (0.5 * (x + 1.0), v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Principal square root by the determinant-scaled product form of the
/// Denman-Beavers iteration.
fn sqrtm_db(a: &CMat) -> Result<CMat, LieError> {
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    let mut m = a.clone();
    let mut y = a.clone();
    let mut scaling = true;
    for _ in 0..100 {
        let m_inv = m
            .clone()
            .try_inverse()
            .ok_or(LieError::Singular("square-root iteration"))?;
        let mu = if scaling {
            m.determinant().norm().powf(-1.0 / (2.0 * n as f64))
        } else {
            1.0
        };
        let mu2 = C64::new(mu * mu, 0.0);
        let y_next = &y * ((&ident + &m_inv / mu2) * C64::new(0.5 * mu, 0.0));
        let m_next = (&ident * C64::new(2.0, 0.0) + &m * mu2 + &m_inv / mu2) * C64::new(0.25, 0.0);
        let dist = fro(&(&m_next - &ident));
        m = m_next;
        y = y_next;
        if dist < 1e-2 {
            scaling = false;
        }
        if dist <= 1e-14 * (n as f64).sqrt() {
            return Ok(y);
        }
    }
    Err(LieError::NoConvergence {
        what: "matrix square root",
        residual: fro(&(&m - &ident)),
    })
}

/// Principal matrix logarithm by inverse scaling and squaring with a fixed
/// degree-8 Padé approximant in partial-fraction form.
pub fn logm(a: &CMat) -> Result<CMat, LieError> {
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    let mut x = a.clone();
    let mut roots = 0;
    while one_norm(&(&x - &ident)) > 0.25 {
        if roots > 60 {
            return Err(LieError::NoConvergence {
                what: "logarithm square-root phase",
                residual: one_norm(&(&x - &ident)),
            });
        }
        x = sqrtm_db(&x)?;
        roots += 1;
    }
    let e = &x - &ident;
    let (nodes, weights) = gauss_legendre_unit(8);
    let mut acc = CMat::zeros(n, n);
    for (t, w) in nodes.iter().zip(&weights) {
        let denom = &ident + &e * C64::new(*t, 0.0);
        let term = denom
            .lu()
            .solve(&e)
            .ok_or(LieError::Singular("logarithm Pade denominator"))?;
        acc += term * C64::new(*w, 0.0);
    }
    Ok(acc * C64::new(2f64.powi(roots), 0.0))
}

/// Spectral decomposition of a Hermitian matrix; eigenvalues ascending.
pub fn herm_eigen(a: &CMat) -> (DVector<f64>, CMat) {
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn herm_eigenvalues(a: &CMat) -> Vec<f64> {
    herm_eigen(a).0.iter().copied().collect()
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn herm_apply(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eigen(a);
    let n = a.nrows();
    let diag = CMat::from_diagonal(&DVector::from_iterator(
        n,
        vals.iter().map(|&v| C64::new(f(v), 0.0)),
    ));
    &vecs * diag * vecs.adjoint()
}

pub struct NewtonPolar {
    pub unitary: CMat,
    pub positive: CMat,
    pub iterations: usize,
}

/// Right polar decomposition `x = U P` by the scaled Newton iteration
/// `X <- (z X + X^{-*} / z) / 2`, stopping at relative step `tol`.
pub fn newton_polar(x: &CMat, tol: f64, max_iter: usize) -> Result<NewtonPolar, LieError> {
    let mut xk = x.clone();
    let mut scaling = true;
    for it in 1..=max_iter {
        let inv = xk
            .clone()
            .try_inverse()
            .ok_or(LieError::Singular("polar iteration"))?;
        let inv_adj = inv.adjoint();
        let zeta = if scaling {
            (fro(&inv) / fro(&xk)).sqrt()
        } else {
            1.0
        };
        let next = (&xk * C64::new(zeta, 0.0) + inv_adj * C64::new(1.0 / zeta, 0.0))
            * C64::new(0.5, 0.0);
        let change = fro(&(&next - &xk)) / fro(&next);
        xk = next;
        if change < 1e-2 {
            scaling = false;
        }
        if change <= tol {
            let positive = xk.adjoint() * x;
            let positive = (&positive + positive.adjoint()) * C64::new(0.5, 0.0);
            return Ok(NewtonPolar {
                unitary: xk,
                positive,
                iterations: it,
            });
        }
    }
    let n = x.nrows();
    Err(LieError::NoConvergence {
        what: "Newton polar iteration",
        residual: fro(&(xk.adjoint() * &xk - CMat::identity(n, n))),
    })
}
