//! Explicit matrix embeddings for the shipped spaces.

use crate::liealg::{CMat, Involution, LieError, MatrixModel, C64};

fn unit(n: usize, i: usize, j: usize, v: C64) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = v;
    m
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn im(v: f64) -> C64 {
    C64::new(0.0, v)
}

fn antisym(n: usize, i: usize, j: usize) -> CMat {
    unit(n, i, j, re(1.0)) - unit(n, j, i, re(1.0))
}

fn imag_sym(n: usize, i: usize, j: usize) -> CMat {
    unit(n, i, j, im(1.0)) + unit(n, j, i, im(1.0))
}

fn imag_diag(n: usize, k: usize) -> CMat {
    unit(n, k, k, im(1.0)) - unit(n, k + 1, k + 1, im(1.0))
}

/// A model together with spanning matrices of the chosen maximal abelian
/// subspace.
pub struct ModelSpec {
    pub model: MatrixModel,
    pub a_span: Vec<CMat>,
    pub is_group_case: bool,
}

/// `SU(n)/SO(n)`: `k` real antisymmetric, `p` imaginary symmetric traceless.
pub fn su_over_so(n: usize) -> Result<ModelSpec, LieError> {
    let mut k = Vec::new();
    let mut p = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            k.push(antisym(n, i, j));
            p.push(imag_sym(n, i, j));
        }
    }
    let a_span: Vec<CMat> = (0..n - 1).map(|d| imag_diag(n, d)).collect();
    p.extend(a_span.iter().cloned());
    let model = MatrixModel::new(n, k, p, Involution::InverseTranspose, 0..n)?;
    Ok(ModelSpec {
        model,
        a_span,
        is_group_case: false,
    })
}

/// `SO(n+1)/SO(n)` realized in real antisymmetric matrices, `K` fixing the
/// first basis vector.
pub fn sphere(n: usize) -> Result<ModelSpec, LieError> {
    let size = n + 1;
    let mut k = Vec::new();
    for i in 1..size {
        for j in i + 1..size {
            k.push(antisym(size, i, j));
        }
    }
    let p: Vec<CMat> = (1..size).map(|j| antisym(size, 0, j)).collect();
    let mut s = CMat::identity(size, size);
    s[(0, 0)] = re(-1.0);
    let a_span = vec![p[0].clone()];
    let model = MatrixModel::new(size, k, p, Involution::Inner(s), 0..size)?;
    Ok(ModelSpec {
        model,
        a_span,
        is_group_case: false,
    })
}

fn su_basis(n: usize) -> (Vec<CMat>, Vec<CMat>) {
    let mut off = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            off.push(antisym(n, i, j));
            off.push(imag_sym(n, i, j));
        }
    }
    let diag = (0..n - 1).map(|d| imag_diag(n, d)).collect();
    (off, diag)
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((n, n), (n, n)).copy_from(b);
    m
}

/// `(SU(n) x SU(n)) / SU(n)` with the diagonal subgroup as `K`; block
/// diagonal matrices, the involution swaps the blocks.
pub fn group_su(n: usize) -> Result<ModelSpec, LieError> {
    let (off, diag) = su_basis(n);
    let all: Vec<CMat> = off.iter().chain(diag.iter()).cloned().collect();
    let k: Vec<CMat> = all.iter().map(|x| block_diag(x, x)).collect();
    let p: Vec<CMat> = all.iter().map(|x| block_diag(x, &(-x))).collect();
    let a_span: Vec<CMat> = diag.iter().map(|h| block_diag(h, &(-h))).collect();
    let mut swap = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        swap[(i, n + i)] = re(1.0);
        swap[(n + i, i)] = re(1.0);
    }
    let model = MatrixModel::new(2 * n, k, p, Involution::Inner(swap), 0..n)?;
    Ok(ModelSpec {
        model,
        a_span,
        is_group_case: true,
    })
}
