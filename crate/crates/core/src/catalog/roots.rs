//! Restricted roots from the spectral decomposition of `(ad H)^2`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CatalogError, SymmetricSpace};
use crate::liealg::{gaussian, AlgebraElement, MatrixModel, C64};

/// Relative tolerance for grouping eigenvalues of `(ad H)^2`.
pub const CLUSTER_TOL: f64 = 1e-7;
const MAX_ATTEMPTS: usize = 5;

/// A positive restricted root `alpha` on `a` (in Killing-orthonormal
/// coordinates) with the dimension of its root spaces.
#[derive(Debug, Clone)]
pub struct RestrictedRoot {
    pub alpha: Vec<f64>,
    pub d_alpha: usize,
    /// Basis of `p_alpha`, columns in the model's `p` coordinates.
    pub p_space: DMatrix<f64>,
    /// Basis of `k_alpha`, columns in the model's `k` coordinates.
    pub k_space: DMatrix<f64>,
}

impl RestrictedRoot {
    /// `alpha(r)`.
    pub fn eval(&self, r: &[f64]) -> f64 {
        self.alpha.iter().zip(r).map(|(a, x)| a * x).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.alpha.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Recomputes the positive roots of a descriptor with fresh generic
/// elements and checks them against the defining eigenvalue relation.
pub fn restricted_roots(space: &SymmetricSpace) -> Result<Vec<RestrictedRoot>, CatalogError> {
    let roots = extract_roots(space.model(), space.a_basis(), 0x5eed)?;
    validate_roots(space, &roots, 10)?;
    Ok(roots)
}

struct Cluster {
    value: f64,
    vectors: DMatrix<f64>,
}

fn clusters(block: &DMatrix<f64>) -> (Vec<Cluster>, usize) {
    let eig = block.clone().symmetric_eigen();
    let n = block.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let top = idx
        .last()
        .map(|&i| eig.eigenvalues[i].abs())
        .unwrap_or(0.0)
        .max(1e-300);
    let tol = CLUSTER_TOL * top;
    let mut zero_dim = 0;
    let mut out: Vec<(Vec<usize>, f64)> = Vec::new();
    for &i in &idx {
        let v = eig.eigenvalues[i];
        if v.abs() <= tol {
            zero_dim += 1;
            continue;
        }
        match out.last_mut() {
            Some((members, _)) if (v - eig.eigenvalues[*members.last().unwrap()]).abs() <= tol => {
                members.push(i)
            }
            _ => out.push((vec![i], v)),
        }
    }
    let clusters = out
        .into_iter()
        .map(|(members, _)| {
            let value = members.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / members.len() as f64;
            let mut vectors = DMatrix::zeros(n, members.len());
            for (c, &i) in members.iter().enumerate() {
                vectors.set_column(c, &eig.eigenvectors.column(i));
            }
            Cluster { value, vectors }
        })
        .collect();
    (clusters, zero_dim)
}

/// `-(ad X)^2` restricted to the `k` or `p` block.
fn ad_square_blocks(model: &MatrixModel, h: &AlgebraElement) -> (DMatrix<f64>, DMatrix<f64>) {
    let ad = model.ad_real(h);
    let t = -(&ad * &ad);
    let t = (&t + t.transpose()) * 0.5;
    let kd = model.k_dim();
    let pd = model.p_dim();
    (
        t.view((0, 0), (kd, kd)).into_owned(),
        t.view((kd, kd), (pd, pd)).into_owned(),
    )
}

fn combine(a: &[AlgebraElement], h: &[f64], model: &MatrixModel) -> AlgebraElement {
    let mut acc = model.zero();
    for (x, el) in h.iter().zip(a) {
        acc = acc.add(&el.scale(C64::new(*x, 0.0)));
    }
    acc
}

fn try_extract(
    model: &MatrixModel,
    a: &[AlgebraElement],
    h: &[f64],
) -> Result<Vec<RestrictedRoot>, String> {
    let rank = a.len();
    let hel = combine(a, h, model);
    let (tk, tp) = ad_square_blocks(model, &hel);
    let (pc, p_zero) = clusters(&tp);
    let (kc, _) = clusters(&tk);
    if p_zero != rank {
        return Err(format!("zero eigenspace on p has dimension {p_zero}, rank {rank}"));
    }
    if pc.len() != kc.len() {
        return Err(format!(
            "{} nonzero clusters on p but {} on k",
            pc.len(),
            kc.len()
        ));
    }
    let kd = model.k_dim();
    let pd = model.p_dim();
    let ad_h = model.ad_real(&hel);
    let mut roots = Vec::new();
    for (p_cl, k_cl) in pc.iter().zip(&kc) {
        let d = p_cl.vectors.ncols();
        if k_cl.vectors.ncols() != d {
            return Err("k and p root spaces differ in dimension".into());
        }
        let rel = (p_cl.value - k_cl.value).abs() / p_cl.value;
        if rel > 10.0 * CLUSTER_TOL {
            return Err("k and p cluster eigenvalues do not match".into());
        }
        let alpha_h = p_cl.value.sqrt();
        let mut alpha = vec![0.0; rank];
        for (i, ai) in a.iter().enumerate() {
            let ad_a = model.ad_real(ai);
            let s = -(&ad_a * &ad_h);
            let s_pp = s.view((kd, kd), (pd, pd)).into_owned();
            let red = p_cl.vectors.transpose() * s_pp * &p_cl.vectors;
            let val = red.trace() / d as f64;
            let off = (&red - DMatrix::<f64>::identity(d, d) * val).norm();
            if off > 1e-6 * alpha_h.max(1.0) {
                return Err("root spaces of nearly equal height merged".into());
            }
            alpha[i] = val / alpha_h;
        }
        if let Some(first) = alpha.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                alpha.iter_mut().for_each(|v| *v = -*v);
            }
        }
        roots.push(RestrictedRoot {
            alpha,
            d_alpha: d,
            p_space: p_cl.vectors.clone(),
            k_space: k_cl.vectors.clone(),
        });
    }
    roots.sort_by(|x, y| {
        for (a, b) in x.alpha.iter().zip(&y.alpha) {
            if (a - b).abs() > 1e-9 {
                return a.total_cmp(b);
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(roots)
}

/// Extracts positive roots with up to five random generic elements.
pub(crate) fn extract_roots(
    model: &MatrixModel,
    a: &[AlgebraElement],
    seed: u64,
) -> Result<Vec<RestrictedRoot>, CatalogError> {
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut h: Vec<f64> = (0..a.len()).map(|_| gaussian(&mut rng)).collect();
        let n = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        h.iter_mut().for_each(|x| *x /= n);
        match try_extract(model, a, &h) {
            Ok(roots) => {
                let total: usize = roots.iter().map(|r| r.d_alpha).sum();
                if total + a.len() != model.p_dim() {
                    last = format!("multiplicities sum to {total}, expected {}", model.p_dim() - a.len());
                    continue;
                }
                return Ok(roots);
            }
            Err(e) => last = e,
        }
    }
    Err(CatalogError::RootExtraction {
        attempts: MAX_ATTEMPTS,
        reason: last,
    })
}

/// Checks that `(ad H)^2` acts on every `k_alpha` and `p_alpha` with
/// eigenvalue `alpha(H)^2` for `samples` random `H`, and the dimension count.
pub(crate) fn validate_roots(
    space: &SymmetricSpace,
    roots: &[RestrictedRoot],
    samples: usize,
) -> Result<(), CatalogError> {
    let model = space.model();
    let total: usize = roots.iter().map(|r| r.d_alpha).sum();
    if total != model.p_dim() - space.rank() {
        return Err(CatalogError::RootInvariant(format!(
            "sum of multiplicities {total} != dim p - rank"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    for _ in 0..samples {
        let h: Vec<f64> = (0..space.rank()).map(|_| gaussian(&mut rng)).collect();
        let hel = space.a_element(&h);
        let (tk, tp) = ad_square_blocks(model, &hel);
        for root in roots {
            if root.k_space.ncols() != root.p_space.ncols() {
                return Err(CatalogError::RootInvariant("dim k_alpha != dim p_alpha".into()));
            }
            let want = root.eval(&h).powi(2);
            for (t, basis) in [(&tp, &root.p_space), (&tk, &root.k_space)] {
                let res = (t * basis - basis * want).norm();
                if res > 1e-9 * (1.0 + want) {
                    return Err(CatalogError::RootInvariant(format!(
                        "(ad H)^2 residual {res:.3e} on a root space"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn column(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
