//! Weyl chamber and the reflection group generated by the restricted roots.

use nalgebra::DMatrix;

use super::{RestrictedRoot, SymmetricSpace};

#[derive(Debug, Clone)]
pub struct WeylChamber {
    pub positive_roots: Vec<RestrictedRoot>,
    pub rank: usize,
}

impl WeylChamber {
    /// Open chamber membership.
    pub fn contains(&self, r: &[f64]) -> bool {
        self.positive_roots.iter().all(|a| a.eval(r) > 0.0)
    }

    /// Smallest root value at `r`, a signed distance proxy to the walls.
    pub fn wall_margin(&self, r: &[f64]) -> f64 {
        self.positive_roots
            .iter()
            .map(|a| a.eval(r) / a.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Reflection `s_alpha` as a matrix on `a` (orthonormal coordinates).
pub fn reflection(alpha: &[f64]) -> DMatrix<f64> {
    let n = alpha.len();
    let a2: f64 = alpha.iter().map(|x| x * x).sum();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - 2.0 * alpha[i] * alpha[j] / a2
    })
}

fn reflect(r: &mut [f64], alpha: &[f64]) {
    let a2: f64 = alpha.iter().map(|x| x * x).sum();
    let c = 2.0 * alpha.iter().zip(r.iter()).map(|(a, x)| a * x).sum::<f64>() / a2;
    for (x, a) in r.iter_mut().zip(alpha) {
        *x -= c * a;
    }
}

/// Folds `r` into the closed chamber by repeatedly reflecting across the
/// wall of the most negative positive root.
pub fn chamber_project(space: &SymmetricSpace, r: &[f64]) -> Vec<f64> {
    project_with_roots(space.roots(), r)
}

pub(crate) fn project_with_roots(roots: &[RestrictedRoot], r: &[f64]) -> Vec<f64> {
    let mut x = r.to_vec();
    // each reflection strictly increases <x, rho>, so the orbit is finite
    for _ in 0..64 {
        let worst = roots
            .iter()
            .map(|a| (a.eval(&x) / a.norm(), a))
            .min_by(|p, q| p.0.total_cmp(&q.0));
        match worst {
            Some((v, a)) if v < 0.0 => reflect(&mut x, &a.alpha),
            _ => break,
        }
    }
    x
}

/// Finite reflection group as explicit orthogonal matrices on `a`.
#[derive(Debug, Clone)]
pub struct WeylGroup {
    elements: Vec<DMatrix<f64>>,
}

impl WeylGroup {
    pub(crate) fn generate(roots: &[RestrictedRoot], rank: usize) -> Self {
        let gens: Vec<DMatrix<f64>> = roots.iter().map(|a| reflection(&a.alpha)).collect();
        let mut elements = vec![DMatrix::identity(rank, rank)];
        let mut frontier = elements.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in &frontier {
                for s in &gens {
                    let cand = s * w;
                    if !elements.iter().any(|e| (e - &cand).norm() < 1e-9) {
                        elements.push(cand.clone());
                        next.push(cand);
                    }
                }
            }
            frontier = next;
            assert!(elements.len() <= 1024, "Weyl group closure did not terminate");
        }
        WeylGroup { elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    /// The orbit `{w r}` (with repetitions for points on walls).
    pub fn orbit(&self, r: &[f64]) -> Vec<Vec<f64>> {
        let v = nalgebra::DVector::from_column_slice(r);
        self.elements
            .iter()
            .map(|w| (w * &v).iter().copied().collect())
            .collect()
    }
}
