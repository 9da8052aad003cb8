//! Random Weyl-invariant polynomial test functions.
//!
//! A member of the family is `c |r|^2 + sum_m a_m prod_k s_k^{n_k}` where the
//! `s_k` are elementary symmetric functions of the orbit values
//! `<w e, r>` over the Weyl group for a fixed generic `e`, the monomials have
//! degree at most 6 in `r` and `a_m` is uniform in `[-1, 1]`.

use rand::Rng;

use crate::catalog::SymmetricSpace;
use crate::jet::Jet;
use crate::liealg::gaussian;

use super::RadialFunction;

/// Exponents of `(s2, s3, s4, s5, s6)`; each monomial has degree <= 6.
const MONOMIALS: [[u8; 5]; 10] = [
    [1, 0, 0, 0, 0],
    [2, 0, 0, 0, 0],
    [3, 0, 0, 0, 0],
    [0, 1, 0, 0, 0],
    [0, 2, 0, 0, 0],
    [1, 1, 0, 0, 0],
    [0, 0, 1, 0, 0],
    [1, 0, 1, 0, 0],
    [0, 0, 0, 1, 0],
    [0, 0, 0, 0, 1],
];

#[derive(Debug, Clone)]
pub struct OrbitPolynomial {
    rank: usize,
    orbit: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    shift: f64,
}

impl OrbitPolynomial {
    pub fn new(space: &SymmetricSpace, e: &[f64], coeffs: Vec<f64>, shift: f64) -> Self {
        assert_eq!(coeffs.len(), MONOMIALS.len());
        let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit: Vec<f64> = e.iter().map(|x| x / n).collect();
        OrbitPolynomial {
            rank: space.rank(),
            orbit: space.weyl_group().orbit(&unit),
            coeffs,
            shift,
        }
    }

    /// A random member with the given `|r|^2` shift.
    pub fn random<R: Rng + ?Sized>(space: &SymmetricSpace, rng: &mut R, shift: f64) -> Self {
        let e: Vec<f64> = (0..space.rank()).map(|_| gaussian(rng)).collect();
        let coeffs = (0..MONOMIALS.len())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        Self::new(space, &e, coeffs, shift)
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn with_shift(&self, shift: f64) -> Self {
        OrbitPolynomial {
            shift,
            ..self.clone()
        }
    }

    fn eval<T: crate::expr::Scalar>(&self, x: &[T]) -> T {
        let zero = x[0].lift(0.0);
        let mut s = vec![zero; 7];
        s[0] = x[0].lift(1.0);
        for w in &self.orbit {
            let mut v = zero;
            for (wi, xi) in w.iter().zip(x) {
                v = v + xi.lift(*wi) * *xi;
            }
            for k in (1..=6).rev() {
                s[k] = s[k] + s[k - 1] * v;
            }
        }
        let mut r2 = zero;
        for xi in x {
            r2 = r2 + *xi * *xi;
        }
        let mut acc = r2 * x[0].lift(self.shift);
        for (c, m) in self.coeffs.iter().zip(MONOMIALS.iter()) {
            let mut term = x[0].lift(*c);
            for (k, &p) in m.iter().enumerate() {
                if p > 0 {
                    term = term * s[k + 2].powi(p as i32);
                }
            }
            acc = acc + term;
        }
        acc
    }
}

impl RadialFunction for OrbitPolynomial {
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
        format!("orbit polynomial (shift {})", self.shift)
    }
}

/// Random points of the open chamber with norm in `[lo, hi]` and at least
/// `margin` away from every wall (relative to the norm).
pub fn random_chamber_points<R: Rng + ?Sized>(
    space: &SymmetricSpace,
    rng: &mut R,
    count: usize,
    lo: f64,
    hi: f64,
    margin: f64,
) -> Vec<Vec<f64>> {
    let chamber = space.chamber();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<f64> = (0..space.rank()).map(|_| gaussian(rng)).collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rad = rng.random_range(lo..=hi);
        let r: Vec<f64> = g.iter().map(|x| x / n * rad).collect();
        let r = crate::catalog::chamber_project(space, &r);
        if chamber.wall_margin(&r) > margin * rad {
            out.push(r);
        }
    }
    out
}
