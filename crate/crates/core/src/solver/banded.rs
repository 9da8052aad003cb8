//! Banded LU with partial pivoting, in the usual `kl + ku` band storage with
//! `kl` extra superdiagonals reserved for fill-in from row swaps.

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major band: entry `(i, j)` lives at `i * width + (j + kl + kl - i)`
    /// for `i - kl <= j <= i + ku + kl`.
    data: Vec<f64>,
    width: usize,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * width],
            width,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + 2 * self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band ({}, {})",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Solves `A x = b` in place, destroying the matrix. Returns `None` if a
    /// zero pivot is met.
    pub fn solve(mut self, b: &mut [f64]) -> Option<()> {
        let n = self.n;
        let kl = self.kl;
        let upper = self.ku + self.kl;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            piv[k] = p;
            let jmax = (k + upper).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.slot(k, j);
                    let c = self.slot(p, j);
                    self.data.swap(a, c);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let s = self.slot(i, k);
                let m = self.data[s] / pivot;
                self.data[s] = m;
                if m == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let src = self.get(k, j);
                    let d = self.slot(i, j);
                    self.data[d] -= m * src;
                }
            }
        }
        for k in 0..n {
            b.swap(k, piv[k]);
            let last = (k + kl).min(n - 1);
            let bk = b[k];
            for i in k + 1..=last {
                b[i] -= self.get(i, k) * bk;
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + upper).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=jmax {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
        Some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, kl, ku) in [(1, 0, 0), (7, 1, 1), (40, 3, 5), (60, 7, 2)] {
            let mut band = BandMatrix::zeros(n, kl, ku);
            let mut dense = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    // weak diagonal so that pivoting actually happens
                    let v: f64 = rng.random_range(-1.0..1.0) + if i == j { 0.1 } else { 0.0 };
                    band.add(i, j, v);
                    dense[(i, j)] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let want = dense.lu().solve(&DVector::from_vec(b.clone())).unwrap();
            let mut x = b.clone();
            band.solve(&mut x).unwrap();
            let err = x.iter().zip(want.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9 * (1.0 + want.amax()), "n={n}: {err}");
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.add(0, 0, 1.0);
        m.add(1, 1, 0.0);
        m.add(2, 2, 1.0);
        assert!(m.solve(&mut [1.0, 1.0, 1.0]).is_none());
    }
}
