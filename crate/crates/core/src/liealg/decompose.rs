//! Polar and Cartan decompositions, and the hyperbolic functions of `ad(ip)`.

use nalgebra::{DMatrix, DVector};

use super::matfun::{self, C64};
use super::{AlgebraElement, GroupElement, GroupTag, LieError, MatrixModel};

pub const POLAR_TOL: f64 = 1e-12;
pub const POLAR_MAX_ITER: usize = 100;
const MEMBERSHIP_TOL: f64 = 1e-10;

/// `x = g e^{iy}` with `g` in the compact form and `y` in `g`.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub g: GroupElement,
    pub y: AlgebraElement,
    /// Relative reconstruction residual `|g e^{iy} - x| / |x|`.
    pub residual: f64,
    pub iterations: usize,
}

/// `x = k e^{iz}` with `k` in `K` and `z` in `p`.
#[derive(Debug, Clone)]
pub struct CartanDecomposition {
    pub k: GroupElement,
    pub z: AlgebraElement,
    pub residual: f64,
}

/// The two halves of `Ad(e^{-ip}) u`.
#[derive(Debug, Clone)]
pub struct CoshSinhSplit {
    /// `cosh(ad(-ip)) u`, in `p^C`.
    pub cosh_part: AlgebraElement,
    /// `sinh(ad(-ip)) u`, in `k^C`.
    pub sinh_part: AlgebraElement,
}

/// Spectral data of `-(ad p)^2 = (ad(-ip))^2` restricted to the real basis.
struct AdSquare {
    ad_p: DMatrix<f64>,
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
}

impl AdSquare {
    fn new(model: &MatrixModel, p: &AlgebraElement) -> Self {
        let ad_p = model.ad_real(p);
        let sq = -(&ad_p * &ad_p);
        let sq = (&sq + sq.transpose()) * 0.5;
        let eig = sq.symmetric_eigen();
        AdSquare {
            ad_p,
            vals: eig.eigenvalues.map(|v| v.max(0.0)),
            vecs: eig.eigenvectors,
        }
    }

    fn spectral(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.vals.map(|v| f(v.sqrt())));
        &self.vecs * d * self.vecs.transpose()
    }

    /// `cosh(ad(ip)) = cosh(ad(-ip))`, a real symmetric operator.
    fn cosh(&self) -> DMatrix<f64> {
        self.spectral(f64::cosh)
    }

    /// `sinh(x)/x` evaluated at `ad(-ip)`.
    fn sinhc(&self) -> DMatrix<f64> {
        self.spectral(|x| if x < 1e-8 { 1.0 + x * x / 6.0 } else { x.sinh() / x })
    }
}

fn real_to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

impl MatrixModel {
    fn require_real_p(&self, p: &AlgebraElement) -> Result<(), LieError> {
        let k_res = p.k_coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if k_res > MEMBERSHIP_TOL {
            return Err(LieError::WrongSubspace {
                expected: "p",
                other: "k",
                residual: k_res,
            });
        }
        if p.imag_residual() > MEMBERSHIP_TOL {
            return Err(LieError::WrongSubspace {
                expected: "p",
                other: "ip",
                residual: p.imag_residual(),
            });
        }
        Ok(())
    }

    /// Splits `Ad(e^{-ip}) u = cosh(ad(-ip)) u + sinh(ad(-ip)) u` for `u` in
    /// `p^C`, using the spectral decomposition of `(ad(-ip))^2`.
    pub fn ad_cosh_sinh(
        &self,
        p: &AlgebraElement,
        u: &AlgebraElement,
    ) -> Result<CoshSinhSplit, LieError> {
        self.require_real_p(p)?;
        let u_k = u.k_coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if u_k > MEMBERSHIP_TOL * (1.0 + u.coeff_norm()) {
            return Err(LieError::WrongSubspace {
                expected: "p^C",
                other: "k^C",
                residual: u_k,
            });
        }
        let sq = AdSquare::new(self, p);
        let cosh = real_to_complex(&sq.cosh());
        let sinh = real_to_complex(&sq.ad_p) * real_to_complex(&sq.sinhc()) * C64::new(0.0, -1.0);
        let cosh_part = self.element(&cosh * &u.coeffs);
        let sinh_part = self.element(&sinh * &u.coeffs);

        let leak_p = cosh_part.k_coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if leak_p > MEMBERSHIP_TOL * (1.0 + cosh_part.coeff_norm()) {
            return Err(LieError::WrongSubspace {
                expected: "p^C",
                other: "k^C",
                residual: leak_p,
            });
        }
        let leak_k = sinh_part.p_coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if leak_k > MEMBERSHIP_TOL * (1.0 + sinh_part.coeff_norm()) {
            return Err(LieError::WrongSubspace {
                expected: "k^C",
                other: "p^C",
                residual: leak_k,
            });
        }
        Ok(CoshSinhSplit {
            cosh_part: self.p_part(&cosh_part),
            sinh_part: self.k_part(&sinh_part),
        })
    }

    /// Solves `cosh(ad(ip)) q = c` for `q` in `k^C` using the symmetric
    /// positive-definite restriction of `cosh(ad(ip))` to `k`.
    pub fn solve_cosh_ad(
        &self,
        p: &AlgebraElement,
        c: &AlgebraElement,
    ) -> Result<AlgebraElement, LieError> {
        self.require_real_p(p)?;
        let c_p = c.p_coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if c_p > MEMBERSHIP_TOL * (1.0 + c.coeff_norm()) {
            return Err(LieError::WrongSubspace {
                expected: "k",
                other: "p",
                residual: c_p,
            });
        }
        let sq = AdSquare::new(self, p);
        let cosh = sq.cosh();
        let kd = self.k_dim();
        let block = cosh.view((0, 0), (kd, kd)).into_owned();
        let chol = block.cholesky().ok_or(LieError::NotPositiveDefinite)?;
        let ck = c.k_coeffs();
        let re = chol.solve(&ck.map(|z| z.re));
        let im = chol.solve(&ck.map(|z| z.im));
        let mut q = DVector::<C64>::zeros(self.dim());
        for i in 0..kd {
            q[i] = C64::new(re[i], im[i]);
        }
        Ok(self.element(q))
    }

    /// Applies `cosh(ad(ip))` to an arbitrary element.
    pub fn cosh_ad(&self, p: &AlgebraElement, x: &AlgebraElement) -> Result<AlgebraElement, LieError> {
        self.require_real_p(p)?;
        let sq = AdSquare::new(self, p);
        Ok(self.element(real_to_complex(&sq.cosh()) * &x.coeffs))
    }

    /// Polar decomposition `x = g e^{iy}` in the complex group. The unitary
    /// factor comes from the Newton iteration and `iy` is the Hermitian
    /// logarithm of the positive factor.
    pub fn polar_decompose(&self, x: &GroupElement) -> Result<PolarDecomposition, LieError> {
        let pol = matfun::newton_polar(&x.matrix, POLAR_TOL, POLAR_MAX_ITER)?;
        let log_p = matfun::herm_apply(&pol.positive, |v| {
            if v > 0.0 {
                v.ln()
            } else {
                f64::NAN
            }
        });
        if log_p.iter().any(|z| !z.re.is_finite()) {
            return Err(LieError::Singular("polar positive factor"));
        }
        let y_mat = &log_p * C64::new(0.0, -1.0);
        let mut y = self.project(&y_mat)?;
        let imag = y.imag_residual();
        if imag > MEMBERSHIP_TOL * (1.0 + y.coeff_norm()) {
            return Err(LieError::WrongSubspace {
                expected: "g",
                other: "ig",
                residual: imag,
            });
        }
        y = self.element(y.coeffs.map(|z| C64::new(z.re, 0.0)));
        let g = GroupElement {
            matrix: pol.unitary,
            tag: GroupTag::Compact,
        };
        let recon = &g.matrix * matfun::expm(&(&y.matrix * C64::new(0.0, 1.0)));
        let residual = matfun::fro(&(recon - &x.matrix)) / matfun::fro(&x.matrix);
        if residual > MEMBERSHIP_TOL {
            return Err(LieError::NoConvergence {
                what: "polar reconstruction",
                residual,
            });
        }
        Ok(PolarDecomposition {
            g,
            y,
            residual,
            iterations: pol.iterations,
        })
    }

    /// Cartan decomposition `x = k e^{iz}` of an element of the noncompact
    /// dual group.
    pub fn cartan_decompose_star(&self, x: &GroupElement) -> Result<CartanDecomposition, LieError> {
        let res = self.membership_residual(&x.matrix, GroupTag::Dual);
        if res > 1e-8 {
            return Err(LieError::NotInGroup {
                group: GroupTag::Dual,
                residual: res,
            });
        }
        let pd = self.polar_decompose(x)?;
        let k_leak = pd.y.k_coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if k_leak > MEMBERSHIP_TOL * (1.0 + pd.y.coeff_norm()) {
            return Err(LieError::WrongSubspace {
                expected: "p",
                other: "k",
                residual: k_leak,
            });
        }
        let theta_k = self.involution().on_group(&pd.g.matrix)?;
        let k_res = matfun::fro(&(theta_k - &pd.g.matrix));
        if k_res > MEMBERSHIP_TOL * (self.size() as f64) {
            return Err(LieError::NotInGroup {
                group: GroupTag::Compact,
                residual: k_res,
            });
        }
        Ok(CartanDecomposition {
            k: pd.g,
            z: self.p_part(&pd.y),
            residual: pd.residual,
        })
    }
}
