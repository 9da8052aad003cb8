//! Shipped symmetric spaces and their restricted root data.
//!
//! Every descriptor carries a Killing-orthonormal basis of the maximal
//! abelian subspace `a` (so chamber coordinates `r_i` are Killing
//! coordinates), the positive restricted roots with their multiplicities,
//! the Weyl group as explicit matrices, and a spectral chart that recovers
//! chamber coordinates of a `K`-orbit in `p` from matrix eigenvalues.

mod models;
mod roots;
mod weyl;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::liealg::{matfun, AlgebraElement, CMat, LieError, MatrixModel, C64};

pub use roots::{restricted_roots, RestrictedRoot};
pub use weyl::{chamber_project, WeylChamber, WeylGroup};

/// Canonical names of the shipped spaces.
pub const CATALOG: &[&str] = &[
    "S2",
    "SO(3)/SO(2)",
    "S3",
    "S4",
    "S5",
    "SU(3)/SO(3)",
    "group:SU(2)",
    "group:SU(3)",
];

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown space '{0}'")]
    UnknownSpace(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("subspace a is not abelian (bracket residual {0:.3e})")]
    NotAbelian(f64),
    #[error("subspace a is not maximal abelian (centralizer dimension {found}, rank {rank})")]
    NotMaximal { found: usize, rank: usize },
    #[error("root extraction failed after {attempts} attempts: {reason}")]
    RootExtraction { attempts: usize, reason: String },
    #[error("restricted root invariant violated: {0}")]
    RootInvariant(String),
    #[error("spectral chart inconsistent: {0}")]
    SpectralChart(String),
}

fn canonical(name: &str) -> Option<&'static str> {
    let n = name.trim();
    let c = match n {
        "S2" | "S2-dual" | "SU(2)/SO(2)" => "S2",
        "SO(3)/SO(2)" => "SO(3)/SO(2)",
        "S3" | "S3-dual" | "SO(4)/SO(3)" => "S3",
        "S4" | "S4-dual" | "SO(5)/SO(4)" => "S4",
        "S5" | "S5-dual" | "SO(6)/SO(5)" => "S5",
        "SU(3)/SO(3)" | "SL(3,R)/SO(3)" => "SU(3)/SO(3)",
        "group:SU(2)" => "group:SU(2)",
        "group:SU(3)" => "group:SU(3)",
        _ => return None,
    };
    Some(c)
}

/// Matrix model of `(G, K)` with validated restricted root data.
#[derive(Debug, Clone)]
pub struct SymmetricSpace {
    name: String,
    model: MatrixModel,
    a_basis: Vec<AlgebraElement>,
    p_frame: Vec<AlgebraElement>,
    p_frame_coords: DMatrix<f64>,
    is_group_case: bool,
    roots: Vec<RestrictedRoot>,
    weyl: WeylGroup,
    chart: SpectralChart,
}

/// Recovers chamber coordinates from the sorted spectrum of `iz` on the
/// model's spectral block.
#[derive(Debug, Clone)]
struct SpectralChart {
    weights: DMatrix<f64>,
    order: Vec<usize>,
    normal: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

/// Builds a shipped space by name. Aliases such as `S2-dual` name the same
/// descriptor; the noncompact dual is always available from it.
pub fn build_space(name: &str) -> Result<SymmetricSpace, CatalogError> {
    let canon = canonical(name).ok_or_else(|| CatalogError::UnknownSpace(name.to_string()))?;
    let spec = match canon {
        "S2" => models::su_over_so(2)?,
        "SO(3)/SO(2)" => models::sphere(2)?,
        "S3" => models::sphere(3)?,
        "S4" => models::sphere(4)?,
        "S5" => models::sphere(5)?,
        "SU(3)/SO(3)" => models::su_over_so(3)?,
        "group:SU(2)" => models::group_su(2)?,
        "group:SU(3)" => models::group_su(3)?,
        _ => unreachable!(),
    };
    SymmetricSpace::from_model(canon, spec.model, &spec.a_span, spec.is_group_case)
}

/// Killing metric on `p` in the model's `p` coordinates: `-B` restricted.
fn p_metric(model: &MatrixModel) -> DMatrix<f64> {
    let r = model.p_range();
    -model
        .killing_gram()
        .view((r.start, r.start), (r.len(), r.len()))
        .into_owned()
}

fn orthonormalize(vectors: &[DVector<f64>], metric: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = (q.transpose() * metric * &w)[(0, 0)];
                w -= q * c;
            }
        }
        let n2 = (w.transpose() * metric * &w)[(0, 0)];
        if n2 > 1e-20 {
            out.push(w / n2.sqrt());
        }
    }
    out
}

impl SymmetricSpace {
    pub fn from_model(
        name: &str,
        model: MatrixModel,
        a_span: &[CMat],
        is_group_case: bool,
    ) -> Result<Self, CatalogError> {
        let metric = p_metric(&model);
        let a_coords: Vec<DVector<f64>> = a_span
            .iter()
            .map(|m| {
                model
                    .project(m)
                    .map(|el| DVector::from_vec(el.p_real()))
            })
            .collect::<Result<_, _>>()?;
        let a_orth = orthonormalize(&a_coords, &metric);
        let rank = a_orth.len();
        let mut frame_in: Vec<DVector<f64>> = a_orth.clone();
        for j in 0..model.p_dim() {
            let mut e = DVector::zeros(model.p_dim());
            e[j] = 1.0;
            frame_in.push(e);
        }
        let frame = orthonormalize(&frame_in, &metric);
        assert_eq!(frame.len(), model.p_dim());
        let mut p_frame_coords = DMatrix::zeros(model.p_dim(), model.p_dim());
        for (j, v) in frame.iter().enumerate() {
            p_frame_coords.set_column(j, v);
        }
        let a_basis: Vec<AlgebraElement> = a_orth
            .iter()
            .map(|v| model.p_element(v.as_slice()))
            .collect();
        let p_frame: Vec<AlgebraElement> =
            frame.iter().map(|v| model.p_element(v.as_slice())).collect();

        check_abelian(&model, &a_basis)?;
        check_maximal(&model, &a_basis)?;

        let roots = roots::extract_roots(&model, &a_basis, 0)?;
        let weyl = WeylGroup::generate(&roots, rank);
        let chart = SpectralChart::build(&model, &a_basis, &roots)?;
        let space = SymmetricSpace {
            name: name.to_string(),
            model,
            a_basis,
            p_frame,
            p_frame_coords,
            is_group_case,
            roots,
            weyl,
            chart,
        };
        roots::validate_roots(&space, &space.roots, 10)?;
        Ok(space)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &MatrixModel {
        &self.model
    }

    pub fn rank(&self) -> usize {
        self.a_basis.len()
    }

    pub fn p_dim(&self) -> usize {
        self.model.p_dim()
    }

    pub fn is_group_case(&self) -> bool {
        self.is_group_case
    }

    /// Killing-orthonormal basis of `a`.
    pub fn a_basis(&self) -> &[AlgebraElement] {
        &self.a_basis
    }

    /// Killing-orthonormal basis of `p` whose first `rank` vectors span `a`.
    pub fn p_frame(&self) -> &[AlgebraElement] {
        &self.p_frame
    }

    /// Positive restricted roots, sorted lexicographically by covector.
    pub fn roots(&self) -> &[RestrictedRoot] {
        &self.roots
    }

    pub fn weyl_group(&self) -> &WeylGroup {
        &self.weyl
    }

    pub fn chamber(&self) -> WeylChamber {
        WeylChamber {
            positive_roots: self.roots.clone(),
            rank: self.rank(),
        }
    }

    /// Sum of root multiplicities; equals `dim p - rank`.
    pub fn angular_dim(&self) -> usize {
        self.roots.iter().map(|r| r.d_alpha).sum()
    }

    /// The element `sum r_i A_i` of `a`.
    pub fn a_element(&self, r: &[f64]) -> AlgebraElement {
        assert_eq!(r.len(), self.rank());
        let mut acc = self.model.zero();
        for (ri, a) in r.iter().zip(&self.a_basis) {
            acc = acc.add(&a.scale(C64::new(*ri, 0.0)));
        }
        acc
    }

    /// Element of `p` from coordinates in the Killing-orthonormal frame.
    pub fn p_from_frame(&self, coords: &[f64]) -> AlgebraElement {
        let v = &self.p_frame_coords * DVector::from_column_slice(coords);
        self.model.p_element(v.as_slice())
    }

    /// Killing-orthonormal frame coordinates of an element of `p`.
    pub fn frame_coords(&self, z: &AlgebraElement) -> Vec<f64> {
        let metric = p_metric(&self.model);
        let v = DVector::from_vec(z.p_real());
        let c = self.p_frame_coords.transpose() * metric * v;
        c.iter().copied().collect()
    }

    /// Chamber coordinates of the `K`-orbit through `z` in `p`.
    pub fn radial_coords(&self, z: &AlgebraElement) -> Vec<f64> {
        let iz = &z.matrix * C64::new(0.0, 1.0);
        self.radial_from_hermitian(&iz)
    }

    /// Chamber coordinates from a Hermitian matrix `G`-conjugate to `iz`
    /// with `z` in `p`.
    pub fn radial_from_hermitian(&self, m: &CMat) -> Vec<f64> {
        let b = self.model.spectral_block();
        let block = m.view((b.start, b.start), (b.len(), b.len())).into_owned();
        let mut eig = matfun::herm_eigenvalues(&block);
        eig.reverse();
        self.chart.recover(&eig, self)
    }

    /// Chamber coordinates from a positive Hermitian matrix `G`-conjugate to
    /// `e^{c iz}`; `power` is the exponent `c`.
    pub fn radial_from_positive(&self, m: &CMat, power: f64) -> Vec<f64> {
        let b = self.model.spectral_block();
        let block = m.view((b.start, b.start), (b.len(), b.len())).into_owned();
        let mut eig: Vec<f64> = matfun::herm_eigenvalues(&block)
            .into_iter()
            .map(|v| v.max(f64::MIN_POSITIVE).ln() / power)
            .collect();
        eig.reverse();
        self.chart.recover(&eig, self)
    }

    /// Weights of `i a` on the spectral block, one row per eigenvector; the
    /// spectrum of `i a_element(r)` there is `weights * r`.
    pub fn spectral_weights(&self) -> &DMatrix<f64> {
        &self.chart.weights
    }

    /// Simple roots of the positive system: positive roots that are not a
    /// sum of two positive roots.
    pub fn simple_roots(&self) -> Vec<&RestrictedRoot> {
        let rs = &self.roots;
        rs.iter()
            .filter(|a| {
                !rs.iter().any(|b| {
                    rs.iter().any(|c| {
                        a.alpha
                            .iter()
                            .zip(b.alpha.iter().zip(&c.alpha))
                            .all(|(x, (y, z))| (x - y - z).abs() < 1e-9)
                    })
                })
            })
            .collect()
    }
}

fn check_abelian(model: &MatrixModel, a: &[AlgebraElement]) -> Result<(), CatalogError> {
    let mut worst: f64 = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let br = model.bracket(&a[i], &a[j])?;
            worst = worst.max(br.coeff_norm());
        }
    }
    if worst > 1e-12 {
        return Err(CatalogError::NotAbelian(worst));
    }
    Ok(())
}

/// Dimension of the centralizer of `a` inside `p`.
pub(crate) fn centralizer_dim(model: &MatrixModel, a: &[AlgebraElement]) -> usize {
    let kd = model.k_dim();
    let pd = model.p_dim();
    let mut stacked = DMatrix::<f64>::zeros(a.len() * kd, pd);
    for (i, h) in a.iter().enumerate() {
        let ad = model.ad_real(h);
        stacked
            .view_mut((i * kd, 0), (kd, pd))
            .copy_from(&ad.view((0, kd), (kd, pd)));
    }
    let sv = stacked.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max).max(1e-300);
    let nonzero = sv.iter().filter(|&&s| s > 1e-9 * smax).count();
    pd - nonzero
}

fn check_maximal(model: &MatrixModel, a: &[AlgebraElement]) -> Result<(), CatalogError> {
    let found = centralizer_dim(model, a);
    if found != a.len() {
        return Err(CatalogError::NotMaximal {
            found,
            rank: a.len(),
        });
    }
    Ok(())
}

impl SpectralChart {
    fn build(
        model: &MatrixModel,
        a: &[AlgebraElement],
        roots: &[RestrictedRoot],
    ) -> Result<Self, CatalogError> {
        let b = model.spectral_block();
        let m = b.len();
        let rank = a.len();
        let blocks: Vec<CMat> = a
            .iter()
            .map(|h| {
                (&h.matrix * C64::new(0.0, 1.0))
                    .view((b.start, b.start), (m, m))
                    .into_owned()
            })
            .collect();
        let mut generic = CMat::zeros(m, m);
        for (i, blk) in blocks.iter().enumerate() {
            generic += blk * C64::new(1.0 / (i as f64 + std::f64::consts::PI), 0.0);
        }
        let (_, u) = matfun::herm_eigen(&generic);
        let mut weights = DMatrix::<f64>::zeros(m, rank);
        for (i, blk) in blocks.iter().enumerate() {
            let d = u.adjoint() * blk * &u;
            let off: f64 = (0..m)
                .flat_map(|x| (0..m).map(move |y| (x, y)))
                .filter(|(x, y)| x != y)
                .map(|(x, y)| d[(x, y)].norm())
                .fold(0.0, f64::max);
            if off > 1e-9 {
                return Err(CatalogError::SpectralChart(format!(
                    "a-basis not simultaneously diagonal ({off:.2e})"
                )));
            }
            for k in 0..m {
                weights[(k, i)] = d[(k, k)].re;
            }
        }
        // weight differences must vanish only on walls
        for x in 0..m {
            for y in x + 1..m {
                let diff: Vec<f64> = (0..rank).map(|i| weights[(x, i)] - weights[(y, i)]).collect();
                let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 1e-10 {
                    continue;
                }
                let parallel = roots.iter().any(|root| {
                    let an = root.norm();
                    let dot: f64 = root.alpha.iter().zip(&diff).map(|(p, q)| p * q).sum();
                    (dot.abs() - an * norm).abs() < 1e-8 * an * norm
                });
                if !parallel {
                    return Err(CatalogError::SpectralChart(
                        "weight difference not proportional to a restricted root".into(),
                    ));
                }
            }
        }
        let rho: Vec<f64> = (0..rank)
            .map(|i| roots.iter().map(|r| r.alpha[i]).sum())
            .collect();
        let w0 = &weights * DVector::from_vec(rho);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| w0[y].total_cmp(&w0[x]));
        let normal = (weights.transpose() * &weights)
            .cholesky()
            .ok_or_else(|| CatalogError::SpectralChart("weights lack full rank".into()))?;
        Ok(SpectralChart {
            weights,
            order,
            normal,
        })
    }

    fn recover(&self, eig_desc: &[f64], space: &SymmetricSpace) -> Vec<f64> {
        let m = self.order.len();
        let mut w = DVector::<f64>::zeros(m);
        for (k, &slot) in self.order.iter().enumerate() {
            w[slot] = eig_desc[k];
        }
        let r = self.normal.solve(&(self.weights.transpose() * w));
        chamber_project(space, r.as_slice())
    }
}
