//! Damped Newton solver for the reduced Monge-Ampère equation on a chamber
//! grid, the rank-one quadrature oracle, and the prescribed-Ricci pipeline.
//!
//! The discrete residual at an interior node is
//! `log det Hess u + sum_alpha d_alpha log q_alpha + log F - log f`, where
//! `q_alpha = alpha(grad u) / alpha(r)`, or `alpha^T Hess u alpha / |alpha|^2`
//! on the wall of `alpha`. Nodes whose stencil leaves the ball carry
//! Dirichlet data.

pub mod banded;
mod fit;
mod grid;
mod ode;

use std::sync::Arc;

use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::SymmetricSpace;
use crate::complexcheck::{self, ComplexError, InvariantFunctionSpec, RICCI_STEP};
use crate::jet::Jet;
use crate::radialops::{factor_f, MetricProfile, RadialFunction};

pub use banded::BandMatrix;
pub use fit::InvariantFit;
pub use grid::{ChamberGrid, GridError, GridNode};
pub use ode::{adaptive_simpson, solve_rank1_ode, Rank1Solution, QUAD_TOL};

/// Smallest line-search step before the solver gives up.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("operation needs a rank-one space, got rank {0}")]
    Rank(usize),
    #[error("invalid solver input: {0}")]
    Config(String),
    #[error("density must be positive and finite, got {value} at {at:?}")]
    NonPositiveDensity { at: Vec<f64>, value: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("initial iterate is not strictly convex on the grid (min eigenvalue {min_eigenvalue:.3e})")]
    InadmissibleStart { min_eigenvalue: f64 },
    #[error("Newton did not converge in {} iterations (residual {:.3e})", .0.iterations, .0.residual)]
    MaxIter(Box<SolutionReport>),
    #[error("line search collapsed below {MIN_STEP:e} (residual {:.3e})", .0.residual)]
    Starvation(Box<SolutionReport>),
    #[error("singular Newton matrix at iteration {0}")]
    Singular(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Target for the sup norm of the residual.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Line-search contraction factor.
    pub damping: f64,
    /// Smallest admissible eigenvalue of the Euclidean Hessian.
    pub convexity_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_iter: 50,
            damping: 0.5,
            convexity_floor: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.newton_tol > 0.0
            && self.max_iter > 0
            && self.damping > 0.0
            && self.damping < 1.0
            && self.convexity_floor > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SolverError::Config(format!(
                "tolerances must be positive and damping in (0, 1): {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeRecord {
    pub coords: Vec<f64>,
    pub u: f64,
    pub dirichlet: bool,
    pub residual: Option<f64>,
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciSample {
    pub r: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub space: String,
    pub profile: String,
    pub density: String,
    pub radius: f64,
    pub spacing: f64,
    /// How the solution is normalized.
    pub boundary: String,
    pub nodes: Vec<NodeRecord>,
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub min_eigenvalue: f64,
    pub convexity_floor: f64,
    pub converged: bool,
    pub certified: bool,
    pub ricci: Vec<RicciSample>,
}

impl SolutionReport {
    pub fn values(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.u).collect()
    }
}

/// Dirichlet data and starting iterate.
#[derive(Clone, Default)]
pub enum Boundary<'a> {
    /// `s/2 |r|^2` with `s = (mean f / mean F)^{1 / dim p}`, used both as
    /// boundary data and as the start.
    #[default]
    Seed,
    /// Dirichlet data from `values`; the start is `initial` if given, else
    /// `values` itself.
    Function {
        values: Arc<dyn RadialFunction + 'a>,
        initial: Option<Arc<dyn RadialFunction + 'a>>,
    },
}

struct RootData {
    alpha: Vec<f64>,
    /// `E^{-1} alpha`: pairs with lattice differences.
    lattice: DVector<f64>,
    norm_sq: f64,
    d: f64,
}

/// Per-node evaluation of the discrete operator.
struct Local {
    hs: DMatrix<f64>,
    gs: DVector<f64>,
}

struct NodeEval {
    residual: f64,
    min_eig: f64,
}

struct Operator<'g> {
    grid: &'g ChamberGrid,
    h: f64,
    einv: DMatrix<f64>,
    log_det_axes: f64,
    roots: Vec<RootData>,
    /// `log F - log f` per node.
    rhs: Vec<f64>,
    /// Per node, per root: node lies on the wall of the root.
    walls: Vec<Vec<bool>>,
    unknown: Vec<Option<usize>>,
}

impl<'g> Operator<'g> {
    fn new(
        space: &SymmetricSpace,
        profile: &MetricProfile,
        f: &dyn RadialFunction,
        grid: &'g ChamberGrid,
    ) -> Result<Self, SolverError> {
        let h = grid.spacing();
        let einv = grid.axes_inv().clone();
        let roots: Vec<RootData> = space
            .roots()
            .iter()
            .map(|a| RootData {
                alpha: a.alpha.clone(),
                lattice: &einv * DVector::from_column_slice(&a.alpha),
                norm_sq: a.norm_sq(),
                d: a.d_alpha as f64,
            })
            .collect();
        let fvals: Vec<f64> = grid.nodes().par_iter().map(|n| f.value(&n.coords)).collect();
        if let Some((n, &v)) = grid
            .nodes()
            .iter()
            .zip(&fvals)
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(SolverError::NonPositiveDensity {
                at: n.coords.clone(),
                value: v,
            });
        }
        let rhs = grid
            .nodes()
            .iter()
            .zip(&fvals)
            .map(|(n, fv)| factor_f(space, profile, &n.coords).ln() - fv.ln())
            .collect();
        let walls = grid
            .nodes()
            .iter()
            .map(|n| {
                roots
                    .iter()
                    .map(|a| {
                        let v: f64 = a.alpha.iter().zip(&n.coords).map(|(x, y)| x * y).sum();
                        v.abs() <= 1e-9 * a.norm_sq.sqrt() * h
                    })
                    .collect()
            })
            .collect();
        let mut next = 0;
        let unknown = grid
            .nodes()
            .iter()
            .map(|n| {
                if n.dirichlet {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        Ok(Operator {
            grid,
            h,
            log_det_axes: grid.axes().determinant().abs().ln(),
            einv,
            roots,
            rhs,
            walls,
            unknown,
        })
    }

    fn local(&self, u: &[f64], i: usize) -> Local {
        let node = &self.grid.nodes()[i];
        let m = self.grid.rank();
        let h2 = self.h * self.h;
        let u0 = u[i];
        let second: Vec<f64> = node.neighbors.iter().map(|[p, q]| u[*p] - 2.0 * u0 + u[*q]).collect();
        let mut hs = DMatrix::zeros(m, m);
        let mut k = m;
        for a in 0..m {
            hs[(a, a)] = second[a] / h2;
        }
        for a in 0..m {
            for b in a + 1..m {
                let v = (second[a] + second[b] - second[k]) / (2.0 * h2);
                hs[(a, b)] = v;
                hs[(b, a)] = v;
                k += 1;
            }
        }
        let gs = DVector::from_fn(m, |a, _| {
            let [p, q] = node.neighbors[a];
            (u[p] - u[q]) / (2.0 * self.h)
        });
        Local { hs, gs }
    }

    /// `q_alpha` per root at node `i`.
    fn ratios(&self, i: usize, loc: &Local) -> Vec<f64> {
        let r = &self.grid.nodes()[i].coords;
        self.roots
            .iter()
            .zip(&self.walls[i])
            .map(|(a, &wall)| {
                if wall {
                    (a.lattice.transpose() * &loc.hs * &a.lattice)[(0, 0)] / a.norm_sq
                } else {
                    let ar: f64 = a.alpha.iter().zip(r).map(|(x, y)| x * y).sum();
                    a.lattice.dot(&loc.gs) / ar
                }
            })
            .collect()
    }

    fn euclidean_hessian(&self, loc: &Local) -> DMatrix<f64> {
        self.einv.transpose() * &loc.hs * &self.einv
    }

    fn eval_node(&self, u: &[f64], i: usize) -> NodeEval {
        let loc = self.local(u, i);
        let hess = self.euclidean_hessian(&loc);
        let mut min_eig = hess.clone().symmetric_eigenvalues().min();
        let q = self.ratios(i, &loc);
        for v in &q {
            min_eig = min_eig.min(*v);
        }
        if !(min_eig > 0.0) {
            return NodeEval {
                residual: f64::INFINITY,
                min_eig,
            };
        }
        let mut g = loc.hs.determinant().ln() - 2.0 * self.log_det_axes + self.rhs[i];
        for (a, v) in self.roots.iter().zip(&q) {
            g += a.d * v.ln();
        }
        NodeEval { residual: g, min_eig }
    }

    fn evaluate(&self, u: &[f64]) -> Vec<Option<NodeEval>> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                if self.grid.nodes()[i].dirichlet {
                    None
                } else {
                    Some(self.eval_node(u, i))
                }
            })
            .collect()
    }

    /// Row of the Jacobian at node `i` as `(node, value)` pairs.
    fn jacobian_row(&self, u: &[f64], i: usize) -> Vec<(usize, f64)> {
        let node = &self.grid.nodes()[i];
        let m = self.grid.rank();
        let loc = self.local(u, i);
        let h2 = self.h * self.h;
        let mut cs = loc.hs.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(m, m));
        let mut cg = DVector::zeros(m);
        for (a, &wall) in self.roots.iter().zip(&self.walls[i]) {
            if wall {
                let q = (a.lattice.transpose() * &loc.hs * &a.lattice)[(0, 0)];
                cs += &a.lattice * a.lattice.transpose() * (a.d / q);
            } else {
                cg += &a.lattice * (a.d / a.lattice.dot(&loc.gs));
            }
        }
        let ndir = node.neighbors.len();
        let mut w = vec![0.0; ndir];
        let mut c = vec![0.0; ndir];
        let mut k = m;
        for a in 0..m {
            w[a] += cs[(a, a)] / h2;
            c[a] = cg[a] / (2.0 * self.h);
        }
        for a in 0..m {
            for b in a + 1..m {
                w[a] += cs[(a, b)] / h2;
                w[b] += cs[(a, b)] / h2;
                w[k] -= cs[(a, b)] / h2;
                k += 1;
            }
        }
        let mut row = Vec::with_capacity(2 * ndir + 1);
        let mut diag = 0.0;
        for (d, [p, q]) in node.neighbors.iter().enumerate() {
            row.push((*p, w[d] + c[d]));
            row.push((*q, w[d] - c[d]));
            diag -= 2.0 * w[d];
        }
        row.push((i, diag));
        row
    }

    fn newton_step(&self, u: &[f64], g: &[f64], iteration: usize) -> Result<Vec<f64>, SolverError> {
        let rows: Vec<(usize, Vec<(usize, f64)>)> = (0..self.grid.len())
            .into_par_iter()
            .filter_map(|i| self.unknown[i].map(|row| (row, self.jacobian_row(u, i))))
            .collect();
        let n = rows.len();
        let (mut kl, mut ku) = (0usize, 0usize);
        for (row, entries) in &rows {
            for (node, _) in entries {
                if let Some(col) = self.unknown[*node] {
                    if col < *row {
                        kl = kl.max(row - col);
                    } else {
                        ku = ku.max(col - row);
                    }
                }
            }
        }
        let mut band = BandMatrix::zeros(n, kl, ku);
        for (row, entries) in &rows {
            for (node, v) in entries {
                if let Some(col) = self.unknown[*node] {
                    band.add(*row, col, *v);
                }
            }
        }
        let mut rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        band.solve(&mut rhs).ok_or(SolverError::Singular(iteration))?;
        Ok(rhs)
    }
}

fn sup(evals: &[Option<NodeEval>]) -> (f64, f64) {
    let mut res: f64 = 0.0;
    let mut eig = f64::INFINITY;
    for e in evals.iter().flatten() {
        res = res.max(e.residual.abs());
        eig = eig.min(e.min_eig);
    }
    (res, eig)
}

/// Solves the reduced equation `M_g(u) = f` on `grid` by damped Newton.
pub fn solve_newton(
    space: &SymmetricSpace,
    profile: &MetricProfile,
    f: &dyn RadialFunction,
    grid: &ChamberGrid,
    config: &SolverConfig,
    boundary: &Boundary<'_>,
) -> Result<SolutionReport, SolverError> {
    config.validate()?;
    if grid.rank() != space.rank() {
        return Err(SolverError::Config(format!(
            "grid rank {} does not match space rank {}",
            grid.rank(),
            space.rank()
        )));
    }
    let op = Operator::new(space, profile, f, grid)?;
    let nodes = grid.nodes();
    let (mut u, boundary_note) = match boundary {
        Boundary::Seed => {
            let n = nodes.len() as f64;
            let mean_f = nodes.iter().map(|x| f.value(&x.coords)).sum::<f64>() / n;
            let mean_fac = nodes.iter().map(|x| factor_f(space, profile, &x.coords)).sum::<f64>() / n;
            let s = (mean_f / mean_fac).powf(1.0 / space.p_dim() as f64);
            let u: Vec<f64> = nodes
                .iter()
                .map(|x| 0.5 * s * x.coords.iter().map(|c| c * c).sum::<f64>())
                .collect();
            (u, format!("Dirichlet data {s:.6}/2 |r|^2 on nodes whose stencil leaves |r| <= {}", grid.radius()))
        }
        Boundary::Function { values, initial } => {
            let start = initial.as_ref().unwrap_or(values);
            let u = nodes
                .iter()
                .map(|x| {
                    if x.dirichlet {
                        values.value(&x.coords)
                    } else {
                        start.value(&x.coords)
                    }
                })
                .collect();
            (
                u,
                format!(
                    "Dirichlet data from {} on nodes whose stencil leaves |r| <= {}",
                    values.label(),
                    grid.radius()
                ),
            )
        }
    };

    let mut evals = op.evaluate(&u);
    let (mut res, mut min_eig) = sup(&evals);
    if !(min_eig >= config.convexity_floor) || !res.is_finite() {
        return Err(SolverError::InadmissibleStart { min_eigenvalue: min_eig });
    }
    let mut history = vec![res];
    let mut iterations = 0;
    let report = |u: &[f64], evals: &[Option<NodeEval>], history: &[f64], iterations: usize, converged: bool| {
        let (res, min_eig) = sup(evals);
        SolutionReport {
            space: space.name().to_string(),
            profile: profile.name(),
            density: f.label(),
            radius: grid.radius(),
            spacing: grid.spacing(),
            boundary: boundary_note.clone(),
            nodes: nodes
                .iter()
                .zip(u)
                .zip(evals)
                .map(|((n, v), e)| NodeRecord {
                    coords: n.coords.clone(),
                    u: *v,
                    dirichlet: n.dirichlet,
                    residual: e.as_ref().map(|e| e.residual),
                    min_eigenvalue: e.as_ref().map(|e| e.min_eig),
                })
                .collect(),
            residual: res,
            iterations,
            residual_history: history.to_vec(),
            min_eigenvalue: min_eig,
            convexity_floor: config.convexity_floor,
            converged,
            certified: converged && min_eig >= config.convexity_floor,
            ricci: Vec::new(),
        }
    };

    while res >= config.newton_tol {
        if iterations == config.max_iter {
            return Err(SolverError::MaxIter(Box::new(report(&u, &evals, &history, iterations, false))));
        }
        let g: Vec<f64> = evals.iter().flatten().map(|e| e.residual).collect();
        let delta = op.newton_step(&u, &g, iterations)?;
        let mut t = 1.0;
        loop {
            let mut trial = u.clone();
            for (i, slot) in op.unknown.iter().enumerate() {
                if let Some(k) = slot {
                    trial[i] += t * delta[*k];
                }
            }
            let trial_evals = op.evaluate(&trial);
            let (tr, te) = sup(&trial_evals);
            if tr < res && te >= config.convexity_floor {
                u = trial;
                evals = trial_evals;
                res = tr;
                min_eig = te;
                break;
            }
            t *= config.damping;
            if t < MIN_STEP {
                return Err(SolverError::Starvation(Box::new(report(
                    &u,
                    &evals,
                    &history,
                    iterations,
                    false,
                ))));
            }
        }
        iterations += 1;
        history.push(res);
        debug!("newton {iterations}: residual {res:.3e}, step {t}, min eigenvalue {min_eig:.3e}");
    }
    info!(
        "{}: converged in {iterations} iterations, residual {res:.3e}, {} nodes",
        space.name(),
        nodes.len()
    );
    Ok(report(&u, &evals, &history, iterations, true))
}

/// Density for the prescribed-Ricci solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RicciDensity {
    /// `e^h prod cosh(alpha)^{2 d_alpha}`: the density whose solution has
    /// Ricci form `-i d dbar h`.
    VolumeCorrected,
    /// `e^h` as it stands.
    Plain,
}

struct RicciRhs<'a> {
    h: Arc<dyn RadialFunction + 'a>,
    roots: Vec<(Vec<f64>, f64)>,
    kind: RicciDensity,
}

impl RadialFunction for RicciRhs<'_> {
    fn rank(&self) -> usize {
        self.h.rank()
    }

    fn jet(&self, r: &[f64]) -> Jet {
        let mut log = self.h.jet(r);
        if self.kind == RicciDensity::VolumeCorrected {
            for (alpha, d) in &self.roots {
                let a = Jet::linear(alpha, r);
                log = log + a.cosh().ln().scale(2.0 * d);
            }
        }
        log.exp()
    }

    fn label(&self) -> String {
        match self.kind {
            RicciDensity::VolumeCorrected => format!("exp({}) prod cosh(alpha)^(2 d)", self.h.label()),
            RicciDensity::Plain => format!("exp({})", self.h.label()),
        }
    }
}

/// Options of the Ricci pipeline beyond the solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct RicciOptions {
    pub density: RicciDensity,
    /// Total degree of the invariant fit used to evaluate `u` off the grid.
    pub fit_degree: usize,
    /// Inner step of the nested Ricci stencil.
    pub step: f64,
}

impl Default for RicciOptions {
    fn default() -> Self {
        RicciOptions {
            density: RicciDensity::VolumeCorrected,
            fit_degree: 24,
            step: RICCI_STEP,
        }
    }
}

/// Chamber points at `0.35 R`, `0.5 R`, `0.65 R` along the chamber's
/// central direction.
pub fn ricci_sample_points(grid: &ChamberGrid) -> Vec<Vec<f64>> {
    let m = grid.rank();
    let axes = grid.axes();
    let mut dir: Vec<f64> = (0..m).map(|a| (0..m).map(|i| axes[(a, i)]).sum()).collect();
    let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|x| *x /= n);
    [0.35, 0.5, 0.65]
        .iter()
        .map(|t| dir.iter().map(|x| x * t * grid.radius()).collect())
        .collect()
}

/// Solves `M_g(u) = f(h)` for the dual geometry and samples the Ricci
/// residual of the resulting potential against `h`.
pub fn prescribe_ricci<'a>(
    space: &SymmetricSpace,
    h: Arc<dyn RadialFunction + 'a>,
    grid: &ChamberGrid,
    config: &SolverConfig,
    options: &RicciOptions,
) -> Result<(SolutionReport, InvariantFit), SolverError> {
    for n in grid.nodes() {
        let v = h.value(&n.coords);
        if !v.is_finite() {
            return Err(SolverError::Config(format!("h is not finite at {:?}", n.coords)));
        }
    }
    let rhs = RicciRhs {
        h: h.clone(),
        roots: space.roots().iter().map(|a| (a.alpha.clone(), a.d_alpha as f64)).collect(),
        kind: options.density,
    };
    let mut report = solve_newton(space, &MetricProfile::Hyperbolic, &rhs, grid, config, &Boundary::Seed)?;
    let points: Vec<Vec<f64>> = grid.nodes().iter().map(|n| n.coords.clone()).collect();
    let fit = InvariantFit::fit(space, &points, &report.values(), grid.radius(), options.fit_degree)?;
    let potential = InvariantFunctionSpec::new(space, Arc::new(fit.clone()));
    let target = InvariantFunctionSpec::new(space, h);
    for r in ricci_sample_points(grid) {
        let p = space.frame_coords(&space.a_element(&r));
        let residual = complexcheck::ricci_residual(&potential, &target, &p, options.step)?;
        report.ricci.push(RicciSample { r, residual });
    }
    Ok((report, fit))
}
