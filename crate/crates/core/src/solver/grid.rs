//! Lattice grids on the closed Weyl chamber intersected with a ball.
//!
//! Nodes are `h * sum_i n_i e_i` with `n_i >= 0`, where the axes `e_i` are
//! the fundamental weights scaled so the longest has unit length. The
//! lattice is Weyl invariant, so stencil points that leave the chamber are
//! reflected back onto lattice nodes. Second differences are taken along
//! `e_i` and `e_i - e_j`; for A2 these six directions are a single Weyl
//! orbit pair and the stencil is the hexagonal one.

use std::collections::HashMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::catalog::{chamber_project, SymmetricSpace};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs radius > 0 and at least 3 nodes per axis (got R = {radius}, {nodes} nodes)")]
    Size { radius: f64, nodes: usize },
    #[error("reflected stencil point {0:?} is not a lattice node")]
    OffLattice(Vec<f64>),
    #[error("grid has no interior nodes")]
    NoInterior,
}

#[derive(Debug, Clone)]
pub struct GridNode {
    pub lattice: Vec<i64>,
    pub coords: Vec<f64>,
    /// Some stencil point lies outside the ball; the value is prescribed.
    pub dirichlet: bool,
    /// Indices of the `+v, -v` neighbors per stencil direction, after
    /// reflection into the chamber. Empty for Dirichlet nodes.
    pub neighbors: Vec<[usize; 2]>,
    /// Stencil points that were reflected, as `(direction, sign)`.
    pub ghosts: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct ChamberGrid {
    rank: usize,
    radius: f64,
    spacing: f64,
    axes: DMatrix<f64>,
    axes_inv: DMatrix<f64>,
    /// Stencil directions in lattice coordinates: the axes, then `e_i - e_j`.
    directions: Vec<Vec<i64>>,
    nodes: Vec<GridNode>,
}

/// Fundamental weights `w_i` with `2 <w_i, a_j> / |a_j|^2 = delta_ij`, as
/// columns.
fn fundamental_weights(space: &SymmetricSpace) -> DMatrix<f64> {
    let simple = space.simple_roots();
    let m = space.rank();
    let coroots = DMatrix::from_fn(m, m, |j, k| 2.0 * simple[j].alpha[k] / simple[j].norm_sq());
    coroots
        .try_inverse()
        .expect("simple roots are a basis of the dual of a")
}

impl ChamberGrid {
    /// Grid on the ball of radius `radius` with `nodes_per_axis` lattice
    /// points along each axis, that is spacing `radius / (nodes_per_axis - 1)`.
    pub fn new(space: &SymmetricSpace, radius: f64, nodes_per_axis: usize) -> Result<Self, GridError> {
        if !(radius > 0.0 && radius.is_finite()) || nodes_per_axis < 3 {
            return Err(GridError::Size {
                radius,
                nodes: nodes_per_axis,
            });
        }
        let m = space.rank();
        let w = fundamental_weights(space);
        let longest = (0..m).map(|i| w.column(i).norm()).fold(0.0, f64::max);
        let axes = w / longest;
        let axes_inv = axes.clone().try_inverse().expect("axes are a basis");
        let spacing = radius / (nodes_per_axis - 1) as f64;
        let mut directions: Vec<Vec<i64>> = Vec::new();
        for i in 0..m {
            let mut v = vec![0; m];
            v[i] = 1;
            directions.push(v);
        }
        for i in 0..m {
            for j in i + 1..m {
                let mut v = vec![0; m];
                v[i] = 1;
                v[j] = -1;
                directions.push(v);
            }
        }
        let cap = radius * (1.0 + 1e-12);
        let to_coords = |n: &[i64]| -> Vec<f64> {
            (0..m)
                .map(|a| spacing * (0..m).map(|i| axes[(a, i)] * n[i] as f64).sum::<f64>())
                .collect()
        };
        let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();

        // enumerate lattice points, last coordinate slowest
        let n_max = nodes_per_axis as i64 - 1;
        let mut lattice: Vec<Vec<i64>> = Vec::new();
        let mut cur = vec![0i64; m];
        loop {
            if norm(&to_coords(&cur)) <= cap {
                lattice.push(cur.clone());
            }
            let mut k = 0;
            loop {
                if k == m {
                    break;
                }
                cur[k] += 1;
                if cur[k] <= n_max {
                    break;
                }
                cur[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
        }
        let index: HashMap<Vec<i64>, usize> = lattice.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();

        let mut nodes = Vec::with_capacity(lattice.len());
        for n in &lattice {
            let coords = to_coords(n);
            let mut neighbors = Vec::with_capacity(directions.len());
            let mut ghosts = Vec::new();
            let mut dirichlet = false;
            'dirs: for (d, v) in directions.iter().enumerate() {
                let mut pair = [0usize; 2];
                for (s, sign) in [1i64, -1].into_iter().enumerate() {
                    let q: Vec<i64> = n.iter().zip(v).map(|(a, b)| a + sign * b).collect();
                    let rq = to_coords(&q);
                    if norm(&rq) > cap {
                        dirichlet = true;
                        break 'dirs;
                    }
                    pair[s] = if q.iter().all(|&x| x >= 0) {
                        index[&q]
                    } else {
                        ghosts.push((d, s));
                        let back = chamber_project(space, &rq);
                        let lat = Self::lattice_of(&axes_inv, spacing, &back)?;
                        *index.get(&lat).ok_or_else(|| GridError::OffLattice(back.clone()))?
                    };
                }
                neighbors.push(pair);
            }
            if dirichlet {
                neighbors.clear();
                ghosts.clear();
            }
            nodes.push(GridNode {
                lattice: n.clone(),
                coords,
                dirichlet,
                neighbors,
                ghosts,
            });
        }
        if nodes.iter().all(|n| n.dirichlet) {
            return Err(GridError::NoInterior);
        }
        Ok(ChamberGrid {
            rank: m,
            radius,
            spacing,
            axes,
            axes_inv,
            directions,
            nodes,
        })
    }

    fn lattice_of(axes_inv: &DMatrix<f64>, spacing: f64, r: &[f64]) -> Result<Vec<i64>, GridError> {
        let m = r.len();
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let s: f64 = (0..m).map(|a| axes_inv[(i, a)] * r[a]).sum::<f64>() / spacing;
            let k = s.round();
            if (s - k).abs() > 1e-6 {
                return Err(GridError::OffLattice(r.to_vec()));
            }
            out.push(k as i64);
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Columns are the lattice axes in chamber coordinates.
    pub fn axes(&self) -> &DMatrix<f64> {
        &self.axes
    }

    pub fn axes_inv(&self) -> &DMatrix<f64> {
        &self.axes_inv
    }

    pub fn directions(&self) -> &[Vec<i64>] {
        &self.directions
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.dirichlet).count()
    }

    /// Largest mismatch between the stored ghost mapping and an explicit
    /// reflection of each ghost point, measured on the values `u`: for each
    /// ghost, reflect across the first violated simple wall until the point
    /// is back in the chamber and compare `u` there with `u` at the stored
    /// node.
    pub fn reflection_residual(&self, space: &SymmetricSpace, u: &[f64]) -> f64 {
        let simple = space.simple_roots();
        let mut worst: f64 = 0.0;
        for node in &self.nodes {
            for &(d, s) in &node.ghosts {
                let sign = if s == 0 { 1.0 } else { -1.0 };
                let v = &self.directions[d];
                let mut r: Vec<f64> = (0..self.rank)
                    .map(|a| {
                        node.coords[a]
                            + sign * self.spacing * (0..self.rank).map(|i| self.axes[(a, i)] * v[i] as f64).sum::<f64>()
                    })
                    .collect();
                for _ in 0..64 {
                    let hit = simple.iter().find(|al| al.eval(&r) < -1e-12 * self.spacing);
                    match hit {
                        Some(al) => {
                            let c = 2.0 * al.eval(&r) / al.norm_sq();
                            for (x, a) in r.iter_mut().zip(&al.alpha) {
                                *x -= c * a;
                            }
                        }
                        None => break,
                    }
                }
                let stored = node.neighbors[d][s];
                let found = Self::lattice_of(&self.axes_inv, self.spacing, &r)
                    .ok()
                    .and_then(|lat| self.nodes.iter().position(|n| n.lattice == lat));
                worst = worst.max(match found {
                    Some(i) => (u[i] - u[stored]).abs(),
                    None => f64::INFINITY,
                });
            }
        }
        worst
    }
}
