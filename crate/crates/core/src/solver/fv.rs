//! Node-centred finite volumes on the parameter grid.
//!
//! Node `k` owns the cell between the midpoints to its neighbours; end nodes
//! of bounded axes own half cells. With trapezoid weights the cell sizes are
//! the quadrature weights, so `Σ w √G div` telescopes to the boundary fluxes.

use crate::geometry::Geometry;
use crate::grid::Grid;
use crate::linalg::dot;

/// Flux through the parameter boundary of end cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryFlux {
    Zero,
    /// The node value of the flux density.
    NodeValue,
}

pub(crate) fn neighbour(grid: &Grid, a: usize, k: usize, forward: bool) -> Option<usize> {
    let (i, j) = grid.ij(k);
    let ax = &grid.axes[a];
    let m = ax.nodes();
    let c = if a == 0 { i } else { j };
    let next = if forward {
        if c + 1 < m {
            c + 1
        } else if ax.periodic {
            0
        } else {
            return None;
        }
    } else if c > 0 {
        c - 1
    } else if ax.periodic {
        m - 1
    } else {
        return None;
    };
    Some(if a == 0 { grid.idx(next, j) } else { grid.idx(i, next) })
}

/// `Σ_α ∂_α F^α` per cell, where `faces[α][k]` is the flux through the face
/// between node `k` and its `+α` neighbour and `nodes[α][k]` the node value.
pub fn face_divergence(grid: &Grid, faces: &[Vec<f64>; 2], nodes: &[Vec<f64>; 2], bc: BoundaryFlux) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..2 {
            let h = grid.axes[a].h();
            let bnd = match bc {
                BoundaryFlux::Zero => 0.0,
                BoundaryFlux::NodeValue => nodes[a][k],
            };
            let (after, after_open) = match neighbour(grid, a, k, true) {
                Some(_) => (faces[a][k], true),
                None => (bnd, false),
            };
            let (before, before_open) = match neighbour(grid, a, k, false) {
                Some(p) => (faces[a][p], true),
                None => (bnd, false),
            };
            let cell = if after_open && before_open { h } else { 0.5 * h };
            acc += (after - before) / cell;
        }
        *o = acc;
    }
    out
}

/// Face values as midpoint averages of node values.
pub fn average_faces(grid: &Grid, nodes: &[Vec<f64>; 2]) -> [Vec<f64>; 2] {
    std::array::from_fn(|a| {
        (0..grid.len())
            .map(|k| match neighbour(grid, a, k, true) {
                Some(q) => 0.5 * (nodes[a][k] + nodes[a][q]),
                None => 0.0,
            })
            .collect()
    })
}

/// `√G (g^α · q)` for a tangential vector field `q`.
pub fn contravariant_density(q: &[[f64; 3]], geo: &Geometry) -> [Vec<f64>; 2] {
    let mut out = [vec![0.0; geo.len()], vec![0.0; geo.len()]];
    for (k, m) in geo.metric.iter().enumerate() {
        let d = m.dual();
        let s = geo.sqrt_g[k];
        out[0][k] = s * dot(d[0], q[k]);
        out[1][k] = s * dot(d[1], q[k]);
    }
    out
}

/// Conservative `div_Γ q` from node-averaged face fluxes.
pub fn conservative_divergence(q: &[[f64; 3]], geo: &Geometry, bc: BoundaryFlux) -> Vec<f64> {
    let nodes = contravariant_density(q, geo);
    let faces = average_faces(&geo.grid, &nodes);
    face_divergence(&geo.grid, &faces, &nodes, bc)
        .into_iter()
        .zip(&geo.sqrt_g)
        .map(|(d, s)| d / s)
        .collect()
}

/// Flux density `√G κ g^{αβ} ∂_β f` on faces, with the normal derivative
/// taken across the face and the cross derivative averaged from nodes.
pub fn diffusive_faces(f: &[f64], kappa: &[f64], geo: &Geometry) -> [Vec<f64>; 2] {
    let grid = &geo.grid;
    let [d1, d2] = grid.gradient(f);
    let d = [d1, d2];
    std::array::from_fn(|a| {
        let b = 1 - a;
        let h = grid.axes[a].h();
        (0..grid.len())
            .map(|k| match neighbour(grid, a, k, true) {
                Some(q) => {
                    let coef = |m: usize, ab: (usize, usize)| {
                        geo.sqrt_g[m] * kappa[m] * geo.metric[m].ginv_ab[ab.0][ab.1]
                    };
                    let normal = (f[q] - f[k]) / h;
                    let cross = 0.5 * (d[b][k] + d[b][q]);
                    0.5 * (coef(k, (a, a)) + coef(q, (a, a))) * normal
                        + 0.5 * (coef(k, (a, b)) + coef(q, (a, b))) * cross
                }
                None => 0.0,
            })
            .collect()
    })
}
