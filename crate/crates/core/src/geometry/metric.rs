use super::domain::{BoundarySegment, ParamDomain};
use super::flowmap::{FlowMapSpec, Jet};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{add, cross, dot, norm, normalize, projector, scale, sub, Mat3, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// First- and second-order geometric data at one point of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricState {
    pub g1: Vec3,
    pub g2: Vec3,
    pub g_ab: [[f64; 2]; 2],
    pub ginv_ab: [[f64; 2]; 2],
    /// `G = g11 g22 - g12 g21`
    pub big_g: f64,
    pub n: Vec3,
    pub p: Mat3,
    /// Mean curvature `g^{αβ} n·∂²x̂/∂X_α∂X_β`; `-2` on the unit sphere with outward normal.
    pub h: f64,
    /// Outer co-normal, set only at boundary nodes.
    pub nu: Option<Vec3>,
}

impl MetricState {
    /// Assembles the metric package from tangents and second derivatives.
    pub fn from_derivatives(
        x_a: [Vec3; 2],
        x_ab: [[Vec3; 2]; 2],
        lambda2: f64,
        at: ([f64; 2], f64),
    ) -> Result<Self> {
        let [g1, g2] = x_a;
        let g11 = dot(g1, g1);
        let g12 = dot(g1, g2);
        let g22 = dot(g2, g2);
        let big_g = g11 * g22 - g12 * g12;
        if !(big_g >= lambda2) {
            return Err(Error::SingularMetric {
                g: big_g,
                lambda: lambda2,
                x1: at.0[0],
                x2: at.0[1],
                t: at.1,
            });
        }
        let ginv = [[g22 / big_g, -g12 / big_g], [-g12 / big_g, g11 / big_g]];
        let n = normalize(cross(g1, g2));
        let mut h = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                h += ginv[a][b] * dot(n, x_ab[a][b]);
            }
        }
        Ok(MetricState {
            g1,
            g2,
            g_ab: [[g11, g12], [g12, g22]],
            ginv_ab: ginv,
            big_g,
            n,
            p: projector(n),
            h,
            nu: None,
        })
    }

    pub fn sqrt_g(&self) -> f64 {
        self.big_g.sqrt()
    }

    pub fn tangent(&self, a: usize) -> Vec3 {
        if a == 0 {
            self.g1
        } else {
            self.g2
        }
    }

    /// Dual vectors `g^α = g^{αβ} g_β`.
    pub fn dual(&self) -> [Vec3; 2] {
        let gi = self.ginv_ab;
        [
            add(scale(gi[0][0], self.g1), scale(gi[0][1], self.g2)),
            add(scale(gi[1][0], self.g1), scale(gi[1][1], self.g2)),
        ]
    }

    /// Co-normal for a boundary point with outward parameter normal `n^U`.
    pub fn conormal(&self, normal_u: [f64; 2]) -> Vec3 {
        let w = sub(scale(normal_u[0], self.g2), scale(normal_u[1], self.g1));
        cross(normalize(w), self.n)
    }
}

/// How parameter derivatives of the flow map are obtained on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Closed-form jets of the flow map.
    Analytic,
    /// Finite differences of sampled positions with the grid stencils.
    #[default]
    FiniteDifference,
}

fn check_time(spec: &FlowMapSpec, t: f64) -> Result<()> {
    if !(t >= 0.0 && t < spec.horizon) {
        return Err(Error::OutsideTimeWindow {
            t,
            horizon: spec.horizon,
        });
    }
    Ok(())
}

/// Pointwise jet, analytic if available, else central differences with step `d`.
pub fn point_jet(spec: &FlowMapSpec, x: [f64; 2], t: f64) -> Jet {
    if let Some(j) = spec.map.jet(x, t) {
        return j;
    }
    let d = 1e-4;
    let p = |y: [f64; 2]| spec.map.position(y, t);
    let sh = |a: usize, s: f64, y: [f64; 2]| {
        let mut z = y;
        z[a] += s;
        z
    };
    let d1 = |a: usize, y: [f64; 2]| scale(0.5 / d, sub(p(sh(a, d, y)), p(sh(a, -d, y))));
    let x_a = [d1(0, x), d1(1, x)];
    let mut x_ab = [[[0.0; 3]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            x_ab[a][b] = scale(0.5 / d, sub(d1(a, sh(b, d, x)), d1(a, sh(b, -d, x))));
        }
    }
    let v = spec.velocity(x, t);
    Jet {
        x: p(x),
        x_a,
        x_ab,
        x_t: v,
        x_at: [
            scale(0.5 / d, sub(spec.velocity(sh(0, d, x), t), spec.velocity(sh(0, -d, x), t))),
            scale(0.5 / d, sub(spec.velocity(sh(1, d, x), t), spec.velocity(sh(1, -d, x), t))),
        ],
        x_tt: spec.acceleration(x, t),
    }
}

/// Metric state of the surface at parameter point `x` and time `t`.
pub fn eval_metric(spec: &FlowMapSpec, x: [f64; 2], t: f64) -> Result<MetricState> {
    if !spec.domain.contains(x) {
        return Err(Error::OutsideDomain { x1: x[0], x2: x[1] });
    }
    check_time(spec, t)?;
    let j = point_jet(spec, x, t);
    MetricState::from_derivatives(j.x_a, j.x_ab, spec.lambda2, (x, t))
}

/// Unit outer co-normal at boundary node `(i, j)` of `grid`.
///
/// A node shared by two segments needs `segment` to say which side is meant.
pub fn eval_conormal(
    spec: &FlowMapSpec,
    grid: &Grid,
    node: (usize, usize),
    segment: Option<usize>,
    t: f64,
) -> Result<Vec3> {
    let segs = spec.domain.segments_at(grid, node.0, node.1);
    let seg = match (segs.len(), segment) {
        (0, _) => {
            return Err(Error::NotOnBoundary {
                i: node.0,
                j: node.1,
            })
        }
        (1, _) => &segs[0],
        (_, Some(id)) => segs.iter().find(|s| s.id == id).ok_or(Error::CornerNode {
            i: node.0,
            j: node.1,
        })?,
        (_, None) => {
            return Err(Error::CornerNode {
                i: node.0,
                j: node.1,
            })
        }
    };
    let m = eval_metric(spec, grid.coords(node.0, node.1), t)?;
    Ok(m.conormal(seg.normal_u))
}

/// `∂x̂/∂t`; analytic if provided, otherwise a central time difference.
pub fn eval_velocity(spec: &FlowMapSpec, x: [f64; 2], t: f64) -> Result<Vec3> {
    if !spec.domain.contains(x) {
        return Err(Error::OutsideDomain { x1: x[0], x2: x[1] });
    }
    check_time(spec, t)?;
    Ok(spec.velocity(x, t))
}

/// Geometry of the surface sampled on every node of a grid at one time.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub grid: Grid,
    pub domain: ParamDomain,
    pub t: f64,
    pub mode: DerivativeMode,
    pub pos: Vec<Vec3>,
    pub metric: Vec<MetricState>,
    pub sqrt_g: Vec<f64>,
    /// Surface velocity `∂x̂/∂t`.
    pub velocity: Vec<Vec3>,
    pub segments: Vec<BoundarySegment>,
}

impl Geometry {
    pub fn build(spec: &FlowMapSpec, grid: &Grid, t: f64, mode: DerivativeMode) -> Result<Self> {
        check_time(spec, t)?;
        let nodes: Vec<[f64; 2]> = grid.sample(|_, _, x| x);
        let (pos, metric) = match mode {
            DerivativeMode::Analytic if spec.has_analytic_jet() => {
                let res: Result<Vec<(Vec3, MetricState)>> = nodes
                    .par_iter()
                    .map(|&x| {
                        let j = spec.map.jet(x, t).expect("analytic jet");
                        let m = MetricState::from_derivatives(j.x_a, j.x_ab, spec.lambda2, (x, t))?;
                        Ok((j.x, m))
                    })
                    .collect();
                res?.into_iter().unzip()
            }
            _ => {
                let pos: Vec<Vec3> = nodes.par_iter().map(|&x| spec.position(x, t)).collect();
                let d1 = [grid.diff(&pos, 0, 1), grid.diff(&pos, 1, 1)];
                let d11 = grid.diff(&pos, 0, 2);
                let d22 = grid.diff(&pos, 1, 2);
                let d12 = grid.diff(&d1[1], 0, 1);
                let metric: Result<Vec<MetricState>> = (0..grid.len())
                    .into_par_iter()
                    .map(|k| {
                        MetricState::from_derivatives(
                            [d1[0][k], d1[1][k]],
                            [[d11[k], d12[k]], [d12[k], d22[k]]],
                            spec.lambda2,
                            (nodes[k], t),
                        )
                    })
                    .collect();
                (pos, metric?)
            }
        };
        let velocity = nodes.par_iter().map(|&x| spec.velocity(x, t)).collect();
        let segments = spec.domain.boundary_segments(grid);
        let mut metric = metric;
        for seg in &segments {
            for &(i, j) in seg.owned_nodes() {
                let k = grid.idx(i, j);
                let nu = metric[k].conormal(seg.normal_u);
                metric[k].nu = Some(nu);
            }
        }
        let sqrt_g = metric.iter().map(|m| m.sqrt_g()).collect();
        Ok(Geometry {
            grid: grid.clone(),
            domain: spec.domain,
            t,
            mode,
            pos,
            metric,
            sqrt_g,
            velocity,
            segments,
        })
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// Co-normals along one segment, both end corners evaluated from this segment's side.
    pub fn segment_conormals(&self, seg: &BoundarySegment) -> Vec<Vec3> {
        seg.nodes
            .iter()
            .map(|&(i, j)| self.metric[self.grid.idx(i, j)].conormal(seg.normal_u))
            .collect()
    }

    /// Line element `|dx̂/dr|` along one segment.
    pub fn segment_line_element(&self, seg: &BoundarySegment) -> Vec<f64> {
        let a = 1 - seg.fixed_axis;
        seg.nodes
            .iter()
            .map(|&(i, j)| norm(self.metric[self.grid.idx(i, j)].tangent(a)))
            .collect()
    }

    pub fn max_abs_mean_curvature_error(&self, exact: f64) -> f64 {
        self.metric
            .iter()
            .fold(0.0_f64, |m, s| m.max((s.h - exact).abs()))
    }
}
