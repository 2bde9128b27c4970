use crate::error::{Error, Result};
use crate::grid::{Axis, Grid, StencilOrder};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// Rectangle, both axes bounded. Defaults to `[0,1]^2`.
    UnitSquare,
    /// Radius-like first axis, full periodic angle on the second axis.
    DiskViaPolar,
    /// Radius-like first axis, bounded angle on the second axis.
    AnnulusSector,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::UnitSquare => "unit-square",
            DomainKind::DiskViaPolar => "disk-via-polar",
            DomainKind::AnnulusSector => "annulus-sector",
        }
    }
}

/// Parameter region `U` on which flow maps are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub kind: DomainKind,
    pub bounds: [[f64; 2]; 2],
}

/// Which end of an axis a boundary segment sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lo,
    Hi,
}

/// A straight piece of `∂U`, `r -> (p(r), q(r))`, with its outward normal `n^U`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySegment {
    pub id: usize,
    /// Parameter axis held fixed along the segment.
    pub fixed_axis: usize,
    pub side: Side,
    /// Parameter range of the running coordinate, in traversal order.
    pub range: [f64; 2],
    pub normal_u: [f64; 2],
    /// Grid nodes in traversal order. Open segments include both end corners.
    pub nodes: Vec<(usize, usize)>,
    /// True when the segment is a closed loop along a periodic axis.
    pub closed: bool,
}

impl BoundarySegment {
    /// `(p(r), q(r))`.
    pub fn point(&self, r: f64, domain: &ParamDomain) -> [f64; 2] {
        let fixed = match self.side {
            Side::Lo => domain.bounds[self.fixed_axis][0],
            Side::Hi => domain.bounds[self.fixed_axis][1],
        };
        if self.fixed_axis == 0 {
            [fixed, r]
        } else {
            [r, fixed]
        }
    }

    /// `(dp/dr, dq/dr)`; unit length, sign follows the traversal direction.
    pub fn tangent(&self) -> [f64; 2] {
        let s = if self.range[1] >= self.range[0] { 1.0 } else { -1.0 };
        if self.fixed_axis == 0 {
            [0.0, s]
        } else {
            [s, 0.0]
        }
    }

    /// Nodes owned by this segment under the half-open convention.
    pub fn owned_nodes(&self) -> &[(usize, usize)] {
        if self.closed {
            &self.nodes
        } else {
            &self.nodes[..self.nodes.len() - 1]
        }
    }

    /// Parameter spacing along the segment.
    pub fn spacing(&self, grid: &Grid) -> f64 {
        grid.axes[1 - self.fixed_axis].h()
    }
}

impl ParamDomain {
    pub fn new(kind: DomainKind, bounds: [[f64; 2]; 2]) -> Result<Self> {
        let d = ParamDomain { kind, bounds };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_square() -> Self {
        ParamDomain {
            kind: DomainKind::UnitSquare,
            bounds: [[0.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn polar(r0: f64, r1: f64) -> Self {
        ParamDomain {
            kind: DomainKind::DiskViaPolar,
            bounds: [[r0, r1], [0.0, TAU]],
        }
    }

    pub fn periodic(&self, axis: usize) -> bool {
        axis == 1 && self.kind == DomainKind::DiskViaPolar
    }

    pub fn validate(&self) -> Result<()> {
        for (a, b) in self.bounds.iter().enumerate() {
            if !(b[0].is_finite() && b[1].is_finite() && b[1] > b[0]) {
                return Err(Error::InvalidDomain(format!(
                    "axis {a} bounds {:?} must be finite and increasing",
                    b
                )));
            }
        }
        if matches!(self.kind, DomainKind::DiskViaPolar | DomainKind::AnnulusSector)
            && self.bounds[0][0] <= 0.0
        {
            return Err(Error::InvalidDomain(
                "polar charts must stay away from the coordinate singularity (inner radius > 0)"
                    .into(),
            ));
        }
        if self.kind == DomainKind::DiskViaPolar
            && ((self.bounds[1][1] - self.bounds[1][0]) - TAU).abs() > 1e-12
        {
            return Err(Error::InvalidDomain(
                "disk-via-polar needs a full 2*pi angular range".into(),
            ));
        }
        Ok(())
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let tol = 1e-12;
        (0..2).all(|a| {
            self.periodic(a) || (x[a] >= self.bounds[a][0] - tol && x[a] <= self.bounds[a][1] + tol)
        })
    }

    /// Tensor grid with `n1 x n2` intervals.
    pub fn grid(&self, n1: usize, n2: usize, order: StencilOrder) -> Result<Grid> {
        self.validate()?;
        let a1 = Axis::new(self.bounds[0][0], self.bounds[0][1], n1, false);
        let a2 = Axis::new(self.bounds[1][0], self.bounds[1][1], n2, self.periodic(1));
        Grid::new(a1, a2, order)
    }

    /// Boundary of `U` as chained segments, counter-clockwise for rectangles.
    pub fn boundary_segments(&self, grid: &Grid) -> Vec<BoundarySegment> {
        let (m1, m2) = grid.shape();
        let [b1, b2] = self.bounds;
        if self.periodic(1) {
            let inner = BoundarySegment {
                id: 0,
                fixed_axis: 0,
                side: Side::Lo,
                range: [b2[1], b2[0]],
                normal_u: [-1.0, 0.0],
                nodes: (0..m2).rev().map(|j| (0, j)).collect(),
                closed: true,
            };
            let outer = BoundarySegment {
                id: 1,
                fixed_axis: 0,
                side: Side::Hi,
                range: [b2[0], b2[1]],
                normal_u: [1.0, 0.0],
                nodes: (0..m2).map(|j| (m1 - 1, j)).collect(),
                closed: true,
            };
            return vec![inner, outer];
        }
        vec![
            BoundarySegment {
                id: 0,
                fixed_axis: 1,
                side: Side::Lo,
                range: [b1[0], b1[1]],
                normal_u: [0.0, -1.0],
                nodes: (0..m1).map(|i| (i, 0)).collect(),
                closed: false,
            },
            BoundarySegment {
                id: 1,
                fixed_axis: 0,
                side: Side::Hi,
                range: [b2[0], b2[1]],
                normal_u: [1.0, 0.0],
                nodes: (0..m2).map(|j| (m1 - 1, j)).collect(),
                closed: false,
            },
            BoundarySegment {
                id: 2,
                fixed_axis: 1,
                side: Side::Hi,
                range: [b1[1], b1[0]],
                normal_u: [0.0, 1.0],
                nodes: (0..m1).rev().map(|i| (i, m2 - 1)).collect(),
                closed: false,
            },
            BoundarySegment {
                id: 3,
                fixed_axis: 0,
                side: Side::Lo,
                range: [b2[1], b2[0]],
                normal_u: [-1.0, 0.0],
                nodes: (0..m2).rev().map(|j| (0, j)).collect(),
                closed: false,
            },
        ]
    }

    /// Checks that open segments chain end-to-end into a closed loop and that
    /// every segment has a non-vanishing parametrization.
    pub fn check_boundary(&self, grid: &Grid) -> Result<()> {
        let segs = self.boundary_segments(grid);
        for s in &segs {
            let t = s.tangent();
            if (t[0] * t[0] + t[1] * t[1]).sqrt() <= 0.0 {
                return Err(Error::InvalidDomain(format!("segment {} is degenerate", s.id)));
            }
        }
        let open: Vec<&BoundarySegment> = segs.iter().filter(|s| !s.closed).collect();
        for (k, s) in open.iter().enumerate() {
            let next = open[(k + 1) % open.len()];
            let end = s.point(s.range[1], self);
            let start = next.point(next.range[0], self);
            if (end[0] - start[0]).abs() > 1e-12 || (end[1] - start[1]).abs() > 1e-12 {
                return Err(Error::InvalidDomain(format!(
                    "segment {} does not end where segment {} starts",
                    s.id, next.id
                )));
            }
            if s.nodes.last() != next.nodes.first() {
                return Err(Error::InvalidDomain(format!(
                    "segment {} node chain is broken",
                    s.id
                )));
            }
        }
        Ok(())
    }

    /// Segments containing node `(i, j)`.
    pub fn segments_at(&self, grid: &Grid, i: usize, j: usize) -> Vec<BoundarySegment> {
        self.boundary_segments(grid)
            .into_iter()
            .filter(|s| s.nodes.contains(&(i, j)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_boundary_closes() {
        let d = ParamDomain::unit_square();
        let g = d.grid(8, 6, StencilOrder::Second).unwrap();
        d.check_boundary(&g).unwrap();
        let segs = d.boundary_segments(&g);
        let owned: usize = segs.iter().map(|s| s.owned_nodes().len()).sum();
        assert_eq!(owned, 2 * (8 + 6));
    }

    #[test]
    fn polar_boundary_is_two_loops() {
        let d = ParamDomain::polar(0.1, 1.0);
        let g = d.grid(8, 16, StencilOrder::Second).unwrap();
        d.check_boundary(&g).unwrap();
        let segs = d.boundary_segments(&g);
        assert_eq!(segs.len(), 2);
        assert!(segs.iter().all(|s| s.closed && s.nodes.len() == 16));
    }

    #[test]
    fn polar_chart_rejects_pole() {
        assert!(ParamDomain::new(DomainKind::DiskViaPolar, [[0.0, 1.0], [0.0, TAU]]).is_err());
    }

    #[test]
    fn corner_belongs_to_two_segments() {
        let d = ParamDomain::unit_square();
        let g = d.grid(4, 4, StencilOrder::Second).unwrap();
        assert_eq!(d.segments_at(&g, 0, 0).len(), 2);
        assert_eq!(d.segments_at(&g, 2, 0).len(), 1);
    }
}
