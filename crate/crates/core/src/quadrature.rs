//! Surface and boundary integrals through the parameter domain.

use crate::error::{Error, Result};
use crate::geometry::{BoundarySegment, Geometry};
use crate::grid::{Axis, FieldValue, Grid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InteriorRule {
    #[default]
    Trapezoid,
    Simpson,
}

/// Tensor-product node weights over the parameter grid.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub interior: InteriorRule,
    pub weights: [Vec<f64>; 2],
}

/// Composite weights along one axis.
pub fn axis_weights(axis: &Axis, rule: InteriorRule) -> Result<Vec<f64>> {
    let h = axis.h();
    if axis.periodic {
        return Ok(vec![h; axis.nodes()]);
    }
    let n = axis.n;
    match rule {
        InteriorRule::Trapezoid => {
            let mut w = vec![h; n + 1];
            w[0] = 0.5 * h;
            w[n] = 0.5 * h;
            Ok(w)
        }
        InteriorRule::Simpson => {
            if n % 2 != 0 {
                return Err(Error::InvalidDomain(format!(
                    "Simpson's rule needs an even number of intervals, got {n}"
                )));
            }
            let mut w: Vec<f64> = (0..=n)
                .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 })
                .collect();
            w[0] = 1.0;
            w[n] = 1.0;
            Ok(w.into_iter().map(|c| c * h / 3.0).collect())
        }
    }
}

impl QuadratureRule {
    pub fn new(grid: &Grid, interior: InteriorRule) -> Result<Self> {
        Ok(QuadratureRule {
            interior,
            weights: [
                axis_weights(&grid.axes[0], interior)?,
                axis_weights(&grid.axes[1], interior)?,
            ],
        })
    }

    pub fn trapezoid(grid: &Grid) -> Self {
        Self::new(grid, InteriorRule::Trapezoid).expect("trapezoid weights always exist")
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[0][i] * self.weights[1][j]
    }

    /// Node weights in grid storage order.
    pub fn node_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.weights[0].len() * self.weights[1].len());
        for a in &self.weights[0] {
            for b in &self.weights[1] {
                w.push(a * b);
            }
        }
        w
    }

    /// Sum of weights, equal to the parameter area of `U`.
    pub fn area(&self) -> f64 {
        self.weights[0].iter().sum::<f64>() * self.weights[1].iter().sum::<f64>()
    }
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum<T: FieldValue>(v: &[T]) -> T {
    const BLOCK: usize = 16;
    if v.len() <= BLOCK {
        let mut acc = T::zero();
        for x in v {
            acc.add_scaled(1.0, x);
        }
        return acc;
    }
    let mid = v.len() / 2;
    let mut a = pairwise_sum(&v[..mid]);
    let b = pairwise_sum(&v[mid..]);
    a.add_scaled(1.0, &b);
    a
}

/// `∫_Γ f dH² = ∫_U f̂ √G dX`.
pub fn surface_integral<T: FieldValue>(f: &[T], geo: &Geometry, rule: &QuadratureRule) -> T {
    assert_eq!(f.len(), geo.len(), "integrand must live on the geometry grid");
    let (_, n2) = geo.grid.shape();
    let terms: Vec<T> = f
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let mut out = T::zero();
            out.add_scaled(rule.weight(k / n2, k % n2) * geo.sqrt_g[k], v);
            out
        })
        .collect();
    pairwise_sum(&terms)
}

/// `∫_U f dX` without the area element.
pub fn parameter_integral(f: &[f64], grid: &Grid, rule: &QuadratureRule) -> f64 {
    let (_, n2) = grid.shape();
    let terms: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(k, v)| rule.weight(k / n2, k % n2) * v)
        .collect();
    pairwise_sum(&terms)
}

/// Values on the nodes of each boundary segment, in segment traversal order.
/// Corner nodes appear once per segment that touches them.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub segments: Vec<Vec<f64>>,
}

impl BoundaryField {
    /// Samples `f(segment, node index in segment, (i, j))`.
    pub fn from_fn<F>(geo: &Geometry, f: F) -> Self
    where
        F: Fn(&BoundarySegment, usize, (usize, usize)) -> f64,
    {
        BoundaryField {
            segments: geo
                .segments
                .iter()
                .map(|s| s.nodes.iter().enumerate().map(|(m, &ij)| f(s, m, ij)).collect())
                .collect(),
        }
    }
}

/// Composite trapezoid weights along a segment (uniform for closed loops).
pub fn segment_weights(seg: &BoundarySegment, grid: &Grid) -> Vec<f64> {
    let h = seg.spacing(grid);
    let m = seg.nodes.len();
    if seg.closed {
        return vec![h; m];
    }
    let mut w = vec![h; m];
    w[0] = 0.5 * h;
    w[m - 1] = 0.5 * h;
    w
}

/// Integral of one segment with line element `|dx̂/dr|`.
pub fn segment_integral(g: &[f64], seg: &BoundarySegment, geo: &Geometry) -> Result<f64> {
    let le = geo.segment_line_element(seg);
    if let Some(node) = le.iter().position(|l| !(*l > 0.0)) {
        return Err(Error::DegenerateSegment {
            segment: seg.id,
            node,
        });
    }
    let w = segment_weights(seg, &geo.grid);
    let terms: Vec<f64> = (0..g.len()).map(|m| w[m] * le[m] * g[m]).collect();
    Ok(pairwise_sum(&terms))
}

/// `∫_{∂Γ} g dH¹` as the sum of segment integrals.
pub fn boundary_integral(g: &BoundaryField, geo: &Geometry) -> Result<f64> {
    if g.segments.len() != geo.segments.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} boundary segments given, geometry has {}",
            g.segments.len(),
            geo.segments.len()
        )));
    }
    let mut parts = Vec::with_capacity(g.segments.len());
    for (vals, seg) in g.segments.iter().zip(&geo.segments) {
        if vals.len() != seg.nodes.len() {
            return Err(Error::ShapeMismatch(format!(
                "segment {} has {} nodes, {} values given",
                seg.id,
                seg.nodes.len(),
                vals.len()
            )));
        }
        parts.push(segment_integral(vals, seg, geo)?);
    }
    Ok(pairwise_sum(&parts))
}

/// Composite trapezoid weights for `steps` equal time intervals of length `dt`.
pub fn time_weights(steps: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; steps + 1];
    w[0] = 0.5 * dt;
    w[steps] = 0.5 * dt;
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DerivativeMode, SurfaceConfig};
    use crate::grid::StencilOrder;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn geo(cfg: SurfaceConfig, n: usize, t: f64) -> Geometry {
        let spec = cfg.build().unwrap();
        let g = spec.domain.grid(n, n, StencilOrder::Second).unwrap();
        Geometry::build(&spec, &g, t, DerivativeMode::Analytic).unwrap()
    }

    #[test]
    fn unit_square_area() {
        let g = geo(
            SurfaceConfig::GraphSurface {
                amplitude: 0.0,
                k: [1.0, 1.0],
                growth: 0.0,
                domain: None,
            },
            16,
            0.0,
        );
        let rule = QuadratureRule::trapezoid(&g.grid);
        let ones = vec![1.0; g.len()];
        assert!((surface_integral(&ones, &g, &rule) - 1.0).abs() < 1e-14);
        assert!((rule.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cap_area_converges_at_second_order() {
        let eps: f64 = 0.1;
        let exact = TAU * (eps.cos() - (FRAC_PI_2).cos());
        let mut errs = vec![];
        for n in [16, 32, 64] {
            let g = geo(
                SurfaceConfig::SphereCap {
                    radius: 1.0,
                    theta_min: eps,
                    theta_max: FRAC_PI_2,
                    domain: None,
                },
                n,
                0.0,
            );
            let rule = QuadratureRule::trapezoid(&g.grid);
            let a = surface_integral(&vec![1.0; g.len()], &g, &rule);
            errs.push((a - exact).abs());
        }
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 1.9, "{errs:?}");
    }

    #[test]
    fn equator_length_and_segment_additivity() {
        let g = geo(
            SurfaceConfig::SphereCap {
                radius: 1.0,
                theta_min: 0.3,
                theta_max: FRAC_PI_2,
                domain: None,
            },
            16,
            0.0,
        );
        let ones = BoundaryField::from_fn(&g, |_, _, _| 1.0);
        let total = boundary_integral(&ones, &g).unwrap();
        let parts: f64 = g
            .segments
            .iter()
            .map(|s| segment_integral(&vec![1.0; s.nodes.len()], s, &g).unwrap())
            .sum();
        assert!((total - parts).abs() < 1e-14);
        let outer = segment_integral(&vec![1.0; g.segments[1].nodes.len()], &g.segments[1], &g).unwrap();
        assert!((outer - TAU).abs() < 1e-13);
        assert!((total - TAU * (1.0 + 0.3_f64.sin())).abs() < 1e-13);
    }

    #[test]
    fn flat_disk_circumference_and_area() {
        let g = geo(
            SurfaceConfig::FlatDisk {
                inner_radius: 0.05,
                radius: 1.0,
                domain: None,
            },
            32,
            0.0,
        );
        let outer = &g.segments[1];
        let len = segment_integral(&vec![1.0; outer.nodes.len()], outer, &g).unwrap();
        assert!((len - TAU).abs() < 1e-13);
        let rule = QuadratureRule::trapezoid(&g.grid);
        let area = surface_integral(&vec![1.0; g.len()], &g, &rule);
        assert!((area - PI * (1.0 - 0.0025)).abs() < 1e-12);
    }

    #[test]
    fn expanding_cap_area_scales_with_r2() {
        let cfg = SurfaceConfig::ExpandingSphereCap {
            radius0: 1.0,
            rate: 1.0,
            accel: 0.0,
            omega: 0.0,
            theta_min: 0.2,
            theta_max: 1.4,
            domain: None,
        };
        let a0 = {
            let g = geo(cfg.clone(), 16, 0.0);
            surface_integral(&vec![1.0; g.len()], &g, &QuadratureRule::trapezoid(&g.grid))
        };
        let g = geo(cfg, 16, 0.5);
        let a = surface_integral(&vec![1.0; g.len()], &g, &QuadratureRule::trapezoid(&g.grid));
        assert!((a - 2.25 * a0).abs() < 1e-12);
    }

    #[test]
    fn simpson_needs_even_intervals() {
        let ax = Axis::new(0.0, 1.0, 5, false);
        assert!(axis_weights(&ax, InteriorRule::Simpson).is_err());
        let ax = Axis::new(0.0, 1.0, 6, false);
        let w = axis_weights(&ax, InteriorRule::Simpson).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
