use super::fv::neighbour;
use crate::constitutive::ConstitutiveSet;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::norm;
use crate::quadrature::{surface_integral, QuadratureRule};

/// First positive zero of `J1'`, so that `J1(k r) cos φ` is the slowest
/// non-constant Neumann mode of the unit disk with eigenvalue `k²`.
pub const DISK_NEUMANN_ROOT: f64 = 1.841_183_781_340_659;

/// Stencil data of the zero-flux finite-volume diffusion operator on one
/// geometry, so that repeated steps on a stationary surface only redo the
/// field-dependent work.
#[derive(Debug, Clone)]
pub struct DiffusionOperator<'a> {
    geo: &'a Geometry,
    fwd: Vec<[Option<usize>; 2]>,
    /// `1 / cell size` along each axis, or zero where both faces are closed
    inv_cell: Vec<[f64; 2]>,
    has_prev: Vec<[Option<usize>; 2]>,
    /// `√G g^{αβ}` at nodes
    coef: Vec<[[f64; 2]; 2]>,
    /// `Σ |g^{αβ}| / (h_α h_β)` at nodes
    stiffness: Vec<f64>,
}

impl<'a> DiffusionOperator<'a> {
    pub fn new(geo: &'a Geometry) -> Self {
        let grid = &geo.grid;
        let h = [grid.axes[0].h(), grid.axes[1].h()];
        let n = geo.len();
        let mut fwd = vec![[None; 2]; n];
        let mut has_prev = vec![[None; 2]; n];
        let mut inv_cell = vec![[0.0; 2]; n];
        for k in 0..n {
            for a in 0..2 {
                fwd[k][a] = neighbour(grid, a, k, true);
                has_prev[k][a] = neighbour(grid, a, k, false);
                let full = fwd[k][a].is_some() && has_prev[k][a].is_some();
                inv_cell[k][a] = if full { 1.0 / h[a] } else { 2.0 / h[a] };
            }
        }
        let coef = geo
            .metric
            .iter()
            .zip(&geo.sqrt_g)
            .map(|(m, s)| [[s * m.ginv_ab[0][0], s * m.ginv_ab[0][1]], [s * m.ginv_ab[1][0], s * m.ginv_ab[1][1]]])
            .collect();
        let stiffness = geo
            .metric
            .iter()
            .map(|m| {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s += m.ginv_ab[a][b].abs() / (h[a] * h[b]);
                    }
                }
                s
            })
            .collect();
        DiffusionOperator {
            geo,
            fwd,
            inv_cell,
            has_prev,
            coef,
            stiffness,
        }
    }

    /// Parameter derivatives, diffusivity `e4'(|grad C|²)` and its
    /// linearisation `max(e4', e4' + 2 r e4'')` along `grad C`.
    fn diffusivity(&self, c: &[f64], cs: &ConstitutiveSet) -> ([Vec<f64>; 2], Vec<f64>, Vec<f64>) {
        let d = self.geo.grid.gradient(c);
        let n = c.len();
        let mut kappa = vec![0.0; n];
        let mut lin = vec![0.0; n];
        for (k, m) in self.geo.metric.iter().enumerate() {
            let g = &m.ginv_ab;
            let (d1, d2) = (d[0][k], d[1][k]);
            let r = g[0][0] * d1 * d1 + 2.0 * g[0][1] * d1 * d2 + g[1][1] * d2 * d2;
            kappa[k] = cs.de(4, r);
            lin[k] = kappa[k].max(kappa[k] + 2.0 * r * cs.de2(4, r));
        }
        (d, kappa, lin)
    }

    fn bound_from(&self, lin: &[f64]) -> f64 {
        let rate = lin
            .iter()
            .zip(&self.stiffness)
            .map(|(l, s)| l * s)
            .fold(0.0, f64::max);
        if rate > 0.0 {
            0.5 / rate
        } else {
            f64::INFINITY
        }
    }

    /// Forward-Euler stability bound for `c`.
    pub fn dt_bound(&self, c: &[f64], cs: &ConstitutiveSet) -> f64 {
        self.bound_from(&self.diffusivity(c, cs).2)
    }

    /// `√G div_Γ(e4'(|grad C|²) grad C)` with zero co-normal flux.
    fn weighted_divergence(&self, c: &[f64], d: &[Vec<f64>; 2], kappa: &[f64]) -> Vec<f64> {
        let n = c.len();
        let h = [self.geo.grid.axes[0].h(), self.geo.grid.axes[1].h()];
        let mut faces = [vec![0.0; n], vec![0.0; n]];
        for k in 0..n {
            for a in 0..2 {
                if let Some(q) = self.fwd[k][a] {
                    let b = 1 - a;
                    let (ck, cq) = (&self.coef[k][a], &self.coef[q][a]);
                    let normal = (c[q] - c[k]) / h[a];
                    let cross = 0.5 * (d[b][k] + d[b][q]);
                    faces[a][k] = 0.5 * (kappa[k] * ck[a] + kappa[q] * cq[a]) * normal
                        + 0.5 * (kappa[k] * ck[b] + kappa[q] * cq[b]) * cross;
                }
            }
        }
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for a in 0..2 {
                    let after = if self.fwd[k][a].is_some() { faces[a][k] } else { 0.0 };
                    let before = self.has_prev[k][a].map_or(0.0, |p| faces[a][p]);
                    acc += (after - before) * self.inv_cell[k][a];
                }
                acc
            })
            .collect()
    }

    /// One explicit step onto the geometry with area factors `sqrt_g_next`.
    pub fn step(&self, c: &[f64], sqrt_g_next: &[f64], cs: &ConstitutiveSet, dt: f64) -> Result<Vec<f64>> {
        let geo = self.geo;
        if c.len() != geo.len() || sqrt_g_next.len() != geo.len() {
            return Err(Error::ShapeMismatch("concentration and geometries differ in size".into()));
        }
        let (d, kappa, lin) = self.diffusivity(c, cs);
        let bound = self.bound_from(&lin);
        if dt > bound {
            return Err(Error::CflViolation { dt, bound });
        }
        let div = self.weighted_divergence(c, &d, &kappa);
        Ok((0..geo.len())
            .map(|k| (geo.sqrt_g[k] * c[k] + dt * div[k]) / sqrt_g_next[k])
            .collect())
    }
}

/// Forward-Euler stability bound `1 / (2 max κ Σ |g^{αβ}| / (h_α h_β))`.
pub fn diffusion_dt_bound(c: &[f64], geo: &Geometry, cs: &ConstitutiveSet) -> f64 {
    DiffusionOperator::new(geo).dt_bound(c, cs)
}

/// One explicit step of `D_t C + (div_Γ v) C = div_Γ(e4'(|grad_Γ C|²) grad_Γ C)`
/// with zero co-normal flux. The grid moves with the flow map, so
/// `√G C` at `t + dt` is `√G C + dt √G div_Γ q_C` at `t`; `geo_next` is the
/// geometry at `t + dt` (the same geometry on a stationary surface).
pub fn step_surface_diffusion(
    c: &[f64],
    geo: &Geometry,
    geo_next: &Geometry,
    cs: &ConstitutiveSet,
    dt: f64,
) -> Result<Vec<f64>> {
    if geo_next.len() != geo.len() {
        return Err(Error::ShapeMismatch("geometries differ in size".into()));
    }
    DiffusionOperator::new(geo).step(c, &geo_next.sqrt_g, cs, dt)
}

/// Bessel function `J1` by its power series, accurate to roundoff for `|x| ≤ 10`.
pub fn bessel_j1(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for m in 1..60 {
        term *= q / (m as f64 * (m as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Measured exponential decay of the slowest Neumann mode on a flat disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayMeasurement {
    pub rate: f64,
    /// `e4'(0) k²` with `k` the first zero of `J1'` scaled to the disk radius
    pub expected: f64,
    pub dt: f64,
    pub steps: usize,
    /// `|∫C(t_end) − ∫C(0)| / |∫C(0)|`
    pub mass_drift: f64,
}

/// Starts from `1 + a J1(k r/R) cos φ` on a stationary flat disk of radius
/// `R` centred at the origin (an annulus with a small hole is accepted) and
/// measures the decay rate of the mode amplitude between `t_start` and
/// `t_end` by projection onto the initial mode.
pub fn disk_mode_decay(
    geo: &Geometry,
    cs: &ConstitutiveSet,
    amplitude: f64,
    t_start: f64,
    t_end: f64,
    rule: &QuadratureRule,
) -> Result<DecayMeasurement> {
    let flat = geo.pos.iter().all(|x| x[2] == 0.0) && geo.velocity.iter().all(|v| norm(*v) == 0.0);
    if !flat {
        return Err(Error::config("surface", "the decay measurement needs a stationary flat disk"));
    }
    if !(0.0 < t_start && t_start < t_end) {
        return Err(Error::config("diffusion", "need 0 < t_start < t_end"));
    }
    let radius = geo.pos.iter().map(|x| norm(*x)).fold(0.0, f64::max);
    let k = DISK_NEUMANN_ROOT / radius;
    let mode: Vec<f64> = geo
        .pos
        .iter()
        .map(|x| {
            let r = norm(*x);
            if r > 0.0 {
                bessel_j1(k * r) * x[0] / r
            } else {
                0.0
            }
        })
        .collect();
    let mut c: Vec<f64> = mode.iter().map(|m| 1.0 + amplitude * m).collect();
    let project = |c: &[f64]| {
        let p: Vec<f64> = c.iter().zip(&mode).map(|(a, b)| a * b).collect();
        surface_integral(&p, geo, rule)
    };
    let op = DiffusionOperator::new(geo);
    let bound = 0.9 * op.dt_bound(&c, cs);
    let steps = (t_end / bound).ceil().max(2.0) as usize;
    let dt = t_end / steps as f64;
    let first = ((t_start / dt).round() as usize).clamp(1, steps - 1);
    let m0 = surface_integral(&c, geo, rule);
    let mut a1 = 0.0;
    for s in 1..=steps {
        c = op.step(&c, &geo.sqrt_g, cs, dt)?;
        if s == first {
            a1 = project(&c);
        }
    }
    let a2 = project(&c);
    let rate = (a1 / a2).ln() / ((steps - first) as f64 * dt);
    Ok(DecayMeasurement {
        rate,
        expected: cs.de(4, 0.0) * k * k,
        dt,
        steps,
        mass_drift: ((surface_integral(&c, geo, rule) - m0) / m0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::Pressure;
    use crate::geometry::{DerivativeMode, SurfaceConfig};
    use crate::grid::StencilOrder;

    fn disk(n: usize) -> Geometry {
        let spec = SurfaceConfig::FlatDisk {
            inner_radius: 0.1,
            radius: 1.0,
            domain: None,
        }
        .build()
        .unwrap();
        let grid = spec.domain.grid(n, n, StencilOrder::Second).unwrap();
        Geometry::build(&spec, &grid, 0.0, DerivativeMode::Analytic).unwrap()
    }

    #[test]
    fn constant_is_unchanged() {
        let geo = disk(12);
        let cs = ConstitutiveSet::linear([1.0; 4], Pressure::Zero);
        let c = vec![0.7; geo.len()];
        let dt = 0.5 * diffusion_dt_bound(&c, &geo, &cs);
        let out = step_surface_diffusion(&c, &geo, &geo, &cs, dt).unwrap();
        assert!(out.iter().all(|x| (x - 0.7).abs() < 1e-15));
    }

    #[test]
    fn total_amount_is_conserved() {
        let geo = disk(16);
        let rule = QuadratureRule::trapezoid(&geo.grid);
        let cs = ConstitutiveSet::by_name("power-law").unwrap();
        let mut c: Vec<f64> = geo.pos.iter().map(|x| 1.0 + x[0] * x[1] + x[0]).collect();
        let m0 = surface_integral(&c, &geo, &rule);
        for _ in 0..50 {
            let dt = 0.9 * diffusion_dt_bound(&c, &geo, &cs);
            c = step_surface_diffusion(&c, &geo, &geo, &cs, dt).unwrap();
        }
        assert!(((surface_integral(&c, &geo, &rule) - m0) / m0).abs() < 1e-13);
    }

    #[test]
    fn operator_matches_face_assembly() {
        use crate::solver::fv::{diffusive_faces, face_divergence, BoundaryFlux};
        let geo = disk(10);
        let cs = ConstitutiveSet::by_name("power-law").unwrap();
        let c: Vec<f64> = geo.pos.iter().map(|x| (x[0] + 0.3 * x[1] * x[1]).sin()).collect();
        let op = DiffusionOperator::new(&geo);
        let (d, kappa, _) = op.diffusivity(&c, &cs);
        let z = [vec![0.0; geo.len()], vec![0.0; geo.len()]];
        let want = face_divergence(&geo.grid, &diffusive_faces(&c, &kappa, &geo), &z, BoundaryFlux::Zero);
        let got = op.weighted_divergence(&c, &d, &kappa);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} {b}");
        }
    }

    #[test]
    fn bessel_values() {
        // J1(1) and J1'(k) = J0(k) − J1(k)/k = 0 at the first Neumann root
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        let k = DISK_NEUMANN_ROOT;
        let d = 1e-6;
        let dj = (bessel_j1(k + d) - bessel_j1(k - d)) / (2.0 * d);
        assert!(dj.abs() < 1e-9, "{dj}");
    }

    #[test]
    fn coarse_decay_rate_is_close() {
        let spec = SurfaceConfig::FlatDisk {
            inner_radius: 0.05,
            radius: 1.0,
            domain: None,
        }
        .build()
        .unwrap();
        let grid = spec.domain.grid(24, 24, StencilOrder::Second).unwrap();
        let geo = Geometry::build(&spec, &grid, 0.0, DerivativeMode::Analytic).unwrap();
        let rule = QuadratureRule::trapezoid(&grid);
        let cs = ConstitutiveSet::linear([1.0; 4], Pressure::Zero);
        let m = disk_mode_decay(&geo, &cs, 0.1, 0.01, 0.03, &rule).unwrap();
        assert!((m.rate / m.expected - 1.0).abs() < 0.05, "{m:?}");
        assert!(m.mass_drift < 1e-12);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let geo = disk(12);
        let cs = ConstitutiveSet::linear([1.0; 4], Pressure::Zero);
        let c: Vec<f64> = geo.pos.iter().map(|x| x[0]).collect();
        assert!(matches!(
            step_surface_diffusion(&c, &geo, &geo, &cs, 1.0),
            Err(Error::CflViolation { .. })
        ));
    }
}
