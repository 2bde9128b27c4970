use super::fv::{conservative_divergence, BoundaryFlux};
use super::{zero_boundary, BalanceReport, BcMode, FluidState};
use crate::calculus::surface_gradient;
use crate::constitutive::{ConstitutiveSet, Pressure};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{axpy, dot, mat_vec, norm, scale, Vec3};
use crate::quadrature::QuadratureRule;

/// Largest stable step at Courant number `cfl` for the current state, using
/// the sound speed `√(ρ p''(ρ))` plus the flow speed against the parameter
/// spacing measured on the surface.
pub fn acoustic_dt_bound(rho: &[f64], v: &[Vec3], geo: &Geometry, p: &Pressure, cfl: f64) -> f64 {
    let h = [geo.grid.axes[0].h(), geo.grid.axes[1].h()];
    let mut rate: f64 = 0.0;
    for (k, m) in geo.metric.iter().enumerate() {
        let c = p.effective_deriv(rho[k]).max(0.0).sqrt() + norm(v[k]);
        let d = m.dual();
        rate = rate.max(c * (norm(d[0]) / h[0] + norm(d[1]) / h[1]));
    }
    if rate > 0.0 {
        cfl / rate
    } else {
        f64::INFINITY
    }
}

fn check_stationary(geo: &Geometry) -> Result<()> {
    let w = geo.velocity.iter().map(|v| norm(*v)).fold(0.0, f64::max);
    if w > 1e-12 {
        return Err(Error::config(
            "surface",
            format!("the barotropic solver needs a stationary surface, max |x_t| = {w:.3e}"),
        ));
    }
    Ok(())
}

fn rhs(rho: &[f64], v: &[Vec3], geo: &Geometry, p: &Pressure) -> (Vec<f64>, Vec<Vec3>) {
    let n = geo.len();
    let flux: Vec<Vec3> = (0..n).map(|k| scale(rho[k], v[k])).collect();
    let drho: Vec<f64> = conservative_divergence(&flux, geo, BoundaryFlux::NodeValue)
        .into_iter()
        .map(|d| -d)
        .collect();
    let pe: Vec<f64> = rho.iter().map(|&r| p.effective(r)).collect();
    let gp = surface_gradient(&pe, geo);
    let [v1, v2] = geo.grid.gradient(v);
    let mut dv: Vec<Vec3> = (0..n)
        .map(|k| {
            let m = &geo.metric[k];
            let d = m.dual();
            let adv = axpy(scale(dot(d[0], v[k]), v1[k]), dot(d[1], v[k]), v2[k]);
            let a = axpy(scale(1.0 / rho[k], gp[k]), 1.0, adv);
            scale(-1.0, mat_vec(&m.p, a))
        })
        .collect();
    zero_boundary(&mut dv, geo);
    (drho, dv)
}

fn constrain(rho: &[f64], v: &mut [Vec3], geo: &Geometry) -> Result<()> {
    for (x, m) in v.iter_mut().zip(&geo.metric) {
        *x = mat_vec(&m.p, *x);
    }
    zero_boundary(v, geo);
    match rho.iter().position(|&r| !(r > 0.0)) {
        Some(node) => Err(Error::NonpositiveDensity {
            node,
            value: rho[node],
        }),
        None => Ok(()),
    }
}

/// One classical RK4 step of
/// `∂_t ρ = −div_Γ(ρ v)`, `∂_t v = −P_Γ (v·∇_Γ) v − grad_Γ 𝔭 / ρ`
/// on a stationary surface, re-projecting `v` and zeroing it on the boundary
/// after every stage. `cfl_max` bounds the admissible Courant number.
pub fn step_tangential_barotropic(
    state: &FluidState,
    geo: &Geometry,
    p: &Pressure,
    dt: f64,
    cfl_max: f64,
) -> Result<FluidState> {
    state.validate(geo)?;
    state.check_density()?;
    check_stationary(geo)?;
    let bound = acoustic_dt_bound(&state.rho, &state.v, geo, p, cfl_max);
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let n = geo.len();
    let stage = |rho: &[f64], v: &[Vec3], drho: &[f64], dv: &[Vec3], c: f64| -> Result<(Vec<f64>, Vec<Vec3>)> {
        let r: Vec<f64> = (0..n).map(|k| rho[k] + c * drho[k]).collect();
        let mut u: Vec<Vec3> = (0..n).map(|k| axpy(v[k], c, dv[k])).collect();
        constrain(&r, &mut u, geo)?;
        Ok((r, u))
    };
    let (r0, v0) = (&state.rho, &state.v);
    let (k1r, k1v) = rhs(r0, v0, geo, p);
    let (r1, u1) = stage(r0, v0, &k1r, &k1v, 0.5 * dt)?;
    let (k2r, k2v) = rhs(&r1, &u1, geo, p);
    let (r2, u2) = stage(r0, v0, &k2r, &k2v, 0.5 * dt)?;
    let (k3r, k3v) = rhs(&r2, &u2, geo, p);
    let (r3, u3) = stage(r0, v0, &k3r, &k3v, dt)?;
    let (k4r, k4v) = rhs(&r3, &u3, geo, p);
    let c = dt / 6.0;
    let rho: Vec<f64> = (0..n)
        .map(|k| r0[k] + c * (k1r[k] + 2.0 * k2r[k] + 2.0 * k3r[k] + k4r[k]))
        .collect();
    let mut v: Vec<Vec3> = (0..n)
        .map(|k| {
            let s = axpy(axpy(k1v[k], 2.0, k2v[k]), 2.0, k3v[k]);
            axpy(v0[k], c, axpy(s, 1.0, k4v[k]))
        })
        .collect();
    constrain(&rho, &mut v, geo)?;
    let mut out = state.clone();
    set_pressure_fields(&mut out, &rho, p);
    out.rho = rho;
    out.v = v;
    Ok(out)
}

/// `σ = 𝔭(ρ)` and `e = p(ρ)/ρ`, so that the energy audits of the general
/// system apply to the barotropic one.
fn set_pressure_fields(state: &mut FluidState, rho: &[f64], p: &Pressure) {
    state.sigma = rho.iter().map(|&r| p.effective(r)).collect();
    state.e = rho.iter().map(|&r| p.value(r) / r).collect();
}

/// Summary of a barotropic run.
#[derive(Debug, Clone)]
pub struct BarotropicRun {
    pub dt: f64,
    pub steps: usize,
    pub report: BalanceReport,
    pub final_state: FluidState,
    /// Largest `|n · v|` seen after any step.
    pub max_normal_velocity: f64,
}

/// Integrates to `t_end` with a fixed step chosen from the initial state at
/// Courant number `cfl`, recording the balance at every step.
pub fn run_tangential_barotropic(
    initial: &FluidState,
    geo: &Geometry,
    p: &Pressure,
    t_end: f64,
    cfl: f64,
    cfl_max: f64,
    rule: &QuadratureRule,
) -> Result<BarotropicRun> {
    let mut state = initial.clone();
    let rho = state.rho.clone();
    set_pressure_fields(&mut state, &rho, p);
    let bound = acoustic_dt_bound(&state.rho, &state.v, geo, p, cfl);
    let steps = (t_end / bound).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let cs = ConstitutiveSet::inviscid(*p);
    let mut report = BalanceReport::new(BcMode::NoSlip);
    report.push(0.0, &state, geo, &cs, rule)?;
    let mut max_nv = state.max_normal_velocity(geo);
    for s in 1..=steps {
        state = step_tangential_barotropic(&state, geo, p, dt, cfl_max)?;
        max_nv = max_nv.max(state.max_normal_velocity(geo));
        report.push(s as f64 * dt, &state, geo, &cs, rule)?;
    }
    Ok(BarotropicRun {
        dt,
        steps,
        report,
        final_state: state,
        max_normal_velocity: max_nv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DerivativeMode, SurfaceConfig};
    use crate::grid::StencilOrder;

    fn disk(n: usize) -> Geometry {
        let spec = SurfaceConfig::FlatDisk {
            inner_radius: 0.2,
            radius: 1.0,
            domain: None,
        }
        .build()
        .unwrap();
        let grid = spec.domain.grid(n, n, StencilOrder::Second).unwrap();
        Geometry::build(&spec, &grid, 0.0, DerivativeMode::Analytic).unwrap()
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let geo = disk(12);
        let p = Pressure::Power { kappa: 1.0, gamma: 2.0 };
        let s = FluidState::rest(geo.len(), 1.3);
        let out = step_tangential_barotropic(&s, &geo, &p, 1e-3, 1.0).unwrap();
        assert_eq!(out.rho, s.rho);
        assert!(out.v.iter().all(|v| *v == [0.0; 3]));
    }

    #[test]
    fn oversized_step_is_rejected() {
        let geo = disk(12);
        let p = Pressure::Power { kappa: 1.0, gamma: 2.0 };
        let s = FluidState::rest(geo.len(), 1.0);
        assert!(matches!(
            step_tangential_barotropic(&s, &geo, &p, 1.0, 1.0),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn pulse_conserves_mass_and_stays_tangential() {
        let geo = disk(16);
        let p = Pressure::Power { kappa: 1.0, gamma: 2.0 };
        let mut s = FluidState::rest(geo.len(), 1.0);
        s.rho = geo
            .pos
            .iter()
            .map(|x| 1.0 + 0.05 * (-((x[0] - 0.5).powi(2) + x[1] * x[1]) / 0.04).exp())
            .collect();
        let rule = QuadratureRule::trapezoid(&geo.grid);
        let run = run_tangential_barotropic(&s, &geo, &p, 0.2, 0.4, 1.0, &rule).unwrap();
        let rows = &run.report.rows;
        let m0 = rows[0].mass;
        assert!(rows.iter().all(|r| ((r.mass - m0) / m0).abs() < 1e-13));
        assert!(run.max_normal_velocity <= 1e-12);
        assert!(run.final_state.v.iter().any(|v| norm(*v) > 1e-4));
    }
}
