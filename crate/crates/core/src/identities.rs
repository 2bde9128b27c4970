//! Integral identities of evolving-surface calculus evaluated as residuals.
//!
//! Each check computes two sides by independent routes. Ambient-side values use
//! the projection operators on sampled fields; metric-side values use the
//! induced metric, its time derivative and parameter derivatives only.

use crate::calculus::{
    metric_divergence, metric_gradient_norm2, metric_rate, metric_stretch_norm2, surface_divergence,
    surface_gradient, time_derivative, Kinematics,
};
use crate::constitutive::ConstitutiveSet;
use crate::error::{Error, Result};
use crate::fields::ScalarExpr;
use crate::geometry::{DerivativeMode, FlowMapSpec, Geometry};
use crate::grid::Grid;
use crate::linalg::{dot, Vec3};
use crate::quadrature::{
    boundary_integral, parameter_integral, surface_integral, BoundaryField, QuadratureRule,
};
use crate::report::CheckRow;

/// Closed-form scalar fields entering the energy representations.
#[derive(Debug, Clone)]
pub struct EnergyFields {
    pub sigma: ScalarExpr,
    pub theta: ScalarExpr,
    pub conc: ScalarExpr,
}

pub const ENERGY_CHECKS: [&str; 6] = [
    "div-v-area-rate",
    "div-v-sigma",
    "e1-stretch",
    "e2-divergence",
    "e3-temperature-gradient",
    "e4-concentration-gradient",
];

/// The six energy-density representations at the time of `geo`, with `v` the
/// velocity of the flow map. Rows are named by [`ENERGY_CHECKS`].
pub fn check_energy_representations(
    spec: &FlowMapSpec,
    geo: &Geometry,
    fields: &EnergyFields,
    cs: &ConstitutiveSet,
    rule: &QuadratureRule,
) -> Result<Vec<CheckRow>> {
    let h = geo.grid.h();
    let dt = if geo.mode == DerivativeMode::Analytic && spec.has_analytic_jet() {
        0.0
    } else {
        spec.time_step
    };
    let kin = Kinematics::new(&geo.velocity, geo);
    let rate = metric_rate(spec, geo)?;
    let mdiv = metric_divergence(&rate.g_dot, geo);
    let mstretch = metric_stretch_norm2(&rate.g_dot, geo);
    let sigma = fields.sigma.sample(geo);
    let theta = fields.theta.sample(geo);
    let conc = fields.conc.sample(geo);
    let grad_theta = fields.theta.sample_surface_gradient(geo);
    let grad_conc = fields.conc.sample_surface_gradient(geo);
    let m_theta = metric_gradient_norm2(&theta, geo);
    let m_conc = metric_gradient_norm2(&conc, geo);

    let surf = |f: Vec<f64>| surface_integral(&f, geo, rule);
    let n = geo.len();
    let half_e = |j: usize, r: &[f64]| -> Vec<f64> { r.iter().map(|&x| 0.5 * cs.e(j, x)).collect() };
    let sq = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * x).collect() };
    let norm2 = |v: &[Vec3]| -> Vec<f64> { v.iter().map(|x| dot(*x, *x)).collect() };

    let rows = vec![
        CheckRow::new(
            ENERGY_CHECKS[0],
            h,
            dt,
            surf(kin.div.clone()),
            parameter_integral(&rate.sqrt_g_dot, &geo.grid, rule),
        ),
        CheckRow::new(
            ENERGY_CHECKS[1],
            h,
            dt,
            surf((0..n).map(|k| kin.div[k] * sigma[k]).collect()),
            surf((0..n).map(|k| mdiv[k] * sigma[k]).collect()),
        ),
        CheckRow::new(
            ENERGY_CHECKS[2],
            h,
            dt,
            surf(half_e(1, &kin.stretch_norm2())),
            surf(half_e(1, &mstretch)),
        ),
        CheckRow::new(
            ENERGY_CHECKS[3],
            h,
            dt,
            surf(half_e(2, &sq(&kin.div))),
            surf(half_e(2, &sq(&mdiv))),
        ),
        CheckRow::new(
            ENERGY_CHECKS[4],
            h,
            dt,
            surf(half_e(3, &norm2(&grad_theta))),
            surf(half_e(3, &m_theta)),
        ),
        CheckRow::new(
            ENERGY_CHECKS[5],
            h,
            dt,
            surf(half_e(4, &norm2(&grad_conc))),
            surf(half_e(4, &m_conc)),
        ),
    ];
    Ok(rows)
}

/// Co-normal component `ν·φ` on every boundary segment.
pub fn conormal_flux(phi: &[Vec3], geo: &Geometry) -> BoundaryField {
    BoundaryField::from_fn(geo, |seg, _, (i, j)| {
        let k = geo.grid.idx(i, j);
        dot(geo.metric[k].conormal(seg.normal_u), phi[k])
    })
}

/// `∫ div_Γ φ + ∫ H (n·φ)` against `∮ ν·φ`.
pub fn check_divergence_theorem(
    name: &str,
    phi: &[Vec3],
    geo: &Geometry,
    rule: &QuadratureRule,
) -> Result<CheckRow> {
    check_len(phi.len(), geo)?;
    let div = surface_divergence(phi, geo);
    let hn: Vec<f64> = (0..geo.len())
        .map(|k| geo.metric[k].h * dot(geo.metric[k].n, phi[k]))
        .collect();
    let lhs = surface_integral(&div, geo, rule) + surface_integral(&hn, geo, rule);
    let rhs = boundary_integral(&conormal_flux(phi, geo), geo)?;
    Ok(CheckRow::new(name, geo.grid.h(), 0.0, lhs, rhs))
}

/// `∫ f ∂_j^Γ g + ∫ (∂_j^Γ f + H n_j f) g` against `∮ ν_j f g`.
pub fn check_integration_by_parts(
    name: &str,
    f: &[f64],
    g: &[f64],
    j: usize,
    geo: &Geometry,
    rule: &QuadratureRule,
) -> Result<CheckRow> {
    check_len(f.len(), geo)?;
    check_len(g.len(), geo)?;
    if j > 2 {
        return Err(Error::config("component", "j must be 0, 1 or 2"));
    }
    let gf = surface_gradient(f, geo);
    let gg = surface_gradient(g, geo);
    let a: Vec<f64> = (0..geo.len()).map(|k| f[k] * gg[k][j]).collect();
    let b: Vec<f64> = (0..geo.len())
        .map(|k| (gf[k][j] + geo.metric[k].h * geo.metric[k].n[j] * f[k]) * g[k])
        .collect();
    let lhs = surface_integral(&a, geo, rule) + surface_integral(&b, geo, rule);
    let bf = BoundaryField::from_fn(geo, |seg, _, (i, jj)| {
        let k = geo.grid.idx(i, jj);
        geo.metric[k].conormal(seg.normal_u)[j] * f[k] * g[k]
    });
    let rhs = boundary_integral(&bf, geo)?;
    Ok(CheckRow::new(name, geo.grid.h(), 0.0, lhs, rhs))
}

/// `(d/dt) ∫ f dH²` by a central difference of the integral at `t ± dt`
/// against `∫ (D_t f + (div_Γ v) f) dH²` at `t`.
///
/// `f` returns the Lagrangian samples `f̂(X, t)` for the geometry it is given.
#[allow(clippy::too_many_arguments)]
pub fn check_transport_theorem<F>(
    name: &str,
    spec: &FlowMapSpec,
    grid: &Grid,
    t: f64,
    dt: f64,
    mode: DerivativeMode,
    rule: &QuadratureRule,
    f: F,
) -> Result<CheckRow>
where
    F: Fn(&Geometry) -> Vec<f64>,
{
    let geos = [
        Geometry::build(spec, grid, t - dt, mode)?,
        Geometry::build(spec, grid, t, mode)?,
        Geometry::build(spec, grid, t + dt, mode)?,
    ];
    let levels: Vec<Vec<f64>> = geos.iter().map(&f).collect();
    let ints: Vec<f64> = levels
        .iter()
        .zip(&geos)
        .map(|(l, g)| surface_integral(l, g, rule))
        .collect();
    let lhs = (ints[2] - ints[0]) / (2.0 * dt);
    let geo = &geos[1];
    let dtf = time_derivative(&levels, dt)?;
    let div = surface_divergence(&geo.velocity, geo);
    let integrand: Vec<f64> = (0..geo.len())
        .map(|k| dtf[k] + div[k] * levels[1][k])
        .collect();
    let rhs = surface_integral(&integrand, geo, rule);
    Ok(CheckRow::new(name, grid.h(), dt, lhs, rhs))
}

fn check_len(n: usize, geo: &Geometry) -> Result<()> {
    if n != geo.len() {
        return Err(Error::ShapeMismatch(format!(
            "field has {n} values, grid has {}",
            geo.len()
        )));
    }
    Ok(())
}
