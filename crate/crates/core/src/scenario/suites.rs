//! One function per suite, each evaluating its checks at a single resolution.

use super::config::{Scenario, Suite, Tolerance};
use crate::calculus::surface_divergence;
use crate::constitutive::ConstitutiveSet;
use crate::error::{Error, Result};
use crate::geometry::{FlowMapSpec, Geometry, SurfaceConfig};
use crate::grid::Grid;
use crate::identities::{
    check_divergence_theorem, check_energy_representations, check_integration_by_parts, check_transport_theorem,
    EnergyFields,
};
use crate::linalg::{dot, mat_max_abs, mat_mul, mat_sub, norm, trace, Vec3};
use crate::quadrature::{surface_integral, QuadratureRule};
use crate::report::CheckRow;
use crate::solver::manufactured::{CapManufactured, SigmaChoice};
use crate::solver::{
    angular_moment_of_divergence, disk_mode_decay, entropy_production, residual_generalized_system,
    residual_thermodynamics, run_tangential_barotropic, summaries_to_csv, BcMode, FluidState, ResidualSummary,
};
use crate::variational::{
    check_pairing, density_transport, Action, ActionSetup, FlowVariation, Functional, Profile, VariationDirection,
    VariationalState,
};

/// Everything a suite needs at one resolution.
pub(crate) struct Level<'a> {
    pub sc: &'a Scenario,
    pub n: usize,
    pub spec: FlowMapSpec,
    pub grid: Grid,
    pub geo: Geometry,
    pub rule: QuadratureRule,
    pub cs: ConstitutiveSet,
}

impl Level<'_> {
    fn h(&self) -> f64 {
        self.grid.h()
    }

    fn dt(&self) -> f64 {
        self.sc.dt_policy.dt_ratio * self.h()
    }

    fn geometry_at(&self, t: f64) -> Result<Geometry> {
        Geometry::build(&self.spec, &self.grid, t, self.sc.derivative_mode)
    }

    fn is_stationary(&self) -> bool {
        self.geo.velocity.iter().all(|v| norm(*v) == 0.0)
    }
}

/// Rows of one suite at one resolution plus any extra files it writes.
#[derive(Debug, Clone, Default)]
pub(crate) struct LevelRows {
    pub rows: Vec<CheckRow>,
    pub files: Vec<(String, String)>,
}

impl LevelRows {
    fn rows(rows: Vec<CheckRow>) -> Self {
        LevelRows { rows, files: Vec::new() }
    }
}

/// Tolerance of a check before scenario overrides.
pub(crate) fn default_tolerance(suite: Suite, check: &str) -> Tolerance {
    let t = Tolerance::new;
    match (suite, check) {
        (Suite::Geometry, "projector") => t(1e-12, None),
        (Suite::Geometry, "curvature-divergence") => t(1e-2, Some(1.9)),
        (Suite::Geometry, _) => t(1e-3, Some(1.9)),
        (Suite::Divergence, "divergence-constant") => t(1e-6, None),
        (Suite::Variational, _) => t(1e-3, None),
        (Suite::Action, _) => t(1e-2, Some(1.9)),
        (Suite::Density, _) => t(1e-6, None),
        (Suite::Barotropic, "mass-drift") => t(1e-6, None),
        (Suite::Barotropic, "tangency") => t(1e-12, None),
        (Suite::Barotropic, _) => t(1e-3, Some(1.9)),
        (Suite::Diffusion, "diffusion-mass") => t(1e-8, None),
        (Suite::Diffusion, _) => t(1e-2, None),
        (Suite::Manufactured, _) => t(1e-2, Some(1.8)),
        (Suite::Thermodynamics, c) if c.starts_with("entropy-production") => t(1e-12, None),
        (Suite::Thermodynamics, _) => t(1e-2, Some(1.9)),
        (Suite::Audit, "mass") => t(1e-10, None),
        (Suite::Audit, "angular-moment") => t(1e-3, None),
        (Suite::Audit, "energy-law") => t(1e-2, Some(1.9)),
        (Suite::Audit, _) => t(1e-3, Some(1.9)),
        _ => t(1e-3, Some(1.9)),
    }
}

pub(crate) fn run(suite: Suite, lv: &Level) -> Result<LevelRows> {
    match suite {
        Suite::Geometry => geometry(lv).map(LevelRows::rows),
        Suite::Identities => identities(lv).map(LevelRows::rows),
        Suite::Divergence => divergence(lv).map(LevelRows::rows),
        Suite::Transport => transport(lv).map(LevelRows::rows),
        Suite::Variational => variational(lv).map(LevelRows::rows),
        Suite::Action => action(lv).map(LevelRows::rows),
        Suite::Density => density(lv).map(LevelRows::rows),
        Suite::Barotropic => barotropic(lv),
        Suite::Diffusion => diffusion(lv).map(LevelRows::rows),
        Suite::Manufactured => manufactured(lv),
        Suite::Thermodynamics => thermodynamics(lv),
        Suite::Audit => audit(lv),
    }
}

fn geometry(lv: &Level) -> Result<Vec<CheckRow>> {
    let geo = &lv.geo;
    let h = lv.h();
    let mut rows = Vec::new();
    if let Some(exact) = lv.sc.surface.exact_mean_curvature(geo.t) {
        let err = geo.max_abs_mean_curvature_error(exact);
        rows.push(CheckRow::residual("mean-curvature", h, 0.0, err, exact));
    }
    let normals: Vec<Vec3> = geo.metric.iter().map(|m| m.n).collect();
    let div_n = surface_divergence(&normals, geo);
    let (err, scale) = geo
        .metric
        .iter()
        .zip(&div_n)
        .fold((0.0_f64, 0.0_f64), |(e, s), (m, d)| (e.max((m.h + d).abs()), s.max(m.h.abs())));
    rows.push(CheckRow::residual("curvature-divergence", h, 0.0, err, scale));
    let proj = geo
        .metric
        .iter()
        .map(|m| {
            let idem = mat_max_abs(&mat_sub(&mat_mul(&m.p, &m.p), &m.p));
            let pn = crate::linalg::mat_vec(&m.p, m.n);
            idem.max(norm(pn)).max((trace(&m.p) - 2.0).abs())
        })
        .fold(0.0, f64::max);
    rows.push(CheckRow::residual("projector", h, 0.0, proj, 1.0));
    Ok(rows)
}

fn identities(lv: &Level) -> Result<Vec<CheckRow>> {
    let f = &lv.sc.fields;
    let fields = EnergyFields {
        sigma: f.sigma.clone(),
        theta: f.theta.clone(),
        conc: f.conc.clone(),
    };
    check_energy_representations(&lv.spec, &lv.geo, &fields, &lv.cs, &lv.rule)
}

/// Fixed field of the constant divergence check.
const CONSTANT_FIELD: Vec3 = [0.3, -0.2, 1.0];

fn divergence(lv: &Level) -> Result<Vec<CheckRow>> {
    let geo = &lv.geo;
    let f = &lv.sc.fields;
    let constant = vec![CONSTANT_FIELD; geo.len()];
    let mut rows = vec![
        check_divergence_theorem("divergence-constant", &constant, geo, &lv.rule)?,
        check_divergence_theorem("divergence-random", &f.phi.sample(geo), geo, &lv.rule)?,
    ];
    let a = f.theta.sample(geo);
    let b = f.conc.sample(geo);
    for (j, name) in ["ibp-x", "ibp-y", "ibp-z"].iter().enumerate() {
        rows.push(check_integration_by_parts(name, &a, &b, j, geo, &lv.rule)?);
    }
    Ok(rows)
}

fn transport(lv: &Level) -> Result<Vec<CheckRow>> {
    let dt = lv.dt();
    let t = lv.sc.time.t;
    if t < dt {
        return Err(Error::config(
            "time.t",
            format!("the transport check differences over t ± {dt:.3e}; t must be at least that"),
        ));
    }
    let f = lv.sc.fields.theta.clone();
    Ok(vec![check_transport_theorem(
        "transport",
        &lv.spec,
        &lv.grid,
        t,
        dt,
        lv.sc.derivative_mode,
        &lv.rule,
        move |g| f.sample(g),
    )?])
}

fn variational(lv: &Level) -> Result<Vec<CheckRow>> {
    let geo = &lv.geo;
    let f = &lv.sc.fields;
    let state = VariationalState {
        v: f.velocity.sample(geo),
        sigma: f.sigma.sample(geo),
        theta: f.theta.sample(geo),
        conc: f.conc.sample(geo),
        rho: f.rho0.sample(geo),
        force: f.force.sample(geo),
    };
    let cfg = &lv.sc.variational;
    let mut rows = Vec::new();
    for which in Functional::ALL {
        for tangential in [false, true] {
            if !which.varies_velocity() && tangential {
                continue;
            }
            let variant = if tangential { "tangential" } else { "plain" };
            for i in 0..cfg.directions {
                let seed = lv.sc.seed.wrapping_add(100 + i as u64);
                let dir = if which.varies_velocity() {
                    VariationDirection::random_velocity(geo, seed, tangential)
                } else {
                    VariationDirection::random_scalar(geo, seed)
                };
                let name = format!("{}-{variant}-{i}", which.label());
                rows.push(check_pairing(&name, which, &state, &dir, &cfg.eps, geo, &lv.cs, &lv.rule)?);
            }
        }
    }
    Ok(rows)
}

fn action(lv: &Level) -> Result<Vec<CheckRow>> {
    let cfg = &lv.sc.action;
    let steps = ((cfg.steps_ratio * lv.n as f64).ceil() as usize).max(2);
    let setup = |profile| ActionSetup {
        spec: lv.spec.clone(),
        grid: lv.grid.clone(),
        steps,
        rho0: lv.sc.fields.rho0.clone(),
        pressure: lv.sc.pressure,
        variation: FlowVariation {
            profile,
            amplitude: lv.sc.fields.phi.clone(),
            window: cfg.window,
        },
        rule: lv.rule.clone(),
    };
    let compact = setup(Profile::Compact { margin: cfg.margin });
    let vanishing = setup(Profile::BoundaryVanishing);
    let eps = &lv.sc.variational.eps;
    Ok(vec![
        compact.check(Action::Kinetic, eps)?,
        vanishing.check(Action::Barotropic, eps)?,
        compact.check_area_variation(0.5 * cfg.window, eps)?,
    ])
}

fn density(lv: &Level) -> Result<Vec<CheckRow>> {
    let geo0 = lv.geometry_at(0.0)?;
    let rho0 = lv.sc.fields.rho0.sample(&geo0);
    let m0 = surface_integral(&rho0, &geo0, &lv.rule);
    let mut worst = CheckRow::new("density-mass", lv.h(), 0.0, m0, m0);
    let samples = 4;
    for k in 1..=samples {
        let t = lv.sc.time.t_end * k as f64 / samples as f64;
        let geo = lv.geometry_at(t.min(lv.spec.horizon * (1.0 - 1e-12)))?;
        let rho = density_transport(&rho0, &geo0, &geo)?;
        let row = CheckRow::new("density-mass", lv.h(), 0.0, surface_integral(&rho, &geo, &lv.rule), m0);
        if row.rel_residual > worst.rel_residual {
            worst = row;
        }
    }
    Ok(vec![worst])
}

fn barotropic(lv: &Level) -> Result<LevelRows> {
    if !lv.is_stationary() {
        return Err(Error::config("surface", "the barotropic run needs a stationary surface"));
    }
    if lv.sc.bc_mode != BcMode::NoSlip {
        return Err(Error::config("bc_mode", "the barotropic run enforces no-slip"));
    }
    let geo = &lv.geo;
    let mut init = FluidState::rest(geo.len(), 1.0);
    init.rho = lv.sc.fields.initial_density.sample(geo);
    let dp = &lv.sc.dt_policy;
    let run = run_tangential_barotropic(&init, geo, &lv.sc.pressure, lv.sc.time.t_end, dp.cfl, dp.cfl_max, &lv.rule)?;
    let h = lv.h();
    let rep = &run.report;
    let scale = rep.rows[0].total_energy.abs();
    Ok(LevelRows {
        rows: vec![
            CheckRow::residual("mass-drift", h, run.dt, rep.max_mass_drift(), 1.0),
            CheckRow::residual("energy-law", h, run.dt, rep.max_energy_residual(), scale),
            CheckRow::residual("tangency", h, run.dt, run.max_normal_velocity, 1.0),
        ],
        files: vec![(format!("barotropic_balance_n{}.csv", lv.n), rep.to_csv())],
    })
}

fn diffusion(lv: &Level) -> Result<Vec<CheckRow>> {
    let cfg = &lv.sc.diffusion;
    let d = disk_mode_decay(&lv.geo, &lv.cs, cfg.amplitude, cfg.t_start, cfg.t_end, &lv.rule)?;
    let h = lv.h();
    Ok(vec![
        CheckRow::new("neumann-decay-rate", h, d.dt, d.rate, d.expected),
        CheckRow::residual("diffusion-mass", h, d.dt, d.mass_drift, 1.0),
    ])
}

fn cap_state(lv: &Level, sigma: SigmaChoice) -> Result<CapManufactured> {
    let SurfaceConfig::ExpandingSphereCap {
        radius0,
        rate,
        accel,
        omega,
        theta_min,
        theta_max,
        domain: None,
    } = lv.sc.surface
    else {
        return Err(Error::config(
            "surface",
            "manufactured states exist only on expanding-sphere-cap with its default domain",
        ));
    };
    let m = &lv.sc.manufactured;
    Ok(CapManufactured {
        radius0,
        rate,
        accel,
        omega,
        theta_min,
        theta_max,
        rho0: m.rho0.clone(),
        theta: m.theta.clone(),
        conc: m.conc.clone(),
        sigma,
    })
}

/// Geometries at `t − Δt, t, t + Δt`.
fn three_levels(lv: &Level) -> Result<(f64, [Geometry; 3])> {
    let dt = lv.dt();
    let t = lv.sc.time.t;
    if t < dt {
        return Err(Error::config(
            "time.t",
            format!("residuals difference over t ± {dt:.3e}; t must be at least that"),
        ));
    }
    Ok((dt, [lv.geometry_at(t - dt)?, lv.geometry_at(t)?, lv.geometry_at(t + dt)?]))
}

fn residual_rows(summaries: &[ResidualSummary], h: f64, dt: f64) -> Vec<CheckRow> {
    summaries
        .iter()
        .map(|s| CheckRow::residual(&s.name, h, dt, s.l2, 1.0))
        .collect()
}

fn manufactured(lv: &Level) -> Result<LevelRows> {
    let m = cap_state(
        lv,
        SigmaChoice::StressFree {
            field: lv.sc.manufactured.sigma_field.clone(),
        },
    )?;
    let (dt, geos) = three_levels(lv)?;
    let states = geos
        .iter()
        .map(|g| m.sample(g, &lv.cs))
        .collect::<Result<Vec<_>>>()?;
    let fluid: Vec<FluidState> = states.iter().map(|s| s.state.fluid.clone()).collect();
    let res = residual_generalized_system(&fluid, &geos[1], dt, &lv.cs, &states[1].sources)?;
    let sums = res.summaries(&geos[1], &lv.rule);
    Ok(LevelRows {
        rows: residual_rows(&sums, lv.h(), dt),
        files: vec![(format!("manufactured_residuals_n{}.csv", lv.n), summaries_to_csv(&sums))],
    })
}

fn thermodynamics(lv: &Level) -> Result<LevelRows> {
    let m = cap_state(
        lv,
        SigmaChoice::Gibbs {
            scale: lv.sc.manufactured.gibbs_scale,
        },
    )?;
    let (dt, geos) = three_levels(lv)?;
    let states = geos
        .iter()
        .map(|g| m.sample(g, &lv.cs))
        .collect::<Result<Vec<_>>>()?;
    let thermo: Vec<_> = states.iter().map(|s| s.state.clone()).collect();
    let res = residual_thermodynamics(&thermo, &geos[1], dt, &lv.cs, Some(&states[1].sources.energy))?;
    let sums = res.summaries(&geos[1], &lv.rule);
    let h = lv.h();
    let mut rows = residual_rows(&sums, h, dt);
    let fluid = &states[1].state.fluid;
    for cs in ConstitutiveSet::catalog() {
        if !cs.audit(5.0, [0.2, 3.0], 41).dissipative {
            continue;
        }
        let prod = entropy_production(&fluid.v, &fluid.theta, &geos[1], &cs)?;
        let negative = prod.iter().fold(0.0_f64, |a, &p| a.max(-p));
        rows.push(CheckRow::residual(&format!("entropy-production-{}", cs.name), h, 0.0, negative, 1.0));
    }
    Ok(LevelRows {
        rows,
        files: vec![(format!("thermodynamics_residuals_n{}.csv", lv.n), summaries_to_csv(&sums))],
    })
}

fn audit(lv: &Level) -> Result<LevelRows> {
    let m = cap_state(
        lv,
        SigmaChoice::StressFree {
            field: lv.sc.manufactured.sigma_field.clone(),
        },
    )?;
    let h = lv.h();
    let steps = (lv.n / 4).max(2);
    let rep = m.balance_series(&lv.grid, &lv.cs, lv.sc.time.t_end, steps, lv.sc.derivative_mode, &lv.rule)?;
    let dt = lv.sc.time.t_end / steps as f64;
    let s = m.stress(&lv.geo, &lv.cs)?;
    let moment = angular_moment_of_divergence(&s, &lv.geo, &lv.rule)?;
    Ok(LevelRows {
        rows: vec![
            CheckRow::residual("momentum-balance", h, dt, rep.momentum_mismatch(), 1.0),
            CheckRow::residual("angular-momentum-balance", h, dt, rep.angular_mismatch(), 1.0),
            CheckRow::residual("energy-law", h, dt, rep.max_energy_residual(), 1.0),
            CheckRow::residual("mass", h, dt, rep.max_mass_drift(), 1.0),
            CheckRow::residual("angular-moment", h, 0.0, dot(moment, moment).sqrt(), 1.0),
        ],
        files: vec![(format!("audit_balance_n{}.csv", lv.n), rep.to_csv())],
    })
}
