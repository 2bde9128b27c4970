//! Energy functionals, their numerical Gateaux derivatives and the closed-form
//! forces they should match, plus variations of the flow map in action integrals.

use crate::calculus::{
    scaled_projector, surface_divergence, surface_gradient, tensor_divergence, viscous_stress,
    Kinematics,
};
use crate::constitutive::{ConstitutiveSet, Pressure};
use crate::error::{Error, Result};
use crate::fields::{bump_1d, compact_bump, ScalarExpr, VectorExpr};
use crate::geometry::{DerivativeMode, FlowMapSpec, Geometry, Perturbed};
use crate::grid::Grid;
use crate::linalg::{add, axpy, dot, mat_vec, scale, Vec3};
use crate::quadrature::{parameter_integral, surface_integral, time_weights, QuadratureRule};
use crate::report::CheckRow;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Default step ladder for Gateaux difference quotients.
pub const EPS_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    /// Viscous dissipation, varied in `v`.
    #[serde(rename = "E_D")]
    Dissipation,
    /// Work of pressure and exterior force, varied in `v`.
    #[serde(rename = "E_W")]
    Work,
    /// Thermal diffusion, varied in `θ`.
    #[serde(rename = "E_TD")]
    ThermalDiffusion,
    /// General diffusion, varied in `C`.
    #[serde(rename = "E_GD")]
    GeneralDiffusion,
}

impl Functional {
    pub const ALL: [Functional; 4] = [
        Functional::Dissipation,
        Functional::Work,
        Functional::ThermalDiffusion,
        Functional::GeneralDiffusion,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Functional::Dissipation => "E_D",
            Functional::Work => "E_W",
            Functional::ThermalDiffusion => "E_TD",
            Functional::GeneralDiffusion => "E_GD",
        }
    }

    /// Whether the functional is varied in a velocity (vector) direction.
    pub fn varies_velocity(self) -> bool {
        matches!(self, Functional::Dissipation | Functional::Work)
    }
}

/// Fields a functional may depend on, sampled on one geometry.
#[derive(Debug, Clone)]
pub struct VariationalState {
    pub v: Vec<Vec3>,
    pub sigma: Vec<f64>,
    pub theta: Vec<f64>,
    pub conc: Vec<f64>,
    pub rho: Vec<f64>,
    pub force: Vec<Vec3>,
}

impl VariationalState {
    pub fn check(&self, geo: &Geometry) -> Result<()> {
        let n = geo.len();
        let lens = [
            self.v.len(),
            self.sigma.len(),
            self.theta.len(),
            self.conc.len(),
            self.rho.len(),
            self.force.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::ShapeMismatch(format!(
                "state field lengths {lens:?} do not match {n} grid nodes"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    /// `φ`, a velocity variation.
    Velocity,
    /// `ψ`, a scalar variation.
    Scalar,
    /// `z`, a flow-map variation.
    FlowMap,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectionValues {
    Vector(Vec<Vec3>),
    Scalar(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationDirection {
    pub kind: DirectionKind,
    pub values: DirectionValues,
    /// `n·direction = 0` at every node.
    pub tangential: bool,
    /// Vanishes at every boundary node.
    pub compact: bool,
}

/// Margin of the compact bump as a fraction of each bounded axis.
pub const BUMP_MARGIN: f64 = 0.1;

impl VariationDirection {
    pub fn zero(kind: DirectionKind, n: usize) -> Self {
        let values = match kind {
            DirectionKind::Scalar => DirectionValues::Scalar(vec![0.0; n]),
            _ => DirectionValues::Vector(vec![[0.0; 3]; n]),
        };
        VariationDirection {
            kind,
            values,
            tangential: true,
            compact: true,
        }
    }

    /// Seeded smooth vector field times the compact bump, projected when `tangential`.
    pub fn random_velocity(geo: &Geometry, seed: u64, tangential: bool) -> Self {
        let bump = compact_bump(geo, BUMP_MARGIN);
        let raw = VectorExpr::random(seed).sample(geo);
        let values = (0..geo.len())
            .map(|k| {
                let v = scale(bump[k], raw[k]);
                if tangential {
                    mat_vec(&geo.metric[k].p, v)
                } else {
                    v
                }
            })
            .collect();
        VariationDirection {
            kind: DirectionKind::Velocity,
            values: DirectionValues::Vector(values),
            tangential,
            compact: true,
        }
    }

    /// Seeded smooth scalar field times the compact bump.
    pub fn random_scalar(geo: &Geometry, seed: u64) -> Self {
        let bump = compact_bump(geo, BUMP_MARGIN);
        let raw = ScalarExpr::random(seed).sample(geo);
        VariationDirection {
            kind: DirectionKind::Scalar,
            values: DirectionValues::Scalar((0..geo.len()).map(|k| bump[k] * raw[k]).collect()),
            tangential: false,
            compact: true,
        }
    }

    /// Checks the declared tangency and support flags.
    pub fn validate(&self, geo: &Geometry) -> Result<()> {
        let n = match &self.values {
            DirectionValues::Vector(v) => v.len(),
            DirectionValues::Scalar(s) => s.len(),
        };
        if n != geo.len() {
            return Err(Error::ShapeMismatch(format!(
                "direction has {n} values, grid has {}",
                geo.len()
            )));
        }
        if self.compact {
            for seg in &geo.segments {
                for &(i, j) in &seg.nodes {
                    let k = geo.grid.idx(i, j);
                    let bad = match &self.values {
                        DirectionValues::Vector(v) => v[k] != [0.0; 3],
                        DirectionValues::Scalar(s) => s[k] != 0.0,
                    };
                    if bad {
                        return Err(Error::config(
                            "direction",
                            format!("declared compact but nonzero at boundary node ({i}, {j})"),
                        ));
                    }
                }
            }
        }
        if self.tangential {
            if let DirectionValues::Vector(v) = &self.values {
                for (k, x) in v.iter().enumerate() {
                    if dot(*x, geo.metric[k].n).abs() > 1e-12 * (1.0 + dot(*x, *x).sqrt()) {
                        return Err(Error::config(
                            "direction",
                            format!("declared tangential but n·φ ≠ 0 at node {k}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn vector(&self) -> Result<&[Vec3]> {
        match &self.values {
            DirectionValues::Vector(v) => Ok(v),
            DirectionValues::Scalar(_) => Err(Error::config("direction", "expected a vector direction")),
        }
    }

    fn scalar(&self) -> Result<&[f64]> {
        match &self.values {
            DirectionValues::Scalar(s) => Ok(s),
            DirectionValues::Vector(_) => Err(Error::config("direction", "expected a scalar direction")),
        }
    }
}

fn gradient_energy(j: usize, f: &[f64], geo: &Geometry, cs: &ConstitutiveSet, rule: &QuadratureRule) -> f64 {
    let g = surface_gradient(f, geo);
    let dens: Vec<f64> = g.iter().map(|x| -0.5 * cs.e(j, dot(*x, *x))).collect();
    surface_integral(&dens, geo, rule)
}

/// Value of the functional at `ε = 0`.
pub fn energy_functional(
    which: Functional,
    state: &VariationalState,
    geo: &Geometry,
    cs: &ConstitutiveSet,
    rule: &QuadratureRule,
) -> f64 {
    match which {
        Functional::Dissipation => {
            let kin = Kinematics::new(&state.v, geo);
            let dens: Vec<f64> = kin
                .stretch_norm2()
                .iter()
                .zip(&kin.div)
                .map(|(&r, &d)| -0.5 * (cs.e(1, r) + cs.e(2, d * d)))
                .collect();
            surface_integral(&dens, geo, rule)
        }
        Functional::Work => {
            let div = surface_divergence(&state.v, geo);
            let dens: Vec<f64> = (0..geo.len())
                .map(|k| div[k] * state.sigma[k] + state.rho[k] * dot(state.force[k], state.v[k]))
                .collect();
            surface_integral(&dens, geo, rule)
        }
        Functional::ThermalDiffusion => gradient_energy(3, &state.theta, geo, cs, rule),
        Functional::GeneralDiffusion => gradient_energy(4, &state.conc, geo, cs, rule),
    }
}

fn perturbed_state(
    which: Functional,
    state: &VariationalState,
    dir: &VariationDirection,
    eps: f64,
) -> Result<VariationalState> {
    let mut s = state.clone();
    if which.varies_velocity() {
        let phi = dir.vector()?;
        s.v = s.v.iter().zip(phi).map(|(v, p)| axpy(*v, eps, *p)).collect();
    } else {
        let psi = dir.scalar()?;
        let target = if which == Functional::ThermalDiffusion {
            &mut s.theta
        } else {
            &mut s.conc
        };
        for (x, p) in target.iter_mut().zip(psi) {
            *x += eps * p;
        }
    }
    Ok(s)
}

/// Extrapolated derivative with an error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateauxEstimate {
    pub value: f64,
    pub error: f64,
    /// Central differences, one per ladder step.
    pub quotients: Vec<f64>,
}

/// Richardson extrapolation of central difference quotients `d_k` taken at
/// the decreasing steps `eps[k]`. `floor` is the roundoff level of the quotients.
pub fn richardson(eps: &[f64], d: &[f64], floor: f64) -> Result<GateauxEstimate> {
    if d.len() == 1 {
        return Ok(GateauxEstimate {
            value: d[0],
            error: f64::NAN,
            quotients: d.to_vec(),
        });
    }
    let diffs: Vec<f64> = d.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in diffs.windows(2) {
        if w[1] > w[0] && w[1] > floor {
            return Err(Error::StepTooSmall {
                coarse: w[0],
                fine: w[1],
            });
        }
    }
    let r: Vec<f64> = (0..d.len() - 1)
        .map(|k| {
            let q = (eps[k] / eps[k + 1]).powi(2);
            (q * d[k + 1] - d[k]) / (q - 1.0)
        })
        .collect();
    let error = if r.len() >= 2 {
        (r[r.len() - 1] - r[r.len() - 2]).abs()
    } else {
        diffs[0]
    };
    Ok(GateauxEstimate {
        value: *r.last().expect("at least one extrapolant"),
        error,
        quotients: d.to_vec(),
    })
}

/// Central difference `(E(ε) − E(−ε))/2ε` over `eps_list` (largest first) with
/// Richardson extrapolation.
pub fn gateaux_numeric(
    which: Functional,
    state: &VariationalState,
    dir: &VariationDirection,
    eps_list: &[f64],
    geo: &Geometry,
    cs: &ConstitutiveSet,
    rule: &QuadratureRule,
) -> Result<GateauxEstimate> {
    state.check(geo)?;
    if eps_list.is_empty() {
        return Err(Error::config("eps_list", "at least one step is required"));
    }
    let e0 = energy_functional(which, state, geo, cs, rule);
    let mut d = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ep = energy_functional(which, &perturbed_state(which, state, dir, eps)?, geo, cs, rule);
        let em = energy_functional(which, &perturbed_state(which, state, dir, -eps)?, geo, cs, rule);
        d.push((ep - em) / (2.0 * eps));
    }
    let eps_min = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = 1e3 * f64::EPSILON * (e0.abs() + 1.0) / eps_min;
    richardson(eps_list, &d, floor)
}

/// Closed-form force of a functional.
#[derive(Debug, Clone, PartialEq)]
pub enum Force {
    Vector(Vec<Vec3>),
    Scalar(Vec<f64>),
}

/// The force whose pairing with a direction gives the Gateaux derivative;
/// vector forces are projected with `P_Γ` when `tangential`.
pub fn variational_force(
    which: Functional,
    state: &VariationalState,
    geo: &Geometry,
    cs: &ConstitutiveSet,
    tangential: bool,
) -> Result<Force> {
    state.check(geo)?;
    let project = |f: Vec<Vec3>| -> Vec<Vec3> {
        if tangential {
            f.iter()
                .zip(&geo.metric)
                .map(|(x, m)| mat_vec(&m.p, *x))
                .collect()
        } else {
            f
        }
    };
    let flux_div = |j: usize, f: &[f64]| -> Vec<f64> {
        let g = surface_gradient(f, geo);
        let q: Vec<Vec3> = g.iter().map(|x| scale(cs.de(j, dot(*x, *x)), *x)).collect();
        surface_divergence(&q, geo)
    };
    Ok(match which {
        Functional::Dissipation => {
            let kin = Kinematics::new(&state.v, geo);
            Force::Vector(project(tensor_divergence(&viscous_stress(&kin, geo, cs), geo)))
        }
        Functional::Work => {
            let neg: Vec<f64> = state.sigma.iter().map(|s| -s).collect();
            let d = tensor_divergence(&scaled_projector(&neg, geo), geo);
            let f = (0..geo.len())
                .map(|k| axpy(d[k], state.rho[k], state.force[k]))
                .collect();
            Force::Vector(project(f))
        }
        Functional::ThermalDiffusion => Force::Scalar(flux_div(3, &state.theta)),
        Functional::GeneralDiffusion => Force::Scalar(flux_div(4, &state.conc)),
    })
}

/// `∫ force · direction dH²`.
pub fn force_pairing(
    force: &Force,
    dir: &VariationDirection,
    geo: &Geometry,
    rule: &QuadratureRule,
) -> Result<f64> {
    let dens: Vec<f64> = match force {
        Force::Vector(f) => {
            let phi = dir.vector()?;
            f.iter().zip(phi).map(|(a, b)| dot(*a, *b)).collect()
        }
        Force::Scalar(f) => {
            let psi = dir.scalar()?;
            f.iter().zip(psi).map(|(a, b)| a * b).collect()
        }
    };
    Ok(surface_integral(&dens, geo, rule))
}

/// Gateaux derivative against the force pairing as one residual row.
#[allow(clippy::too_many_arguments)]
pub fn check_pairing(
    name: &str,
    which: Functional,
    state: &VariationalState,
    dir: &VariationDirection,
    eps_list: &[f64],
    geo: &Geometry,
    cs: &ConstitutiveSet,
    rule: &QuadratureRule,
) -> Result<CheckRow> {
    dir.validate(geo)?;
    let g = gateaux_numeric(which, state, dir, eps_list, geo, cs, rule)?;
    let f = variational_force(which, state, geo, cs, dir.tangential)?;
    let p = force_pairing(&f, dir, geo, rule)?;
    Ok(CheckRow::new(name, geo.grid.h(), 0.0, g.value, p))
}

/// `ρ(x̂(X,t),t) = ρ₀(Φ(X)) √G(X,0) / √G(X,t)` given `ρ₀(Φ(X))` on the grid.
pub fn density_transport(rho0: &[f64], geo0: &Geometry, geo: &Geometry) -> Result<Vec<f64>> {
    if rho0.len() != geo.len() || geo0.len() != geo.len() {
        return Err(Error::ShapeMismatch("density and geometries differ in size".into()));
    }
    Ok((0..geo.len())
        .map(|k| rho0[k] * geo0.sqrt_g[k] / geo.sqrt_g[k])
        .collect())
}

/// Densities along a sequence of geometries, the first one being `t = 0`.
pub fn density_series(rho0: &[f64], geos: &[Geometry]) -> Result<Vec<Vec<f64>>> {
    let g0 = geos
        .first()
        .ok_or_else(|| Error::config("geometries", "need at least the initial geometry"))?;
    geos.iter().map(|g| density_transport(rho0, g0, g)).collect()
}

/// Spatial profile of a flow-map variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    /// Compact bump with the given margin on bounded axes.
    Compact { margin: f64 },
    /// `Π sin(π s)` over bounded axes, zero on the boundary only.
    BoundaryVanishing,
}

impl Profile {
    pub fn value(&self, grid_axes: &[crate::grid::Axis; 2], x: [f64; 2]) -> f64 {
        let mut out = 1.0;
        for (a, ax) in grid_axes.iter().enumerate() {
            if ax.periodic {
                continue;
            }
            let s = (x[a] - ax.lo) / (ax.hi - ax.lo);
            out *= match *self {
                Profile::Compact { margin } => bump_1d(s, margin),
                Profile::BoundaryVanishing => (std::f64::consts::PI * s).sin(),
            };
        }
        out
    }
}

/// `z(X, t) = sin²(π t / T) b(X) a(Φ(X))`, which vanishes at `t = 0` and `t = T`.
#[derive(Debug, Clone)]
pub struct FlowVariation {
    pub profile: Profile,
    pub amplitude: VectorExpr,
    pub window: f64,
}

impl FlowVariation {
    /// `(z, ∂z/∂t)` as closures over `(X, t)`.
    #[allow(clippy::type_complexity)]
    pub fn closures(
        &self,
        spec: &FlowMapSpec,
        grid: &Grid,
    ) -> (
        Arc<dyn Fn([f64; 2], f64) -> Vec3 + Send + Sync>,
        Arc<dyn Fn([f64; 2], f64) -> Vec3 + Send + Sync>,
    ) {
        let axes = grid.axes.clone();
        let prof = self.profile;
        let amp = self.amplitude.clone();
        let map = spec.map.clone();
        let tw = self.window;
        let base = Arc::new(move |x: [f64; 2]| -> Vec3 {
            let a = amp.value(map.position(x, 0.0), 0.0).unwrap_or([0.0, 0.0, 1.0]);
            scale(prof.value(&axes, x), a)
        });
        let pi = std::f64::consts::PI;
        let b1 = base.clone();
        let z = Arc::new(move |x: [f64; 2], t: f64| {
            let s = (pi * t / tw).sin();
            scale(s * s, b1(x))
        });
        let z_t = Arc::new(move |x: [f64; 2], t: f64| {
            let ds = (pi / tw) * (2.0 * pi * t / tw).sin();
            scale(ds, base(x))
        });
        (z, z_t)
    }

    /// The family `x̂ + ε z` as a flow-map spec.
    pub fn perturbed(&self, spec: &FlowMapSpec, grid: &Grid, eps: f64) -> FlowMapSpec {
        let (z, z_t) = self.closures(spec, grid);
        let map = Perturbed {
            base: spec.map.clone(),
            z,
            z_t,
            eps,
        };
        let mut s = FlowMapSpec::new(&format!("{}+eps*z", spec.name), Arc::new(map), spec.domain);
        s.horizon = spec.horizon;
        s.lambda2 = spec.lambda2;
        s.time_step = spec.time_step;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    /// `Act = −∫∫ ½ ρ |v|²`
    #[serde(rename = "Act")]
    Kinetic,
    /// `A_B = −∫∫ (½ ρ |v|² − p(ρ))`
    #[serde(rename = "A_B")]
    Barotropic,
}

impl Action {
    pub fn label(self) -> &'static str {
        match self {
            Action::Kinetic => "Act",
            Action::Barotropic => "A_B",
        }
    }
}

/// Space-time setup of an action variation over `[0, window]`.
#[derive(Debug, Clone)]
pub struct ActionSetup {
    pub spec: FlowMapSpec,
    pub grid: Grid,
    pub steps: usize,
    pub rho0: ScalarExpr,
    pub pressure: Pressure,
    pub variation: FlowVariation,
    pub rule: QuadratureRule,
}

impl ActionSetup {
    fn times(&self) -> Vec<f64> {
        let dt = self.variation.window / self.steps as f64;
        (0..=self.steps).map(|k| k as f64 * dt).collect()
    }

    /// `ρ₀(Φ(X)) √G(X, 0)`, the conserved mass density on the parameter domain.
    fn mass_density(&self, geo0: &Geometry) -> Vec<f64> {
        let xi: Vec<Vec3> = geo0.pos.clone();
        (0..geo0.len())
            .map(|k| self.rho0.value(xi[k], 0.0) * geo0.sqrt_g[k])
            .collect()
    }

    /// `A[x̂ + ε z]` with the density carried by the perturbed metric.
    pub fn action(&self, which: Action, eps: f64) -> Result<f64> {
        let pspec = self.variation.perturbed(&self.spec, &self.grid, eps);
        let geo0 = Geometry::build(&self.spec, &self.grid, 0.0, DerivativeMode::FiniteDifference)?;
        let m = self.mass_density(&geo0);
        let tw = time_weights(self.steps, self.variation.window / self.steps as f64);
        let mut total = Vec::with_capacity(tw.len());
        for (t, w) in self.times().into_iter().zip(&tw) {
            let g = Geometry::build(&pspec, &self.grid, t, DerivativeMode::FiniteDifference)?;
            let dens: Vec<f64> = (0..g.len())
                .map(|k| {
                    let v = g.velocity[k];
                    let kin = 0.5 * m[k] * dot(v, v);
                    match which {
                        Action::Kinetic => kin,
                        Action::Barotropic => {
                            let sg = g.sqrt_g[k];
                            kin - self.pressure.value(m[k] / sg) * sg
                        }
                    }
                })
                .collect();
            total.push(-w * parameter_integral(&dens, &self.grid, &self.rule));
        }
        Ok(crate::quadrature::pairwise_sum(&total))
    }

    /// `∫∫ (ρ D_t v [+ grad_Γ 𝔭 + 𝔭 H n]) · z dH² dt` on the unperturbed motion.
    pub fn force_pairing(&self, which: Action) -> Result<f64> {
        let (z, _) = self.variation.closures(&self.spec, &self.grid);
        let geo0 = Geometry::build(&self.spec, &self.grid, 0.0, DerivativeMode::FiniteDifference)?;
        let m = self.mass_density(&geo0);
        let tw = time_weights(self.steps, self.variation.window / self.steps as f64);
        let nodes: Vec<[f64; 2]> = self.grid.sample(|_, _, x| x);
        let mut total = Vec::with_capacity(tw.len());
        for (t, w) in self.times().into_iter().zip(&tw) {
            let g = Geometry::build(&self.spec, &self.grid, t, DerivativeMode::FiniteDifference)?;
            let rho: Vec<f64> = (0..g.len()).map(|k| m[k] / g.sqrt_g[k]).collect();
            let extra: Vec<Vec3> = match which {
                Action::Kinetic => vec![[0.0; 3]; g.len()],
                Action::Barotropic => {
                    let pe: Vec<f64> = rho.iter().map(|&r| self.pressure.effective(r)).collect();
                    let gp = surface_gradient(&pe, &g);
                    (0..g.len())
                        .map(|k| axpy(gp[k], pe[k] * g.metric[k].h, g.metric[k].n))
                        .collect()
                }
            };
            let dens: Vec<f64> = (0..g.len())
                .map(|k| {
                    let a = self.spec.acceleration(nodes[k], t);
                    let f = add(scale(rho[k], a), extra[k]);
                    dot(f, z(nodes[k], t))
                })
                .collect();
            total.push(w * surface_integral(&dens, &g, &self.rule));
        }
        Ok(crate::quadrature::pairwise_sum(&total))
    }

    /// Richardson-extrapolated `dA/dε` at zero against the force pairing.
    pub fn check(&self, which: Action, eps_list: &[f64]) -> Result<CheckRow> {
        let a0 = self.action(which, 0.0)?;
        let mut d = Vec::with_capacity(eps_list.len());
        for &e in eps_list {
            d.push((self.action(which, e)? - self.action(which, -e)?) / (2.0 * e));
        }
        let eps_min = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
        let floor = 1e3 * f64::EPSILON * (a0.abs() + 1.0) / eps_min;
        let g = richardson(eps_list, &d, floor)?;
        let p = self.force_pairing(which)?;
        Ok(CheckRow::new(
            which.label(),
            self.grid.h(),
            self.variation.window / self.steps as f64,
            g.value,
            p,
        ))
    }

    /// `∫ div_Γ z dH²` against `(d/dε) ∫ √G^ε dX` at time `t`.
    pub fn check_area_variation(&self, t: f64, eps_list: &[f64]) -> Result<CheckRow> {
        let (z, _) = self.variation.closures(&self.spec, &self.grid);
        let g = Geometry::build(&self.spec, &self.grid, t, DerivativeMode::FiniteDifference)?;
        let zs: Vec<Vec3> = self.grid.sample(|_, _, x| z(x, t));
        let lhs = surface_integral(&surface_divergence(&zs, &g), &g, &self.rule);
        let area = |e: f64| -> Result<f64> {
            let ps = self.variation.perturbed(&self.spec, &self.grid, e);
            let ge = Geometry::build(&ps, &self.grid, t, DerivativeMode::FiniteDifference)?;
            Ok(parameter_integral(&ge.sqrt_g, &self.grid, &self.rule))
        };
        let mut d = Vec::with_capacity(eps_list.len());
        for &e in eps_list {
            d.push((area(e)? - area(-e)?) / (2.0 * e));
        }
        let a0 = area(0.0)?;
        let eps_min = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
        let est = richardson(eps_list, &d, 1e3 * f64::EPSILON * (a0 + 1.0) / eps_min)?;
        Ok(CheckRow::new("area-variation", self.grid.h(), 0.0, lhs, est.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SurfaceConfig;
    use crate::grid::StencilOrder;

    fn cap(n: usize, t: f64) -> Geometry {
        let spec = SurfaceConfig::SphereCap {
            radius: 1.0,
            theta_min: 0.2,
            theta_max: 1.4,
            domain: None,
        }
        .build()
        .unwrap();
        let grid = spec.domain.grid(n, n, StencilOrder::Second).unwrap();
        Geometry::build(&spec, &grid, t, DerivativeMode::Analytic).unwrap()
    }

    fn state(geo: &Geometry) -> VariationalState {
        VariationalState {
            v: VectorExpr::random(21).sample(geo),
            sigma: ScalarExpr::random(22).sample(geo),
            theta: ScalarExpr::random(23).sample(geo),
            conc: ScalarExpr::random(24).sample(geo),
            rho: vec![1.3; geo.len()],
            force: VectorExpr::random(25).sample(geo),
        }
    }

    #[test]
    fn zero_direction_gives_zero() {
        let geo = cap(16, 0.0);
        let cs = ConstitutiveSet::by_name("power-law").unwrap();
        let rule = QuadratureRule::trapezoid(&geo.grid);
        let s = state(&geo);
        for f in Functional::ALL {
            let kind = if f.varies_velocity() {
                DirectionKind::Velocity
            } else {
                DirectionKind::Scalar
            };
            let d = VariationDirection::zero(kind, geo.len());
            let g = gateaux_numeric(f, &s, &d, &EPS_LADDER, &geo, &cs, &rule).unwrap();
            assert_eq!(g.value, 0.0);
        }
    }

    #[test]
    fn flat_radial_dissipation_value() {
        let spec = SurfaceConfig::FlatDisk {
            inner_radius: 0.1,
            radius: 1.0,
            domain: None,
        }
        .build()
        .unwrap();
        // |D|² = 2 and div = 2, so the mean density is −3
        let err = |n: usize| {
            let grid = spec.domain.grid(n, 2 * n, StencilOrder::Second).unwrap();
            let geo = Geometry::build(&spec, &grid, 0.0, DerivativeMode::Analytic).unwrap();
            let rule = QuadratureRule::trapezoid(&grid);
            let mut s = state(&geo);
            s.v = geo.pos.iter().map(|x| [x[0], x[1], 0.0]).collect();
            let cs = ConstitutiveSet::linear([1.0; 4], Pressure::Zero);
            let e = energy_functional(Functional::Dissipation, &s, &geo, &cs, &rule);
            let area = surface_integral(&vec![1.0; geo.len()], &geo, &rule);
            (e / area + 3.0).abs()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 2e-3 && (e1 / e2).log2() > 1.9, "{e1} {e2}");
    }

    #[test]
    fn quadratic_functional_has_exact_quotients() {
        let geo = cap(24, 0.0);
        let cs = ConstitutiveSet::by_name("newtonian").unwrap();
        let rule = QuadratureRule::trapezoid(&geo.grid);
        let s = state(&geo);
        let d = VariationDirection::random_scalar(&geo, 3);
        let g = gateaux_numeric(Functional::ThermalDiffusion, &s, &d, &EPS_LADDER, &geo, &cs, &rule)
            .unwrap();
        let spread = g.quotients.iter().fold(0.0_f64, |m, q| m.max((q - g.value).abs()));
        assert!(spread < 1e-9, "{g:?}");
    }

    #[test]
    fn constant_sigma_work_force_is_curvature() {
        let geo = cap(32, 0.0);
        let cs = ConstitutiveSet::by_name("newtonian").unwrap();
        let mut s = state(&geo);
        s.sigma = vec![0.7; geo.len()];
        s.force = vec![[0.0; 3]; geo.len()];
        let Force::Vector(f) = variational_force(Functional::Work, &s, &geo, &cs, false).unwrap() else {
            panic!()
        };
        // −σ H n = 1.4 n on the unit sphere
        let err = (0..geo.len())
            .map(|k| (f[k][2] - 1.4 * geo.metric[k].n[2]).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn pairing_matches_gateaux() {
        let geo = cap(48, 0.0);
        let cs = ConstitutiveSet::by_name("power-law").unwrap();
        let rule = QuadratureRule::trapezoid(&geo.grid);
        let s = state(&geo);
        for f in Functional::ALL {
            let dir = if f.varies_velocity() {
                VariationDirection::random_velocity(&geo, 5, true)
            } else {
                VariationDirection::random_scalar(&geo, 5)
            };
            let r = check_pairing(f.label(), f, &s, &dir, &EPS_LADDER, &geo, &cs, &rule).unwrap();
            assert!(r.rel_residual < 1e-2, "{r:?}");
        }
    }

    #[test]
    fn tangential_force_is_tangential() {
        let geo = cap(16, 0.0);
        let cs = ConstitutiveSet::by_name("newtonian").unwrap();
        let s = state(&geo);
        let Force::Vector(f) = variational_force(Functional::Dissipation, &s, &geo, &cs, true).unwrap() else {
            panic!()
        };
        for (x, m) in f.iter().zip(&geo.metric) {
            assert!(dot(*x, m.n).abs() < 1e-12 * (1.0 + dot(*x, *x).sqrt()));
        }
    }

    #[test]
    fn richardson_flags_growing_differences() {
        let e = [1e-2, 1e-3, 1e-4];
        assert!(matches!(
            richardson(&e, &[1.0, 1.0 + 1e-6, 1.0 - 1e-3], 1e-12),
            Err(Error::StepTooSmall { .. })
        ));
        let ok = richardson(&e, &[1.0 + 1e-4, 1.0 + 1e-6, 1.0 + 1e-8], 1e-12).unwrap();
        assert!((ok.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_on_expanding_cap() {
        let spec = SurfaceConfig::ExpandingSphereCap {
            radius0: 1.0,
            rate: 1.0,
            accel: 0.0,
            omega: 0.0,
            theta_min: 0.2,
            theta_max: 1.4,
            domain: None,
        }
        .build()
        .unwrap();
        let grid = spec.domain.grid(16, 16, StencilOrder::Second).unwrap();
        let geos: Vec<Geometry> = [0.0, 0.5]
            .iter()
            .map(|&t| Geometry::build(&spec, &grid, t, DerivativeMode::Analytic).unwrap())
            .collect();
        let rho = density_series(&vec![2.0; grid.len()], &geos).unwrap();
        assert!(rho[1].iter().all(|r| (r - 2.0 / 2.25).abs() < 1e-12));
    }
}
