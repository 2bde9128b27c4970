//! Pointwise residuals of the full surface system in its non-conservative
//! and conservative forms, and of the thermodynamic balances.
//!
//! States are Lagrangian samples: the fluid moves with the grid, so time
//! differences at fixed parameter points are material derivatives and the
//! normal time derivative is `D_t − v·∇_Γ`.

use super::FluidState;
use crate::calculus::{
    material_derivative, material_derivative_vec, stress_from_kinematics, surface_divergence, surface_gradient,
    tensor_divergence, dissipation_from_kinematics, Kinematics, TimeDerivative,
};
use crate::constitutive::ConstitutiveSet;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{add, ddot, dot, mat_sub, mat_vec, norm, outer, scale, sub, Mat3, Vec3};
use crate::quadrature::{surface_integral, QuadratureRule};
use crate::report::fmt_num;

pub const RESIDUAL_HEADER: [&str; 3] = ["name", "linf", "l2"];

/// Prescribed volumetric sources of mass, momentum, energy and concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct Sources {
    pub mass: Vec<f64>,
    pub momentum: Vec<Vec3>,
    pub energy: Vec<f64>,
    pub conc: Vec<f64>,
}

impl Sources {
    pub fn zero(n: usize) -> Self {
        Sources {
            mass: vec![0.0; n],
            momentum: vec![[0.0; 3]; n],
            energy: vec![0.0; n],
            conc: vec![0.0; n],
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let lens = [self.mass.len(), self.momentum.len(), self.energy.len(), self.conc.len()];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::ShapeMismatch(format!("source lengths {lens:?} for {n} nodes")));
        }
        Ok(())
    }
}

/// Residual fields of both forms of the system at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemResiduals {
    /// `D_t ρ + ρ div v − m`
    pub continuity: Vec<f64>,
    /// `ρ D_t v − div S − ρF − f`
    pub momentum: Vec<Vec3>,
    /// `ρ D_t e + σ div v − div q_θ − ẽ_D − s_e`
    pub energy: Vec<f64>,
    /// `D_t C + C div v − div q_C − s_C`
    pub conc: Vec<f64>,
    /// `D^N ρ + div(ρv) − m`
    pub cons_continuity: Vec<f64>,
    /// `D^N(ρv) + div(ρv⊗v − S) − ρF − f − v m`
    pub cons_momentum: Vec<Vec3>,
    /// `D^N e_A + div(e_A v − q_θ − S v) − ρF·v − s_e − v·f − (|v|²/2 + e) m`
    pub cons_energy: Vec<f64>,
    /// `D^N C + div(C v − q_C) − s_C`
    pub cons_conc: Vec<f64>,
    v: Vec<Vec3>,
    specific: Vec<f64>,
}

impl SystemResiduals {
    /// Differences between the conservative residuals and the combinations
    /// of non-conservative ones they equal in the continuum:
    /// `c1 − r1`, `c2 − r2 − v r1`, `c3 − r3 − v·r2 − (|v|²/2 + e) r1`, `c4 − r4`.
    pub fn equivalence_gaps(&self) -> (Vec<f64>, Vec<Vec3>, Vec<f64>, Vec<f64>) {
        let n = self.continuity.len();
        let g1 = (0..n).map(|k| self.cons_continuity[k] - self.continuity[k]).collect();
        let g2 = (0..n)
            .map(|k| sub(sub(self.cons_momentum[k], self.momentum[k]), scale(self.continuity[k], self.v[k])))
            .collect();
        let g3 = (0..n)
            .map(|k| {
                self.cons_energy[k]
                    - self.energy[k]
                    - dot(self.v[k], self.momentum[k])
                    - self.specific[k] * self.continuity[k]
            })
            .collect();
        let g4 = (0..n).map(|k| self.cons_conc[k] - self.conc[k]).collect();
        (g1, g2, g3, g4)
    }

    /// Norms of every residual and equivalence gap.
    pub fn summaries(&self, geo: &Geometry, rule: &QuadratureRule) -> Vec<ResidualSummary> {
        let norms = |v: &[Vec3]| v.iter().map(|x| norm(*x)).collect::<Vec<_>>();
        let (g1, g2, g3, g4) = self.equivalence_gaps();
        vec![
            summarize_residual("continuity", &self.continuity, geo, rule),
            summarize_residual("momentum", &norms(&self.momentum), geo, rule),
            summarize_residual("energy", &self.energy, geo, rule),
            summarize_residual("concentration", &self.conc, geo, rule),
            summarize_residual("cons-continuity", &self.cons_continuity, geo, rule),
            summarize_residual("cons-momentum", &norms(&self.cons_momentum), geo, rule),
            summarize_residual("cons-energy", &self.cons_energy, geo, rule),
            summarize_residual("cons-concentration", &self.cons_conc, geo, rule),
            summarize_residual("gap-continuity", &g1, geo, rule),
            summarize_residual("gap-momentum", &norms(&g2), geo, rule),
            summarize_residual("gap-energy", &g3, geo, rule),
            summarize_residual("gap-concentration", &g4, geo, rule),
        ]
    }
}

fn check_levels(states: &[FluidState], geo: &Geometry) -> Result<usize> {
    if states.len() < 3 {
        return Err(Error::InsufficientTimeLevels {
            needed: 3,
            got: states.len(),
        });
    }
    for s in states {
        s.validate(geo)?;
    }
    let c = states.len() / 2;
    states[c].check_density()?;
    let scale_v = states[c].v.iter().map(|v| norm(*v)).fold(1.0, f64::max);
    let slip = states[c]
        .v
        .iter()
        .zip(&geo.velocity)
        .map(|(a, b)| norm(sub(*a, *b)))
        .fold(0.0, f64::max);
    if slip > 1e-6 * scale_v {
        return Err(Error::config(
            "v",
            format!("the fluid velocity must be the flow velocity of the grid, max difference {slip:.3e}"),
        ));
    }
    Ok(c)
}

fn levels_of<T: Clone>(states: &[FluidState], f: impl Fn(&FluidState) -> &Vec<T>) -> Vec<Vec<T>> {
    states.iter().map(|s| f(s).clone()).collect()
}

/// `e'(|grad f|²) grad f` with the constitutive function `j`.
fn flux(f: &[f64], j: usize, geo: &Geometry, cs: &ConstitutiveSet) -> Vec<Vec3> {
    surface_gradient(f, geo)
        .into_iter()
        .map(|g| scale(cs.de(j, dot(g, g)), g))
        .collect()
}

/// Residuals at the middle of `states`, which are Lagrangian samples spaced
/// by `dt`; `geo` is the geometry at that middle level.
pub fn residual_generalized_system(
    states: &[FluidState],
    geo: &Geometry,
    dt: f64,
    cs: &ConstitutiveSet,
    sources: &Sources,
) -> Result<SystemResiduals> {
    let c = check_levels(states, geo)?;
    let n = geo.len();
    sources.check(n)?;
    let st = &states[c];
    let mat = |lv: Vec<Vec<f64>>, var| material_derivative(&lv, dt, geo, var, None);
    let rho_l = levels_of(states, |s| &s.rho);
    let v_l = levels_of(states, |s| &s.v);
    let e_l = levels_of(states, |s| &s.e);
    let c_l = levels_of(states, |s| &s.conc);
    let rv_l: Vec<Vec<Vec3>> = states
        .iter()
        .map(|s| (0..n).map(|k| scale(s.rho[k], s.v[k])).collect())
        .collect();
    let ea_l: Vec<Vec<f64>> = states
        .iter()
        .map(|s| (0..n).map(|k| s.rho[k] * (0.5 * dot(s.v[k], s.v[k]) + s.e[k])).collect())
        .collect();

    let kin = Kinematics::new(&st.v, geo);
    let stress = stress_from_kinematics(&kin, &st.sigma, geo, cs);
    let div_s = tensor_divergence(&stress, geo);
    let e_d = dissipation_from_kinematics(&kin, cs);
    let q_theta = flux(&st.theta, 3, geo, cs);
    let q_conc = flux(&st.conc, 4, geo, cs);
    let div_qt = surface_divergence(&q_theta, geo);
    let div_qc = surface_divergence(&q_conc, geo);

    let drho = mat(rho_l.clone(), TimeDerivative::Material)?;
    let dv = material_derivative_vec(&v_l, dt, geo, TimeDerivative::Material, None)?;
    let de = mat(e_l, TimeDerivative::Material)?;
    let dc = mat(c_l.clone(), TimeDerivative::Material)?;
    let dn_rho = mat(rho_l, TimeDerivative::Normal)?;
    let dn_rv = material_derivative_vec(&rv_l, dt, geo, TimeDerivative::Normal, None)?;
    let dn_ea = mat(ea_l.clone(), TimeDerivative::Normal)?;
    let dn_c = mat(c_l, TimeDerivative::Normal)?;

    let rho_v = &rv_l[c];
    let ea = &ea_l[c];
    let div_rv = surface_divergence(rho_v, geo);
    let momentum_flux: Vec<Mat3> = (0..n).map(|k| mat_sub(&outer(rho_v[k], st.v[k]), &stress[k])).collect();
    let div_mf = tensor_divergence(&momentum_flux, geo);
    let energy_flux: Vec<Vec3> = (0..n)
        .map(|k| sub(sub(scale(ea[k], st.v[k]), q_theta[k]), mat_vec(&stress[k], st.v[k])))
        .collect();
    let div_ef = surface_divergence(&energy_flux, geo);
    let conc_flux: Vec<Vec3> = (0..n).map(|k| sub(scale(st.conc[k], st.v[k]), q_conc[k])).collect();
    let div_cf = surface_divergence(&conc_flux, geo);

    let specific: Vec<f64> = (0..n).map(|k| 0.5 * dot(st.v[k], st.v[k]) + st.e[k]).collect();
    let (m, f, se, sc) = (&sources.mass, &sources.momentum, &sources.energy, &sources.conc);
    let mut r = SystemResiduals {
        continuity: vec![0.0; n],
        momentum: vec![[0.0; 3]; n],
        energy: vec![0.0; n],
        conc: vec![0.0; n],
        cons_continuity: vec![0.0; n],
        cons_momentum: vec![[0.0; 3]; n],
        cons_energy: vec![0.0; n],
        cons_conc: vec![0.0; n],
        v: st.v.clone(),
        specific: specific.clone(),
    };
    for k in 0..n {
        let (rho, v, dv_k) = (st.rho[k], st.v[k], kin.div[k]);
        let rf = scale(rho, st.force[k]);
        r.continuity[k] = drho[k] + rho * dv_k - m[k];
        r.momentum[k] = sub(sub(sub(scale(rho, dv[k]), div_s[k]), rf), f[k]);
        r.energy[k] = rho * de[k] + st.sigma[k] * dv_k - div_qt[k] - e_d[k] - se[k];
        r.conc[k] = dc[k] + st.conc[k] * dv_k - div_qc[k] - sc[k];
        r.cons_continuity[k] = dn_rho[k] + div_rv[k] - m[k];
        r.cons_momentum[k] = sub(add(dn_rv[k], div_mf[k]), add(add(rf, f[k]), scale(m[k], v)));
        r.cons_energy[k] = dn_ea[k] + div_ef[k] - dot(rf, v) - se[k] - dot(v, f[k]) - specific[k] * m[k];
        r.cons_conc[k] = dn_c[k] + div_cf[k] - sc[k];
    }
    Ok(r)
}

/// A fluid state with its specific entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoState {
    pub fluid: FluidState,
    pub entropy: Vec<f64>,
}

/// Residual fields of the enthalpy, entropy and free-energy balances, and the
/// entropy production density `ẽ_D/θ + e3'|grad θ|²/θ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoResiduals {
    /// `ρ D_t h − div q_θ − ẽ_D − D_t σ − s_e`, `h = e + σ/ρ`
    pub enthalpy: Vec<f64>,
    /// `θ ρ D_t s − div q_θ − ẽ_D − s_e`
    pub entropy: Vec<f64>,
    /// `ρ D_t e_F + s ρ D_t θ − S:D + ẽ_D`, `e_F = e − θ s`
    pub free_energy: Vec<f64>,
    pub production: Vec<f64>,
}

impl ThermoResiduals {
    pub fn min_production(&self) -> f64 {
        self.production.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn summaries(&self, geo: &Geometry, rule: &QuadratureRule) -> Vec<ResidualSummary> {
        vec![
            summarize_residual("enthalpy", &self.enthalpy, geo, rule),
            summarize_residual("entropy", &self.entropy, geo, rule),
            summarize_residual("free-energy", &self.free_energy, geo, rule),
        ]
    }
}

/// Residuals at the middle of `states` (Lagrangian samples spaced by `dt`),
/// with the energy source `s_e` when one was manufactured.
pub fn residual_thermodynamics(
    states: &[ThermoState],
    geo: &Geometry,
    dt: f64,
    cs: &ConstitutiveSet,
    energy_source: Option<&[f64]>,
) -> Result<ThermoResiduals> {
    let fluid: Vec<FluidState> = states.iter().map(|s| s.fluid.clone()).collect();
    let c = check_levels(&fluid, geo)?;
    let n = geo.len();
    if states.iter().any(|s| s.entropy.len() != n) || energy_source.is_some_and(|s| s.len() != n) {
        return Err(Error::ShapeMismatch("entropy or energy source length".into()));
    }
    let st = &fluid[c];
    if let Some(node) = st.theta.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::NonpositiveThermo {
            node,
            value: st.theta[node],
        });
    }
    let mat = |lv: Vec<Vec<f64>>| material_derivative(&lv, dt, geo, TimeDerivative::Material, None);
    let h_l: Vec<Vec<f64>> = fluid
        .iter()
        .map(|s| (0..n).map(|k| s.e[k] + s.sigma[k] / s.rho[k]).collect())
        .collect();
    let ef_l: Vec<Vec<f64>> = states
        .iter()
        .map(|s| (0..n).map(|k| s.fluid.e[k] - s.fluid.theta[k] * s.entropy[k]).collect())
        .collect();
    let dh = mat(h_l)?;
    let ds = mat(states.iter().map(|s| s.entropy.clone()).collect())?;
    let def = mat(ef_l)?;
    let dtheta = mat(levels_of(&fluid, |s| &s.theta))?;
    let dsigma = mat(levels_of(&fluid, |s| &s.sigma))?;

    let kin = Kinematics::new(&st.v, geo);
    let stress = stress_from_kinematics(&kin, &st.sigma, geo, cs);
    let e_d = dissipation_from_kinematics(&kin, cs);
    let div_q = surface_divergence(&flux(&st.theta, 3, geo, cs), geo);
    let production = entropy_production(&st.v, &st.theta, geo, cs)?;
    let zero = vec![0.0; n];
    let se = energy_source.unwrap_or(&zero);
    let s_c = &states[c].entropy;
    let mut out = ThermoResiduals {
        enthalpy: vec![0.0; n],
        entropy: vec![0.0; n],
        free_energy: vec![0.0; n],
        production,
    };
    for k in 0..n {
        let (rho, th) = (st.rho[k], st.theta[k]);
        let heat = div_q[k] + e_d[k] + se[k];
        out.enthalpy[k] = rho * dh[k] - heat - dsigma[k];
        out.entropy[k] = th * rho * ds[k] - heat;
        out.free_energy[k] = rho * def[k] + s_c[k] * rho * dtheta[k] - ddot(&stress[k], &kin.stretch[k]) + e_d[k];
    }
    Ok(out)
}

/// `ẽ_D/θ + e3'(|grad_Γ θ|²)|grad_Γ θ|²/θ²` at every node.
pub fn entropy_production(v: &[Vec3], theta: &[f64], geo: &Geometry, cs: &ConstitutiveSet) -> Result<Vec<f64>> {
    if v.len() != geo.len() || theta.len() != geo.len() {
        return Err(Error::ShapeMismatch("velocity or temperature length".into()));
    }
    if let Some(node) = theta.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::NonpositiveThermo {
            node,
            value: theta[node],
        });
    }
    let e_d = dissipation_from_kinematics(&Kinematics::new(v, geo), cs);
    let gt = surface_gradient(theta, geo);
    Ok((0..geo.len())
        .map(|k| {
            let g2 = dot(gt[k], gt[k]);
            e_d[k] / theta[k] + cs.de(3, g2) * g2 / (theta[k] * theta[k])
        })
        .collect())
}

/// Max and root-mean-square over the surface of one residual field.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSummary {
    pub name: String,
    pub linf: f64,
    pub l2: f64,
}

pub fn summarize_residual(name: &str, values: &[f64], geo: &Geometry, rule: &QuadratureRule) -> ResidualSummary {
    let sq: Vec<f64> = values.iter().map(|x| x * x).collect();
    let area = surface_integral(&vec![1.0; geo.len()], geo, rule);
    ResidualSummary {
        name: name.to_string(),
        linf: values.iter().map(|x| x.abs()).fold(0.0, f64::max),
        l2: (surface_integral(&sq, geo, rule).max(0.0) / area).sqrt(),
    }
}

pub fn summaries_to_csv(rows: &[ResidualSummary]) -> String {
    let mut s = RESIDUAL_HEADER.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.name, fmt_num(r.linf), fmt_num(r.l2)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DerivativeMode, SurfaceConfig};
    use crate::grid::StencilOrder;

    #[test]
    fn too_few_levels_are_rejected() {
        let spec = SurfaceConfig::SphereCap {
            radius: 1.0,
            theta_min: 0.2,
            theta_max: 1.4,
            domain: None,
        }
        .build()
        .unwrap();
        let grid = spec.domain.grid(8, 8, StencilOrder::Second).unwrap();
        let geo = Geometry::build(&spec, &grid, 0.0, DerivativeMode::Analytic).unwrap();
        let cs = ConstitutiveSet::by_name("newtonian").unwrap();
        let s = FluidState::rest(geo.len(), 1.0);
        let r = residual_generalized_system(&[s.clone(), s], &geo, 0.1, &cs, &Sources::zero(geo.len()));
        assert!(matches!(r, Err(Error::InsufficientTimeLevels { needed: 3, got: 2 })));
    }

    #[test]
    fn csv_has_header() {
        let rows = vec![ResidualSummary {
            name: "energy".into(),
            linf: 1.0,
            l2: 0.5,
        }];
        assert!(summaries_to_csv(&rows).starts_with("name,linf,l2\nenergy,"));
    }
}
