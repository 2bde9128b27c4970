use super::{BcMode, FluidState};
use crate::calculus::{dissipation_from_kinematics, stress_from_kinematics, tensor_divergence, Kinematics};
use crate::constitutive::ConstitutiveSet;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::identities::conormal_flux;
use crate::linalg::{add, cross, dot, mat_vec, scale, sub, Mat3, Vec3};
use crate::quadrature::{boundary_integral, surface_integral, QuadratureRule};
use crate::report::table_to_csv;

pub const BALANCE_HEADER: [&str; 11] = [
    "t", "mass", "px", "py", "pz", "Lx", "Ly", "Lz", "eA", "Ctot", "energy_residual",
];

/// Integrals at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceRow {
    pub t: f64,
    pub mass: f64,
    pub momentum: Vec3,
    pub angular_momentum: Vec3,
    /// `∫ e_A`, with `e_A = ρ|v|²/2 + ρ e`
    pub total_energy: f64,
    pub conc_total: f64,
    pub kinetic: f64,
    /// `∫ ρ|v|²/2` now minus then, plus the accumulated dissipation, minus the accumulated work.
    pub energy_residual: f64,
    /// `∫∫ ρ F` since the first row.
    pub momentum_source: Vec3,
    /// `∫∫ x × ρ F` since the first row.
    pub angular_source: Vec3,
    /// `∫∫ ρ F · v` since the first row.
    pub energy_source: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rates {
    /// `∫ ẽ_D − ∫ (div v) σ − ∫ ρ F·v − ∮ v·Sν`
    energy: f64,
    force: Vec3,
    torque: Vec3,
    power: f64,
}

/// Time series of the conserved quantities of a run, accumulated with the
/// trapezoid rule over the pushed times.
#[derive(Debug, Clone)]
pub struct BalanceReport {
    pub bc_mode: BcMode,
    pub rows: Vec<BalanceRow>,
    prev: Option<Rates>,
}

impl BalanceReport {
    pub fn new(bc_mode: BcMode) -> Self {
        BalanceReport {
            bc_mode,
            rows: Vec::new(),
            prev: None,
        }
    }

    pub fn push(
        &mut self,
        t: f64,
        state: &FluidState,
        geo: &Geometry,
        cs: &ConstitutiveSet,
        rule: &QuadratureRule,
    ) -> Result<()> {
        state.validate(geo)?;
        let n = geo.len();
        let int = |f: &[f64]| surface_integral(f, geo, rule);
        let intv = |f: &[Vec3]| surface_integral(f, geo, rule);
        let rv: Vec<Vec3> = (0..n).map(|k| scale(state.rho[k], state.v[k])).collect();
        let rf: Vec<Vec3> = (0..n).map(|k| scale(state.rho[k], state.force[k])).collect();
        let kin_d: Vec<f64> = (0..n)
            .map(|k| 0.5 * state.rho[k] * dot(state.v[k], state.v[k]))
            .collect();
        let kin = Kinematics::new(&state.v, geo);
        let work: Vec<f64> = (0..n)
            .map(|k| kin.div[k] * state.sigma[k] + dot(rf[k], state.v[k]))
            .collect();
        let boundary = match self.bc_mode {
            BcMode::None => {
                let s = stress_from_kinematics(&kin, &state.sigma, geo, cs);
                let sv: Vec<Vec3> = (0..n).map(|k| mat_vec(&s[k], state.v[k])).collect();
                boundary_integral(&conormal_flux(&sv, geo), geo)?
            }
            _ => 0.0,
        };
        let rates = Rates {
            energy: int(&dissipation_from_kinematics(&kin, cs)) - int(&work) - boundary,
            force: intv(&rf),
            torque: intv(&(0..n).map(|k| cross(geo.pos[k], rf[k])).collect::<Vec<_>>()),
            power: int(&(0..n).map(|k| dot(rf[k], state.v[k])).collect::<Vec<_>>()),
        };
        let kinetic = int(&kin_d);
        let (energy_residual, ms, as_, es) = match (self.rows.last(), self.prev) {
            (Some(last), Some(p)) => {
                if t <= last.t {
                    return Err(Error::config("t", format!("times must increase, got {t} after {}", last.t)));
                }
                let h = 0.5 * (t - last.t);
                let first_kinetic = self.rows[0].kinetic;
                let acc = last.energy_residual - (last.kinetic - first_kinetic);
                (
                    kinetic - first_kinetic + acc + h * (p.energy + rates.energy),
                    add(last.momentum_source, scale(h, add(p.force, rates.force))),
                    add(last.angular_source, scale(h, add(p.torque, rates.torque))),
                    last.energy_source + h * (p.power + rates.power),
                )
            }
            _ => (0.0, [0.0; 3], [0.0; 3], 0.0),
        };
        let ea: Vec<f64> = (0..n).map(|k| kin_d[k] + state.rho[k] * state.e[k]).collect();
        self.rows.push(BalanceRow {
            t,
            mass: int(&state.rho),
            momentum: intv(&rv),
            angular_momentum: intv(&(0..n).map(|k| cross(geo.pos[k], rv[k])).collect::<Vec<_>>()),
            total_energy: int(&ea),
            conc_total: int(&state.conc),
            kinetic,
            energy_residual,
            momentum_source: ms,
            angular_source: as_,
            energy_source: es,
        });
        self.prev = Some(rates);
        Ok(())
    }

    /// Largest `|mass(t) − mass(0)| / |mass(0)|`.
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.rows.first().map_or(1.0, |r| r.mass);
        self.rows
            .iter()
            .map(|r| ((r.mass - m0) / m0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|energy_residual|`.
    pub fn max_energy_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max)
    }

    /// `|p(t) − p(0) − ∫∫ρF|` at the last row.
    pub fn momentum_mismatch(&self) -> f64 {
        self.mismatch(|r| r.momentum, |r| r.momentum_source)
    }

    /// `|L(t) − L(0) − ∫∫ x × ρF|` at the last row.
    pub fn angular_mismatch(&self) -> f64 {
        self.mismatch(|r| r.angular_momentum, |r| r.angular_source)
    }

    fn mismatch(&self, q: impl Fn(&BalanceRow) -> Vec3, s: impl Fn(&BalanceRow) -> Vec3) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => {
                let d = sub(sub(q(b), q(a)), s(b));
                dot(d, d).sqrt()
            }
            _ => 0.0,
        }
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.t,
                    r.mass,
                    r.momentum[0],
                    r.momentum[1],
                    r.momentum[2],
                    r.angular_momentum[0],
                    r.angular_momentum[1],
                    r.angular_momentum[2],
                    r.total_energy,
                    r.conc_total,
                    r.energy_residual,
                ]
            })
            .collect();
        table_to_csv(&BALANCE_HEADER, &rows)
    }

    /// Keeps every `stride`-th row plus the last, for compact output.
    pub fn thinned(&self, stride: usize) -> BalanceReport {
        let stride = stride.max(1);
        let last = self.rows.len().saturating_sub(1);
        BalanceReport {
            bc_mode: self.bc_mode,
            rows: self
                .rows
                .iter()
                .enumerate()
                .filter(|(k, _)| k % stride == 0 || *k == last)
                .map(|(_, r)| r.clone())
                .collect(),
            prev: None,
        }
    }
}

/// `∫ x × div_Γ S dH²`, which vanishes for symmetric `S` with `S n = 0` on
/// the surface and `S ν = 0` on its boundary.
pub fn angular_moment_of_divergence(s: &[Mat3], geo: &Geometry, rule: &QuadratureRule) -> Result<Vec3> {
    if s.len() != geo.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} tensors for {} nodes",
            s.len(),
            geo.len()
        )));
    }
    let d = tensor_divergence(s, geo);
    let m: Vec<Vec3> = (0..geo.len()).map(|k| cross(geo.pos[k], d[k])).collect();
    Ok(surface_integral(&m, geo, rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{compact_bump, ScalarExpr};
    use crate::geometry::{DerivativeMode, SurfaceConfig};
    use crate::grid::StencilOrder;
    use crate::linalg::{mat_mul, mat_scale, outer};

    fn cap(n: usize) -> Geometry {
        let spec = SurfaceConfig::SphereCap {
            radius: 1.0,
            theta_min: 0.2,
            theta_max: 1.4,
            domain: None,
        }
        .build()
        .unwrap();
        let grid = spec.domain.grid(n, n, StencilOrder::Second).unwrap();
        Geometry::build(&spec, &grid, 0.0, DerivativeMode::Analytic).unwrap()
    }

    #[test]
    fn rest_state_series_are_constant() {
        let geo = cap(12);
        let rule = QuadratureRule::trapezoid(&geo.grid);
        let cs = ConstitutiveSet::by_name("newtonian").unwrap();
        let s = FluidState::rest(geo.len(), 2.0);
        let mut rep = BalanceReport::new(BcMode::NoSlip);
        for k in 0..4 {
            rep.push(k as f64 * 0.1, &s, &geo, &cs, &rule).unwrap();
        }
        let r0 = &rep.rows[0];
        for r in &rep.rows {
            assert_eq!(r.mass, r0.mass);
            assert_eq!(r.energy_residual, 0.0);
        }
        assert_eq!(rep.max_mass_drift(), 0.0);
        let csv = rep.to_csv();
        assert!(csv.starts_with("t,mass,px,py,pz,Lx,Ly,Lz,eA,Ctot,energy_residual\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn compact_symmetric_stress_has_no_moment() {
        let err = |n: usize| {
            let geo = cap(n);
            let rule = QuadratureRule::trapezoid(&geo.grid);
            let b = compact_bump(&geo, 0.1);
            let f = [ScalarExpr::random(1), ScalarExpr::random(2), ScalarExpr::random(3)];
            let s: Vec<Mat3> = (0..geo.len())
                .map(|k| {
                    let x = geo.pos[k];
                    let a = [f[0].value(x, 0.0), f[1].value(x, 0.0), f[2].value(x, 0.0)];
                    let m = mat_scale(b[k], &outer(a, a));
                    let p = &geo.metric[k].p;
                    mat_mul(p, &mat_mul(&m, p))
                })
                .collect();
            let m = angular_moment_of_divergence(&s, &geo, &rule).unwrap();
            dot(m, m).sqrt()
        };
        let (a, b) = (err(32), err(64));
        assert!(b < 1e-3 && (a / b).log2() > 1.9, "{a} {b}");
    }
}
