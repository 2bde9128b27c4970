//! Closed-form states on the expanding, spinning sphere cap.
//!
//! Density, temperature and concentration depend only on `s = x₃/|x|`, which
//! is constant along the trajectories of the cap, so every term of the full
//! system has a closed form. The exterior force absorbs the momentum balance;
//! energy and concentration balances get explicit source terms.

use super::{BalanceReport, BcMode, FluidState, Sources, ThermoState};
use crate::constitutive::ConstitutiveSet;
use crate::error::{Error, Result};
use crate::fields::ScalarExpr;
use crate::geometry::{DerivativeMode, Geometry, SurfaceConfig};
use crate::grid::Grid;
use crate::quadrature::QuadratureRule;
use crate::linalg::{add, axpy, cross, dot, mat_scale, mat_vec, scale, sub, Mat3, Vec3};
use serde::{Deserialize, Serialize};

const EZ: Vec3 = [0.0, 0.0, 1.0];

/// `f(s) = Σ c_k s^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarProfile {
    pub coeffs: Vec<f64>,
}

impl PolarProfile {
    pub fn new(coeffs: &[f64]) -> Self {
        PolarProfile {
            coeffs: coeffs.to_vec(),
        }
    }

    /// `(f, f', f'')` at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            d2 = d2 * s + 2.0 * d1;
            d1 = d1 * s + f;
            f = f * s + c;
        }
        (f, d1, d2)
    }
}

/// How the total pressure is manufactured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SigmaChoice {
    /// `σ = a(t) + B(s) σ₁(x, t)` with `B` vanishing on the cap edges, so
    /// that `S_Γ ν = 0` on the boundary; `e = θ`.
    StressFree { field: ScalarExpr },
    /// `e = A e^s ρ`, hence `θ = e` and `σ = ρ θ` (Gibbs relation holds).
    Gibbs { scale: f64 },
}

/// Manufactured state on `expanding-sphere-cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapManufactured {
    pub radius0: f64,
    pub rate: f64,
    pub accel: f64,
    pub omega: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub rho0: PolarProfile,
    pub theta: PolarProfile,
    pub conc: PolarProfile,
    pub sigma: SigmaChoice,
}

/// A manufactured state with the sources that make it exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedState {
    pub state: ThermoState,
    pub sources: Sources,
}

impl CapManufactured {
    /// A default with moderate variation in every field.
    pub fn example(sigma: SigmaChoice) -> Self {
        CapManufactured {
            radius0: 1.0,
            rate: 1.0,
            accel: 0.5,
            omega: 1.0,
            theta_min: 0.2,
            theta_max: 1.4,
            rho0: PolarProfile::new(&[1.0, 0.3, -0.2]),
            theta: PolarProfile::new(&[1.5, 0.4, 0.3]),
            conc: PolarProfile::new(&[0.5, -0.3, 0.6]),
            sigma,
        }
    }

    pub fn surface(&self) -> SurfaceConfig {
        SurfaceConfig::ExpandingSphereCap {
            radius0: self.radius0,
            rate: self.rate,
            accel: self.accel,
            omega: self.omega,
            theta_min: self.theta_min,
            theta_max: self.theta_max,
            domain: None,
        }
    }

    fn radius(&self, t: f64) -> (f64, f64, f64) {
        (
            self.radius0 + self.rate * t + 0.5 * self.accel * t * t,
            self.rate + self.accel * t,
            self.accel,
        )
    }

    /// `B(s) = 4 (s − s_lo)(s_hi − s)/(s_hi − s_lo)²` and `B'`.
    fn edge_profile(&self, s: f64) -> (f64, f64) {
        let (lo, hi) = (self.theta_max.cos(), self.theta_min.cos());
        let c = 4.0 / ((hi - lo) * (hi - lo));
        (c * (s - lo) * (hi - s), c * (lo + hi - 2.0 * s))
    }

    /// `div_Γ (e'(|grad f|²) grad f)` for `f = f(s)` on the sphere of radius `r`.
    fn flux_divergence(cs: &ConstitutiveSet, j: usize, prof: &PolarProfile, s: f64, r: f64) -> f64 {
        let (_, d1, d2) = prof.eval(s);
        let w = 1.0 - s * s;
        let r2 = r * r;
        let arg = d1 * d1 * w / r2;
        let darg = (2.0 * d1 * d2 * w - 2.0 * s * d1 * d1) / r2;
        let q = cs.de(j, arg) * d1;
        let dq = cs.de2(j, arg) * darg * d1 + cs.de(j, arg) * d2;
        dq * w / r2 - 2.0 * s * q / r2
    }

    /// Fields, entropy and sources at the time and nodes of `geo`.
    pub fn sample(&self, geo: &Geometry, cs: &ConstitutiveSet) -> Result<ManufacturedState> {
        let t = geo.t;
        let (r, dr, ddr) = self.radius(t);
        let r0 = self.radius0;
        let lam = dr / r;
        let dil = (r0 / r) * (r0 / r);
        let h = -2.0 / r;
        let a = cs.de(1, 2.0 * lam * lam) * lam + cs.de(2, 4.0 * lam * lam) * 2.0 * lam;
        let e_d = cs.de(1, 2.0 * lam * lam) * 2.0 * lam * lam + cs.de(2, 4.0 * lam * lam) * 4.0 * lam * lam;
        let n = geo.len();
        let mut st = FluidState::rest(n, 1.0);
        let mut entropy = vec![0.0; n];
        let mut src = Sources::zero(n);
        for k in 0..n {
            let x = geo.pos[k];
            let rad = dot(x, x).sqrt();
            let s = x[2] / rad;
            let nrm = scale(1.0 / rad, x);
            let grad_s = scale(1.0 / rad, sub(EZ, scale(s, nrm)));
            let (p0, dp0, _) = self.rho0.eval(s);
            let (th, dth, _) = self.theta.eval(s);
            let (c, _, _) = self.conc.eval(s);
            let rho = p0 * dil;
            if !(rho > 0.0) {
                return Err(Error::NonpositiveDensity { node: k, value: rho });
            }
            if !(th > 0.0) {
                return Err(Error::NonpositiveThermo { node: k, value: th });
            }
            let v = axpy(scale(lam, x), self.omega, cross(EZ, x));
            let acc = add(
                add(scale(ddr / r, x), scale(2.0 * lam * self.omega, cross(EZ, x))),
                scale(self.omega * self.omega, cross(EZ, cross(EZ, x))),
            );
            let (sigma, grad_sigma, e, ent) = match &self.sigma {
                SigmaChoice::StressFree { field } => {
                    let (b, db) = self.edge_profile(s);
                    let (f1, g1, _) = field.eval_full(x, t);
                    let pg1 = mat_vec(&geo.metric[k].p, g1);
                    let gs = axpy(scale(db * f1, grad_s), b, pg1);
                    (a + b * f1, gs, th, 0.0)
                }
                SigmaChoice::Gibbs { scale: sc } => {
                    let gs = scale((dp0 * th + p0 * dth) * dil, grad_s);
                    (rho * th, gs, th, (th / (sc * rho)).ln())
                }
            };
            // div S = −grad σ + (a − σ) H n, since D_Γ(v) = λ P on the cap
            let div_s = axpy(scale(-1.0, grad_sigma), (a - sigma) * h, nrm);
            st.rho[k] = rho;
            st.v[k] = v;
            st.theta[k] = th;
            st.conc[k] = c;
            st.sigma[k] = sigma;
            st.e[k] = e;
            st.force[k] = sub(acc, scale(1.0 / rho, div_s));
            entropy[k] = ent;
            src.energy[k] = 2.0 * lam * sigma - Self::flux_divergence(cs, 3, &self.theta, s, r) - e_d;
            src.conc[k] = 2.0 * lam * c - Self::flux_divergence(cs, 4, &self.conc, s, r);
        }
        Ok(ManufacturedState {
            state: ThermoState { fluid: st, entropy },
            sources: src,
        })
    }

    /// The exact stress `(a(t) − σ) P` of the sampled state.
    pub fn stress(&self, geo: &Geometry, cs: &ConstitutiveSet) -> Result<Vec<Mat3>> {
        let (r, dr, _) = self.radius(geo.t);
        let lam = dr / r;
        let a = cs.de(1, 2.0 * lam * lam) * lam + cs.de(2, 4.0 * lam * lam) * 2.0 * lam;
        let st = self.sample(geo, cs)?;
        Ok(st
            .state
            .fluid
            .sigma
            .iter()
            .zip(&geo.metric)
            .map(|(s, m)| mat_scale(a - s, &m.p))
            .collect())
    }

    /// Balance series of the sampled state at `steps + 1` uniform times in `[0, t_end]`.
    pub fn balance_series(
        &self,
        grid: &Grid,
        cs: &ConstitutiveSet,
        t_end: f64,
        steps: usize,
        mode: DerivativeMode,
        rule: &QuadratureRule,
    ) -> Result<BalanceReport> {
        let spec = self.surface().build()?;
        let bc = match self.sigma {
            SigmaChoice::StressFree { .. } => BcMode::StressFree,
            SigmaChoice::Gibbs { .. } => BcMode::None,
        };
        let mut rep = BalanceReport::new(bc);
        let steps = steps.max(1);
        for s in 0..=steps {
            let t = t_end * s as f64 / steps as f64;
            let geo = Geometry::build(&spec, grid, t, mode)?;
            let st = self.sample(&geo, cs)?;
            rep.push(t, &st.state.fluid, &geo, cs, rule)?;
        }
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives() {
        let p = PolarProfile::new(&[1.0, 2.0, -3.0, 0.5]);
        let s = 0.37;
        let (f, d1, d2) = p.eval(s);
        assert!((f - (1.0 + 2.0 * s - 3.0 * s * s + 0.5 * s * s * s)).abs() < 1e-15);
        assert!((d1 - (2.0 - 6.0 * s + 1.5 * s * s)).abs() < 1e-15);
        assert!((d2 - (-6.0 + 3.0 * s)).abs() < 1e-15);
    }
}
