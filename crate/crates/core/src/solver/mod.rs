//! Time integration of the tangential barotropic system and of surface
//! diffusion, residuals of the full systems on manufactured states, and
//! conservation audits.

mod balance;
mod barotropic;
mod diffusion;
pub mod fv;
pub mod manufactured;
mod residuals;

pub use balance::{angular_moment_of_divergence, BalanceReport, BalanceRow, BALANCE_HEADER};
pub use barotropic::{acoustic_dt_bound, run_tangential_barotropic, step_tangential_barotropic, BarotropicRun};
pub use diffusion::{
    bessel_j1, diffusion_dt_bound, disk_mode_decay, step_surface_diffusion, DecayMeasurement, DiffusionOperator,
    DISK_NEUMANN_ROOT,
};
pub use residuals::{
    entropy_production, residual_generalized_system, residual_thermodynamics, summarize_residual, summaries_to_csv,
    Sources, SystemResiduals, ThermoResiduals, ThermoState, ResidualSummary, RESIDUAL_HEADER,
};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{dot, Vec3};
use serde::{Deserialize, Serialize};

/// Fields of one fluid state on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    /// mass per area
    pub rho: Vec<f64>,
    /// length per time
    pub v: Vec<Vec3>,
    pub theta: Vec<f64>,
    /// amount per area
    pub conc: Vec<f64>,
    /// force per length
    pub sigma: Vec<f64>,
    /// energy per mass
    pub e: Vec<f64>,
    /// force per mass
    pub force: Vec<Vec3>,
}

impl FluidState {
    /// Uniform density at rest with unit temperature and zero everything else.
    pub fn rest(n: usize, rho: f64) -> Self {
        FluidState {
            rho: vec![rho; n],
            v: vec![[0.0; 3]; n],
            theta: vec![1.0; n],
            conc: vec![0.0; n],
            sigma: vec![0.0; n],
            e: vec![0.0; n],
            force: vec![[0.0; 3]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn validate(&self, geo: &Geometry) -> Result<()> {
        let n = geo.len();
        let lens = [
            self.rho.len(),
            self.v.len(),
            self.theta.len(),
            self.conc.len(),
            self.sigma.len(),
            self.e.len(),
            self.force.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::ShapeMismatch(format!(
                "state field lengths {lens:?} do not match {n} grid nodes"
            )));
        }
        Ok(())
    }

    pub fn check_density(&self) -> Result<()> {
        match self.rho.iter().position(|&r| !(r > 0.0)) {
            Some(node) => Err(Error::NonpositiveDensity {
                node,
                value: self.rho[node],
            }),
            None => Ok(()),
        }
    }

    /// `max |n · v|`.
    pub fn max_normal_velocity(&self, geo: &Geometry) -> f64 {
        self.v
            .iter()
            .zip(&geo.metric)
            .map(|(v, m)| dot(*v, m.n).abs())
            .fold(0.0, f64::max)
    }
}

/// Boundary condition assumed by an energy audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BcMode {
    /// `S_Γ ν = 0` on the boundary.
    StressFree,
    /// `v = 0` on the boundary.
    #[default]
    NoSlip,
    /// No condition; the boundary power `∮ v · S ν` enters the energy balance.
    None,
}

/// Zeroes vector values at every boundary node.
pub fn zero_boundary(v: &mut [Vec3], geo: &Geometry) {
    for seg in &geo.segments {
        for &(i, j) in &seg.nodes {
            v[geo.grid.idx(i, j)] = [0.0; 3];
        }
    }
}
