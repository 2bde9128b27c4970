use crate::constitutive::{ConstitutiveChoice, Pressure};
use crate::error::{Error, Result};
use crate::fields::{ScalarExpr, VectorExpr};
use crate::geometry::{DerivativeMode, SurfaceConfig};
use crate::grid::StencilOrder;
use crate::quadrature::InteriorRule;
use crate::solver::manufactured::PolarProfile;
use crate::solver::BcMode;
use crate::variational::EPS_LADDER;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

fn one() -> f64 {
    1.0
}

/// A check suite that can be selected in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Mean curvature, `H = −div_Γ n` and projector invariants.
    Geometry,
    /// Metric-side against ambient-side energy densities.
    Identities,
    /// Divergence theorem and integration by parts.
    Divergence,
    /// Transport theorem for a Lagrangian field.
    Transport,
    /// Gateaux derivatives of the energies against the force pairings.
    Variational,
    /// Variation of the action integrals against the force pairings.
    Action,
    /// Mass of the transported density.
    Density,
    /// Tangential barotropic run with balance audit.
    Barotropic,
    /// Surface diffusion: mass and the slowest Neumann mode on a flat disk.
    Diffusion,
    /// Residuals of both forms of the full system on a manufactured cap state.
    Manufactured,
    /// Enthalpy, entropy and free-energy balances plus entropy production.
    Thermodynamics,
    /// Momentum and angular-momentum balance of a manufactured stress-free state.
    Audit,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Geometry,
        Suite::Identities,
        Suite::Divergence,
        Suite::Transport,
        Suite::Variational,
        Suite::Action,
        Suite::Density,
        Suite::Barotropic,
        Suite::Diffusion,
        Suite::Manufactured,
        Suite::Thermodynamics,
        Suite::Audit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Identities => "identities",
            Suite::Divergence => "divergence",
            Suite::Transport => "transport",
            Suite::Variational => "variational",
            Suite::Action => "action",
            Suite::Density => "density",
            Suite::Barotropic => "barotropic",
            Suite::Diffusion => "diffusion",
            Suite::Manufactured => "manufactured",
            Suite::Thermodynamics => "thermodynamics",
            Suite::Audit => "audit",
        }
    }
}

/// Evaluation time and simulation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Time at which identities and residuals are evaluated.
    #[serde(default)]
    pub t: f64,
    /// End of runs and balance series, which start at zero.
    #[serde(default = "one")]
    pub t_end: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { t: 0.0, t_end: 1.0 }
    }
}

/// How time steps are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtPolicy {
    /// `Δt = dt_ratio · h` for time differences in residual and transport checks.
    #[serde(default = "default_dt_ratio")]
    pub dt_ratio: f64,
    /// Courant number of explicit runs.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Largest Courant number a step accepts before reporting a violation.
    #[serde(default = "one")]
    pub cfl_max: f64,
}

fn default_dt_ratio() -> f64 {
    0.1
}

fn default_cfl() -> f64 {
    0.4
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy {
            dt_ratio: default_dt_ratio(),
            cfl: default_cfl(),
            cfl_max: 1.0,
        }
    }
}

fn smooth(seed: u64, amplitude: f64, offset: f64) -> ScalarExpr {
    ScalarExpr::RandomSmooth {
        seed,
        modes: 4,
        k_max: 1.0,
        amplitude,
        offset,
    }
}

fn default_sigma() -> ScalarExpr {
    ScalarExpr::random(11)
}
fn default_theta() -> ScalarExpr {
    smooth(12, 1.0, 2.0)
}
fn default_conc() -> ScalarExpr {
    smooth(13, 1.0, 0.0)
}
fn default_rho0() -> ScalarExpr {
    smooth(7, 0.3, 1.0)
}
fn default_velocity() -> VectorExpr {
    VectorExpr::FlowVelocity
}
fn default_force() -> VectorExpr {
    VectorExpr::random(14)
}
fn default_phi() -> VectorExpr {
    VectorExpr::random(9)
}
fn default_pulse() -> ScalarExpr {
    ScalarExpr::Gaussian {
        center: [0.5, 0.0, 0.0],
        width: 0.2236,
        amplitude: 0.1,
        offset: 1.0,
    }
}

/// Closed-form fields used by the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    #[serde(default = "default_sigma")]
    pub sigma: ScalarExpr,
    #[serde(default = "default_theta")]
    pub theta: ScalarExpr,
    #[serde(default = "default_conc")]
    pub conc: ScalarExpr,
    /// Reference density `ρ₀` on the initial surface.
    #[serde(default = "default_rho0")]
    pub rho0: ScalarExpr,
    #[serde(default = "default_velocity")]
    pub velocity: VectorExpr,
    #[serde(default = "default_force")]
    pub force: VectorExpr,
    /// Vector field of the divergence theorem; also the amplitude of action variations.
    #[serde(default = "default_phi")]
    pub phi: VectorExpr,
    /// Initial density of barotropic runs.
    #[serde(default = "default_pulse")]
    pub initial_density: ScalarExpr,
}

impl Default for FieldsConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("field defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalConfig {
    /// Random directions per functional and variant.
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
}

fn default_directions() -> usize {
    5
}
fn default_eps() -> Vec<f64> {
    EPS_LADDER.to_vec()
}

impl Default for VariationalConfig {
    fn default() -> Self {
        VariationalConfig {
            directions: default_directions(),
            eps: default_eps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    /// Length `T` of the variation window `[0, T]`.
    #[serde(default = "one")]
    pub window: f64,
    /// Time steps per grid interval of the first axis.
    #[serde(default = "default_steps_ratio")]
    pub steps_ratio: f64,
    /// Margin of the compact bump used for `Act`.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_steps_ratio() -> f64 {
    0.5
}
fn default_margin() -> f64 {
    crate::variational::BUMP_MARGIN
}

impl Default for ActionConfig {
    fn default() -> Self {
        ActionConfig {
            window: 1.0,
            steps_ratio: default_steps_ratio(),
            margin: default_margin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    #[serde(default = "default_mode_amplitude")]
    pub amplitude: f64,
    /// Start of the decay measurement.
    #[serde(default = "default_t_start")]
    pub t_start: f64,
    /// End of the decay measurement.
    #[serde(default = "default_decay_end")]
    pub t_end: f64,
}

fn default_mode_amplitude() -> f64 {
    0.1
}
fn default_t_start() -> f64 {
    0.005
}
fn default_decay_end() -> f64 {
    0.02
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            amplitude: default_mode_amplitude(),
            t_start: default_t_start(),
            t_end: default_decay_end(),
        }
    }
}

/// Profiles of the manufactured cap state, as polynomials in `x₃/|x|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedConfig {
    #[serde(default = "default_rho_profile")]
    pub rho0: PolarProfile,
    #[serde(default = "default_theta_profile")]
    pub theta: PolarProfile,
    #[serde(default = "default_conc_profile")]
    pub conc: PolarProfile,
    /// `σ₁` in the stress-free pressure `a(t) + B σ₁`.
    #[serde(default = "default_sigma_field")]
    pub sigma_field: ScalarExpr,
    /// `A` in `e = A e^s ρ`.
    #[serde(default = "one")]
    pub gibbs_scale: f64,
}

fn default_rho_profile() -> PolarProfile {
    PolarProfile::new(&[1.0, 0.3, -0.2])
}
fn default_theta_profile() -> PolarProfile {
    PolarProfile::new(&[1.5, 0.4, 0.3])
}
fn default_conc_profile() -> PolarProfile {
    PolarProfile::new(&[0.5, -0.3, 0.6])
}
fn default_sigma_field() -> ScalarExpr {
    ScalarExpr::random(5)
}

impl Default for ManufacturedConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("manufactured defaults")
    }
}

/// Pass criteria of one check or suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// Largest relative residual at the finest resolution.
    #[serde(default)]
    pub max_rel: Option<f64>,
    /// Smallest observed order between consecutive resolutions.
    #[serde(default)]
    pub min_order: Option<f64>,
}

impl Tolerance {
    pub const fn new(max_rel: f64, min_order: Option<f64>) -> Self {
        Tolerance {
            max_rel: Some(max_rel),
            min_order,
        }
    }

    /// Fields set in `over` replace those of `self`.
    pub fn merged(self, over: Option<&Tolerance>) -> Tolerance {
        match over {
            None => self,
            Some(o) => Tolerance {
                max_rel: o.max_rel.or(self.max_rel),
                min_order: o.min_order.or(self.min_order),
            },
        }
    }
}

/// A complete scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub surface: SurfaceConfig,
    /// Grid intervals per axis, strictly increasing, at least three.
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub dt_policy: DtPolicy,
    #[serde(default)]
    pub derivative_mode: DerivativeMode,
    #[serde(default)]
    pub stencil_order: StencilOrder,
    #[serde(default)]
    pub quadrature: InteriorRule,
    #[serde(default)]
    pub fields: FieldsConfig,
    #[serde(default)]
    pub constitutive: ConstitutiveChoice,
    #[serde(default = "default_pressure")]
    pub pressure: Pressure,
    #[serde(default)]
    pub bc_mode: BcMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub variational: VariationalConfig,
    #[serde(default)]
    pub action: ActionConfig,
    #[serde(default)]
    pub diffusion: DiffusionConfig,
    #[serde(default)]
    pub manufactured: ManufacturedConfig,
    /// Overrides keyed by suite name or check name; check names win.
    #[serde(default)]
    pub tolerances: BTreeMap<String, Tolerance>,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_pressure() -> Pressure {
    Pressure::Power {
        kappa: 1.0,
        gamma: 2.0,
    }
}

impl Scenario {
    /// Parses and validates JSON; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let field = if path.is_empty() || path == "." {
                "scenario".to_string()
            } else {
                path
            };
            Error::config(field, format!("{inner}"))
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolutions.len() < 3 {
            return Err(Error::config(
                "resolutions",
                format!("need at least 3 resolutions for order estimates, got {}", self.resolutions.len()),
            ));
        }
        if self.resolutions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("resolutions", "must be strictly increasing"));
        }
        if self.resolutions[0] < 4 {
            return Err(Error::config("resolutions", "need at least 4 intervals per axis"));
        }
        let spec = self.surface.build()?;
        spec.domain.validate()?;
        if !(self.time.t >= 0.0 && self.time.t_end > 0.0) {
            return Err(Error::config("time", "need t >= 0 and t_end > 0"));
        }
        let d = &self.dt_policy;
        if !(d.dt_ratio > 0.0 && d.cfl > 0.0 && d.cfl_max >= d.cfl) {
            return Err(Error::config("dt_policy", "need dt_ratio > 0 and 0 < cfl <= cfl_max"));
        }
        let f = &self.fields;
        for (name, e) in [
            ("fields.sigma", &f.sigma),
            ("fields.theta", &f.theta),
            ("fields.conc", &f.conc),
            ("fields.rho0", &f.rho0),
            ("fields.initial_density", &f.initial_density),
            ("manufactured.sigma_field", &self.manufactured.sigma_field),
        ] {
            e.validate(name)?;
        }
        for (name, e) in [("fields.velocity", &f.velocity), ("fields.force", &f.force), ("fields.phi", &f.phi)] {
            e.validate(name)?;
        }
        self.constitutive.resolve("constitutive")?;
        let v = &self.variational;
        if v.eps.len() < 2 || v.eps.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
            return Err(Error::config("variational.eps", "need at least two positive, decreasing steps"));
        }
        let a = &self.action;
        if !(a.window > 0.0 && a.steps_ratio > 0.0 && a.margin >= 0.0 && a.margin < 0.5) {
            return Err(Error::config("action", "need window > 0, steps_ratio > 0, 0 <= margin < 0.5"));
        }
        let df = &self.diffusion;
        if !(0.0 < df.t_start && df.t_start < df.t_end) {
            return Err(Error::config("diffusion", "need 0 < t_start < t_end"));
        }
        let mut seen = Vec::new();
        for s in &self.suites {
            if seen.contains(s) {
                return Err(Error::config("suites", format!("'{}' listed twice", s.name())));
            }
            seen.push(*s);
        }
        Ok(())
    }
}
