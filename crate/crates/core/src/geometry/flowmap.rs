use super::domain::{DomainKind, ParamDomain};
use crate::linalg::{axpy, scale, sub, Vec3, ZERO3};
use std::fmt;
use std::sync::Arc;

/// Position of a flow map with its parameter and time derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub x: Vec3,
    /// `∂x̂/∂X_α`
    pub x_a: [Vec3; 2],
    /// `∂²x̂/∂X_α∂X_β`
    pub x_ab: [[Vec3; 2]; 2],
    pub x_t: Vec3,
    /// `∂²x̂/∂X_α∂t`
    pub x_at: [Vec3; 2],
    pub x_tt: Vec3,
}

/// A closed-form map `x̂(X, t)` from the parameter domain into space.
pub trait FlowMap: Send + Sync + fmt::Debug {
    fn position(&self, x: [f64; 2], t: f64) -> Vec3;

    /// Analytic derivatives, when the map provides them.
    fn jet(&self, _x: [f64; 2], _t: f64) -> Option<Jet> {
        None
    }

    fn velocity(&self, x: [f64; 2], t: f64) -> Option<Vec3> {
        self.jet(x, t).map(|j| j.x_t)
    }

    fn acceleration(&self, x: [f64; 2], t: f64) -> Option<Vec3> {
        self.jet(x, t).map(|j| j.x_tt)
    }
}

/// A flow map together with the domain it is defined on and its evaluation policy.
#[derive(Clone)]
pub struct FlowMapSpec {
    pub name: String,
    pub map: Arc<dyn FlowMap>,
    pub domain: ParamDomain,
    /// Time horizon `T`; evaluation requires `0 <= t < T`.
    pub horizon: f64,
    /// Lower bound `λ₂` for `G`.
    pub lambda2: f64,
    /// Step for time differences when no analytic velocity is available.
    pub time_step: f64,
}

impl fmt::Debug for FlowMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowMapSpec")
            .field("name", &self.name)
            .field("map", &self.map)
            .field("domain", &self.domain)
            .field("horizon", &self.horizon)
            .finish()
    }
}

pub const DEFAULT_LAMBDA2: f64 = 1e-10;
pub const DEFAULT_TIME_STEP: f64 = 1e-5;

impl FlowMapSpec {
    pub fn new(name: &str, map: Arc<dyn FlowMap>, domain: ParamDomain) -> Self {
        FlowMapSpec {
            name: name.to_string(),
            map,
            domain,
            horizon: f64::INFINITY,
            lambda2: DEFAULT_LAMBDA2,
            time_step: DEFAULT_TIME_STEP,
        }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Reference configuration `Φ(X) = x̂(X, 0)`.
    pub fn reference(&self, x: [f64; 2]) -> Vec3 {
        self.map.position(x, 0.0)
    }

    pub fn position(&self, x: [f64; 2], t: f64) -> Vec3 {
        self.map.position(x, t)
    }

    pub fn has_analytic_jet(&self) -> bool {
        let c = [
            0.5 * (self.domain.bounds[0][0] + self.domain.bounds[0][1]),
            0.5 * (self.domain.bounds[1][0] + self.domain.bounds[1][1]),
        ];
        self.map.jet(c, 0.0).is_some()
    }

    /// `∂x̂/∂t`, analytic when available, otherwise a central time difference.
    pub fn velocity(&self, x: [f64; 2], t: f64) -> Vec3 {
        match self.map.velocity(x, t) {
            Some(v) => v,
            None => {
                let d = self.time_step;
                let a = self.map.position(x, t + d);
                let b = self.map.position(x, t - d);
                scale(0.5 / d, sub(a, b))
            }
        }
    }

    /// `∂²x̂/∂t²`, analytic when available, otherwise a central time difference.
    pub fn acceleration(&self, x: [f64; 2], t: f64) -> Vec3 {
        match self.map.acceleration(x, t) {
            Some(a) => a,
            None => {
                let d = self.time_step.sqrt() * 1e-1;
                let p = self.map.position(x, t + d);
                let c = self.map.position(x, t);
                let m = self.map.position(x, t - d);
                scale(1.0 / (d * d), axpy(sub(p, c), -1.0, sub(c, m)))
            }
        }
    }
}

/// Planar coordinates `q(X)` of a parameter point: identity on rectangles,
/// polar-to-Cartesian on the polar kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planar {
    Cartesian,
    Polar,
}

impl Planar {
    pub fn for_domain(kind: DomainKind) -> Self {
        match kind {
            DomainKind::UnitSquare => Planar::Cartesian,
            DomainKind::DiskViaPolar | DomainKind::AnnulusSector => Planar::Polar,
        }
    }

    pub fn q(self, x: [f64; 2]) -> [f64; 2] {
        match self {
            Planar::Cartesian => x,
            Planar::Polar => [x[0] * x[1].cos(), x[0] * x[1].sin()],
        }
    }

    /// `(q, ∂q/∂X_α, ∂²q/∂X_α∂X_β)`
    #[allow(clippy::type_complexity)]
    pub fn jet(self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2], [[[f64; 2]; 2]; 2]) {
        match self {
            Planar::Cartesian => (
                x,
                [[1.0, 0.0], [0.0, 1.0]],
                [[[0.0; 2]; 2]; 2],
            ),
            Planar::Polar => {
                let (r, (s, c)) = (x[0], x[1].sin_cos());
                (
                    [r * c, r * s],
                    [[c, s], [-r * s, r * c]],
                    [[[0.0, 0.0], [-s, c]], [[-s, c], [-r * c, -r * s]]],
                )
            }
        }
    }
}

/// The family `x̂ + ε z` used for flow-map variations.
#[derive(Clone)]
pub struct Perturbed {
    pub base: Arc<dyn FlowMap>,
    pub z: Arc<dyn Fn([f64; 2], f64) -> Vec3 + Send + Sync>,
    pub z_t: Arc<dyn Fn([f64; 2], f64) -> Vec3 + Send + Sync>,
    pub eps: f64,
}

impl fmt::Debug for Perturbed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Perturbed")
            .field("base", &self.base)
            .field("eps", &self.eps)
            .finish()
    }
}

impl FlowMap for Perturbed {
    fn position(&self, x: [f64; 2], t: f64) -> Vec3 {
        axpy(self.base.position(x, t), self.eps, (self.z)(x, t))
    }

    fn velocity(&self, x: [f64; 2], t: f64) -> Option<Vec3> {
        let v = self.base.velocity(x, t)?;
        Some(axpy(v, self.eps, (self.z_t)(x, t)))
    }

    fn acceleration(&self, _x: [f64; 2], _t: f64) -> Option<Vec3> {
        None
    }
}

/// A surface at rest: `x̂(X, t) = x̂(X, 0)`.
#[derive(Debug, Clone)]
pub struct Frozen(pub Arc<dyn FlowMap>);

impl FlowMap for Frozen {
    fn position(&self, x: [f64; 2], _t: f64) -> Vec3 {
        self.0.position(x, 0.0)
    }

    fn jet(&self, x: [f64; 2], _t: f64) -> Option<Jet> {
        self.0.jet(x, 0.0).map(|mut j| {
            j.x_t = ZERO3;
            j.x_at = [ZERO3; 2];
            j.x_tt = ZERO3;
            j
        })
    }

    fn velocity(&self, _x: [f64; 2], _t: f64) -> Option<Vec3> {
        Some(ZERO3)
    }

    fn acceleration(&self, _x: [f64; 2], _t: f64) -> Option<Vec3> {
        Some(ZERO3)
    }
}
