//! Built-in flow maps.

use super::domain::{DomainKind, ParamDomain};
use super::flowmap::{FlowMap, FlowMapSpec, Jet, Planar};
use crate::error::{Error, Result};
use crate::linalg::{add, axpy, cross, scale, Vec3, ZERO3};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const EZ: Vec3 = [0.0, 0.0, 1.0];

/// Plane `x̂ = (q(X), 0) + t c`.
#[derive(Debug, Clone)]
pub struct FlatMap {
    pub planar: Planar,
    pub velocity: Vec3,
}

impl FlowMap for FlatMap {
    fn position(&self, x: [f64; 2], t: f64) -> Vec3 {
        let q = self.planar.q(x);
        axpy([q[0], q[1], 0.0], t, self.velocity)
    }

    fn jet(&self, x: [f64; 2], t: f64) -> Option<Jet> {
        let (q, qa, qab) = self.planar.jet(x);
        let lift = |v: [f64; 2]| [v[0], v[1], 0.0];
        Some(Jet {
            x: axpy(lift(q), t, self.velocity),
            x_a: [lift(qa[0]), lift(qa[1])],
            x_ab: [
                [lift(qab[0][0]), lift(qab[0][1])],
                [lift(qab[1][0]), lift(qab[1][1])],
            ],
            x_t: self.velocity,
            x_at: [ZERO3; 2],
            x_tt: ZERO3,
        })
    }
}

/// Sphere chart `X = (polar angle, azimuth)` scaled by
/// `R(t) = R0 + rate t + accel t²/2` and rotated by `ω t` about the z-axis.
#[derive(Debug, Clone)]
pub struct SphereMap {
    pub radius0: f64,
    pub rate: f64,
    pub accel: f64,
    pub omega: f64,
}

impl SphereMap {
    fn radius(&self, t: f64) -> (f64, f64, f64) {
        (
            self.radius0 + self.rate * t + 0.5 * self.accel * t * t,
            self.rate + self.accel * t,
            self.accel,
        )
    }

    fn rotate(&self, t: f64, v: Vec3) -> Vec3 {
        let (s, c) = (self.omega * t).sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
    }
}

impl FlowMap for SphereMap {
    fn position(&self, x: [f64; 2], t: f64) -> Vec3 {
        let (st, ct) = x[0].sin_cos();
        let (sp, cp) = x[1].sin_cos();
        let (r, _, _) = self.radius(t);
        scale(r, self.rotate(t, [st * cp, st * sp, ct]))
    }

    fn jet(&self, x: [f64; 2], t: f64) -> Option<Jet> {
        let (st, ct) = x[0].sin_cos();
        let (sp, cp) = x[1].sin_cos();
        let (r, dr, ddr) = self.radius(t);
        let w = self.omega;
        let u = self.rotate(t, [st * cp, st * sp, ct]);
        let u1 = self.rotate(t, [ct * cp, ct * sp, -st]);
        let u2 = self.rotate(t, [-st * sp, st * cp, 0.0]);
        let u11 = scale(-1.0, u);
        let u12 = self.rotate(t, [-ct * sp, ct * cp, 0.0]);
        let u22 = self.rotate(t, [-st * cp, -st * sp, 0.0]);
        let spin = |v: Vec3| cross(EZ, v);
        let rate_of = |v: Vec3| add(scale(dr, v), scale(r * w, spin(v)));
        Some(Jet {
            x: scale(r, u),
            x_a: [scale(r, u1), scale(r, u2)],
            x_ab: [
                [scale(r, u11), scale(r, u12)],
                [scale(r, u12), scale(r, u22)],
            ],
            x_t: rate_of(u),
            x_at: [rate_of(u1), rate_of(u2)],
            x_tt: add(
                add(scale(ddr, u), scale(2.0 * dr * w, spin(u))),
                scale(r * w * w, spin(spin(u))),
            ),
        })
    }
}

/// Graph `x̂ = (q, f(q, t))` with `f = A (1 + β t) sin(k₁ q₁) cos(k₂ q₂)`.
#[derive(Debug, Clone)]
pub struct GraphMap {
    pub planar: Planar,
    pub amplitude: f64,
    pub k: [f64; 2],
    pub growth: f64,
}

impl GraphMap {
    /// `(f, f_q, f_qq)` per unit time factor.
    fn shape(&self, q: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let [k1, k2] = self.k;
        let (s1, c1) = (k1 * q[0]).sin_cos();
        let (s2, c2) = (k2 * q[1]).sin_cos();
        let a = self.amplitude;
        (
            a * s1 * c2,
            [a * k1 * c1 * c2, -a * k2 * s1 * s2],
            [
                [-a * k1 * k1 * s1 * c2, -a * k1 * k2 * c1 * s2],
                [-a * k1 * k2 * c1 * s2, -a * k2 * k2 * s1 * c2],
            ],
        )
    }
}

impl FlowMap for GraphMap {
    fn position(&self, x: [f64; 2], t: f64) -> Vec3 {
        let q = self.planar.q(x);
        let (f, _, _) = self.shape(q);
        [q[0], q[1], (1.0 + self.growth * t) * f]
    }

    fn jet(&self, x: [f64; 2], t: f64) -> Option<Jet> {
        let (q, qa, qab) = self.planar.jet(x);
        let (f, fq, fqq) = self.shape(q);
        let at = 1.0 + self.growth * t;
        let bt = self.growth;
        let mut f_a = [0.0; 2];
        let mut f_ab = [[0.0; 2]; 2];
        for al in 0..2 {
            f_a[al] = fq[0] * qa[al][0] + fq[1] * qa[al][1];
            for be in 0..2 {
                let mut s = fq[0] * qab[al][be][0] + fq[1] * qab[al][be][1];
                for a in 0..2 {
                    for b in 0..2 {
                        s += fqq[a][b] * qa[al][a] * qa[be][b];
                    }
                }
                f_ab[al][be] = s;
            }
        }
        let pt = |v: [f64; 2], z: f64| [v[0], v[1], z];
        Some(Jet {
            x: pt(q, at * f),
            x_a: [pt(qa[0], at * f_a[0]), pt(qa[1], at * f_a[1])],
            x_ab: [
                [pt(qab[0][0], at * f_ab[0][0]), pt(qab[0][1], at * f_ab[0][1])],
                [pt(qab[1][0], at * f_ab[1][0]), pt(qab[1][1], at * f_ab[1][1])],
            ],
            x_t: [0.0, 0.0, bt * f],
            x_at: [[0.0, 0.0, bt * f_a[0]], [0.0, 0.0, bt * f_a[1]]],
            x_tt: ZERO3,
        })
    }
}

fn default_inner() -> f64 {
    0.05
}
fn one() -> f64 {
    1.0
}
fn theta_min() -> f64 {
    0.2
}
fn theta_max() -> f64 {
    1.4
}
fn default_k() -> [f64; 2] {
    [std::f64::consts::PI, std::f64::consts::PI]
}
fn default_amplitude() -> f64 {
    0.2
}

/// Surface selection as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceConfig {
    /// Flat unit disk with a small hole at the polar-chart singularity.
    FlatDisk {
        #[serde(default = "default_inner")]
        inner_radius: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        domain: Option<ParamDomain>,
    },
    TranslatingDisk {
        #[serde(default = "default_inner")]
        inner_radius: f64,
        #[serde(default = "one")]
        radius: f64,
        velocity: [f64; 3],
        #[serde(default)]
        domain: Option<ParamDomain>,
    },
    SphereCap {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "theta_min")]
        theta_min: f64,
        #[serde(default = "theta_max")]
        theta_max: f64,
        #[serde(default)]
        domain: Option<ParamDomain>,
    },
    ExpandingSphereCap {
        #[serde(default = "one")]
        radius0: f64,
        #[serde(default = "one")]
        rate: f64,
        #[serde(default)]
        accel: f64,
        #[serde(default)]
        omega: f64,
        #[serde(default = "theta_min")]
        theta_min: f64,
        #[serde(default = "theta_max")]
        theta_max: f64,
        #[serde(default)]
        domain: Option<ParamDomain>,
    },
    GraphSurface {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_k")]
        k: [f64; 2],
        #[serde(default)]
        growth: f64,
        #[serde(default)]
        domain: Option<ParamDomain>,
    },
}

/// Names and parameter schemas of the built-in surfaces.
pub const SURFACE_CATALOG: &[(&str, &str)] = &[
    (
        "flat-disk",
        "inner_radius=0.05, radius=1; x = (r cos φ, r sin φ, 0) on disk-via-polar",
    ),
    (
        "translating-disk",
        "inner_radius=0.05, radius=1, velocity=[cx,cy,cz]; flat disk moved by t c",
    ),
    (
        "sphere-cap",
        "radius=1, theta_min=0.2, theta_max=1.4; X = (polar angle, azimuth)",
    ),
    (
        "expanding-sphere-cap",
        "radius0=1, rate=1, accel=0, omega=0, theta_min=0.2, theta_max=1.4; R(t) = radius0 + rate t + accel t^2/2, spin ω about z",
    ),
    (
        "graph-surface",
        "amplitude=0.2, k=[pi,pi], growth=0; z = A (1 + growth t) sin(k1 q1) cos(k2 q2) over the unit square",
    ),
];

impl SurfaceConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceConfig::FlatDisk { .. } => "flat-disk",
            SurfaceConfig::TranslatingDisk { .. } => "translating-disk",
            SurfaceConfig::SphereCap { .. } => "sphere-cap",
            SurfaceConfig::ExpandingSphereCap { .. } => "expanding-sphere-cap",
            SurfaceConfig::GraphSurface { .. } => "graph-surface",
        }
    }

    /// Mean curvature where it is constant in space, with the normal
    /// orientation used by the charts (outward on spheres).
    pub fn exact_mean_curvature(&self, t: f64) -> Option<f64> {
        match *self {
            SurfaceConfig::FlatDisk { .. } | SurfaceConfig::TranslatingDisk { .. } => Some(0.0),
            SurfaceConfig::SphereCap { radius, .. } => Some(-2.0 / radius),
            SurfaceConfig::ExpandingSphereCap {
                radius0, rate, accel, ..
            } => Some(-2.0 / (radius0 + rate * t + 0.5 * accel * t * t)),
            SurfaceConfig::GraphSurface { .. } => None,
        }
    }

    /// Every catalog entry with default parameters.
    pub fn defaults() -> Vec<SurfaceConfig> {
        SURFACE_CATALOG
            .iter()
            .map(|(name, _)| {
                let extra = if *name == "translating-disk" {
                    r#","velocity":[0.5,0.25,0.0]"#
                } else {
                    ""
                };
                serde_json::from_str(&format!(r#"{{"name":"{name}"{extra}}}"#))
                    .expect("catalog defaults parse")
            })
            .collect()
    }

    pub fn build(&self) -> Result<FlowMapSpec> {
        let full = [0.0, std::f64::consts::TAU];
        let polar = |r0: f64, r1: f64| ParamDomain::new(DomainKind::DiskViaPolar, [[r0, r1], full]);
        let (name, map, domain): (&str, Arc<dyn FlowMap>, ParamDomain) = match self {
            SurfaceConfig::FlatDisk {
                inner_radius,
                radius,
                domain,
            }
            | SurfaceConfig::TranslatingDisk {
                inner_radius,
                radius,
                domain,
                ..
            } => {
                let d = match domain {
                    Some(d) => *d,
                    None => polar(*inner_radius, *radius)?,
                };
                let velocity = match self {
                    SurfaceConfig::TranslatingDisk { velocity, .. } => *velocity,
                    _ => ZERO3,
                };
                let map = FlatMap {
                    planar: Planar::for_domain(d.kind),
                    velocity,
                };
                (self.name(), Arc::new(map), d)
            }
            SurfaceConfig::SphereCap {
                radius,
                theta_min,
                theta_max,
                domain,
            } => {
                let d = match domain {
                    Some(d) => *d,
                    None => polar(*theta_min, *theta_max)?,
                };
                let map = SphereMap {
                    radius0: *radius,
                    rate: 0.0,
                    accel: 0.0,
                    omega: 0.0,
                };
                (self.name(), Arc::new(map), d)
            }
            SurfaceConfig::ExpandingSphereCap {
                radius0,
                rate,
                accel,
                omega,
                theta_min,
                theta_max,
                domain,
            } => {
                let d = match domain {
                    Some(d) => *d,
                    None => polar(*theta_min, *theta_max)?,
                };
                let map = SphereMap {
                    radius0: *radius0,
                    rate: *rate,
                    accel: *accel,
                    omega: *omega,
                };
                (self.name(), Arc::new(map), d)
            }
            SurfaceConfig::GraphSurface {
                amplitude,
                k,
                growth,
                domain,
            } => {
                let d = domain.unwrap_or_else(ParamDomain::unit_square);
                let map = GraphMap {
                    planar: Planar::for_domain(d.kind),
                    amplitude: *amplitude,
                    k: *k,
                    growth: *growth,
                };
                (self.name(), Arc::new(map), d)
            }
        };
        domain.validate()?;
        if let SurfaceConfig::SphereCap { theta_max, .. }
        | SurfaceConfig::ExpandingSphereCap { theta_max, .. } = self
        {
            if *theta_max >= std::f64::consts::PI {
                return Err(Error::InvalidDomain(
                    "sphere chart must stay away from the south pole".into(),
                ));
            }
        }
        let mut spec = FlowMapSpec::new(name, map, domain);
        if let SurfaceConfig::ExpandingSphereCap {
            radius0,
            rate,
            accel,
            ..
        } = self
        {
            // R(t) must stay positive on [0, T)
            let mut horizon = f64::INFINITY;
            let roots = quadratic_roots(0.5 * accel, *rate, *radius0);
            for r in roots {
                if r > 0.0 {
                    horizon = horizon.min(r);
                }
            }
            spec.horizon = horizon;
        }
        Ok(spec)
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    vec![(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, sub};

    /// Central differences of `position` against the analytic jet.
    fn check_jet(map: &dyn FlowMap, x: [f64; 2], t: f64) {
        let j = map.jet(x, t).unwrap();
        let d = 1e-5;
        let shift = |a: usize, s: f64| {
            let mut y = x;
            y[a] += s;
            y
        };
        for a in 0..2 {
            let fd = scale(
                0.5 / d,
                sub(map.position(shift(a, d), t), map.position(shift(a, -d), t)),
            );
            assert!(norm(sub(fd, j.x_a[a])) < 1e-8, "x_a[{a}]");
            for b in 0..2 {
                let ja = map.jet(shift(b, d), t).unwrap().x_a[a];
                let jb = map.jet(shift(b, -d), t).unwrap().x_a[a];
                let fd2 = scale(0.5 / d, sub(ja, jb));
                assert!(norm(sub(fd2, j.x_ab[a][b])) < 1e-8, "x_ab[{a}][{b}]");
            }
            let at = scale(
                0.5 / d,
                sub(
                    map.jet(x, t + d).unwrap().x_a[a],
                    map.jet(x, t - d).unwrap().x_a[a],
                ),
            );
            assert!(norm(sub(at, j.x_at[a])) < 1e-8, "x_at[{a}]");
        }
        let vt = scale(0.5 / d, sub(map.position(x, t + d), map.position(x, t - d)));
        assert!(norm(sub(vt, j.x_t)) < 1e-8, "x_t");
        let at = scale(
            0.5 / d,
            sub(map.jet(x, t + d).unwrap().x_t, map.jet(x, t - d).unwrap().x_t),
        );
        assert!(norm(sub(at, j.x_tt)) < 1e-7, "x_tt");
        assert!(norm(sub(j.x, map.position(x, t))) < 1e-14);
    }

    #[test]
    fn analytic_jets_match_differences() {
        let x = [0.7, 1.1];
        check_jet(
            &FlatMap {
                planar: Planar::Polar,
                velocity: [0.3, -0.2, 0.1],
            },
            x,
            0.4,
        );
        check_jet(
            &SphereMap {
                radius0: 1.2,
                rate: 0.7,
                accel: 0.3,
                omega: 0.9,
            },
            x,
            0.6,
        );
        for planar in [Planar::Cartesian, Planar::Polar] {
            check_jet(
                &GraphMap {
                    planar,
                    amplitude: 0.3,
                    k: [2.0, 1.5],
                    growth: 0.5,
                },
                [0.4, 0.3],
                0.2,
            );
        }
    }

    #[test]
    fn every_catalog_entry_builds() {
        for cfg in SurfaceConfig::defaults() {
            let spec = cfg.build().unwrap();
            assert_eq!(spec.name, cfg.name());
            let text = serde_json::to_string(&cfg).unwrap();
            let back: SurfaceConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn expanding_cap_reference_is_unit_chart() {
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
        let x = [0.5, 2.0];
        assert!((norm(spec.reference(x)) - 1.0).abs() < 1e-15);
        assert!((norm(spec.position(x, 0.5)) - 1.5).abs() < 1e-15);
    }
}
