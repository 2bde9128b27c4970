//! Closed-form ambient fields `f(x, t)` and seeded random smooth fields.
//!
//! Random fields are drawn with `Xoshiro256PlusPlus` seeded through
//! `seed_from_u64`, so a seed names the same field on every platform.

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{cross, dot, mat_vec, scale, Vec3, ZERO3};
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

/// Seeded uniform samples in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct Sampler(Xoshiro256PlusPlus);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn unit_vector(&mut self) -> Vec3 {
        loop {
            let v = [
                self.range(-1.0, 1.0),
                self.range(-1.0, 1.0),
                self.range(-1.0, 1.0),
            ];
            let r = dot(v, v);
            if r > 1e-4 && r <= 1.0 {
                return scale(1.0 / r.sqrt(), v);
            }
        }
    }
}

/// One Fourier mode `a sin(k·x + ω t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub amplitude: f64,
    pub k: Vec3,
    pub omega: f64,
    pub phase: f64,
}

impl Mode {
    fn arg(&self, x: Vec3, t: f64) -> f64 {
        dot(self.k, x) + self.omega * t + self.phase
    }
}

/// `modes` random modes with wave numbers `|k| ≤ k_max` and amplitudes summing to `amplitude`.
pub fn random_modes(seed: u64, modes: usize, k_max: f64, amplitude: f64) -> Vec<Mode> {
    let mut s = Sampler::new(seed);
    let raw: Vec<(f64, Vec3, f64, f64)> = (0..modes)
        .map(|_| {
            let a = s.range(0.5, 1.0);
            let k = scale(s.range(0.5, 1.0) * k_max, s.unit_vector());
            let w = s.range(-1.0, 1.0);
            let p = s.range(0.0, std::f64::consts::TAU);
            (a, k, w, p)
        })
        .collect();
    let total: f64 = raw.iter().map(|r| r.0).sum::<f64>().max(1e-300);
    raw.into_iter()
        .map(|(a, k, w, p)| Mode {
            amplitude: amplitude * a / total,
            k,
            omega: w,
            phase: p,
        })
        .collect()
}

fn default_modes() -> usize {
    4
}

fn default_k_max() -> f64 {
    2.0
}

fn one() -> f64 {
    1.0
}

/// Names and parameters of the scalar fields.
pub const SCALAR_CATALOG: &[(&str, &str)] = &[
    ("constant", "value"),
    ("time", "f = t"),
    ("coordinate", "axis in 0..3"),
    ("radius-squared", "f = |x|^2"),
    ("affine", "c0, c=[..], ct=0"),
    ("trig", "k=[..], amplitude=1, omega=0, phase=0, offset=0"),
    ("exp", "k=[..], amplitude=1, offset=0"),
    ("gaussian", "center=[..], width, amplitude=1, offset=0"),
    ("random-smooth", "seed, modes=4, k_max=2, amplitude=1, offset=0"),
];

/// Names and parameters of the vector fields.
pub const VECTOR_CATALOG: &[(&str, &str)] = &[
    ("constant", "value=[..]"),
    ("radial", "scale=1; s (x1, x2, 0)"),
    ("rotation", "omega=[..]; omega x x"),
    ("components", "x, y, z scalar fields"),
    ("random-smooth", "seed, modes=4, k_max=2, amplitude=1"),
    ("flow-velocity", "velocity of the flow map"),
    ("normal", "unit normal"),
];

/// A scalar field of ambient position and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarExpr {
    Constant {
        value: f64,
    },
    /// `f = t`
    Time,
    /// `f = x_axis`
    Coordinate {
        axis: usize,
    },
    /// `f = |x|²`
    RadiusSquared,
    /// `f = c0 + c·x + ct t`
    Affine {
        c0: f64,
        c: Vec3,
        #[serde(default)]
        ct: f64,
    },
    /// `f = offset + a sin(k·x + ω t + φ)`
    Trig {
        #[serde(default = "one")]
        amplitude: f64,
        k: Vec3,
        #[serde(default)]
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `f = offset + a exp(k·x)`
    Exp {
        #[serde(default = "one")]
        amplitude: f64,
        k: Vec3,
        #[serde(default)]
        offset: f64,
    },
    /// `f = offset + a exp(−|x − c|² / w²)`
    Gaussian {
        center: Vec3,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `offset + Σ random modes`
    RandomSmooth {
        seed: u64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_k_max")]
        k_max: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl ScalarExpr {
    pub fn constant(value: f64) -> Self {
        ScalarExpr::Constant { value }
    }

    pub fn random(seed: u64) -> Self {
        ScalarExpr::RandomSmooth {
            seed,
            modes: default_modes(),
            k_max: default_k_max(),
            amplitude: 1.0,
            offset: 0.0,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        match self {
            ScalarExpr::Coordinate { axis } if *axis > 2 => {
                Err(Error::config(field, "coordinate axis must be 0, 1 or 2"))
            }
            ScalarExpr::RandomSmooth { modes: 0, .. } => {
                Err(Error::config(field, "random field needs at least one mode"))
            }
            ScalarExpr::Gaussian { width, .. } if !(*width > 0.0) => {
                Err(Error::config(field, "gaussian width must be positive"))
            }
            _ => Ok(()),
        }
    }

    fn modes(&self) -> Vec<Mode> {
        match *self {
            ScalarExpr::RandomSmooth {
                seed,
                modes,
                k_max,
                amplitude,
                ..
            } => random_modes(seed, modes, k_max, amplitude),
            _ => Vec::new(),
        }
    }

    /// Value, ambient gradient and partial time derivative at `(x, t)`.
    pub fn eval_full(&self, x: Vec3, t: f64) -> (f64, Vec3, f64) {
        self.eval_with(&self.modes(), x, t)
    }

    fn eval_with(&self, modes: &[Mode], x: Vec3, t: f64) -> (f64, Vec3, f64) {
        match *self {
            ScalarExpr::Constant { value } => (value, ZERO3, 0.0),
            ScalarExpr::Time => (t, ZERO3, 1.0),
            ScalarExpr::Coordinate { axis } => {
                let mut g = ZERO3;
                g[axis] = 1.0;
                (x[axis], g, 0.0)
            }
            ScalarExpr::RadiusSquared => (dot(x, x), scale(2.0, x), 0.0),
            ScalarExpr::Affine { c0, c, ct } => (c0 + dot(c, x) + ct * t, c, ct),
            ScalarExpr::Trig {
                amplitude,
                k,
                omega,
                phase,
                offset,
            } => {
                let a = dot(k, x) + omega * t + phase;
                let (s, co) = a.sin_cos();
                (
                    offset + amplitude * s,
                    scale(amplitude * co, k),
                    amplitude * co * omega,
                )
            }
            ScalarExpr::Exp {
                amplitude,
                k,
                offset,
            } => {
                let e = amplitude * dot(k, x).exp();
                (offset + e, scale(e, k), 0.0)
            }
            ScalarExpr::Gaussian {
                center,
                width,
                amplitude,
                offset,
            } => {
                let d = crate::linalg::sub(x, center);
                let e = amplitude * (-dot(d, d) / (width * width)).exp();
                (offset + e, scale(-2.0 * e / (width * width), d), 0.0)
            }
            ScalarExpr::RandomSmooth { offset, .. } => {
                let mut f = offset;
                let mut g = ZERO3;
                let mut ft = 0.0;
                for m in modes {
                    let (s, c) = m.arg(x, t).sin_cos();
                    f += m.amplitude * s;
                    g = crate::linalg::axpy(g, m.amplitude * c, m.k);
                    ft += m.amplitude * c * m.omega;
                }
                (f, g, ft)
            }
        }
    }

    pub fn value(&self, x: Vec3, t: f64) -> f64 {
        self.eval_full(x, t).0
    }

    /// Values at the surface points of `geo`.
    pub fn sample(&self, geo: &Geometry) -> Vec<f64> {
        let modes = self.modes();
        geo.pos
            .iter()
            .map(|&x| self.eval_with(&modes, x, geo.t).0)
            .collect()
    }

    /// Closed-form `grad_Γ f = P ∇f` at the surface points of `geo`.
    pub fn sample_surface_gradient(&self, geo: &Geometry) -> Vec<Vec3> {
        let modes = self.modes();
        geo.pos
            .iter()
            .zip(&geo.metric)
            .map(|(&x, m)| mat_vec(&m.p, self.eval_with(&modes, x, geo.t).1))
            .collect()
    }

    /// Closed-form `D_t f = ∂_t f + v·∇f` with the flow velocity of `geo`.
    pub fn sample_material_derivative(&self, geo: &Geometry) -> Vec<f64> {
        let modes = self.modes();
        geo.pos
            .iter()
            .zip(&geo.velocity)
            .map(|(&x, &v)| {
                let (_, g, ft) = self.eval_with(&modes, x, geo.t);
                ft + dot(v, g)
            })
            .collect()
    }

    /// Closed-form `(n·∇) f`.
    pub fn sample_normal_derivative(&self, geo: &Geometry) -> Vec<f64> {
        let modes = self.modes();
        geo.pos
            .iter()
            .zip(&geo.metric)
            .map(|(&x, m)| dot(m.n, self.eval_with(&modes, x, geo.t).1))
            .collect()
    }
}

/// A vector field of ambient position and time, or one tied to the surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorExpr {
    Constant {
        value: Vec3,
    },
    /// `s (x1, x2, 0)`
    Radial {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `ω × x`
    Rotation {
        omega: Vec3,
    },
    Components {
        x: ScalarExpr,
        y: ScalarExpr,
        z: ScalarExpr,
    },
    /// Three independent random smooth components.
    RandomSmooth {
        seed: u64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_k_max")]
        k_max: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// The velocity `∂x̂/∂t` of the flow map.
    FlowVelocity,
    /// The unit normal `n`.
    Normal,
}

impl VectorExpr {
    pub fn random(seed: u64) -> Self {
        VectorExpr::RandomSmooth {
            seed,
            modes: default_modes(),
            k_max: default_k_max(),
            amplitude: 1.0,
        }
    }

    fn components(&self) -> Option<[ScalarExpr; 3]> {
        match self {
            VectorExpr::Components { x, y, z } => Some([x.clone(), y.clone(), z.clone()]),
            VectorExpr::RandomSmooth {
                seed,
                modes,
                k_max,
                amplitude,
            } => Some(std::array::from_fn(|c| ScalarExpr::RandomSmooth {
                seed: seed.wrapping_mul(3).wrapping_add(c as u64 + 1),
                modes: *modes,
                k_max: *k_max,
                amplitude: *amplitude,
                offset: 0.0,
            })),
            _ => None,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if let Some(c) = self.components() {
            for s in &c {
                s.validate(field)?;
            }
        }
        Ok(())
    }

    /// Value at one point; `None` for fields that need a geometry.
    pub fn value(&self, x: Vec3, t: f64) -> Option<Vec3> {
        match self {
            VectorExpr::Constant { value } => Some(*value),
            VectorExpr::Radial { scale: s } => Some([s * x[0], s * x[1], 0.0]),
            VectorExpr::Rotation { omega } => Some(cross(*omega, x)),
            VectorExpr::FlowVelocity | VectorExpr::Normal => None,
            _ => {
                let c = self.components()?;
                Some([c[0].value(x, t), c[1].value(x, t), c[2].value(x, t)])
            }
        }
    }

    /// Values at the surface points of `geo`.
    pub fn sample(&self, geo: &Geometry) -> Vec<Vec3> {
        match self {
            VectorExpr::Constant { value } => vec![*value; geo.len()],
            VectorExpr::Radial { scale: s } => {
                geo.pos.iter().map(|x| [s * x[0], s * x[1], 0.0]).collect()
            }
            VectorExpr::Rotation { omega } => geo.pos.iter().map(|&x| cross(*omega, x)).collect(),
            VectorExpr::FlowVelocity => geo.velocity.clone(),
            VectorExpr::Normal => geo.metric.iter().map(|m| m.n).collect(),
            _ => {
                let c = self.components().expect("component field");
                let v: Vec<Vec<f64>> = c.iter().map(|s| s.sample(geo)).collect();
                (0..geo.len()).map(|k| [v[0][k], v[1][k], v[2][k]]).collect()
            }
        }
    }
}

/// `((s − m)(1 − m − s)/(½ − m)²)⁴` on `(m, 1 − m)`, zero elsewhere.
pub fn bump_1d(s: f64, margin: f64) -> f64 {
    if s <= margin || s >= 1.0 - margin {
        return 0.0;
    }
    let c = 0.5 - margin;
    ((s - margin) * (1.0 - margin - s) / (c * c)).powi(4)
}

/// Smooth bump on the parameter domain that vanishes, with its first three
/// derivatives, outside `[lo + m, hi − m]` on every bounded axis
/// (`m = margin · width`). Periodic axes are left unrestricted.
pub fn compact_bump(geo: &Geometry, margin: f64) -> Vec<f64> {
    let grid = &geo.grid;
    let prof = |axis: usize, x: f64| -> f64 {
        let a = &grid.axes[axis];
        if a.periodic {
            return 1.0;
        }
        bump_1d((x - a.lo) / (a.hi - a.lo), margin)
    };
    grid.sample(|_, _, x| prof(0, x[0]) * prof(1, x[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_reproducible() {
        let a: Vec<f64> = {
            let mut s = Sampler::new(7);
            (0..5).map(|_| s.uniform()).collect()
        };
        let b: Vec<f64> = {
            let mut s = Sampler::new(7);
            (0..5).map(|_| s.uniform()).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|u| (0.0..1.0).contains(u)));
        let mut c = Sampler::new(8);
        assert_ne!(a[0], c.uniform());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let exprs = [
            ScalarExpr::random(3),
            ScalarExpr::Trig {
                amplitude: 0.7,
                k: [1.0, -2.0, 0.5],
                omega: 0.3,
                phase: 0.1,
                offset: 1.0,
            },
            ScalarExpr::Exp {
                amplitude: 1.0,
                k: [0.2, 0.1, -0.3],
                offset: 0.5,
            },
            ScalarExpr::RadiusSquared,
            ScalarExpr::Gaussian {
                center: [0.1, 0.2, -0.1],
                width: 0.7,
                amplitude: 0.4,
                offset: 1.0,
            },
        ];
        let x = [0.3, -0.4, 0.8];
        let t = 0.6;
        let d = 1e-6;
        for e in &exprs {
            let (_, g, ft) = e.eval_full(x, t);
            for a in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[a] += d;
                xm[a] -= d;
                let fd = (e.value(xp, t) - e.value(xm, t)) / (2.0 * d);
                assert!((fd - g[a]).abs() < 1e-8, "{e:?}");
            }
            let fd = (e.value(x, t + d) - e.value(x, t - d)) / (2.0 * d);
            assert!((fd - ft).abs() < 1e-8);
        }
    }

    #[test]
    fn config_round_trip() {
        let e = ScalarExpr::random(11);
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<ScalarExpr>(&s).unwrap(), e);
        let v: VectorExpr = serde_json::from_str(r#"{"name":"rotation","omega":[0,0,1]}"#).unwrap();
        assert_eq!(v, VectorExpr::Rotation { omega: [0.0, 0.0, 1.0] });
        assert!(serde_json::from_str::<ScalarExpr>(r#"{"name":"nope"}"#).is_err());
    }
}
