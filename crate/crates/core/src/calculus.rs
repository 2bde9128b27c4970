//! Surface differential operators evaluated through the induced metric.
//!
//! Every operator works on values `f̂(X) = f(x̂(X, t))` sampled on the grid of a
//! [`Geometry`]. Tangential derivatives are assembled as
//! `∂_j^Γ f = (∂x̂_j/∂X_α) g^{αβ} ∂f̂/∂X_β = (g^β)_j ∂_β f̂`, so only parameter
//! derivatives of sampled values are ever taken.
//!
//! Tensors are stored in ambient `3 × 3` components. The divergence of a tensor
//! field contracts the second index: `(div_Γ M)_i = ∂_j^Γ M_ij`.

use crate::constitutive::ConstitutiveSet;
use crate::error::{Error, Result};
use crate::geometry::{DerivativeMode, FlowMapSpec, Geometry};
use crate::grid::FieldValue;
use crate::linalg::{
    add, ddot, dot, mat_add, mat_mul, mat_scale, mat_vec, outer, scale, trace, transpose, Mat3,
    Vec3, ZERO33,
};
use rayon::prelude::*;

/// `grad_Γ f`.
pub fn surface_gradient(f: &[f64], geo: &Geometry) -> Vec<Vec3> {
    let [d1, d2] = geo.grid.gradient(f);
    (0..geo.len())
        .into_par_iter()
        .map(|k| {
            let [a1, a2] = geo.metric[k].dual();
            add(scale(d1[k], a1), scale(d2[k], a2))
        })
        .collect()
}

/// `[∇_Γ φ]_ij = ∂_j^Γ φ_i`, one scalar gradient per component.
pub fn vector_gradient(phi: &[Vec3], geo: &Geometry) -> Vec<Mat3> {
    let [d1, d2] = geo.grid.gradient(phi);
    (0..geo.len())
        .into_par_iter()
        .map(|k| {
            let [a1, a2] = geo.metric[k].dual();
            mat_add(&outer(d1[k], a1), &outer(d2[k], a2))
        })
        .collect()
}

/// `div_Γ φ = g^α · ∂φ̂/∂X_α`.
pub fn surface_divergence(phi: &[Vec3], geo: &Geometry) -> Vec<f64> {
    let [d1, d2] = geo.grid.gradient(phi);
    (0..geo.len())
        .into_par_iter()
        .map(|k| {
            let [a1, a2] = geo.metric[k].dual();
            dot(a1, d1[k]) + dot(a2, d2[k])
        })
        .collect()
}

/// `(div_Γ M)_i = Σ_j ∂_j^Γ M_ij`.
pub fn tensor_divergence(m: &[Mat3], geo: &Geometry) -> Vec<Vec3> {
    let [d1, d2] = geo.grid.gradient(m);
    (0..geo.len())
        .into_par_iter()
        .map(|k| {
            let [a1, a2] = geo.metric[k].dual();
            add(mat_vec(&d1[k], a1), mat_vec(&d2[k], a2))
        })
        .collect()
}

/// `div_Γ(κ grad_Γ f) = (1/√G) ∂_α(A^{αβ} ∂_β f)` with `A^{αβ} = κ √G g^{αβ}`.
///
/// Diagonal terms use the compact flux difference
/// `(A_{i+½}(f_{i+1} − f_i) − A_{i−½}(f_i − f_{i−1}))/h²` with averaged face
/// coefficients; end nodes of bounded axes use the expanded form
/// `A ∂²f + ∂A ∂f` with one-sided stencils. Cross terms differentiate along
/// the other axis and use the grid stencils directly.
pub fn laplace_beltrami(f: &[f64], kappa: &[f64], geo: &Geometry) -> Vec<f64> {
    let grid = &geo.grid;
    let (n1, n2) = grid.shape();
    let mut a = [[vec![0.0; geo.len()], vec![0.0; geo.len()]], [vec![0.0; geo.len()], vec![0.0; geo.len()]]];
    for k in 0..geo.len() {
        let gi = geo.metric[k].ginv_ab;
        let w = kappa[k] * geo.sqrt_g[k];
        for al in 0..2 {
            for be in 0..2 {
                a[al][be][k] = w * gi[al][be];
            }
        }
    }
    let [d1, d2] = grid.gradient(f);
    let cross1: Vec<f64> = (0..geo.len()).map(|k| a[0][1][k] * d2[k]).collect();
    let cross2: Vec<f64> = (0..geo.len()).map(|k| a[1][0][k] * d1[k]).collect();
    let mut out: Vec<f64> = grid
        .diff(&cross1, 0, 1)
        .iter()
        .zip(grid.diff(&cross2, 1, 1))
        .map(|(x, y)| x + y)
        .collect();
    let dd = [grid.diff(f, 0, 2), grid.diff(f, 1, 2)];
    let da = [grid.diff(&a[0][0], 0, 1), grid.diff(&a[1][1], 1, 1)];
    let df = [d1, d2];
    for ax in 0..2 {
        let axis = &grid.axes[ax];
        let m = axis.nodes();
        let h2 = axis.h() * axis.h();
        let coef = &a[ax][ax];
        for i in 0..n1 {
            for j in 0..n2 {
                let k = grid.idx(i, j);
                let s = if ax == 0 { i } else { j };
                let at = |s2: usize| if ax == 0 { grid.idx(s2, j) } else { grid.idx(i, s2) };
                let ends = !axis.periodic && (s == 0 || s + 1 == m);
                if ends {
                    out[k] += coef[k] * dd[ax][k] + da[ax][k] * df[ax][k];
                } else {
                    let (sm, sp) = if axis.periodic {
                        ((s + m - 1) % m, (s + 1) % m)
                    } else {
                        (s - 1, s + 1)
                    };
                    let (km, kp) = (at(sm), at(sp));
                    let ap = 0.5 * (coef[k] + coef[kp]);
                    let am = 0.5 * (coef[k] + coef[km]);
                    out[k] += (ap * (f[kp] - f[k]) - am * (f[k] - f[km])) / h2;
                }
            }
        }
    }
    for (k, o) in out.iter_mut().enumerate() {
        *o /= geo.sqrt_g[k];
    }
    out
}

/// Velocity-derived tensors shared by the stress, dissipation and force assemblies.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// `∇_Γ v`
    pub grad: Vec<Mat3>,
    /// `D_Γ(v) = P sym(∇_Γ v) P`
    pub stretch: Vec<Mat3>,
    /// `div_Γ v`
    pub div: Vec<f64>,
}

impl Kinematics {
    pub fn new(v: &[Vec3], geo: &Geometry) -> Self {
        let grad = vector_gradient(v, geo);
        let stretch: Vec<Mat3> = grad
            .par_iter()
            .zip(geo.metric.par_iter())
            .map(|(g, m)| {
                let sym = mat_scale(0.5, &mat_add(g, &transpose(g)));
                let d = mat_mul(&m.p, &mat_mul(&sym, &m.p));
                // exact symmetry
                mat_scale(0.5, &mat_add(&d, &transpose(&d)))
            })
            .collect();
        let div = grad.iter().map(trace).collect();
        Kinematics { grad, stretch, div }
    }

    /// `|D_Γ(v)|²`
    pub fn stretch_norm2(&self) -> Vec<f64> {
        self.stretch.iter().map(|d| ddot(d, d)).collect()
    }
}

/// `D_Γ(v)`.
pub fn stretching_tensor(v: &[Vec3], geo: &Geometry) -> Vec<Mat3> {
    Kinematics::new(v, geo).stretch
}

/// Viscous part `e1'(|D|²) D + e2'(|div v|²)(div v) P`.
pub fn viscous_stress(kin: &Kinematics, geo: &Geometry, cs: &ConstitutiveSet) -> Vec<Mat3> {
    (0..geo.len())
        .into_par_iter()
        .map(|k| {
            let d = &kin.stretch[k];
            let dv = kin.div[k];
            let a = cs.de(1, ddot(d, d));
            let b = cs.de(2, dv * dv) * dv;
            mat_add(&mat_scale(a, d), &mat_scale(b, &geo.metric[k].p))
        })
        .collect()
}

/// `S_Γ(v, σ) = e1'(|D|²) D + e2'(|div v|²)(div v) P − σ P`.
pub fn stress_tensor(
    v: &[Vec3],
    sigma: &[f64],
    geo: &Geometry,
    cs: &ConstitutiveSet,
) -> Vec<Mat3> {
    let kin = Kinematics::new(v, geo);
    stress_from_kinematics(&kin, sigma, geo, cs)
}

pub fn stress_from_kinematics(
    kin: &Kinematics,
    sigma: &[f64],
    geo: &Geometry,
    cs: &ConstitutiveSet,
) -> Vec<Mat3> {
    viscous_stress(kin, geo, cs)
        .into_iter()
        .enumerate()
        .map(|(k, s)| mat_add(&s, &mat_scale(-sigma[k], &geo.metric[k].p)))
        .collect()
}

/// `ẽ_D = e1'(|D|²)|D|² + e2'(|div v|²)|div v|²`.
pub fn dissipation_density(v: &[Vec3], geo: &Geometry, cs: &ConstitutiveSet) -> Vec<f64> {
    dissipation_from_kinematics(&Kinematics::new(v, geo), cs)
}

pub fn dissipation_from_kinematics(kin: &Kinematics, cs: &ConstitutiveSet) -> Vec<f64> {
    kin.stretch
        .iter()
        .zip(&kin.div)
        .map(|(d, &dv)| {
            let r1 = ddot(d, d);
            let r2 = dv * dv;
            cs.de(1, r1) * r1 + cs.de(2, r2) * r2
        })
        .collect()
}

/// `ǵ_αβ = ∂_α v̂ · g_β + g_α · ∂_β v̂` from sampled velocity values.
pub fn metric_rate_from_velocity(v: &[Vec3], geo: &Geometry) -> Vec<[[f64; 2]; 2]> {
    let [d1, d2] = geo.grid.gradient(v);
    (0..geo.len())
        .map(|k| {
            let m = &geo.metric[k];
            let dv = [d1[k], d2[k]];
            let mut r = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    r[a][b] = dot(dv[a], m.tangent(b)) + dot(m.tangent(a), dv[b]);
                }
            }
            r
        })
        .collect()
}

/// Time derivatives of the metric: `ǵ_αβ` and `d√G/dt` at every node.
#[derive(Debug, Clone)]
pub struct MetricRate {
    pub g_dot: Vec<[[f64; 2]; 2]>,
    pub sqrt_g_dot: Vec<f64>,
}

/// `ǵ_αβ` and `d√G/dt`, from analytic jets in analytic mode, otherwise by
/// central differences in time of the sampled geometry with step `spec.time_step`.
pub fn metric_rate(spec: &FlowMapSpec, geo: &Geometry) -> Result<MetricRate> {
    if geo.mode == DerivativeMode::Analytic && spec.has_analytic_jet() {
        let mut g_dot = Vec::with_capacity(geo.len());
        let mut sg_dot = Vec::with_capacity(geo.len());
        for k in 0..geo.len() {
            let (i, j) = geo.grid.ij(k);
            let jet = spec.map.jet(geo.grid.coords(i, j), geo.t).expect("analytic jet");
            let m = &geo.metric[k];
            let mut r = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    r[a][b] = dot(jet.x_at[a], m.tangent(b)) + dot(m.tangent(a), jet.x_at[b]);
                }
            }
            // d√G/dt = ½ √G g^{αβ} ǵ_αβ
            let mut tr = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    tr += m.ginv_ab[a][b] * r[a][b];
                }
            }
            g_dot.push(r);
            sg_dot.push(0.5 * geo.sqrt_g[k] * tr);
        }
        return Ok(MetricRate {
            g_dot,
            sqrt_g_dot: sg_dot,
        });
    }
    let d = spec.time_step;
    let at = |t: f64| Geometry::build(spec, &geo.grid, t, geo.mode);
    let (levels, w): (Vec<Geometry>, Vec<f64>) = if geo.t >= d {
        (vec![at(geo.t - d)?, at(geo.t + d)?], vec![-0.5 / d, 0.5 / d])
    } else {
        (
            vec![at(geo.t)?, at(geo.t + d)?, at(geo.t + 2.0 * d)?],
            vec![-1.5 / d, 2.0 / d, -0.5 / d],
        )
    };
    let mut g_dot = vec![[[0.0; 2]; 2]; geo.len()];
    let mut sg_dot = vec![0.0; geo.len()];
    for (lv, wk) in levels.iter().zip(&w) {
        for k in 0..geo.len() {
            for a in 0..2 {
                for b in 0..2 {
                    g_dot[k][a][b] += wk * lv.metric[k].g_ab[a][b];
                }
            }
            sg_dot[k] += wk * lv.sqrt_g[k];
        }
    }
    Ok(MetricRate {
        g_dot,
        sqrt_g_dot: sg_dot,
    })
}

/// `½ ǵ_αβ g^{αβ}`, the metric form of `div_Γ v`.
pub fn metric_divergence(g_dot: &[[[f64; 2]; 2]], geo: &Geometry) -> Vec<f64> {
    (0..geo.len())
        .map(|k| {
            let gi = geo.metric[k].ginv_ab;
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    s += gi[a][b] * g_dot[k][a][b];
                }
            }
            0.5 * s
        })
        .collect()
}

/// `¼ ǵ_αβ ǵ_ζη g^{αζ} g^{βη}`, the metric form of `|D_Γ(v)|²`.
pub fn metric_stretch_norm2(g_dot: &[[[f64; 2]; 2]], geo: &Geometry) -> Vec<f64> {
    (0..geo.len())
        .map(|k| {
            let gi = geo.metric[k].ginv_ab;
            let r = g_dot[k];
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    for z in 0..2 {
                        for e in 0..2 {
                            s += r[a][b] * r[z][e] * gi[a][z] * gi[b][e];
                        }
                    }
                }
            }
            0.25 * s
        })
        .collect()
}

/// `g^{αβ} ∂_α f̂ ∂_β f̂`, the metric form of `|grad_Γ f|²`.
pub fn metric_gradient_norm2(f: &[f64], geo: &Geometry) -> Vec<f64> {
    let [d1, d2] = geo.grid.gradient(f);
    (0..geo.len())
        .map(|k| {
            let gi = geo.metric[k].ginv_ab;
            gi[0][0] * d1[k] * d1[k] + 2.0 * gi[0][1] * d1[k] * d2[k] + gi[1][1] * d2[k] * d2[k]
        })
        .collect()
}

/// Which time derivative a [`material_derivative`] call returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDerivative {
    /// `D_t f = ∂_t f + (v·∇) f`, the derivative along trajectories.
    Material,
    /// `D_t^Γ f = ∂_t f + (v·∇_Γ) f = D_t f − (v·n)(n·∇) f`.
    Tangential,
    /// `D_t^N f = ∂_t f + (v·n)(n·∇) f = D_t f − (v·∇_Γ) f`.
    Normal,
}

/// Time derivative at level `levels.len() / 2` of uniformly spaced samples.
/// Three levels give the second-order central difference, five the fourth-order one.
pub fn time_derivative<T: FieldValue>(levels: &[Vec<T>], dt: f64) -> Result<Vec<T>> {
    if levels.len() < 3 {
        return Err(Error::InsufficientTimeLevels {
            needed: 3,
            got: levels.len(),
        });
    }
    let c = levels.len() / 2;
    let (idx, w): (Vec<usize>, Vec<f64>) = if levels.len() >= 5 && c >= 2 && c + 2 < levels.len() {
        (
            vec![c - 2, c - 1, c + 1, c + 2],
            vec![1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0],
        )
    } else {
        (vec![c - 1, c + 1], vec![-0.5, 0.5])
    };
    let n = levels[c].len();
    if levels.iter().any(|l| l.len() != n) {
        return Err(Error::ShapeMismatch("time levels differ in length".into()));
    }
    Ok((0..n)
        .map(|k| {
            let mut acc = T::zero();
            for (&i, &wi) in idx.iter().zip(&w) {
                acc.add_scaled(wi / dt, &levels[i][k]);
            }
            acc
        })
        .collect())
}

/// Material derivative of a scalar field given as Lagrangian samples `f̂(X, t_k)`.
///
/// `geo` is the geometry at the evaluation level and `normal_derivative` is
/// `(n·∇) f` there; without it the field is taken constant along normals.
pub fn material_derivative(
    levels: &[Vec<f64>],
    dt: f64,
    geo: &Geometry,
    variant: TimeDerivative,
    normal_derivative: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let dtf = time_derivative(levels, dt)?;
    let c = levels.len() / 2;
    Ok(match variant {
        TimeDerivative::Material => dtf,
        TimeDerivative::Tangential => match normal_derivative {
            None => dtf,
            Some(nd) => (0..geo.len())
                .map(|k| dtf[k] - dot(geo.velocity[k], geo.metric[k].n) * nd[k])
                .collect(),
        },
        TimeDerivative::Normal => {
            let g = surface_gradient(&levels[c], geo);
            (0..geo.len())
                .map(|k| dtf[k] - dot(geo.velocity[k], g[k]))
                .collect()
        }
    })
}

/// Material derivative of a vector field, component-wise as in [`material_derivative`].
pub fn material_derivative_vec(
    levels: &[Vec<Vec3>],
    dt: f64,
    geo: &Geometry,
    variant: TimeDerivative,
    normal_derivative: Option<&[Vec3]>,
) -> Result<Vec<Vec3>> {
    let dtf = time_derivative(levels, dt)?;
    let c = levels.len() / 2;
    Ok(match variant {
        TimeDerivative::Material => dtf,
        TimeDerivative::Tangential => match normal_derivative {
            None => dtf,
            Some(nd) => (0..geo.len())
                .map(|k| {
                    let vn = dot(geo.velocity[k], geo.metric[k].n);
                    crate::linalg::axpy(dtf[k], -vn, nd[k])
                })
                .collect(),
        },
        TimeDerivative::Normal => {
            let g = vector_gradient(&levels[c], geo);
            (0..geo.len())
                .map(|k| crate::linalg::sub(dtf[k], mat_vec(&g[k], geo.velocity[k])))
                .collect()
        }
    })
}

/// `f P_Γ` at every node.
pub fn scaled_projector(f: &[f64], geo: &Geometry) -> Vec<Mat3> {
    f.iter()
        .zip(&geo.metric)
        .map(|(&s, m)| mat_scale(s, &m.p))
        .collect()
}

/// Max over nodes of `|T n|` for a tensor field, a tangency audit.
pub fn max_normal_action(t: &[Mat3], geo: &Geometry) -> f64 {
    t.iter()
        .zip(&geo.metric)
        .map(|(m, g)| mat_vec(m, g.n).max_abs())
        .fold(0.0, f64::max)
}

/// Zero tensor field on the geometry grid.
pub fn zero_tensors(geo: &Geometry) -> Vec<Mat3> {
    vec![ZERO33; geo.len()]
}
