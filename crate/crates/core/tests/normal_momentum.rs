//! A fluid at rest with constant tension on a fixed sphere cap. The tangential
//! momentum equation holds, but the normal one leaves `σ H n` unbalanced, so
//! the normal equation cannot be met by the tangential unknowns alone.

use surfcalc_core::constitutive::{ConstitutiveSet, Pressure};
use surfcalc_core::geometry::{DerivativeMode, Geometry, SurfaceConfig};
use surfcalc_core::grid::StencilOrder;
use surfcalc_core::linalg::{dot, norm};
use surfcalc_core::solver::{residual_generalized_system, FluidState, Sources};

fn residual_at(n: usize, sigma: f64) -> (f64, f64) {
    let cfg: SurfaceConfig = serde_json::from_str(r#"{"name": "sphere-cap", "radius": 1.0}"#).unwrap();
    let spec = cfg.build().unwrap();
    let grid = spec.domain.grid(n, n, StencilOrder::Second).unwrap();
    let geo = Geometry::build(&spec, &grid, 0.0, DerivativeMode::Analytic).unwrap();
    let mut st = FluidState::rest(geo.len(), 1.0);
    st.sigma = vec![sigma; geo.len()];
    let states = vec![st.clone(), st.clone(), st];
    let cs = ConstitutiveSet::inviscid(Pressure::Zero);
    let r = residual_generalized_system(&states, &geo, 0.01, &cs, &Sources::zero(geo.len())).unwrap();

    let (mut normal_err, mut tangential) = (0.0_f64, 0.0_f64);
    for k in 0..geo.len() {
        let (i, j) = grid.ij(k);
        if grid.is_boundary(i, j) {
            continue;
        }
        let m = &geo.metric[k];
        let rn = dot(r.momentum[k], m.n);
        // σ H with H = -2 on the unit sphere
        normal_err = normal_err.max((rn + 2.0 * sigma).abs());
        let t = [
            r.momentum[k][0] - rn * m.n[0],
            r.momentum[k][1] - rn * m.n[1],
            r.momentum[k][2] - rn * m.n[2],
        ];
        tangential = tangential.max(norm(t));
    }
    (normal_err, tangential)
}

#[test]
fn rest_state_leaves_the_normal_tension_force() {
    let sigma = 0.7;
    let (coarse_n, coarse_t) = residual_at(32, sigma);
    let (fine_n, fine_t) = residual_at(64, sigma);
    assert!(fine_n < 1e-2 * sigma, "normal residual off 2σ by {fine_n}");
    assert!(fine_t < 1e-2 * sigma, "tangential residual {fine_t}");
    // both discretization errors fall at second order
    assert!((coarse_n / fine_n).log2() > 1.9);
    assert!((coarse_t / fine_t).log2() > 1.9);
}

#[test]
fn zero_tension_rest_state_is_an_exact_solution() {
    let (n, t) = residual_at(32, 0.0);
    assert!(n < 1e-14 && t < 1e-14);
}
