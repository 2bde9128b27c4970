use proptest::prelude::*;
use surfcalc_core::constitutive::ConstitutiveSet;
use surfcalc_core::geometry::{eval_conormal, eval_metric, DerivativeMode, Geometry, SurfaceConfig};
use surfcalc_core::grid::StencilOrder;
use surfcalc_core::linalg::{cross, dot, mat_mul, mat_vec, norm, Vec3};
use surfcalc_core::quadrature::{surface_integral, QuadratureRule};
use surfcalc_core::report::{assign_orders, rows_from_csv, rows_to_csv, summarize, CheckRow, Order};
use surfcalc_core::scenario::{Scenario, Tolerance};
use surfcalc_core::solver::entropy_production;
use surfcalc_core::solver::manufactured::PolarProfile;
use surfcalc_core::variational::density_transport;

fn surfaces() -> Vec<SurfaceConfig> {
    SurfaceConfig::defaults()
}

fn geometry(cfg: &SurfaceConfig, n: usize, t: f64) -> Geometry {
    let spec = cfg.build().unwrap();
    let grid = spec.domain.grid(n, n, StencilOrder::Second).unwrap();
    Geometry::build(&spec, &grid, t, DerivativeMode::Analytic).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_invariants(which in 0usize..5, u in 0.0f64..1.0, w in 0.0f64..1.0, t in 0.0f64..0.5) {
        let cfg = &surfaces()[which % surfaces().len()];
        let spec = cfg.build().unwrap();
        let b = spec.domain.bounds;
        let x = [b[0][0] + u * (b[0][1] - b[0][0]), b[1][0] + w * (b[1][1] - b[1][0])];
        let m = eval_metric(&spec, x, t).unwrap();
        let pp = mat_mul(&m.p, &m.p);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((pp[i][j] - m.p[i][j]).abs() < 1e-12);
            }
        }
        prop_assert!(norm(mat_vec(&m.p, m.n)) < 1e-12);
        prop_assert!((m.p[0][0] + m.p[1][1] + m.p[2][2] - 2.0).abs() < 1e-12);
        prop_assert!((norm(m.n) - 1.0).abs() < 1e-12);
        let c = cross(m.g1, m.g2);
        prop_assert!((dot(c, c) - m.big_g).abs() <= 1e-12 * m.big_g.max(1.0));
    }

    #[test]
    fn conormals_are_unit_and_tangent(which in 0usize..5, k in 0usize..200, t in 0.0f64..0.5) {
        let cfg = &surfaces()[which % surfaces().len()];
        let spec = cfg.build().unwrap();
        let grid = spec.domain.grid(12, 12, StencilOrder::Second).unwrap();
        let boundary: Vec<(usize, usize)> = (0..grid.len())
            .map(|k| grid.ij(k))
            .filter(|&(i, j)| !spec.domain.segments_at(&grid, i, j).is_empty())
            .collect();
        prop_assume!(!boundary.is_empty());
        let node = boundary[k % boundary.len()];
        for seg in spec.domain.segments_at(&grid, node.0, node.1) {
            let nu = eval_conormal(&spec, &grid, node, Some(seg.id), t).unwrap();
            let m = eval_metric(&spec, grid.coords(node.0, node.1), t).unwrap();
            prop_assert!((norm(nu) - 1.0).abs() < 1e-12);
            prop_assert!(dot(nu, m.n).abs() < 1e-12);
        }
    }

    #[test]
    fn transported_density_keeps_its_mass(which in 0usize..5, t in 0.05f64..0.5, amp in 0.0f64..0.5, seed in 0u64..1000) {
        let cfg = &surfaces()[which % surfaces().len()];
        let g0 = geometry(cfg, 16, 0.0);
        let g1 = geometry(cfg, 16, t);
        let rule = QuadratureRule::trapezoid(&g0.grid);
        let rho0: Vec<f64> = (0..g0.len())
            .map(|k| 1.0 + amp * ((k as u64 * 2654435761 + seed) % 1000) as f64 / 1000.0)
            .collect();
        let rho = density_transport(&rho0, &g0, &g1).unwrap();
        let m0 = surface_integral(&rho0, &g0, &rule);
        let m1 = surface_integral(&rho, &g1, &rule);
        prop_assert!((m1 - m0).abs() <= 1e-12 * m0.abs());
    }

    #[test]
    fn check_rows_round_trip_through_csv(vals in prop::collection::vec((1e-6f64..1.0, -1e6f64..1e6, -1e6f64..1e6), 1..12)) {
        let mut rows: Vec<CheckRow> = vals
            .iter()
            .enumerate()
            .map(|(i, &(h, l, r))| CheckRow::new(if i % 2 == 0 { "a" } else { "b" }, h, 0.5 * h, l, r))
            .collect();
        assign_orders(&mut rows);
        let back = rows_from_csv(&rows_to_csv(&rows)).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn orders_recover_the_power_law(p in 0.5f64..4.0, c in 0.01f64..10.0, h0 in 0.05f64..0.5) {
        let mut rows: Vec<CheckRow> = (0..4)
            .map(|k| {
                let h = h0 / 2f64.powi(k);
                CheckRow::residual("r", h, 0.0, c * h.powf(p), 1.0)
            })
            .collect();
        assign_orders(&mut rows);
        for r in &rows[1..] {
            match r.observed_order {
                Order::Value(q) => prop_assert!((q - p).abs() < 1e-9),
                Order::Exact => prop_assert!(r.rel_residual <= 1e-11),
                Order::None => prop_assert!(false, "missing order"),
            }
        }
        let s = &summarize(&rows)[0];
        prop_assert_eq!(s.resolutions, 4);
    }

    #[test]
    fn polar_profile_derivatives(coeffs in prop::collection::vec(-1.0f64..1.0, 1..6), s in 0.2f64..1.3) {
        let f = PolarProfile::new(&coeffs);
        let (v, d1, d2) = f.eval(s);
        let e = 1e-4;
        let (vp, d1p, _) = f.eval(s + e);
        let (vm, d1m, _) = f.eval(s - e);
        prop_assert!(((vp - vm) / (2.0 * e) - d1).abs() < 1e-6 * (1.0 + d1.abs()));
        prop_assert!(((d1p - d1m) / (2.0 * e) - d2).abs() < 1e-6 * (1.0 + d2.abs()));
        prop_assert!(((vp - 2.0 * v + vm) / (e * e) - d2).abs() < 1e-4 * (1.0 + d2.abs()));
    }

    #[test]
    fn tolerance_merge_prefers_the_override(
        a in prop::option::of(0.0f64..1.0), b in prop::option::of(0.0f64..4.0),
        c in prop::option::of(0.0f64..1.0), d in prop::option::of(0.0f64..4.0),
    ) {
        let base = Tolerance { max_rel: a, min_order: b };
        let over = Tolerance { max_rel: c, min_order: d };
        let m = base.merged(Some(&over));
        prop_assert_eq!(m.max_rel, c.or(a));
        prop_assert_eq!(m.min_order, d.or(b));
        prop_assert_eq!(base.merged(None), base);
    }

    #[test]
    fn flat_disk_area(r0 in 0.01f64..0.5, r1 in 0.6f64..2.0, n in 4usize..40) {
        let cfg: SurfaceConfig = serde_json::from_str(&format!(
            r#"{{"name": "flat-disk", "inner_radius": {r0}, "radius": {r1}}}"#
        )).unwrap();
        let geo = geometry(&cfg, n, 0.0);
        let rule = QuadratureRule::trapezoid(&geo.grid);
        let area = surface_integral(&vec![1.0; geo.len()], &geo, &rule);
        let exact = std::f64::consts::PI * (r1 * r1 - r0 * r0);
        prop_assert!((area - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn entropy_production_is_nonnegative(
        set in 0usize..16, modes in prop::collection::vec(-1.0f64..1.0, 6), tamp in 0.0f64..0.5,
    ) {
        let catalog: Vec<ConstitutiveSet> = ConstitutiveSet::catalog()
            .into_iter()
            .filter(|c| c.audit(5.0, [0.2, 3.0], 41).dissipative)
            .collect();
        let cs = &catalog[set % catalog.len()];
        let cfg: SurfaceConfig = serde_json::from_str(r#"{"name": "sphere-cap"}"#).unwrap();
        let geo = geometry(&cfg, 12, 0.0);
        let v: Vec<Vec3> = geo.pos.iter().zip(&geo.metric).map(|(x, m)| {
            let raw = [
                modes[0] * x[1] + modes[1] * x[2] * x[2],
                modes[2] * x[0] * x[2] + modes[3],
                modes[4] * x[0] + modes[5] * x[1] * x[0],
            ];
            mat_vec(&m.p, raw)
        }).collect();
        let theta: Vec<f64> = geo.pos.iter().map(|x| 1.0 + tamp * x[0] * x[1]).collect();
        let prod = entropy_production(&v, &theta, &geo, cs).unwrap();
        prop_assert!(prod.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn scenarios_round_trip_through_json(which in 0usize..5, t in 0.0f64..0.5, r in 0.01f64..0.2) {
        let surface = serde_json::to_string(&surfaces()[which % surfaces().len()]).unwrap();
        let sc = Scenario::from_json(&format!(
            r#"{{"name": "rt", "surface": {surface}, "resolutions": [8, 16, 32],
                "time": {{"t": {t}}}, "dt_policy": {{"dt_ratio": {r}}},
                "suites": ["geometry", "divergence"], "tolerances": {{"geometry": {{"max_rel": {r}}}}}}}"#
        )).unwrap();
        let back = Scenario::from_json(&serde_json::to_string(&sc).unwrap()).unwrap();
        prop_assert_eq!(back, sc);
    }
}
