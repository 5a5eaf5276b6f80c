use std::f64::consts::PI;

use dgswe::cases::{
    ic_advection_sine, ic_geostrophic_height, ic_williamson_tc2, ic_williamson_tc6, williamson, CaseConfig, CaseId, DAY,
};
use dgswe::diagnostics::l2_norm;
use dgswe::mesh::{Mesh, PhysicalConstants};
use dgswe::models::{Axis, NodeGeom};
use dgswe::time::StepSize;
use proptest::prelude::*;

#[test]
fn advection_sine_examples() {
    assert!((ic_advection_sine(0.25, 0.25) - 1.0).abs() < 1e-15);
    for y in [0.0, 0.1, 0.37, 0.9] {
        assert_eq!(ic_advection_sine(0.0, y), 0.0);
    }
    let norm = l2_norm(ic_advection_sine, &Mesh::planar(8, 8, 1.0), 4);
    assert!((norm - 0.5).abs() < 1e-10);

    let cfg = CaseConfig::defaults(CaseId::AdvectionSine);
    let mut out = [0.0];
    // one full period returns to the initial condition
    assert!(cfg.exact(1.0, 0.3, 0.7, &mut out));
    assert!((out[0] - ic_advection_sine(0.3, 0.7)).abs() < 1e-12);
    cfg.exact(0.25, 0.3, 0.7, &mut out);
    assert!((out[0] - ic_advection_sine(0.05, 0.45)).abs() < 1e-12);
}

#[test]
fn geostrophic_adjustment_examples() {
    let cfg = CaseConfig::defaults(CaseId::GeostrophicAdjustment);
    let p = &cfg.params;
    let l = 1e7;
    assert_eq!(
        ic_geostrophic_height(l / 2.0, l / 2.0, l, 1000.0, 5.0, l / 20.0),
        1005.0
    );
    let corner = ic_geostrophic_height(0.0, 0.0, l, 1000.0, 5.0, l / 20.0);
    assert!((corner - (1000.0 + 5.0 * (-100.0f64).exp())).abs() < 1e-12);
    let mut out = [9.0; 3];
    cfg.initial(0.3 * l, 0.6 * l, &mut out);
    assert_eq!(&out[1..], &[0.0, 0.0]);
    cfg.initial(l / 2.0, l / 2.0, &mut out);
    assert_eq!(out[0], 1005.0);

    assert_eq!((cfg.nx, cfg.ny, cfg.nz, cfg.p, cfg.rk), (50, 50, 1, 3, 4));
    assert_eq!(cfg.step, StepSize::Fixed(100.0));
    assert_eq!(cfg.t_final, 36000.0);
    assert_eq!(
        (p.length, p.h0, p.h1, p.sigma, p.coriolis),
        (1e7, 1000.0, 5.0, 5e5, 1e-4)
    );
    assert!(!cfg.exact(0.0, 0.0, 0.0, &mut out));
}

#[test]
fn tc2_examples() {
    let c = PhysicalConstants::default();
    for lambda in [0.0, 1.0, 4.0] {
        for theta in [-1.2, 0.0, 0.3, 1.5] {
            assert_eq!(ic_williamson_tc2(lambda, theta, &c).2, 0.0);
        }
    }
    assert!(ic_williamson_tc2(0.0, PI / 2.0, &c).1.abs() < 1e-12);
    assert!(ic_williamson_tc2(0.0, -PI / 2.0, &c).1.abs() < 1e-12);

    // u0 = 2πa / 12 days ≈ 38.6 m/s, gh0 = 2.94e4
    let u0 = 2.0 * PI * 6.37122e6 / (12.0 * 86400.0);
    assert!((ic_williamson_tc2(0.0, 0.0, &c).1 - u0).abs() < 1e-12);
    assert!((ic_williamson_tc2(2.0, 0.0, &c).0 - 2.94e4 / 9.81).abs() < 1e-9);
    let theta: f64 = 0.7;
    let gh = 2.94e4 - (6.37122e6 * 7.292e-5 * u0 + 0.5 * u0 * u0) * theta.sin().powi(2);
    assert!((ic_williamson_tc2(1.0, theta, &c).0 - gh / 9.81).abs() < 1e-9);

    let cfg = CaseConfig::defaults(CaseId::WilliamsonTc2);
    assert_eq!((cfg.rk, cfg.t_final), (4, 2.0 * DAY));
    assert_eq!(cfg.step, StepSize::Courant(0.05));
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    assert!(cfg.exact(2.0 * DAY, 0.4, -0.2, &mut a));
    cfg.initial(0.4, -0.2, &mut b);
    assert_eq!(a, b);
}

#[test]
fn tc2_is_in_geostrophic_balance() {
    let cfg = CaseConfig::defaults(CaseId::WilliamsonTc2);
    let model = cfg.model();
    let state = |l: f64, t: f64| {
        let mut u = [0.0; 3];
        cfg.initial(l, t, &mut u);
        u
    };
    let flux = |l: f64, t: f64, axis: Axis| {
        let mut f = [0.0; 3];
        model
            .normal_flux(&state(l, t), NodeGeom::at_latitude(t), axis, &mut f)
            .unwrap();
        f
    };
    let d = 1e-5;
    for &theta in &[-1.3, -0.6, -0.1, 0.2, 0.9, 1.4] {
        for &lambda in &[0.3, 2.0, 5.5] {
            let mut s = [0.0; 3];
            model
                .source(&state(lambda, theta), NodeGeom::at_latitude(theta), &mut s)
                .unwrap();
            let (fp, fm) = (flux(lambda + d, theta, Axis::X), flux(lambda - d, theta, Axis::X));
            let (gp, gm) = (flux(lambda, theta + d, Axis::Y), flux(lambda, theta - d, Axis::Y));
            let scale = s.iter().fold(1e-12f64, |m, v| m.max(v.abs()));
            for v in 0..3 {
                let div = (fp[v] - fm[v]) / (2.0 * d) + (gp[v] - gm[v]) / (2.0 * d);
                let res = s[v] - div;
                assert!(res.abs() < 1e-6 * scale, "θ={theta} var {v}: residual {res} vs {scale}");
            }
        }
    }
}

#[test]
fn tc6_examples() {
    let c = PhysicalConstants::default();
    let h0 = williamson::TC6_H0;
    let mut min_h = f64::INFINITY;
    for j in 0..41 {
        let theta = -PI / 2.0 + PI * j as f64 / 40.0;
        for i in 0..64 {
            let lambda = 2.0 * PI * i as f64 / 64.0;
            let (h, _, v) = ic_williamson_tc6(lambda, theta, &c, h0);
            let (h4, _, _) = ic_williamson_tc6(lambda + PI / 2.0, theta, &c, h0);
            assert!(
                (h - h4).abs() <= 1e-12 * h,
                "h not 4-fold periodic at ({lambda}, {theta})"
            );
            let (_, _, v8) = ic_williamson_tc6(lambda + PI / 4.0, theta, &c, h0);
            assert!((v + v8).abs() <= 1e-9 * (1.0 + v.abs()), "v at ({lambda}, {theta})");
            min_h = min_h.min(h);
        }
    }
    assert!(min_h > 0.0);
    // every λ- and θ-dependent term carries a cos θ factor
    for lambda in [0.0, 1.3, 4.0] {
        assert!((ic_williamson_tc6(lambda, PI / 2.0, &c, h0).0 - h0).abs() < 1e-9);
    }

    let cfg = CaseConfig::defaults(CaseId::WilliamsonTc6);
    assert_eq!((cfg.nx, cfg.ny, cfg.p, cfg.rk), (40, 20, 3, 4));
    assert_eq!(cfg.step, StepSize::Fixed(4.0));
    assert_eq!(williamson::TC6_WAVENUMBER, 4);
    assert_eq!((williamson::TC6_OMEGA, williamson::TC6_K), (7.848e-6, 7.848e-6));
}

#[test]
fn case_ids_parse() {
    for c in CaseId::ALL {
        assert_eq!(c.name().parse::<CaseId>().unwrap(), c);
        assert_eq!(c.to_string(), c.name());
        assert_eq!(CaseConfig::defaults(c).mesh().is_sphere(), c.is_sphere());
    }
    assert!("williamson_tc5".parse::<CaseId>().is_err());
}

#[test]
fn models_match_cases() {
    for c in CaseId::ALL {
        let cfg = CaseConfig::defaults(c);
        let m = cfg.model();
        assert_eq!(m.n_vars(), cfg.n_vars());
        let mut u = vec![0.0; cfg.n_vars()];
        cfg.initial(0.5 * cfg.mesh().lx, 0.3, &mut u);
        assert!(m.max_speed(&u, NodeGeom::at_latitude(0.3)).unwrap() > 0.0);
    }
}

proptest! {
    #[test]
    fn advection_exact_solution_is_periodic(x in 0.0f64..1.0, y in 0.0f64..1.0, t in 0.0f64..5.0) {
        let cfg = CaseConfig::defaults(CaseId::AdvectionSine);
        let (mut a, mut b) = ([0.0], [0.0]);
        cfg.exact(t, x, y, &mut a);
        cfg.exact(t + 1.0, x, y, &mut b);
        prop_assert!((a[0] - b[0]).abs() < 1e-9);
    }

    #[test]
    fn tc6_height_is_positive(lambda in 0.0f64..(2.0 * PI), theta in (-PI / 2.0)..(PI / 2.0)) {
        let (h, _, _) = ic_williamson_tc6(lambda, theta, &PhysicalConstants::default(), williamson::TC6_H0);
        prop_assert!(h > 0.0);
    }
}
