use std::f64::consts::PI;

use dgswe::basis::{gauss_legendre, mass_matrix_sphere, project_initial, Vander};
use dgswe::cases::{ic_advection_sine, CaseConfig, CaseId};
use dgswe::dg::DgOperator;
use dgswe::diagnostics::{
    convergence_rate, convergence_table, export_field, l2_error, l2_norm, mass_integral, read_convergence_csv,
    read_dump, sample, write_convergence_csv, DumpHeader,
};
use dgswe::mesh::Mesh;
use proptest::prelude::*;

fn cubic(x: f64, y: f64) -> f64 {
    0.3 + x - 2.0 * x * y + 0.5 * y * y * y - x * x * y
}

#[test]
fn l2_error_examples() {
    let mesh = Mesh::planar(6, 5, 1.0);
    let s = project_initial(|x, y, o| o[0] = cubic(x, y), &mesh, 3, 1, 1).unwrap();
    assert!(l2_error(&s, 0, cubic, &mesh, 3).unwrap() < 1e-12);

    let zero = project_initial(|_, _, o| o[0] = 0.0, &mesh, 2, 1, 1).unwrap();
    let e = l2_error(&zero, 0, ic_advection_sine, &Mesh::planar(6, 5, 1.0), 2).unwrap();
    assert!((e - 0.5).abs() < 1e-6, "{e}");
    assert!((l2_norm(ic_advection_sine, &mesh, 2) - e).abs() < 1e-15);

    // cos θ metric: ∫ 1 over the sphere is 4π
    let sphere = Mesh::latlon(16, 8, 1.0);
    let one = project_initial(|_, _, o| o[0] = 0.0, &sphere, 1, 1, 1).unwrap();
    let e = l2_error(&one, 0, |_, _| 1.0, &sphere, 1).unwrap();
    assert!((e * e - 4.0 * PI).abs() < 1e-3, "{}", e * e);
}

#[test]
fn l2_error_is_symmetric_for_representable_references() {
    let mesh = Mesh::planar(4, 4, 1.0);
    let f = |x: f64, y: f64| x * y - 0.2;
    let g = |x: f64, y: f64| 1.0 - x + 0.4 * y;
    let sf = project_initial(|x, y, o| o[0] = f(x, y), &mesh, 2, 1, 1).unwrap();
    let sg = project_initial(|x, y, o| o[0] = g(x, y), &mesh, 2, 1, 1).unwrap();
    let a = l2_error(&sf, 0, g, &mesh, 2).unwrap();
    let b = l2_error(&sg, 0, f, &mesh, 2).unwrap();
    assert!((a - b).abs() < 1e-13 * a);
    assert!(a > 0.1);
}

#[test]
fn convergence_rate_examples() {
    assert!((convergence_rate(1e-2, 0.1, 1e-4, 0.01).unwrap() - 2.0).abs() < 1e-12);
    let r = convergence_rate(1.666e-5, 1.0 / 40.0, 2.084e-6, 1.0 / 80.0).unwrap();
    assert!((r - 2.99).abs() < 0.01, "{r}");
    assert_eq!(convergence_rate(7e-3, 0.2, 7e-3, 0.1).unwrap(), 0.0);
    for (e1, h1, e2, h2) in [
        (0.0, 0.1, 1.0, 0.05),
        (1.0, -0.1, 1.0, 0.05),
        (1.0, 0.1, -1.0, 0.05),
        (1.0, 0.1, 0.5, 0.1),
    ] {
        assert!(convergence_rate(e1, h1, e2, h2).is_err());
    }
}

#[test]
fn mass_integral_examples() {
    let planar = CaseConfig::defaults(CaseId::AdvectionSine);
    let op = DgOperator::new(Mesh::planar(5, 7, 1.0), 2, 1, planar.model()).unwrap();
    let s = project_initial(|_, _, o| o[0] = 1.0, op.mesh(), 2, 1, 1).unwrap();
    let m = mass_integral(&s, 0, op.mesh(), op.vander().nphi, |j| &op.mass_matrix(j).m);
    assert!((m - 1.0).abs() < 1e-13);

    let sphere = CaseConfig::defaults(CaseId::WilliamsonTc6);
    let op = DgOperator::new(sphere.mesh(), 3, 1, sphere.model()).unwrap();
    let s = project_initial(|_, _, o| o.copy_from_slice(&[1.0, 0.0, 0.0]), op.mesh(), 3, 3, 1).unwrap();
    let m = mass_integral(&s, 0, op.mesh(), op.vander().nphi, |j| &op.mass_matrix(j).m);
    // the p+1 mass rule is not exact in cos θ; the element areas still sum to 4π
    let exact_rule = Vander::new(3, gauss_legendre(12)).unwrap();
    let mesh = sphere.mesh();
    let det = mesh.metrics().determ;
    let mats: Vec<_> = (0..mesh.ny)
        .map(|j| mass_matrix_sphere(&exact_rule, det, mesh.y_edge(j), mesh.y_edge(j + 1)).unwrap())
        .collect();
    let m_exact = mass_integral(&s, 0, &mesh, exact_rule.nphi, |j| &mats[j].m);
    assert!((m_exact - 4.0 * PI).abs() < 1e-10, "{m_exact}");
    assert!((m - 4.0 * PI).abs() < 1e-4 * 4.0 * PI, "{m}");
}

#[test]
fn export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = Mesh::planar(4, 3, 2.0);
    let vander = Vander::new(3, gauss_legendre(4)).unwrap();
    let f = |x: f64, y: f64| cubic(0.5 * x, 0.5 * y);
    let s = project_initial(|x, y, o| o.copy_from_slice(&[f(x, y), 2.5]), &mesh, 3, 2, 1).unwrap();
    let path = dir.path().join("dump.txt");
    let header = DumpHeader {
        case: "poly",
        time: 1.5,
        vars: &["f", "c"],
    };
    export_field(&s, &mesh, &vander, &header, &path, [7, 5]).unwrap();
    let d = read_dump(&path).unwrap();
    assert_eq!(d.header, "# case=poly t=1.5 vars=f,c nx=7 ny=5");
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 7 * 5 + 1);
    assert_eq!(d.rows.len(), 35);
    for (n, row) in d.rows.iter().enumerate() {
        let (a, b) = (n % 7, n / 7);
        let (x, y) = ((a as f64 + 0.5) * 2.0 / 7.0, (b as f64 + 0.5) * 2.0 / 5.0);
        assert!((row[0] - x).abs() < 1e-15 && (row[1] - y).abs() < 1e-15);
        assert!((row[2] - f(x, y)).abs() < 1e-12);
        assert!((row[3] - 2.5).abs() < 1e-12);
        assert_eq!(row[2], sample(&s, &mesh, &vander, 0, x, y));
    }
}

#[test]
fn export_errors_carry_the_path() {
    let mesh = Mesh::planar(2, 2, 1.0);
    let vander = Vander::new(1, gauss_legendre(2)).unwrap();
    let s = project_initial(|_, _, o| o[0] = 1.0, &mesh, 1, 1, 1).unwrap();
    let path = std::path::Path::new("/nonexistent-dir/x/dump.txt");
    let header = DumpHeader {
        case: "c",
        time: 0.0,
        vars: &["u"],
    };
    let err = export_field(&s, &mesh, &vander, &header, path, [2, 2]).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x/dump.txt"), "{err}");
    assert!(read_dump(path).is_err());
}

#[test]
fn tc6_initial_height_has_four_equatorial_maxima() {
    let cfg = CaseConfig::defaults(CaseId::WilliamsonTc6);
    let mesh = cfg.mesh();
    let vander = Vander::new(cfg.p, gauss_legendre(cfg.p + 1)).unwrap();
    let s = project_initial(|x, y, o| cfg.initial(x, y, o), &mesh, cfg.p, 3, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tc6.txt");
    let header = DumpHeader {
        case: "williamson_tc6",
        time: 0.0,
        vars: &["h", "hu", "hv"],
    };
    let (nx, ny) = (240, 41);
    export_field(&s, &mesh, &vander, &header, &path, [nx, ny]).unwrap();
    let d = read_dump(&path).unwrap();
    let row = &d.rows[(ny / 2) * nx..(ny / 2 + 1) * nx];
    assert!(row.iter().all(|r| r[1].abs() < 1e-9));
    let h: Vec<f64> = row.iter().map(|r| r[2]).collect();
    // element jumps add tiny local bumps, so count crossings of the mean instead
    let mean = h.iter().sum::<f64>() / nx as f64;
    let maxima = (0..nx).filter(|&i| h[(i + nx - 1) % nx] < mean && h[i] >= mean).count();
    assert_eq!(maxima, 4);
}

#[test]
fn convergence_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = convergence_table(&[(400, 0.05, 3.1e-3), (1600, 0.025, 4.4e-4), (6400, 0.0125, 5.5e-5)]).unwrap();
    assert_eq!(t[0].rate, None);
    assert!((t[2].rate.unwrap() - (4.4e-4f64 / 5.5e-5).log2()).abs() < 1e-12);
    let path = dir.path().join("c.csv");
    write_convergence_csv(&path, &t).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("K,h,epsilon,rate\n400,0.05,0.0031,\n"), "{text}");
    assert_eq!(read_convergence_csv(&path).unwrap(), t);

    let single = convergence_table(&[(100, 0.1, 1e-2)]).unwrap();
    write_convergence_csv(&path, &single).unwrap();
    assert_eq!(read_convergence_csv(&path).unwrap(), single);
}

proptest! {
    #[test]
    fn rate_is_scale_invariant(e1 in 1e-12f64..1.0, e2 in 1e-12f64..1.0, k in 1e-6f64..1e6, h in 0.001f64..1.0) {
        let r = convergence_rate(e1, h, e2, h / 2.0).unwrap();
        let rk = convergence_rate(k * e1, h, k * e2, h / 2.0).unwrap();
        prop_assert!((r - rk).abs() < 1e-9 * (1.0 + r.abs()));
    }

    #[test]
    fn l2_error_vanishes_only_for_equal_fields(c in -5.0f64..5.0, d in -5.0f64..5.0) {
        let mesh = Mesh::planar(3, 3, 1.0);
        let s = project_initial(|x, y, o| o[0] = c * x + d * y, &mesh, 1, 1, 1).unwrap();
        prop_assert!(l2_error(&s, 0, |x, y| c * x + d * y, &mesh, 1).unwrap() < 1e-12);
        let e = l2_error(&s, 0, |x, y| c * x + d * y + 0.25, &mesh, 1).unwrap();
        prop_assert!((e - 0.25).abs() < 1e-12);
    }
}
