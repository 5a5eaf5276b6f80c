use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dgswe::cases::{CaseConfig, CaseId};
use dgswe::sim::{AlphaChoice, Simulation};
use dgswe_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dgswe_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn small(case: DgsweCase) -> DgsweConfig {
    let mut cfg = std::mem::MaybeUninit::uninit();
    assert_eq!(unsafe { dgswe_config_default(case, cfg.as_mut_ptr()) }, DgsweStatus::Ok);
    let mut cfg = unsafe { cfg.assume_init() };
    cfg.nx = 8;
    cfg.ny = 8;
    cfg
}

fn new_solver(cfg: &DgsweConfig) -> *mut DgsweSolver {
    let mut s = ptr::null_mut();
    let st = unsafe { dgswe_solver_new(cfg, &mut s) };
    assert_eq!(st, DgsweStatus::Ok, "{}", last_error());
    assert!(!s.is_null());
    s
}

#[test]
fn defaults_mirror_the_core_defaults() {
    let c = small(DgsweCase::WilliamsonTc6);
    let core = CaseConfig::defaults(CaseId::WilliamsonTc6);
    assert_eq!(c.p as usize, core.p);
    assert_eq!(c.dt, 4.0);
    assert_eq!(c.courant, 0.0);
    assert_eq!(c.t_final, core.t_final);
}

#[test]
fn stepping_matches_the_rust_api_bitwise() {
    let cfg = small(DgsweCase::AdvectionSine);
    let s = new_solver(&cfg);
    assert_eq!(unsafe { dgswe_solver_step(s, 5) }, DgsweStatus::Ok);

    let mut core = CaseConfig::defaults(CaseId::AdvectionSine);
    core.nx = 8;
    core.ny = 8;
    let mut sim = Simulation::new(core, AlphaChoice::Local).unwrap();
    for _ in 0..5 {
        sim.step().unwrap();
    }
    let (mut t, mut n, mut dt) = (0.0, 0u64, 0.0);
    unsafe {
        assert_eq!(dgswe_solver_time(s, &mut t), DgsweStatus::Ok);
        assert_eq!(dgswe_solver_steps(s, &mut n), DgsweStatus::Ok);
        assert_eq!(dgswe_solver_dt(s, &mut dt), DgsweStatus::Ok);
    }
    assert_eq!((t, n, dt), (sim.time(), 5, sim.dt()));
    for &(x, y) in &[(0.1, 0.2), (0.77, 0.31), (0.5, 0.5)] {
        let mut v = 0.0;
        assert_eq!(unsafe { dgswe_solver_sample(s, 0, x, y, &mut v) }, DgsweStatus::Ok);
        assert_eq!(v, sim.sample(0, x, y));
    }
    let mut m = 0.0;
    assert_eq!(unsafe { dgswe_solver_mass(s, 0, &mut m) }, DgsweStatus::Ok);
    assert_eq!(m, sim.mass(0));
    unsafe { dgswe_solver_free(s) };
}

#[test]
fn advance_lands_on_target_and_reports_error() {
    let mut cfg = small(DgsweCase::AdvectionSine);
    cfg.t_final = 1.0;
    let s = new_solver(&cfg);
    assert_eq!(unsafe { dgswe_solver_advance_to(s, 0.3) }, DgsweStatus::Ok);
    let mut t = 0.0;
    unsafe { dgswe_solver_time(s, &mut t) };
    assert_eq!(t, 0.3);
    let mut e = 0.0;
    assert_eq!(unsafe { dgswe_solver_l2_error(s, 0, &mut e) }, DgsweStatus::Ok);
    assert!(e > 0.0 && e < 1e-2);
    assert_eq!(unsafe { dgswe_solver_advance_to(s, 0.1) }, DgsweStatus::InvalidArgument);
    assert!(last_error().contains("before"));
    unsafe { dgswe_solver_free(s) };
}

#[test]
fn null_and_range_errors() {
    let cfg = small(DgsweCase::GeostrophicAdjustment);
    unsafe {
        assert_eq!(dgswe_solver_new(ptr::null(), ptr::null_mut()), DgsweStatus::NullPointer);
        assert_eq!(dgswe_solver_step(ptr::null_mut(), 1), DgsweStatus::NullPointer);
        assert_eq!(
            dgswe_config_default(DgsweCase::WilliamsonTc2, ptr::null_mut()),
            DgsweStatus::NullPointer
        );
        dgswe_solver_free(ptr::null_mut());
    }
    assert!(last_error().contains("null"));
    let s = new_solver(&cfg);
    let mut nv = 0u32;
    let mut v = 0.0;
    unsafe {
        assert_eq!(dgswe_solver_n_vars(s, &mut nv), DgsweStatus::Ok);
        assert_eq!(nv, 3);
        assert_eq!(dgswe_solver_mass(s, 3, &mut v), DgsweStatus::InvalidArgument);
        assert_eq!(dgswe_solver_mass(s, 0, ptr::null_mut()), DgsweStatus::NullPointer);
        // the adjustment problem has no closed-form solution
        assert_eq!(dgswe_solver_l2_error(s, 0, &mut v), DgsweStatus::InvalidArgument);
        assert_eq!(dgswe_solver_export(s, ptr::null()), DgsweStatus::NullPointer);
        dgswe_solver_free(s);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = small(DgsweCase::AdvectionSine);
    cfg.dt = 0.01;
    cfg.courant = 0.1;
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dgswe_solver_new(&cfg, &mut s) }, DgsweStatus::InvalidArgument);
    assert!(s.is_null());
    cfg.courant = 0.0;
    cfg.p = 9;
    assert_eq!(unsafe { dgswe_solver_new(&cfg, &mut s) }, DgsweStatus::InvalidArgument);
    assert!(last_error().contains("degree"));
    cfg.p = 2;
    cfg.nx = 0;
    assert_eq!(unsafe { dgswe_solver_new(&cfg, &mut s) }, DgsweStatus::InvalidArgument);
}

#[test]
fn blow_up_reports_divergence() {
    let mut cfg = small(DgsweCase::WilliamsonTc2);
    cfg.p = 3;
    cfg.courant = 3.0;
    let s = new_solver(&cfg);
    assert_eq!(unsafe { dgswe_solver_step(s, 200) }, DgsweStatus::Diverged);
    assert!(!last_error().is_empty());
    unsafe { dgswe_solver_free(s) };
}

#[test]
fn export_writes_a_dump_and_reports_io_errors() {
    let dir = std::env::temp_dir().join(format!("dgswe_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = small(DgsweCase::WilliamsonTc6);
    let s = new_solver(&cfg);
    let path = dir.join("tc6.dat");
    let c = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { dgswe_solver_export(s, c.as_ptr()) }, DgsweStatus::Ok);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# case=williamson_tc6 t=0 vars=h,hu,hv"));
    assert_eq!(text.lines().count(), 1 + 32 * 32);
    let bad = CString::new(dir.join("missing/x.dat").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { dgswe_solver_export(s, bad.as_ptr()) }, DgsweStatus::Io);
    assert!(last_error().contains("missing"));
    unsafe { dgswe_solver_free(s) };
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/dgswe.h")).unwrap();
    for name in [
        "typedef struct DgsweSolver DgsweSolver;",
        "DGSWE_STATUS_OK = 0",
        "DGSWE_STATUS_DIVERGED = 3",
        "dgswe_solver_new(",
        "dgswe_solver_step(",
        "dgswe_solver_advance_to(",
        "dgswe_solver_export(",
        "dgswe_solver_free(",
        "dgswe_last_error(void)",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

fn deps_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>; `cargo test` refreshes the
    // archive here but does not always uplift it to <profile>/
    std::env::current_exe().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = deps_dir().join("libdgswe_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler on PATH; skipping");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("dgswe_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{:?} {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "t=0.25");
}
