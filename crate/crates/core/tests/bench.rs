use dgswe::basis::project_initial;
use dgswe::bench::{
    kernel_costs, loglog_slope, operational_intensity, read_kernel_csv, read_scaling_csv, scaling_sweep, time_kernels,
    working_set, write_kernel_csv, write_scaling_csv, Cost, SweepAxis, KERNEL_NAMES,
};
use dgswe::cases::{CaseConfig, CaseId};
use dgswe::dg::DgOperator;
use dgswe::field::Field;
use dgswe::sim::{AlphaChoice, Simulation};
use dgswe::time::{tableau, OdeSystem, RungeKutta};
use dgswe::Result;

fn small(p: usize, n: usize) -> CaseConfig {
    let mut cfg = CaseConfig::defaults(CaseId::GeostrophicAdjustment);
    cfg.p = p;
    cfg.nx = n;
    cfg.ny = n;
    cfg
}

#[test]
fn cost_conventions() {
    let c = Cost::matvec(16, 9);
    assert_eq!(c.flops, 2.0 * 16.0 * 9.0);
    assert_eq!(c.bytes, 8.0 * (16.0 * 9.0 + 9.0 + 16.0));
    let q = Cost::pointwise(7, 5);
    assert_eq!((q.flops, q.bytes), (7.0, 40.0));
    let s = (c + q).scaled(3.0);
    assert_eq!(s.flops, 3.0 * (288.0 + 7.0));
    assert_eq!(s.intensity(), s.flops / s.bytes);
}

#[test]
fn rusanov_kernel_cost_by_hand() {
    // 4 edges × 3 vars × 4 points, 7 flops on 5 values each, plus one α
    // read/write per edge
    let k2 = kernel_costs(&small(3, 8)).unwrap()[1];
    assert_eq!(k2.flops, 48.0 * 7.0 + 4.0);
    assert_eq!(k2.bytes, 8.0 * (48.0 * 5.0 + 4.0 * 2.0));
}

#[test]
fn intensity_is_per_element() {
    let a = operational_intensity(&small(3, 7)).unwrap();
    let mut cfg = small(3, 31);
    cfg.nz = 4;
    assert_eq!(a, operational_intensity(&cfg).unwrap());
}

#[test]
fn intensity_varies_weakly_with_p() {
    let oi: Vec<[f64; 3]> = (1..=4).map(|p| operational_intensity(&small(p, 10)).unwrap()).collect();
    for k in 0..3 {
        let v: Vec<f64> = oi.iter().map(|o| o[k]).collect();
        let (lo, hi) = v.iter().fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        println!("{}: {v:?}", KERNEL_NAMES[k]);
        assert!(lo > 0.0 && hi / lo < 2.0, "{}: {v:?}", KERNEL_NAMES[k]);
    }
}

#[test]
fn kernel_report_is_consistent() {
    let cfg = small(2, 24);
    let r = time_kernels(&cfg, AlphaChoice::Local, 10, 50, 1).unwrap();
    assert_eq!(r.warning, None);
    assert_eq!(r.threads, 1);
    assert_eq!(r.rows.len(), 3);
    let costs = kernel_costs(&cfg).unwrap();
    let elements = (24 * 24) as f64;
    for (k, row) in r.rows.iter().enumerate() {
        assert_eq!(row.kernel, KERNEL_NAMES[k]);
        assert_eq!(row.calls, 50 * 4);
        assert!(row.seconds > 0.0);
        assert_eq!(row.flops, costs[k].flops * elements * 200.0);
        assert_eq!(row.intensity, row.flops / row.bytes);
        assert!((row.gflops - row.flops / row.seconds / 1e9).abs() <= 1e-12 * row.gflops);
    }
    let sum = r.kernel_seconds();
    let glue = (r.total_seconds - sum) / r.total_seconds;
    println!(
        "total {:.4e} s, kernels {:.4e} s, glue {:.2}%",
        r.total_seconds,
        sum,
        100.0 * glue
    );
    assert!(sum <= r.total_seconds);
    assert!(glue < 0.05);
}

#[test]
fn short_runs_are_flagged() {
    let cfg = small(1, 6);
    assert!(time_kernels(&cfg, AlphaChoice::Local, 2, 50, 1)
        .unwrap()
        .warning
        .is_some());
    assert!(time_kernels(&cfg, AlphaChoice::Local, 10, 5, 1)
        .unwrap()
        .warning
        .is_some());
}

#[test]
fn rusanov_share_shrinks_with_degree() {
    let shares: Vec<f64> = (1..=4)
        .map(|p| {
            let r = time_kernels(&small(p, 16), AlphaChoice::Local, 10, 50, 1).unwrap();
            r.rows[1].seconds / r.kernel_seconds()
        })
        .collect();
    println!("kernel 2 shares {shares:?}");
    assert!(shares.windows(2).all(|w| w[1] < w[0]), "{shares:?}");
}

#[test]
fn timed_seconds_scale_with_steps() {
    let cfg = small(2, 20);
    let a = time_kernels(&cfg, AlphaChoice::Local, 10, 50, 1).unwrap();
    let b = time_kernels(&cfg, AlphaChoice::Local, 10, 100, 1).unwrap();
    let ratio = b.kernel_seconds() / a.kernel_seconds();
    println!("100/50 step time ratio {ratio:.3}");
    assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
}

/// The operator with an uninstrumented stage combination.
struct Plain(DgOperator);

impl OdeSystem for Plain {
    type State = Field;

    fn rhs(&mut self, _t: f64, u: &Field, out: &mut Field) -> Result<()> {
        self.0.rhs(u, out)
    }

    fn combine(&mut self, base: &Field, scale: f64, terms: &[(f64, &Field)], out: &mut Field) -> Result<()> {
        let live: Vec<_> = terms.iter().filter(|(c, _)| *c != 0.0).collect();
        for (d, o) in out.values_mut().iter_mut().enumerate() {
            if live.is_empty() {
                *o = base.values()[d];
                continue;
            }
            let mut acc = 0.0;
            for (c, f) in &live {
                acc += c * f.values()[d];
            }
            *o = base.values()[d] + scale * acc;
        }
        Ok(())
    }

    fn is_finite(&self, u: &Field) -> bool {
        u.values().iter().all(|v| v.is_finite())
    }
}

#[test]
fn timing_does_not_change_numerics() {
    let cfg = small(3, 12);
    let mut sim = Simulation::new(cfg.clone(), AlphaChoice::Local).unwrap();
    for n in 0..20 {
        if n == 7 {
            sim.operator_mut().reset_kernel_times();
        }
        sim.step().unwrap();
    }

    let mut plain = Plain(DgOperator::new(cfg.mesh(), cfg.p, cfg.nz, cfg.model()).unwrap());
    let mut u = project_initial(|x, y, o| cfg.initial(x, y, o), &cfg.mesh(), cfg.p, 3, 1).unwrap();
    let mut rk = RungeKutta::new(tableau(cfg.rk).unwrap(), &u);
    for n in 0..20 {
        rk.step(&mut plain, &mut u, n as f64 * sim.dt(), sim.dt(), n + 1)
            .unwrap();
    }
    assert!(u
        .values()
        .iter()
        .zip(sim.state().values())
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn kernel_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let r = time_kernels(&small(1, 6), AlphaChoice::Local, 1, 2, 1).unwrap();
    let path = dir.path().join("kernels.csv");
    write_kernel_csv(&path, &r).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("kernel,calls,seconds,flops,bytes,intensity,gflops\n"));
    assert_eq!(read_kernel_csv(&path).unwrap(), r.rows);
}

#[test]
fn scaling_sweep_reports() {
    let dir = tempfile::tempdir().unwrap();
    let base = small(1, 4);
    let limit = working_set(&{
        let mut c = base.clone();
        c.nx = 8;
        c.ny = 8;
        c
    });
    let r = scaling_sweep(SweepAxis::Horizontal, &[4, 8, 16], &base, 2, 1, Some(limit)).unwrap();
    assert_eq!(r.seconds.len(), 3);
    assert!(r.seconds[0].is_some() && r.seconds[1].is_some());
    assert_eq!(r.seconds[2], None);
    assert!(r.warning.is_some());

    let path = dir.path().join("scaling.csv");
    write_scaling_csv(&path, &r).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("axis,size,seconds,slope\nhorizontal,4,"), "{text}");
    assert_eq!(read_scaling_csv(&path).unwrap(), r.rows());

    let one = scaling_sweep(SweepAxis::Vertical, &[2], &base, 1, 1, None).unwrap();
    assert_eq!(one.slope, None);
    assert!(one.warning.is_some());

    assert!(scaling_sweep(SweepAxis::Vertical, &[2, 2, 4], &base, 1, 1, None).is_err());
    assert!(scaling_sweep(SweepAxis::Vertical, &[1, 2], &base, 0, 1, None).is_err());
    assert_eq!("Vertical".parse::<SweepAxis>().unwrap(), SweepAxis::Vertical);
    assert!("diagonal".parse::<SweepAxis>().is_err());
}

#[test]
fn loglog_slope_of_power_laws() {
    let pts: Vec<(f64, f64)> = [100.0, 400.0, 1600.0].iter().map(|&x: &f64| (x, 2e-6 * x)).collect();
    assert!((loglog_slope(&pts).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(loglog_slope(&[(1.0, 1.0), (1.0, 2.0)]), None);
}
