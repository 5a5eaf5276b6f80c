use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use dgswe::bench::{self, SweepAxis};
use dgswe::cases::CaseId;
use dgswe::config::{exit_code, Resolved, RunManifest, Settings};
use dgswe::diagnostics::write_convergence_csv;
use dgswe::sim::Simulation;
use dgswe::study;
use dgswe::{Error, Result};

#[derive(Parser)]
#[command(name = "dgswe", version, about = "Modal DG solver for advection and shallow water")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write field dumps.
    Run(Common),
    /// Run a case on a sequence of meshes and degrees and tabulate errors.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Polynomial degrees.
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// Elements per axis of each mesh.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Time the three kernels or sweep the problem size.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Per-kernel timing and operational intensity.
        #[arg(long)]
        kernels: bool,
        /// Scaling sweep along `horizontal` or `vertical`.
        #[arg(long)]
        scale: Option<SweepAxis>,
        /// Sweep sizes (elements per axis, or levels).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Untimed warm-up steps of the kernel benchmark.
        #[arg(long, default_value_t = 10)]
        warm: usize,
        /// Timed steps of the kernel benchmark.
        #[arg(long, default_value_t = 50)]
        timed: usize,
        /// Steps per sweep size.
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long)]
    case: Option<CaseId>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    nz: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4))]
    p: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4))]
    rk: Option<u64>,
    /// Time step in seconds.
    #[arg(long, conflicts_with = "courant")]
    dt: Option<f64>,
    /// Courant number `p c dt / H`.
    #[arg(long)]
    courant: Option<f64>,
    /// Final time in seconds.
    #[arg(long, conflicts_with = "t_final_days")]
    t_final: Option<f64>,
    /// Final time in days.
    #[arg(long)]
    t_final_days: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump the fields every N steps (0: initial and final only).
    #[arg(long)]
    dump_every: Option<usize>,
    /// Engine threads (0: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["local", "global"])]
    alpha_mode: Option<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            case: self.case,
            nx: self.nx,
            ny: self.ny,
            nz: self.nz,
            p: self.p.map(|v| v as usize),
            rk: self.rk.map(|v| v as usize),
            dt: self.dt,
            courant: self.courant,
            t_final: self.t_final.or(self.t_final_days.map(|d| d * dgswe::cases::DAY)),
            alpha: self.alpha_mode.as_deref().map(str::parse).transpose()?,
            out: self.out.clone(),
            dump_every: self.dump_every,
            threads: self.threads,
        };
        Ok(file.overlay(&flags))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (name, common) = match &cli.command {
        Command::Run(c) => ("run", c),
        Command::Converge { common, .. } => ("converge", common),
        Command::Bench { common, .. } => ("bench", common),
    };
    let mut manifest = RunManifest::new(name);
    let start = Instant::now();
    let (result, out) = match common.settings().and_then(|s| s.resolve()) {
        Ok(r) => {
            manifest.config = r.to_map();
            let res = with_pool(r.threads, || dispatch(&cli.command, &r, &mut manifest));
            (res, r.out)
        }
        Err(e) => (Err(e), common.out.clone().unwrap_or_else(|| PathBuf::from("dgswe_out"))),
    };
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e)
        }
    };
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    manifest.exit_status = code;
    manifest.error = result.err().map(|e| e.to_string());
    if let Err(e) = manifest.write(&out) {
        eprintln!("error: {e}");
        return ExitCode::from(if code == 0 { 4 } else { code as u8 });
    }
    ExitCode::from(code as u8)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?
        .install(f)
}

fn dispatch(cmd: &Command, r: &Resolved, manifest: &mut RunManifest) -> Result<()> {
    std::fs::create_dir_all(&r.out).map_err(|e| Error::io(&r.out, e))?;
    match cmd {
        Command::Run(_) => cmd_run(r, manifest),
        Command::Converge { degrees, sizes, .. } => cmd_converge(r, degrees, sizes, manifest),
        Command::Bench {
            kernels,
            scale,
            sizes,
            warm,
            timed,
            steps,
            ..
        } => cmd_bench(r, *kernels, *scale, sizes, (*warm, *timed, *steps), manifest),
    }
}

fn record(manifest: &mut RunManifest, path: &Path) {
    manifest.artifacts.push(path.display().to_string());
}

fn cmd_run(r: &Resolved, manifest: &mut RunManifest) -> Result<()> {
    let cfg = &r.config;
    let mut sim = Simulation::new(cfg.clone(), r.alpha)?;
    let res = sim.default_resolution();
    let name = cfg.case.name();
    let dump_path = |step: usize| r.out.join(format!("{name}_{step:07}.dat"));
    println!(
        "{name}: {}x{}x{} p={} rk={} dt={:.6e} s steps={} t_final={} s",
        cfg.nx,
        cfg.ny,
        cfg.nz,
        cfg.p,
        cfg.rk,
        sim.dt(),
        sim.controls().num_steps(),
        cfg.t_final
    );
    let first = dump_path(0);
    sim.export(&first, res)?;
    record(manifest, &first);
    let mass0 = sim.mass(0);
    let mut dumps = Vec::new();
    let outcome = sim.run(|info, s| {
        let last = info.time >= s.config().t_final;
        if (r.dump_every > 0 && info.step % r.dump_every == 0) || last {
            let path = dump_path(info.step);
            s.export(&path, res)?;
            dumps.push(path);
        }
        Ok(())
    });
    for d in &dumps {
        record(manifest, d);
    }
    outcome?;
    let change = sim.mass(0) - mass0;
    println!(
        "t = {} s after {} steps, mass change {change:.3e} (initial {mass0:.6e})",
        sim.time(),
        sim.steps()
    );
    if let Some(e) = sim.l2_error_exact(0)? {
        println!(
            "L2 error of {} vs exact: {e:.4e}",
            sim.operator().model().var_names()[0]
        );
    }
    Ok(())
}

fn default_study(case: CaseId) -> (Vec<usize>, Vec<usize>) {
    match case {
        CaseId::WilliamsonTc2 => (vec![1, 2, 3], vec![10, 20, 40, 80]),
        _ => (vec![1, 2, 3], vec![20, 40, 80, 160]),
    }
}

fn cmd_converge(
    r: &Resolved,
    degrees: &Option<Vec<usize>>,
    sizes: &Option<Vec<usize>>,
    manifest: &mut RunManifest,
) -> Result<()> {
    let (dp, ds) = default_study(r.config.case);
    let degrees = degrees.clone().unwrap_or(dp);
    let sizes = sizes.clone().unwrap_or(ds);
    if sizes.is_empty() || degrees.is_empty() {
        return Err(Error::Config("converge needs at least one degree and one size".into()));
    }
    let name = r.config.case.name();
    let runs = study::run_study(&r.config, &degrees, &sizes, r.alpha, |run| {
        println!(
            "p={} K={} steps={} eps={:.4e} ({:.1} s)",
            run.p,
            run.k,
            run.steps,
            run.epsilon(),
            run.seconds
        );
    })?;
    let runs_path = r.out.join(format!("{name}_runs.csv"));
    study::write_runs_csv(&runs_path, &runs)?;
    record(manifest, &runs_path);
    for &p in &degrees {
        let table = study::table_for(&runs, p)?;
        let path = r.out.join(format!("{name}_convergence_p{p}.csv"));
        write_convergence_csv(&path, &table)?;
        record(manifest, &path);
        println!("p = {p}");
        println!("{:>8} {:>12} {:>12} {:>6}", "K", "h", "epsilon", "rate");
        for row in &table {
            let rate = row.rate.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            println!("{:>8} {:>12.4e} {:>12.4e} {:>6}", row.k, row.h, row.epsilon, rate);
        }
    }
    Ok(())
}

fn cmd_bench(
    r: &Resolved,
    kernels: bool,
    scale: Option<SweepAxis>,
    sizes: &Option<Vec<usize>>,
    (warm, timed, steps): (usize, usize, usize),
    manifest: &mut RunManifest,
) -> Result<()> {
    if !kernels && scale.is_none() {
        return Err(Error::Config("bench needs --kernels and/or --scale <axis>".into()));
    }
    let name = r.config.case.name();
    if kernels {
        let report = bench::time_kernels(&r.config, r.alpha, warm, timed, r.threads)?;
        let path = r.out.join(format!("{name}_kernels.csv"));
        bench::write_kernel_csv(&path, &report)?;
        record(manifest, &path);
        println!(
            "{} threads, {} timed steps, {:.3} s wall",
            report.threads, timed, report.total_seconds
        );
        println!(
            "{:>16} {:>8} {:>10} {:>10} {:>8}",
            "kernel", "calls", "seconds", "flop/B", "GF/s"
        );
        for row in &report.rows {
            println!(
                "{:>16} {:>8} {:>10.4} {:>10.3} {:>8.3}",
                row.kernel, row.calls, row.seconds, row.intensity, row.gflops
            );
        }
        if let Some(w) = &report.warning {
            eprintln!("warning: {w}");
        }
    }
    if let Some(axis) = scale {
        let sizes = sizes.clone().unwrap_or_else(|| match axis {
            SweepAxis::Horizontal => vec![20, 40, 80, 160],
            SweepAxis::Vertical => vec![1, 2, 4, 8],
        });
        let report = bench::scaling_sweep(axis, &sizes, &r.config, steps, r.threads, None)?;
        let label = match axis {
            SweepAxis::Horizontal => "horizontal",
            SweepAxis::Vertical => "vertical",
        };
        let path = r.out.join(format!("{name}_scaling_{label}.csv"));
        bench::write_scaling_csv(&path, &report)?;
        record(manifest, &path);
        for (size, s) in report.sizes.iter().zip(&report.seconds) {
            match s {
                Some(s) => println!("{label} {size:>6} {s:>10.4} s"),
                None => println!("{label} {size:>6} unavailable"),
            }
        }
        match report.slope {
            Some(v) => println!("log-log slope vs total points: {v:.3}"),
            None => println!("log-log slope: insufficient data"),
        }
        if let Some(w) = &report.warning {
            eprintln!("warning: {w}");
        }
    }
    Ok(())
}
