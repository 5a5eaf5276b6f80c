//! Kernel timing, analytic operational intensity and scaling sweeps.
//!
//! Traffic is counted without caches: every read and every write of a field
//! value costs 8 bytes, once.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cases::CaseConfig;
use crate::diagnostics::csv_error;
use crate::error::{Error, Result};
use crate::sim::{AlphaChoice, Simulation};
use crate::time::tableau;

pub const KERNEL_NAMES: [&str; 3] = ["nodal_flux", "rusanov", "assemble_update"];
pub const MIN_WARM_STEPS: usize = 10;
pub const MIN_TIMED_STEPS: usize = 50;

/// Flops and bytes of one unit of work.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cost {
    pub flops: f64,
    pub bytes: f64,
}

impl Cost {
    /// Dense `m × n` matvec: `2mn` flops, `8(mn + n + m)` bytes.
    pub fn matvec(m: usize, n: usize) -> Cost {
        let (m, n) = (m as f64, n as f64);
        Cost {
            flops: 2.0 * m * n,
            bytes: 8.0 * (m * n + n + m),
        }
    }

    /// `flops` operations on `values` field accesses.
    pub fn pointwise(flops: usize, values: usize) -> Cost {
        Cost {
            flops: flops as f64,
            bytes: 8.0 * values as f64,
        }
    }

    pub fn scaled(self, k: f64) -> Cost {
        Cost {
            flops: self.flops * k,
            bytes: self.bytes * k,
        }
    }

    pub fn intensity(&self) -> f64 {
        self.flops / self.bytes
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost {
            flops: self.flops + o.flops,
            bytes: self.bytes + o.bytes,
        }
    }
}

/// Per-element, per-evaluation cost of each kernel for `config`.
/// Kernel 3 includes the stage combinations of the time integrator, spread
/// evenly over its stages.
pub fn kernel_costs(config: &CaseConfig) -> Result<[Cost; 3]> {
    let model = config.model();
    let p = config.p;
    let nv = model.n_vars();
    let (n1d, nphi) = (p + 1, (p + 1) * (p + 1));
    let nq = n1d * n1d;
    let src = model.has_source();

    let nodal = Cost::matvec(nq, nphi).scaled(nv as f64);
    let flux = Cost::pointwise(
        model.flux_flops() + if src { model.source_flops() } else { 0 },
        nv + 3 * nv,
    )
    .scaled(nq as f64);
    let traces = Cost::matvec(n1d, nphi).scaled((4 * nv) as f64);
    let edge_flux = Cost::pointwise(model.flux_flops() / 2 + 4, nv + 2 * nv).scaled((4 * n1d) as f64)
        + Cost::pointwise(0, 1).scaled(4.0);
    let k1 = nodal + flux + traces + edge_flux;

    // f* = (fL + fR)/2 - α w (uR - uL)/2: 7 flops from 4 reads and 1 write
    let k2 = Cost::pointwise(7, 5).scaled((4 * nv * n1d) as f64) + Cost::pointwise(1, 2).scaled(4.0);

    let weights = Cost::pointwise(1, 1).scaled((2 * nq) as f64);
    let mut per_var = weights + Cost::matvec(nphi, nq).scaled(2.0);
    if src {
        per_var = per_var + Cost::pointwise(1, 1).scaled(nq as f64) + Cost::matvec(nphi, nq);
    }
    per_var = per_var
        + Cost::matvec(nphi, n1d).scaled(4.0)
        + Cost::pointwise(1, 1).scaled((4 * n1d) as f64)
        + Cost::matvec(nphi, nphi);
    let assemble = per_var.scaled(nv as f64);

    let tab = tableau(config.rk)?;
    let dofs = (nv * nphi) as f64;
    let mut update = Cost::default();
    for i in 1..tab.s {
        let terms = (0..i).filter(|&j| tab.a(i, j) != 0.0).count();
        update = update + combine_cost(terms).scaled(dofs);
    }
    let terms = tab.b.iter().filter(|&&b| b != 0.0).count();
    update = update + combine_cost(terms).scaled(dofs);
    let k3 = assemble + update.scaled(1.0 / tab.s as f64);
    Ok([k1, k2, k3])
}

/// `out = base + dt Σ c_i k_i` per value.
fn combine_cost(terms: usize) -> Cost {
    Cost::pointwise(2 * terms + 2, terms + 2)
}

/// Flops per byte of each kernel.
pub fn operational_intensity(config: &CaseConfig) -> Result<[f64; 3]> {
    Ok(kernel_costs(config)?.map(|c| c.intensity()))
}

/// One row of the kernel CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub kernel: String,
    pub calls: u64,
    pub seconds: f64,
    pub flops: f64,
    pub bytes: f64,
    pub intensity: f64,
    pub gflops: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub rows: Vec<KernelRow>,
    /// Wall time of the timed steps.
    pub total_seconds: f64,
    pub warm_steps: usize,
    pub timed_steps: usize,
    pub threads: usize,
    /// Set when the run is too short to time reliably.
    pub warning: Option<String>,
}

impl KernelReport {
    pub fn kernel_seconds(&self) -> f64 {
        self.rows.iter().map(|r| r.seconds).sum()
    }
}

/// Runs `warm` untimed and then `timed` timed steps of `config` on a pool of
/// `threads` workers (`0` = rayon default).
pub fn time_kernels(
    config: &CaseConfig,
    alpha: AlphaChoice,
    warm: usize,
    timed: usize,
    threads: usize,
) -> Result<KernelReport> {
    let costs = kernel_costs(config)?;
    let elements = (config.nx * config.ny * config.nz) as f64;
    with_threads(threads, |width| {
        let mut sim = Simulation::new(config.clone(), alpha)?;
        for _ in 0..warm {
            sim.step()?;
        }
        sim.operator_mut().reset_kernel_times();
        let t0 = Instant::now();
        for _ in 0..timed {
            sim.step()?;
        }
        let total_seconds = t0.elapsed().as_secs_f64();
        let times = sim.operator().kernel_times();
        let rows = (0..3)
            .map(|k| {
                let cost = costs[k].scaled(elements * times.calls[k] as f64);
                let seconds = times.seconds[k];
                KernelRow {
                    kernel: KERNEL_NAMES[k].to_string(),
                    calls: times.calls[k],
                    seconds,
                    flops: cost.flops,
                    bytes: cost.bytes,
                    intensity: cost.intensity(),
                    gflops: if seconds > 0.0 { cost.flops / seconds / 1e9 } else { 0.0 },
                }
            })
            .collect();
        let warning = if warm < MIN_WARM_STEPS || timed < MIN_TIMED_STEPS {
            Some(format!(
                "{warm} warm / {timed} timed steps is below {MIN_WARM_STEPS} / {MIN_TIMED_STEPS}"
            ))
        } else if total_seconds < 1e-2 {
            Some(format!("timed section lasted only {total_seconds:.2e} s"))
        } else {
            None
        };
        Ok(KernelReport {
            rows,
            total_seconds,
            warm_steps: warm,
            timed_steps: timed,
            threads: width,
            warning,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// `size` elements along each horizontal axis.
    Horizontal,
    /// `size` vertical levels.
    Vertical,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "horizontal" => Ok(SweepAxis::Horizontal),
            "vertical" => Ok(SweepAxis::Vertical),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

/// One row of the scaling CSV. `seconds` is empty when the size could not be
/// run; `slope` repeats the fitted slope on every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub axis: SweepAxis,
    pub size: usize,
    pub seconds: Option<f64>,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub axis: SweepAxis,
    pub sizes: Vec<usize>,
    /// Wall time per size, `None` where unavailable.
    pub seconds: Vec<Option<f64>>,
    /// Log-log slope of time against total grid points over the largest
    /// three available sizes.
    pub slope: Option<f64>,
    pub steps: usize,
    pub threads: usize,
    pub warning: Option<String>,
}

impl ScalingReport {
    pub fn rows(&self) -> Vec<ScalingRow> {
        self.sizes
            .iter()
            .zip(&self.seconds)
            .map(|(&size, &seconds)| ScalingRow {
                axis: self.axis,
                size,
                seconds,
                slope: self.slope,
            })
            .collect()
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Sizes whose estimated working set exceeds `memory_limit` bytes are
/// reported unavailable instead of run.
pub fn scaling_sweep(
    axis: SweepAxis,
    sizes: &[usize],
    base: &CaseConfig,
    steps: usize,
    threads: usize,
    memory_limit: Option<u64>,
) -> Result<ScalingReport> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("sweep sizes must increase strictly: {sizes:?}")));
    }
    if steps == 0 {
        return Err(Error::Config("scaling sweep needs at least one step".into()));
    }
    with_threads(threads, |width| {
        let mut seconds = Vec::with_capacity(sizes.len());
        let mut points = Vec::new();
        for &size in sizes {
            let mut cfg = base.clone();
            match axis {
                SweepAxis::Horizontal => {
                    cfg.nx = size;
                    cfg.ny = size;
                }
                SweepAxis::Vertical => cfg.nz = size,
            }
            if memory_limit.is_some_and(|lim| working_set(&cfg) > lim) {
                seconds.push(None);
                continue;
            }
            let mut sim = Simulation::new(cfg.clone(), AlphaChoice::Local)?;
            sim.step()?;
            let t0 = Instant::now();
            for _ in 0..steps {
                sim.step()?;
            }
            let s = t0.elapsed().as_secs_f64();
            seconds.push(Some(s));
            points.push(((cfg.nx * cfg.ny * cfg.nz) as f64, s));
        }
        let tail = &points[points.len().saturating_sub(3)..];
        let slope = loglog_slope(tail);
        let warning = if points.len() < 3 {
            Some(format!("only {} sizes available, slope needs 3", points.len()))
        } else {
            None
        };
        Ok(ScalingReport {
            axis,
            sizes: sizes.to_vec(),
            seconds,
            slope,
            steps,
            threads: width,
            warning,
        })
    })
}

/// Estimated bytes held by a simulation of `cfg`.
pub fn working_set(cfg: &CaseConfig) -> u64 {
    let nv = cfg.n_vars() as u64;
    let n1d = cfg.p as u64 + 1;
    let (nphi, nq) = (n1d * n1d, n1d * n1d);
    let (nx, ny, nz) = (cfg.nx as u64, cfg.ny as u64, cfg.nz as u64);
    let stages = cfg.rk as u64 + 2;
    let per_element = stages * nv * nphi + 3 * nv * nq + 4 * nv * n1d;
    let traces = (nx + 2) * (ny + 2) * nz * 4 * (2 * nv * n1d + 1);
    8 * (nx * ny * nz * per_element + traces)
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce(usize) -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| f(rayon::current_num_threads()))
}

pub fn write_kernel_csv(path: &Path, report: &KernelReport) -> Result<()> {
    write_csv(path, &report.rows)
}

pub fn read_kernel_csv(path: &Path) -> Result<Vec<KernelRow>> {
    read_csv(path)
}

pub fn write_scaling_csv(path: &Path, report: &ScalingReport) -> Result<()> {
    write_csv(path, &report.rows())
}

pub fn read_scaling_csv(path: &Path) -> Result<Vec<ScalingRow>> {
    read_csv(path)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(path, e))
}
