//! Convergence studies: one case run to its final time on a sequence of
//! meshes and degrees, with errors measured against the exact solution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cases::CaseConfig;
use crate::diagnostics::{convergence_table, csv_error, ConvergenceRecord};
use crate::error::{Error, Result};
use crate::sim::{AlphaChoice, Simulation};

/// Errors of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRun {
    pub p: usize,
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub h: f64,
    pub steps: usize,
    pub dt: f64,
    /// Absolute L2 error of the first variable.
    pub eps_abs: f64,
    /// `eps_abs / ‖u₀ exact‖`.
    pub eps_rel: f64,
    /// `√(Σ_v ε_v²) / √(Σ_v ‖u_v exact‖²)` over all variables.
    pub eps_combined: f64,
    /// Absolute L2 error of every variable, `;`-separated.
    pub eps_vars: String,
    pub seconds: f64,
}

impl StudyRun {
    /// The error reported in the convergence table: absolute for scalar
    /// cases, relative to the exact depth for shallow water.
    pub fn epsilon(&self) -> f64 {
        if self.eps_vars.contains(';') {
            self.eps_rel
        } else {
            self.eps_abs
        }
    }
}

/// Characteristic mesh size: geometric mean of the coordinate spacings.
pub fn mesh_size(cfg: &CaseConfig) -> f64 {
    let m = cfg.mesh();
    (m.dx() * m.dy()).sqrt()
}

/// Runs `base` at degree `p` on an `n × n` mesh to its final time.
pub fn run_one(base: &CaseConfig, p: usize, n: usize, alpha: AlphaChoice) -> Result<StudyRun> {
    let mut cfg = base.clone();
    cfg.p = p;
    cfg.nx = n;
    cfg.ny = n;
    let start = std::time::Instant::now();
    let mut sim = Simulation::new(cfg.clone(), alpha)?;
    sim.run(|_, _| Ok(()))?;
    let nv = cfg.n_vars();
    let mut errs = Vec::with_capacity(nv);
    let mut norms = Vec::with_capacity(nv);
    for v in 0..nv {
        let e = sim
            .l2_error_exact(v)?
            .ok_or_else(|| Error::Config(format!("case {} has no exact solution", cfg.case)))?;
        errs.push(e);
        norms.push(sim.exact_norm(v).unwrap_or(0.0));
    }
    let e2: f64 = errs.iter().map(|e| e * e).sum();
    let n2: f64 = norms.iter().map(|n| n * n).sum();
    Ok(StudyRun {
        p,
        nx: n,
        ny: n,
        k: n * n,
        h: mesh_size(&cfg),
        steps: sim.steps(),
        dt: sim.dt(),
        eps_abs: errs[0],
        eps_rel: errs[0] / norms[0],
        eps_combined: (e2 / n2).sqrt(),
        eps_vars: errs.iter().map(|e| format!("{e:e}")).collect::<Vec<_>>().join(";"),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every `(p, n)` pair, calling `progress` after each run.
pub fn run_study(
    base: &CaseConfig,
    degrees: &[usize],
    sizes: &[usize],
    alpha: AlphaChoice,
    mut progress: impl FnMut(&StudyRun),
) -> Result<Vec<StudyRun>> {
    let mut runs = Vec::new();
    for &p in degrees {
        for &n in sizes {
            let r = run_one(base, p, n, alpha)?;
            progress(&r);
            runs.push(r);
        }
    }
    Ok(runs)
}

/// Convergence table of the runs at degree `p`, coarsest first.
pub fn table_for(runs: &[StudyRun], p: usize) -> Result<Vec<ConvergenceRecord>> {
    let mut rows: Vec<(usize, f64, f64)> = runs
        .iter()
        .filter(|r| r.p == p)
        .map(|r| (r.k, r.h, r.epsilon()))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1));
    convergence_table(&rows)
}

pub fn write_runs_csv(path: &Path, runs: &[StudyRun]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in runs {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<StudyRun>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(path, e))
}
