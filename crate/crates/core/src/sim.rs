//! A configured case together with its operator, state and clock.

use std::path::Path;

use crate::basis::project_initial;
use crate::cases::CaseConfig;
use crate::dg::{AlphaMode, DgOperator};
use crate::diagnostics::{self, DumpHeader};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::time::{tableau, RungeKutta, StepInfo, TimeControls};

/// How the Rusanov parameter is picked when building a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaChoice {
    #[default]
    Local,
    /// Largest edge wavespeed of the initial state, held fixed.
    Global,
}

impl std::str::FromStr for AlphaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "local" => Ok(AlphaChoice::Local),
            "global" => Ok(AlphaChoice::Global),
            other => Err(Error::Config(format!("unknown alpha mode '{other}'"))),
        }
    }
}

pub struct Simulation {
    config: CaseConfig,
    op: DgOperator,
    rk: RungeKutta<Field>,
    state: Field,
    controls: TimeControls,
    time: f64,
    steps: usize,
}

impl Simulation {
    pub fn new(config: CaseConfig, alpha: AlphaChoice) -> Result<Self> {
        if config.p < 1 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        let mesh = config.mesh();
        let mut op = DgOperator::new(mesh.clone(), config.p, config.nz, config.model())?;
        let state = project_initial(
            |x, y, out| config.initial(x, y, out),
            &mesh,
            config.p,
            config.n_vars(),
            config.nz,
        )?;
        if alpha == AlphaChoice::Global {
            let a = op.max_edge_wavespeed(&state)?;
            op.set_alpha_mode(AlphaMode::Global(a));
        }
        let c_max = op.max_speed(&state)?;
        let controls = TimeControls::new(
            config.step,
            config.t_final,
            config.p,
            mesh.min_effective_diameter(),
            c_max,
        )?;
        let rk = RungeKutta::new(tableau(config.rk)?, &state);
        Ok(Simulation {
            config,
            op,
            rk,
            state,
            controls,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn config(&self) -> &CaseConfig {
        &self.config
    }

    pub fn operator(&self) -> &DgOperator {
        &self.op
    }

    pub fn operator_mut(&mut self) -> &mut DgOperator {
        &mut self.op
    }

    pub fn state(&self) -> &Field {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.controls.dt
    }

    pub fn controls(&self) -> &TimeControls {
        &self.controls
    }

    /// One step of `dt`.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.controls.dt;
        self.step_by(dt)
    }

    fn step_by(&mut self, dt: f64) -> Result<()> {
        self.rk
            .step(&mut self.op, &mut self.state, self.time, dt, self.steps + 1)?;
        self.steps += 1;
        self.time += dt;
        Ok(())
    }

    /// Steps until `target`, shortening the last step to land on it.
    /// `callback` runs after every step.
    pub fn advance_to<F>(&mut self, target: f64, mut callback: F) -> Result<()>
    where
        F: FnMut(&StepInfo, &Simulation) -> Result<()>,
    {
        let dt = self.controls.dt;
        let remaining = TimeControls {
            dt,
            t_final: (target - self.time).max(0.0),
        };
        let n = remaining.num_steps();
        let t0 = self.time;
        for s in 0..n {
            let t_next = if s + 1 == n { target } else { t0 + (s + 1) as f64 * dt };
            self.step_by(t_next - self.time)?;
            self.time = t_next;
            let info = StepInfo {
                step: self.steps,
                num_steps: n,
                time: self.time,
                dt,
            };
            callback(&info, self)?;
        }
        Ok(())
    }

    /// Runs to the configured final time.
    pub fn run<F>(&mut self, callback: F) -> Result<()>
    where
        F: FnMut(&StepInfo, &Simulation) -> Result<()>,
    {
        self.advance_to(self.config.t_final, callback)
    }

    /// Total of variable `var`: `∫ u` (planar) or `∫ u cos θ dλ dθ` (sphere).
    pub fn mass(&self, var: usize) -> f64 {
        let nphi = self.op.vander().nphi;
        diagnostics::mass_integral(&self.state, var, self.op.mesh(), nphi, |j| &self.op.mass_matrix(j).m)
    }

    /// L2 error of variable `var` against the exact solution at the current
    /// time, or `None` if the case has no exact solution.
    pub fn l2_error_exact(&self, var: usize) -> Result<Option<f64>> {
        let nv = self.config.n_vars();
        let mut buf = vec![0.0; nv];
        if !self.config.exact(0.0, 0.0, 0.0, &mut buf) {
            return Ok(None);
        }
        let t = self.time;
        let cfg = &self.config;
        let e = diagnostics::l2_error(
            &self.state,
            var,
            |x, y| {
                let mut b = [0.0; 3];
                cfg.exact(t, x, y, &mut b[..nv]);
                b[var]
            },
            self.op.mesh(),
            cfg.p,
        )?;
        Ok(Some(e))
    }

    /// L2 norm of the exact solution of variable `var` at the current time.
    pub fn exact_norm(&self, var: usize) -> Option<f64> {
        let nv = self.config.n_vars();
        let mut buf = vec![0.0; nv];
        if !self.config.exact(0.0, 0.0, 0.0, &mut buf) {
            return None;
        }
        let (t, cfg) = (self.time, &self.config);
        Some(diagnostics::l2_norm(
            |x, y| {
                let mut b = [0.0; 3];
                cfg.exact(t, x, y, &mut b[..nv]);
                b[var]
            },
            self.op.mesh(),
            cfg.p,
        ))
    }

    pub fn sample(&self, var: usize, x: f64, y: f64) -> f64 {
        diagnostics::sample(&self.state, self.op.mesh(), self.op.vander(), var, x, y)
    }

    pub fn export(&self, path: &Path, res: [usize; 2]) -> Result<()> {
        let header = DumpHeader {
            case: self.config.case.name(),
            time: self.time,
            vars: self.op.model().var_names(),
        };
        diagnostics::export_field(&self.state, self.op.mesh(), self.op.vander(), &header, path, res)
    }

    /// Default dump lattice: `(p + 1)` samples per element and direction.
    pub fn default_resolution(&self) -> [usize; 2] {
        let m = self.op.mesh();
        [m.nx * (self.config.p + 1), m.ny * (self.config.p + 1)]
    }
}
