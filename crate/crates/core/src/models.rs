//! Pointwise fluxes, sources and wavespeeds of the supported PDE systems.
//!
//! All models work on nodal values of the state variables at a single point.
//! On the sphere the state is `(h, hu, hv)`; the `cos θ` factor of the
//! conserved variables lives in the mass matrix, and the fluxes below already
//! include their metric factors.

use std::fmt::Debug;

use thiserror::Error;

use crate::mesh::PhysicalConstants;

pub const MAX_VARS: usize = 3;

/// Relative floor applied to `h` before dividing momenta by it.
pub const VELOCITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("non-positive height h = {h} at a quadrature point")]
    Positivity { h: f64 },
}

/// Latitude data at a node (`sin θ`, `cos θ`). Planar models ignore it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeom {
    pub sin_t: f64,
    pub cos_t: f64,
}

impl NodeGeom {
    pub const FLAT: NodeGeom = NodeGeom { sin_t: 0.0, cos_t: 1.0 };

    pub fn at_latitude(theta: f64) -> Self {
        NodeGeom {
            sin_t: theta.sin(),
            cos_t: theta.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Flux/source definition of a conservation law `∂U/∂t + ∂F/∂x + ∂G/∂y = S`.
pub trait FluxModel: Send + Sync + Debug {
    fn n_vars(&self) -> usize;

    fn var_names(&self) -> &'static [&'static str];

    /// Writes `F` and `G` (one entry per variable).
    fn flux(&self, u: &[f64], geom: NodeGeom, f: &mut [f64], g: &mut [f64]) -> Result<(), ModelError>;

    /// Flux along `axis` only.
    fn normal_flux(&self, u: &[f64], geom: NodeGeom, axis: Axis, out: &mut [f64]) -> Result<(), ModelError> {
        let mut f = [0.0; MAX_VARS];
        let mut g = [0.0; MAX_VARS];
        let n = self.n_vars();
        self.flux(u, geom, &mut f[..n], &mut g[..n])?;
        out[..n].copy_from_slice(match axis {
            Axis::X => &f[..n],
            Axis::Y => &g[..n],
        });
        Ok(())
    }

    fn has_source(&self) -> bool {
        false
    }

    fn source(&self, _u: &[f64], _geom: NodeGeom, s: &mut [f64]) -> Result<(), ModelError> {
        s.fill(0.0);
        Ok(())
    }

    /// Largest eigenvalue magnitude of `∂F/∂U` (or `∂G/∂U`), in the units of
    /// the mesh coordinates.
    fn max_wavespeed(&self, u: &[f64], geom: NodeGeom, axis: Axis) -> Result<f64, ModelError>;

    /// Largest physical signal speed (m/s or domain units per second), used
    /// to derive the time step from a Courant number.
    fn max_speed(&self, u: &[f64], geom: NodeGeom) -> Result<f64, ModelError>;

    /// Factor relating the stored variables to the conserved ones at a node
    /// (`cos θ` on the sphere). Scales the Rusanov jump term.
    fn jump_weight(&self, _geom: NodeGeom) -> f64 {
        1.0
    }

    /// Approximate flop counts per node for the benchmark report.
    fn flux_flops(&self) -> usize;

    fn source_flops(&self) -> usize {
        0
    }
}

/// `∂u/∂t + ∇·(βu) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advection {
    pub beta: [f64; 2],
}

impl FluxModel for Advection {
    fn n_vars(&self) -> usize {
        1
    }

    fn var_names(&self) -> &'static [&'static str] {
        &["u"]
    }

    fn flux(&self, u: &[f64], _: NodeGeom, f: &mut [f64], g: &mut [f64]) -> Result<(), ModelError> {
        f[0] = self.beta[0] * u[0];
        g[0] = self.beta[1] * u[0];
        Ok(())
    }

    fn max_wavespeed(&self, _: &[f64], _: NodeGeom, axis: Axis) -> Result<f64, ModelError> {
        Ok(match axis {
            Axis::X => self.beta[0].abs(),
            Axis::Y => self.beta[1].abs(),
        })
    }

    fn max_speed(&self, _: &[f64], _: NodeGeom) -> Result<f64, ModelError> {
        Ok(self.beta[0].abs().max(self.beta[1].abs()))
    }

    fn flux_flops(&self) -> usize {
        2
    }
}

fn velocities(u: &[f64], h_ref: f64) -> Result<(f64, f64, f64), ModelError> {
    let h = u[0];
    if !(h > 0.0) {
        return Err(ModelError::Positivity { h });
    }
    let hd = h.max(VELOCITY_FLOOR * h_ref);
    Ok((h, u[1] / hd, u[2] / hd))
}

/// Shallow water on an f-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwePlanar {
    pub gravity: f64,
    pub coriolis: f64,
    /// Reference depth for the velocity floor.
    pub h_ref: f64,
}

impl FluxModel for SwePlanar {
    fn n_vars(&self) -> usize {
        3
    }

    fn var_names(&self) -> &'static [&'static str] {
        &["h", "hu", "hv"]
    }

    fn flux(&self, u: &[f64], _: NodeGeom, f: &mut [f64], g: &mut [f64]) -> Result<(), ModelError> {
        let (h, vx, vy) = velocities(u, self.h_ref)?;
        let p = 0.5 * self.gravity * h * h;
        f[0] = u[1];
        f[1] = u[1] * vx + p;
        f[2] = u[1] * vy;
        g[0] = u[2];
        g[1] = u[2] * vx;
        g[2] = u[2] * vy + p;
        Ok(())
    }

    fn has_source(&self) -> bool {
        self.coriolis != 0.0
    }

    fn source(&self, u: &[f64], _: NodeGeom, s: &mut [f64]) -> Result<(), ModelError> {
        s[0] = 0.0;
        s[1] = self.coriolis * u[2];
        s[2] = -self.coriolis * u[1];
        Ok(())
    }

    fn max_wavespeed(&self, u: &[f64], _: NodeGeom, axis: Axis) -> Result<f64, ModelError> {
        let (h, vx, vy) = velocities(u, self.h_ref)?;
        let un = match axis {
            Axis::X => vx,
            Axis::Y => vy,
        };
        Ok(un.abs() + (self.gravity * h).sqrt())
    }

    fn max_speed(&self, u: &[f64], _: NodeGeom) -> Result<f64, ModelError> {
        let (h, vx, vy) = velocities(u, self.h_ref)?;
        Ok(vx.abs().max(vy.abs()) + (self.gravity * h).sqrt())
    }

    fn flux_flops(&self) -> usize {
        12
    }

    fn source_flops(&self) -> usize {
        3
    }
}

/// Shallow water on the sphere in `(λ, θ)` flux form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweSphere {
    pub constants: PhysicalConstants,
    pub h_ref: f64,
}

impl FluxModel for SweSphere {
    fn n_vars(&self) -> usize {
        3
    }

    fn var_names(&self) -> &'static [&'static str] {
        &["h", "hu", "hv"]
    }

    fn flux(&self, u: &[f64], geom: NodeGeom, f: &mut [f64], g: &mut [f64]) -> Result<(), ModelError> {
        let (h, vx, vy) = velocities(u, self.h_ref)?;
        let r_inv = 1.0 / self.constants.radius;
        let p = 0.5 * self.constants.gravity * h * h;
        let gc = geom.cos_t * r_inv;
        f[0] = r_inv * u[1];
        f[1] = r_inv * (u[1] * vx + p);
        f[2] = r_inv * (u[1] * vy);
        g[0] = gc * u[2];
        g[1] = gc * (u[2] * vx);
        g[2] = gc * (u[2] * vy + p);
        Ok(())
    }

    fn has_source(&self) -> bool {
        true
    }

    fn source(&self, u: &[f64], geom: NodeGeom, s: &mut [f64]) -> Result<(), ModelError> {
        let (h, vx, _) = velocities(u, self.h_ref)?;
        let c = &self.constants;
        let f = 2.0 * c.omega * geom.sin_t;
        let rot = f * geom.cos_t + vx / c.radius * geom.sin_t;
        s[0] = 0.0;
        s[1] = rot * u[2];
        s[2] = -(c.gravity * h * h * geom.sin_t) / (2.0 * c.radius) - rot * u[1];
        Ok(())
    }

    fn max_wavespeed(&self, u: &[f64], geom: NodeGeom, axis: Axis) -> Result<f64, ModelError> {
        let (h, vx, vy) = velocities(u, self.h_ref)?;
        let c = (self.constants.gravity * h).sqrt();
        let r = self.constants.radius;
        Ok(match axis {
            Axis::X => (vx.abs() + c) / (r * geom.cos_t),
            Axis::Y => (vy.abs() + c) / r,
        })
    }

    fn max_speed(&self, u: &[f64], _: NodeGeom) -> Result<f64, ModelError> {
        let (h, vx, vy) = velocities(u, self.h_ref)?;
        Ok(vx.abs().max(vy.abs()) + (self.constants.gravity * h).sqrt())
    }

    fn jump_weight(&self, geom: NodeGeom) -> f64 {
        geom.cos_t
    }

    fn flux_flops(&self) -> usize {
        20
    }

    fn source_flops(&self) -> usize {
        16
    }
}
