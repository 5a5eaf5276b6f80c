//! Initial conditions and default run parameters of the validation problems.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, PhysicalConstants};
use crate::models::{Advection, FluxModel, SwePlanar, SweSphere};
use crate::time::StepSize;

pub const DAY: f64 = 86400.0;

/// Parameters of Williamson et al. (1992) cases 2 and 6.
pub mod williamson {
    use super::DAY;
    use std::f64::consts::PI;

    /// Case 2: `u0 = 2πa / 12 days`.
    pub fn tc2_u0(radius: f64) -> f64 {
        2.0 * PI * radius / (12.0 * DAY)
    }
    /// Case 2: `g h0` in m² s⁻².
    pub const TC2_GH0: f64 = 2.94e4;

    /// Case 6: `ω = K` in s⁻¹.
    pub const TC6_OMEGA: f64 = 7.848e-6;
    pub const TC6_K: f64 = 7.848e-6;
    /// Case 6: zonal wavenumber R.
    pub const TC6_WAVENUMBER: i32 = 4;
    /// Case 6: `h0` in m.
    pub const TC6_H0: f64 = 8000.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    AdvectionSine,
    GeostrophicAdjustment,
    WilliamsonTc2,
    WilliamsonTc6,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [
        CaseId::AdvectionSine,
        CaseId::GeostrophicAdjustment,
        CaseId::WilliamsonTc2,
        CaseId::WilliamsonTc6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::AdvectionSine => "advection_sine",
            CaseId::GeostrophicAdjustment => "geostrophic_adjustment",
            CaseId::WilliamsonTc2 => "williamson_tc2",
            CaseId::WilliamsonTc6 => "williamson_tc6",
        }
    }

    pub fn is_sphere(self) -> bool {
        matches!(self, CaseId::WilliamsonTc2 | CaseId::WilliamsonTc6)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "advection_sine" | "advection" | "sine" => CaseId::AdvectionSine,
            "geostrophic_adjustment" | "adjustment" => CaseId::GeostrophicAdjustment,
            "williamson_tc2" | "tc2" => CaseId::WilliamsonTc2,
            "williamson_tc6" | "tc6" => CaseId::WilliamsonTc6,
            other => return Err(Error::Config(format!("unknown case '{other}'"))),
        })
    }
}

/// Physical parameters; only the ones relevant to the case are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    /// Advection velocity.
    pub beta: [f64; 2],
    /// Planar domain length.
    pub length: f64,
    pub gravity: f64,
    /// f-plane Coriolis parameter.
    pub coriolis: f64,
    pub h0: f64,
    pub h1: f64,
    /// Gaussian width of the adjustment bump.
    pub sigma: f64,
    pub constants: PhysicalConstants,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub case: CaseId,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub p: usize,
    pub rk: usize,
    pub step: StepSize,
    pub t_final: f64,
    pub params: CaseParams,
}

impl CaseConfig {
    /// Run parameters as quoted for each experiment.
    pub fn defaults(case: CaseId) -> Self {
        let sphere = PhysicalConstants::default();
        let base = CaseParams {
            beta: [1.0, 1.0],
            length: 1.0,
            gravity: sphere.gravity,
            coriolis: 0.0,
            h0: 0.0,
            h1: 0.0,
            sigma: 0.0,
            constants: sphere,
        };
        match case {
            CaseId::AdvectionSine => CaseConfig {
                case,
                nx: 20,
                ny: 20,
                nz: 1,
                p: 2,
                rk: 4,
                step: StepSize::Courant(0.1),
                t_final: 1.0,
                params: base,
            },
            CaseId::GeostrophicAdjustment => {
                let l = 1e7;
                CaseConfig {
                    case,
                    nx: 50,
                    ny: 50,
                    nz: 1,
                    p: 3,
                    rk: 4,
                    step: StepSize::Fixed(100.0),
                    t_final: 36000.0,
                    params: CaseParams {
                        length: l,
                        gravity: 9.81,
                        coriolis: 1e-4,
                        h0: 1000.0,
                        h1: 5.0,
                        sigma: l / 20.0,
                        ..base
                    },
                }
            }
            CaseId::WilliamsonTc2 => CaseConfig {
                case,
                nx: 20,
                ny: 20,
                nz: 1,
                p: 3,
                rk: 4,
                step: StepSize::Courant(0.05),
                t_final: 2.0 * DAY,
                params: base,
            },
            CaseId::WilliamsonTc6 => CaseConfig {
                case,
                nx: 40,
                ny: 20,
                nz: 1,
                p: 3,
                rk: 4,
                step: StepSize::Fixed(4.0),
                t_final: 8.0 * DAY,
                params: CaseParams {
                    h0: williamson::TC6_H0,
                    ..base
                },
            },
        }
    }

    pub fn mesh(&self) -> Mesh {
        if self.case.is_sphere() {
            Mesh::latlon(self.nx, self.ny, self.params.constants.radius)
        } else {
            Mesh::planar(self.nx, self.ny, self.params.length)
        }
    }

    /// Reference depth for the velocity floor of the SWE models.
    fn h_ref(&self) -> f64 {
        match self.case {
            CaseId::AdvectionSine => 1.0,
            CaseId::GeostrophicAdjustment => self.params.h0,
            CaseId::WilliamsonTc2 => williamson::TC2_GH0 / self.params.constants.gravity,
            CaseId::WilliamsonTc6 => self.params.h0,
        }
    }

    pub fn model(&self) -> Box<dyn FluxModel> {
        let p = &self.params;
        match self.case {
            CaseId::AdvectionSine => Box::new(Advection { beta: p.beta }),
            CaseId::GeostrophicAdjustment => Box::new(SwePlanar {
                gravity: p.gravity,
                coriolis: p.coriolis,
                h_ref: self.h_ref(),
            }),
            CaseId::WilliamsonTc2 | CaseId::WilliamsonTc6 => Box::new(SweSphere {
                constants: p.constants,
                h_ref: self.h_ref(),
            }),
        }
    }

    pub fn n_vars(&self) -> usize {
        match self.case {
            CaseId::AdvectionSine => 1,
            _ => 3,
        }
    }

    /// Initial state at `(x, y)` (or `(λ, θ)`), written into `out`.
    pub fn initial(&self, x: f64, y: f64, out: &mut [f64]) {
        let p = &self.params;
        match self.case {
            CaseId::AdvectionSine => out[0] = ic_advection_sine(x, y),
            CaseId::GeostrophicAdjustment => {
                out[0] = ic_geostrophic_height(x, y, p.length, p.h0, p.h1, p.sigma);
                out[1] = 0.0;
                out[2] = 0.0;
            }
            CaseId::WilliamsonTc2 => {
                let (h, u, v) = ic_williamson_tc2(x, y, &p.constants);
                out.copy_from_slice(&[h, h * u, h * v]);
            }
            CaseId::WilliamsonTc6 => {
                let (h, u, v) = ic_williamson_tc6(x, y, &p.constants, p.h0);
                out.copy_from_slice(&[h, h * u, h * v]);
            }
        }
    }

    /// Exact solution at time `t`, when one is known.
    pub fn exact(&self, t: f64, x: f64, y: f64, out: &mut [f64]) -> bool {
        match self.case {
            CaseId::AdvectionSine => {
                let l = self.params.length;
                let xs = (x - self.params.beta[0] * t).rem_euclid(l);
                let ys = (y - self.params.beta[1] * t).rem_euclid(l);
                out[0] = ic_advection_sine(xs, ys);
                true
            }
            CaseId::WilliamsonTc2 => {
                self.initial(x, y, out);
                true
            }
            _ => false,
        }
    }
}

/// `sin(2πx) sin(2πy)`.
pub fn ic_advection_sine(x: f64, y: f64) -> f64 {
    (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
}

/// Gaussian bump on a resting layer, centred in `[0, L]²`.
pub fn ic_geostrophic_height(x: f64, y: f64, l: f64, h0: f64, h1: f64, sigma: f64) -> f64 {
    let (dx, dy) = (x - 0.5 * l, y - 0.5 * l);
    h0 + h1 * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Steady zonal flow: returns `(h, u, v)` at longitude `lambda`, latitude
/// `theta`.
pub fn ic_williamson_tc2(_lambda: f64, theta: f64, c: &PhysicalConstants) -> (f64, f64, f64) {
    let u0 = williamson::tc2_u0(c.radius);
    let s = theta.sin();
    let gh = williamson::TC2_GH0 - (c.radius * c.omega * u0 + 0.5 * u0 * u0) * s * s;
    (gh / c.gravity, u0 * theta.cos(), 0.0)
}

/// Rossby-Haurwitz wave: returns `(h, u, v)`.
pub fn ic_williamson_tc6(lambda: f64, theta: f64, c: &PhysicalConstants, h0: f64) -> (f64, f64, f64) {
    let a = c.radius;
    let (w, k) = (williamson::TC6_OMEGA, williamson::TC6_K);
    let r = williamson::TC6_WAVENUMBER;
    let rf = r as f64;
    let (s, co) = (theta.sin(), theta.cos());
    let cr1 = co.powi(r - 1);
    let cr = co.powi(r);
    let c2r = co.powi(2 * r);
    let c2r2 = co.powi(2 * r - 2);
    let u = a * w * co + a * k * cr1 * (rf * s * s - co * co) * (rf * lambda).cos();
    let v = -a * k * rf * cr1 * s * (rf * lambda).sin();
    let aa = 0.5 * w * (2.0 * c.omega + w) * co * co
        + 0.25 * k * k * (c2r * ((rf + 1.0) * co * co + (2.0 * rf * rf - rf - 2.0)) - 2.0 * rf * rf * c2r2);
    let bb = 2.0 * (c.omega + w) * k / ((rf + 1.0) * (rf + 2.0))
        * cr
        * ((rf * rf + 2.0 * rf + 2.0) - (rf + 1.0) * (rf + 1.0) * co * co);
    let cc = 0.25 * k * k * c2r * ((rf + 1.0) * co * co - (rf + 2.0));
    let gh = c.gravity * h0 + a * a * (aa + bb * (rf * lambda).cos() + cc * (2.0 * rf * lambda).cos());
    (gh / c.gravity, u, v)
}

/// Eastward angular phase speed of the Rossby-Haurwitz pattern from
/// barotropic vorticity theory, in rad/s.
pub fn tc6_phase_speed(c: &PhysicalConstants) -> f64 {
    let r = williamson::TC6_WAVENUMBER as f64;
    (r * (3.0 + r) * williamson::TC6_OMEGA - 2.0 * c.omega) / ((1.0 + r) * (2.0 + r))
}
