//! Explicit SSP Runge-Kutta schemes of order 1 to 4 and the driver loop.

use std::time::Instant;

use crate::dg::DgOperator;
use crate::error::{Error, Result};
use crate::field::Field;

/// Explicit Butcher tableau; `a` is row-major `s × s`, strictly lower
/// triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub s: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.s + j]
    }
}

/// SSP-RK tableau of the given order.
pub fn tableau(order: usize) -> Result<ButcherTableau> {
    let t = match order {
        1 => ButcherTableau {
            s: 1,
            a: vec![0.0],
            b: vec![1.0],
            c: vec![0.0],
        },
        2 => ButcherTableau {
            s: 2,
            a: vec![0.0, 0.0, 1.0, 0.0],
            b: vec![0.5, 0.5],
            c: vec![0.0, 1.0],
        },
        3 => ButcherTableau {
            s: 3,
            #[rustfmt::skip]
            a: vec![
                0.0, 0.0, 0.0,
                1.0, 0.0, 0.0,
                0.25, 0.25, 0.0,
            ],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            c: vec![0.0, 1.0, 0.5],
        },
        4 => ButcherTableau {
            s: 4,
            #[rustfmt::skip]
            a: vec![
                0.0, 0.0, 0.0, 0.0,
                0.5, 0.0, 0.0, 0.0,
                0.0, 0.5, 0.0, 0.0,
                0.0, 0.0, 1.0, 0.0,
            ],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        },
        _ => return Err(Error::Config(format!("unsupported Runge-Kutta order {order}"))),
    };
    Ok(t)
}

/// A semi-discrete system `du/dt = rhs(t, u)`.
pub trait OdeSystem {
    type State: Clone;

    fn rhs(&mut self, t: f64, u: &Self::State, out: &mut Self::State) -> Result<()>;

    /// `out = base + scale * Σ c_i terms_i`; zero coefficients contribute
    /// nothing.
    fn combine(
        &mut self,
        base: &Self::State,
        scale: f64,
        terms: &[(f64, &Self::State)],
        out: &mut Self::State,
    ) -> Result<()>;

    fn is_finite(&self, u: &Self::State) -> bool;
}

impl OdeSystem for DgOperator {
    type State = Field;

    fn rhs(&mut self, _t: f64, u: &Field, out: &mut Field) -> Result<()> {
        DgOperator::rhs(self, u, out)
    }

    fn combine(&mut self, base: &Field, scale: f64, terms: &[(f64, &Field)], out: &mut Field) -> Result<()> {
        DgOperator::combine(self, base, scale, terms, out)
    }

    fn is_finite(&self, u: &Field) -> bool {
        u.values().iter().all(|v| v.is_finite())
    }
}

/// ODE system on a plain vector given by a closure.
pub struct VecOde<F>(pub F);

impl<F> OdeSystem for VecOde<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    type State = Vec<f64>;

    fn rhs(&mut self, t: f64, u: &Vec<f64>, out: &mut Vec<f64>) -> Result<()> {
        (self.0)(t, u, out);
        Ok(())
    }

    fn combine(&mut self, base: &Vec<f64>, scale: f64, terms: &[(f64, &Vec<f64>)], out: &mut Vec<f64>) -> Result<()> {
        for (d, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut any = false;
            for (c, f) in terms {
                if *c != 0.0 {
                    acc += c * f[d];
                    any = true;
                }
            }
            *o = if any { base[d] + scale * acc } else { base[d] };
        }
        Ok(())
    }

    fn is_finite(&self, u: &Vec<f64>) -> bool {
        u.iter().all(|v| v.is_finite())
    }
}

/// Stage storage for repeated steps with one tableau.
pub struct RungeKutta<S> {
    tableau: ButcherTableau,
    k: Vec<S>,
    y: S,
}

impl<S: Clone> RungeKutta<S> {
    pub fn new(tableau: ButcherTableau, template: &S) -> Self {
        RungeKutta {
            k: vec![template.clone(); tableau.s],
            y: template.clone(),
            tableau,
        }
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    /// Advances `u` from `t` by `dt`. `step` only labels a divergence error.
    pub fn step<Sys>(&mut self, sys: &mut Sys, u: &mut S, t: f64, dt: f64, step: usize) -> Result<()>
    where
        Sys: OdeSystem<State = S>,
    {
        let tab = &self.tableau;
        for i in 0..tab.s {
            let (done, rest) = self.k.split_at_mut(i);
            let ki = &mut rest[0];
            if i == 0 {
                sys.rhs(t, u, ki)?;
            } else {
                let terms: Vec<(f64, &S)> = (0..i).map(|j| (tab.a(i, j), &done[j])).collect();
                sys.combine(u, dt, &terms, &mut self.y)?;
                sys.rhs(t + tab.c[i] * dt, &self.y, ki)?;
            }
        }
        let terms: Vec<(f64, &S)> = (0..tab.s).map(|i| (tab.b[i], &self.k[i])).collect();
        sys.combine(u, dt, &terms, &mut self.y)?;
        if !sys.is_finite(&self.y) {
            return Err(Error::Divergence { step, time: t });
        }
        std::mem::swap(u, &mut self.y);
        Ok(())
    }
}

/// One RK step with freshly allocated stages.
pub fn rk_step<Sys: OdeSystem>(
    sys: &mut Sys,
    u: &Sys::State,
    t: f64,
    dt: f64,
    tableau: &ButcherTableau,
) -> Result<Sys::State> {
    let mut rk = RungeKutta::new(tableau.clone(), u);
    let mut out = u.clone();
    rk.step(sys, &mut out, t, dt, 0)?;
    Ok(out)
}

/// Fixed step or Courant number `C = p c Δt / H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    Courant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeControls {
    pub dt: f64,
    pub t_final: f64,
}

impl TimeControls {
    /// Resolves `step` into a time step given the degree `p`, the minimum
    /// element diameter `h` and the largest signal speed `c_max`.
    pub fn new(step: StepSize, t_final: f64, p: usize, h: f64, c_max: f64) -> Result<Self> {
        let dt = match step {
            StepSize::Fixed(dt) => dt,
            StepSize::Courant(c) => c * h / (p.max(1) as f64 * c_max),
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step {dt} is not positive")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!("final time {t_final} is invalid")));
        }
        Ok(TimeControls { dt, t_final })
    }

    /// `ceil(t_final / dt)`, ignoring round-off just above an integer.
    pub fn num_steps(&self) -> usize {
        let r = self.t_final / self.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-10 * n.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// 1-based index of the step just completed.
    pub step: usize,
    pub num_steps: usize,
    pub time: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub steps: usize,
    pub dt: f64,
    pub last_dt: f64,
    pub t_final: f64,
    pub wall_seconds: f64,
}

/// Advances `u` from 0 to `controls.t_final`. The last step is shortened to
/// land on `t_final`; `callback` runs after every step.
pub fn integrate<Sys, F>(
    sys: &mut Sys,
    u: &mut Sys::State,
    controls: &TimeControls,
    tableau: &ButcherTableau,
    mut callback: F,
) -> Result<StepLog>
where
    Sys: OdeSystem,
    F: FnMut(&StepInfo, &Sys::State) -> Result<()>,
{
    let start = Instant::now();
    let n = controls.num_steps();
    let mut rk = RungeKutta::new(tableau.clone(), u);
    let mut last_dt = 0.0;
    let mut t = 0.0;
    for s in 0..n {
        let t_next = if s + 1 == n {
            controls.t_final
        } else {
            (s + 1) as f64 * controls.dt
        };
        let dt = t_next - t;
        rk.step(sys, u, t, dt, s + 1)?;
        t = t_next;
        last_dt = dt;
        callback(
            &StepInfo {
                step: s + 1,
                num_steps: n,
                time: t,
                dt,
            },
            u,
        )?;
    }
    Ok(StepLog {
        steps: n,
        dt: controls.dt,
        last_dt,
        t_final: controls.t_final,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> VecOde<impl FnMut(f64, &[f64], &mut [f64])> {
        VecOde(|_t: f64, u: &[f64], out: &mut [f64]| out[0] = -u[0])
    }

    #[test]
    fn tableaux_are_consistent() {
        for order in 1..=4 {
            let t = tableau(order).unwrap();
            assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for i in 0..t.s {
                let row: f64 = (0..t.s).map(|j| t.a(i, j)).sum();
                assert!((row - t.c[i]).abs() < 1e-15);
                for j in i..t.s {
                    assert_eq!(t.a(i, j), 0.0);
                }
            }
        }
        assert!(tableau(5).is_err());
        assert!(tableau(0).is_err());
    }

    #[test]
    fn rk4_one_step_of_decay() {
        let y = rk_step(&mut decay(), &vec![1.0], 0.0, 0.1, &tableau(4).unwrap()).unwrap();
        assert!((y[0] - 0.9048375).abs() < 1e-7);
    }

    #[test]
    fn zero_rhs_leaves_state_bitwise() {
        let mut sys = VecOde(|_t: f64, _u: &[f64], out: &mut [f64]| out.fill(0.0));
        let u0 = vec![0.1, -3.7, 1e-300];
        for order in 1..=4 {
            let y = rk_step(&mut sys, &u0, 0.0, 0.3, &tableau(order).unwrap()).unwrap();
            assert_eq!(y, u0);
        }
    }

    #[test]
    fn rk1_is_forward_euler() {
        let mut sys = VecOde(|_t: f64, u: &[f64], out: &mut [f64]| out[0] = 2.0 * u[0] + 1.0);
        let y = rk_step(&mut sys, &vec![0.5], 0.0, 0.25, &tableau(1).unwrap()).unwrap();
        assert_eq!(y[0], 0.5 + 0.25 * 2.0);
    }

    #[test]
    fn divergence_reports_step() {
        let mut sys = VecOde(|_t: f64, _u: &[f64], out: &mut [f64]| out[0] = f64::NAN);
        let mut u = vec![1.0];
        let c = TimeControls::new(StepSize::Fixed(0.1), 1.0, 1, 1.0, 1.0).unwrap();
        let err = integrate(&mut sys, &mut u, &c, &tableau(2).unwrap(), |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 1, .. }));
    }

    #[test]
    fn step_count_and_truncation() {
        let c = TimeControls::new(StepSize::Fixed(0.3), 1.0, 1, 1.0, 1.0).unwrap();
        assert_eq!(c.num_steps(), 4);
        let mut u = vec![1.0];
        let log = integrate(&mut decay(), &mut u, &c, &tableau(1).unwrap(), |_, _| Ok(())).unwrap();
        assert_eq!(log.steps, 4);
        assert!((log.last_dt - 0.1).abs() < 1e-15);
        let c0 = TimeControls::new(StepSize::Fixed(0.3), 0.0, 1, 1.0, 1.0).unwrap();
        let mut u0 = vec![1.0];
        integrate(&mut decay(), &mut u0, &c0, &tableau(4).unwrap(), |_, _| Ok(())).unwrap();
        assert_eq!(u0, vec![1.0]);
        let c36 = TimeControls::new(StepSize::Fixed(100.0), 36000.0, 3, 1.0, 1.0).unwrap();
        assert_eq!(c36.num_steps(), 360);
    }

    #[test]
    fn courant_derived_step() {
        let c = TimeControls::new(StepSize::Courant(0.1), 1.0, 2, 0.05, 1.0).unwrap();
        assert!((c.dt - 0.1 * 0.05 / 2.0).abs() < 1e-18);
    }
}
