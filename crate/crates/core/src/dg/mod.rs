//! The semi-discrete DG operator `dU/dt = M⁻¹ (volume - boundary + source)`.
//!
//! One evaluation runs three kernels over the element grid:
//!
//! 1. nodal values and fluxes at interior quadrature points, plus edge traces
//!    (state, normal flux, max wavespeed) written into a halo-padded field;
//! 2. halo exchange and Rusanov fluxes on every edge;
//! 3. volume, boundary and source contractions followed by `M⁻¹`.
//!
//! The stage combinations of the time integrator are also booked under
//! kernel 3.

pub mod element;

use std::time::Instant;

use crate::basis::{mass_matrix_planar, mass_matrix_sphere, Edge, MassMatrix, Vander};
use crate::error::{Error, Result};
use crate::field::{apply_kernel, scaled_sum, DataDims, ExecutionRegion, Extent, Field, FieldError};
use crate::mesh::{ElementMetrics, Mesh};
use crate::models::{Axis, FluxModel, NodeGeom, MAX_VARS};

pub use element::{
    boundary_integral, edge_trace, nodal_eval, rusanov_flux, source_integral, volume_integral, MAX_1D, MAX_P, MAX_PHI,
    MAX_Q,
};

/// How the Rusanov stabilization parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    /// Per edge: max wavespeed over the traces of both adjacent elements.
    Local,
    /// One value everywhere.
    Global(f64),
}

/// Cumulative wall time and call count per kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelTimes {
    pub seconds: [f64; 3],
    pub calls: [u64; 3],
}

impl KernelTimes {
    pub fn total(&self) -> f64 {
        self.seconds.iter().sum()
    }
}

fn axis_of(edge: Edge) -> Axis {
    if edge.is_x_normal() {
        Axis::X
    } else {
        Axis::Y
    }
}

pub struct DgOperator {
    mesh: Mesh,
    vander: Vander,
    model: Box<dyn FluxModel>,
    nz: usize,
    metrics: ElementMetrics,
    alpha: AlphaMode,
    mass: Vec<MassMatrix>,
    /// `M⁻¹`, replicated along x (and along y on planar meshes).
    minv: Field,
    /// Per row: interior node geometry.
    geom_int: Vec<Vec<NodeGeom>>,
    /// Per row: geometry of left/right edge nodes.
    geom_vedge: Vec<Vec<NodeGeom>>,
    /// Per horizontal grid line `0..=ny`.
    geom_hline: Vec<NodeGeom>,
    nodal: Field,
    traces: Field,
    numflux: Field,
    times: KernelTimes,
}

impl std::fmt::Debug for DgOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DgOperator")
            .field("mesh", &self.mesh)
            .field("p", &self.vander.p)
            .field("nz", &self.nz)
            .field("model", &self.model)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl DgOperator {
    pub fn new(mesh: Mesh, p: usize, nz: usize, model: Box<dyn FluxModel>) -> Result<Self> {
        if p > MAX_P {
            return Err(Error::Config(format!("polynomial degree {p} exceeds {MAX_P}")));
        }
        if nz == 0 {
            return Err(Error::Config("nz must be at least 1".into()));
        }
        let vander = Vander::for_degree(p);
        let metrics = mesh.metrics();
        let (nx, ny) = (mesh.nx, mesh.ny);
        let nv = model.n_vars();
        let (nphi, nq, n1d) = (vander.nphi, vander.nq(), vander.n1d());
        let sphere = mesh.is_sphere();

        let mass: Vec<MassMatrix> = if sphere {
            (0..ny)
                .map(|j| mass_matrix_sphere(&vander, metrics.determ, mesh.y_edge(j), mesh.y_edge(j + 1)))
                .collect::<Result<_, _>>()?
        } else {
            vec![mass_matrix_planar(&vander, metrics.determ)?]
        };
        let mut minv = Field::new([1, ny, 1], DataDims::Matrix(nphi, nphi), [false, sphere, false], 0.0)?;
        for (j, m) in mass.iter().enumerate() {
            minv.at_mut([0, j, 0]).copy_from_slice(&m.inv);
        }

        let geom = |theta: f64| {
            if sphere {
                NodeGeom::at_latitude(theta)
            } else {
                NodeGeom::FLAT
            }
        };
        let geom_int = (0..ny)
            .map(|j| {
                (0..nq)
                    .map(|q| geom(mesh.map_point(0, j, vander.xi[q], vander.eta[q]).1))
                    .collect()
            })
            .collect();
        let geom_vedge = (0..ny)
            .map(|j| {
                (0..n1d)
                    .map(|t| geom(mesh.map_point(0, j, -1.0, vander.quad.nodes[t]).1))
                    .collect()
            })
            .collect();
        let geom_hline = (0..=ny).map(|j| geom(mesh.y_edge(j))).collect();

        let nodal = Field::full([nx, ny, nz], DataDims::Vector(3 * nv * nq), 0.0)?;
        let traces = Field::full([nx + 2, ny + 2, nz], DataDims::Matrix(4, 2 * nv * n1d + 1), 0.0)?;
        let numflux = Field::full([nx, ny, nz], DataDims::Matrix(4, nv * n1d), 0.0)?;

        Ok(DgOperator {
            mesh,
            vander,
            model,
            nz,
            metrics,
            alpha: AlphaMode::Local,
            mass,
            minv,
            geom_int,
            geom_vedge,
            geom_hline,
            nodal,
            traces,
            numflux,
            times: KernelTimes::default(),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn vander(&self) -> &Vander {
        &self.vander
    }

    pub fn model(&self) -> &dyn FluxModel {
        self.model.as_ref()
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn n_vars(&self) -> usize {
        self.model.n_vars()
    }

    pub fn metrics(&self) -> ElementMetrics {
        self.metrics
    }

    pub fn alpha_mode(&self) -> AlphaMode {
        self.alpha
    }

    pub fn set_alpha_mode(&mut self, mode: AlphaMode) {
        self.alpha = mode;
    }

    /// Mass matrix of element row `j`.
    pub fn mass_matrix(&self, j: usize) -> &MassMatrix {
        if self.mesh.is_sphere() {
            &self.mass[j]
        } else {
            &self.mass[0]
        }
    }

    /// Zero state with the operator's layout.
    pub fn zero_state(&self) -> Field {
        Field::full(
            [self.mesh.nx, self.mesh.ny, self.nz],
            DataDims::Matrix(self.n_vars(), self.vander.nphi),
            0.0,
        )
        .expect("valid mesh extents")
    }

    pub fn kernel_times(&self) -> KernelTimes {
        self.times
    }

    pub fn reset_kernel_times(&mut self) {
        self.times = KernelTimes::default();
    }

    /// Numerical flux on `edge` of element `(i, j, k)` from the last
    /// [`rhs`](Self::rhs) call, `nv × n1d` values along the positive axis
    /// direction. Pole edges hold zeros.
    pub fn edge_flux(&self, i: usize, j: usize, k: usize, edge: Edge) -> &[f64] {
        let n = self.n_vars() * self.vander.n1d();
        &self.numflux.at([i, j, k])[edge as usize * n..(edge as usize + 1) * n]
    }

    fn check_state(&self, state: &Field) -> Result<()> {
        let expect = [self.mesh.nx, self.mesh.ny, self.nz];
        if state.extent() != expect
            || state.mask() != [true; 3]
            || state.dims() != DataDims::Matrix(self.n_vars(), self.vander.nphi)
        {
            return Err(FieldError::ShapeMismatch(format!(
                "state {:?} {:?} does not match operator grid {expect:?}",
                state.extent(),
                state.dims()
            ))
            .into());
        }
        Ok(())
    }

    fn is_pole(&self, j: usize, edge: Edge) -> bool {
        self.mesh.is_sphere() && ((edge == Edge::Bottom && j == 0) || (edge == Edge::Top && j + 1 == self.mesh.ny))
    }

    fn edge_geom(&self, j: usize, edge: Edge, t: usize) -> NodeGeom {
        match edge {
            Edge::Left | Edge::Right => self.geom_vedge[j][t],
            Edge::Bottom => self.geom_hline[j],
            Edge::Top => self.geom_hline[j + 1],
        }
    }

    /// Largest physical signal speed over all interior nodes.
    pub fn max_speed(&self, state: &Field) -> Result<f64> {
        self.check_state(state)?;
        let nv = self.n_vars();
        let (nphi, nq) = (self.vander.nphi, self.vander.nq());
        let mut c: f64 = 0.0;
        let mut uq = vec![0.0; nv * nq];
        for i in 0..self.mesh.nx {
            for j in 0..self.mesh.ny {
                for k in 0..self.nz {
                    let s = state.at([i, j, k]);
                    for v in 0..nv {
                        nodal_eval(&self.vander, &s[v * nphi..(v + 1) * nphi], &mut uq[v * nq..]);
                    }
                    for q in 0..nq {
                        let mut u = [0.0; MAX_VARS];
                        for v in 0..nv {
                            u[v] = uq[v * nq + q];
                        }
                        c = c.max(self.model.max_speed(&u[..nv], self.geom_int[j][q])?);
                    }
                }
            }
        }
        Ok(c)
    }

    /// Largest edge wavespeed (in mesh-coordinate units) over all elements;
    /// a valid choice for [`AlphaMode::Global`].
    pub fn max_edge_wavespeed(&mut self, state: &Field) -> Result<f64> {
        self.check_state(state)?;
        self.kernel_traces(state)?;
        let n1d = self.vander.n1d();
        let nv = self.n_vars();
        let w = 2 * nv * n1d + 1;
        let mut a: f64 = 0.0;
        for i in 0..self.mesh.nx {
            for j in 0..self.mesh.ny {
                for k in 0..self.nz {
                    let tr = self.traces.at([i + 1, j + 1, k]);
                    for e in Edge::ALL {
                        if !self.is_pole(j, e) {
                            a = a.max(tr[e as usize * w + w - 1]);
                        }
                    }
                }
            }
        }
        Ok(a)
    }

    /// Evaluates `dU/dt` for `state` into `out`.
    pub fn rhs(&mut self, state: &Field, out: &mut Field) -> Result<()> {
        self.check_state(state)?;
        self.check_state(out)?;
        let t0 = Instant::now();
        self.kernel_nodal(state)?;
        self.kernel_traces(state)?;
        let t1 = Instant::now();
        self.kernel_numflux()?;
        let t2 = Instant::now();
        self.kernel_assemble(out)?;
        let t3 = Instant::now();
        self.times.seconds[0] += (t1 - t0).as_secs_f64();
        self.times.seconds[1] += (t2 - t1).as_secs_f64();
        self.times.seconds[2] += (t3 - t2).as_secs_f64();
        for c in &mut self.times.calls {
            *c += 1;
        }
        Ok(())
    }

    /// `out = base + scale * Σ c_i f_i` over the whole state, timed as part
    /// of kernel 3.
    pub fn combine(&mut self, base: &Field, scale: f64, terms: &[(f64, &Field)], out: &mut Field) -> Result<()> {
        let t0 = Instant::now();
        scaled_sum(base, scale, terms, out, &ExecutionRegion::covering(out))?;
        self.times.seconds[2] += t0.elapsed().as_secs_f64();
        Ok(())
    }

    fn domain(&self) -> [usize; 3] {
        [self.mesh.nx, self.mesh.ny, self.nz]
    }

    fn kernel_nodal(&mut self, state: &Field) -> Result<()> {
        let vander = &self.vander;
        let model = self.model.as_ref();
        let geom_int = &self.geom_int;
        let nv = model.n_vars();
        let (nphi, nq) = (vander.nphi, vander.nq());
        let with_source = model.has_source();
        let region = ExecutionRegion::new(self.domain());
        apply_kernel(
            &[state],
            &[Extent::ZERO],
            &mut self.nodal,
            &region,
            |nb, out: &mut [f64]| -> Result<()> {
                let s = nb.center(0);
                let j = nb.point()[1];
                let mut uq = [0.0; MAX_VARS * MAX_Q];
                for v in 0..nv {
                    nodal_eval(vander, &s[v * nphi..(v + 1) * nphi], &mut uq[v * nq..(v + 1) * nq]);
                }
                let (fb, rest) = out.split_at_mut(nv * nq);
                let (gb, sb) = rest.split_at_mut(nv * nq);
                for q in 0..nq {
                    let mut u = [0.0; MAX_VARS];
                    for v in 0..nv {
                        u[v] = uq[v * nq + q];
                    }
                    let (mut f, mut g, mut src) = ([0.0; MAX_VARS], [0.0; MAX_VARS], [0.0; MAX_VARS]);
                    let geom = geom_int[j][q];
                    model.flux(&u[..nv], geom, &mut f[..nv], &mut g[..nv])?;
                    if with_source {
                        model.source(&u[..nv], geom, &mut src[..nv])?;
                    }
                    for v in 0..nv {
                        fb[v * nq + q] = f[v];
                        gb[v * nq + q] = g[v];
                        sb[v * nq + q] = src[v];
                    }
                }
                Ok(())
            },
        )
    }

    fn kernel_traces(&mut self, state: &Field) -> Result<()> {
        let mut traces = std::mem::replace(&mut self.traces, Field::replicated(DataDims::Scalar, &[0.0])?);
        let this = &*self;
        let vander = &this.vander;
        let model = this.model.as_ref();
        let nv = model.n_vars();
        let (nphi, n1d) = (vander.nphi, vander.n1d());
        let w = 2 * nv * n1d + 1;
        let region = ExecutionRegion::new(this.domain()).origin(1, [1, 1, 0]);
        let res = apply_kernel(
            &[state],
            &[Extent::ZERO],
            &mut traces,
            &region,
            |nb, out: &mut [f64]| -> Result<()> {
                let s = nb.center(0);
                let j = nb.point()[1];
                for e in Edge::ALL {
                    let blk = &mut out[e as usize * w..(e as usize + 1) * w];
                    if this.is_pole(j, e) {
                        blk.fill(0.0);
                        continue;
                    }
                    let axis = axis_of(e);
                    let (ub, rest) = blk.split_at_mut(nv * n1d);
                    let (fb, wsb) = rest.split_at_mut(nv * n1d);
                    for v in 0..nv {
                        edge_trace(vander, e, &s[v * nphi..(v + 1) * nphi], &mut ub[v * n1d..(v + 1) * n1d]);
                    }
                    let mut ws: f64 = 0.0;
                    for t in 0..n1d {
                        let mut u = [0.0; MAX_VARS];
                        for v in 0..nv {
                            u[v] = ub[v * n1d + t];
                        }
                        let geom = this.edge_geom(j, e, t);
                        let mut fnv = [0.0; MAX_VARS];
                        model.normal_flux(&u[..nv], geom, axis, &mut fnv)?;
                        for v in 0..nv {
                            fb[v * n1d + t] = fnv[v];
                        }
                        ws = ws.max(model.max_wavespeed(&u[..nv], geom, axis)?);
                    }
                    wsb[0] = ws;
                }
                Ok(())
            },
        );
        self.traces = traces;
        res?;
        self.traces.wrap_halo(0, 1)?;
        if !self.mesh.is_sphere() {
            self.traces.wrap_halo(1, 1)?;
        }
        Ok(())
    }

    fn kernel_numflux(&mut self) -> Result<()> {
        let nv = self.n_vars();
        let n1d = self.vander.n1d();
        let w = 2 * nv * n1d + 1;
        let alpha_mode = self.alpha;
        let region = ExecutionRegion::new(self.domain()).origin(0, [1, 1, 0]);
        let mut numflux = std::mem::replace(&mut self.numflux, Field::replicated(DataDims::Scalar, &[0.0])?);
        let this = &*self;
        let res = apply_kernel(
            &[&this.traces],
            &[Extent::symmetric([1, 1, 0])],
            &mut numflux,
            &region,
            |nb, out: &mut [f64]| -> Result<()> {
                let j = nb.point()[1];
                for e in Edge::ALL {
                    let ob = &mut out[e as usize * nv * n1d..(e as usize + 1) * nv * n1d];
                    if this.is_pole(j, e) {
                        ob.fill(0.0);
                        continue;
                    }
                    // (element, edge block) on the low and high side of the edge
                    let (lo, hi) = match e {
                        Edge::Left => ((nb.at(0, [-1, 0, 0]), Edge::Right), (nb.center(0), Edge::Left)),
                        Edge::Right => ((nb.center(0), Edge::Right), (nb.at(0, [1, 0, 0]), Edge::Left)),
                        Edge::Bottom => ((nb.at(0, [0, -1, 0]), Edge::Top), (nb.center(0), Edge::Bottom)),
                        Edge::Top => ((nb.center(0), Edge::Top), (nb.at(0, [0, 1, 0]), Edge::Bottom)),
                    };
                    let bl = &lo.0[lo.1 as usize * w..(lo.1 as usize + 1) * w];
                    let bh = &hi.0[hi.1 as usize * w..(hi.1 as usize + 1) * w];
                    let alpha = match alpha_mode {
                        AlphaMode::Local => bl[w - 1].max(bh[w - 1]),
                        AlphaMode::Global(a) => a,
                    };
                    for t in 0..n1d {
                        let a = alpha * this.model.jump_weight(this.edge_geom(j, e, t));
                        for v in 0..nv {
                            let (iu, ifl) = (v * n1d + t, nv * n1d + v * n1d + t);
                            ob[v * n1d + t] = rusanov_flux(bl[iu], bh[iu], bl[ifl], bh[ifl], a);
                        }
                    }
                }
                Ok(())
            },
        );
        self.numflux = numflux;
        res
    }

    fn kernel_assemble(&mut self, out: &mut Field) -> Result<()> {
        let vander = &self.vander;
        let metrics = &self.metrics;
        let nv = self.n_vars();
        let (nphi, nq, n1d) = (vander.nphi, vander.nq(), vander.n1d());
        let with_source = self.model.has_source();
        let region = ExecutionRegion::new(self.domain());
        let this = &*self;
        apply_kernel(
            &[&this.nodal, &this.numflux, &this.minv],
            &[Extent::ZERO; 3],
            out,
            &region,
            |nb, o: &mut [f64]| -> Result<()> {
                let (nodal, nf, minv) = (nb.center(0), nb.center(1), nb.center(2));
                let j = nb.point()[1];
                let skip = Edge::ALL.map(|e| this.is_pole(j, e));
                for v in 0..nv {
                    let fx = &nodal[v * nq..(v + 1) * nq];
                    let fy = &nodal[(nv + v) * nq..(nv + v + 1) * nq];
                    let mut vol = [0.0; MAX_PHI];
                    volume_integral(vander, metrics, fx, fy, &mut vol);
                    let fstar = Edge::ALL.map(|e| {
                        let base = e as usize * nv * n1d + v * n1d;
                        &nf[base..base + n1d]
                    });
                    let mut bnd = [0.0; MAX_PHI];
                    boundary_integral(vander, metrics, fstar, skip, &mut bnd);
                    let mut src = [0.0; MAX_PHI];
                    if with_source {
                        let s = &nodal[(2 * nv + v) * nq..(2 * nv + v + 1) * nq];
                        source_integral(vander, metrics, s, &mut src);
                    }
                    let mut total = [0.0; MAX_PHI];
                    for m in 0..nphi {
                        total[m] = vol[m] - bnd[m] + src[m];
                    }
                    crate::field::tensor::matvec(minv, nphi, nphi, &total[..nphi], &mut o[v * nphi..(v + 1) * nphi]);
                }
                Ok(())
            },
        )
    }
}
