//! Per-element building blocks of the DG operator. Every function works on
//! one variable of one element; the kernels in the parent module loop over
//! variables and elements.

use crate::basis::{Edge, Vander};
use crate::field::tensor;
use crate::mesh::ElementMetrics;

/// Highest supported polynomial degree.
pub const MAX_P: usize = 4;
pub const MAX_1D: usize = MAX_P + 1;
pub const MAX_PHI: usize = MAX_1D * MAX_1D;
pub const MAX_Q: usize = MAX_1D * MAX_1D;

/// Rusanov flux `(f_in + f_out)/2 - α/2 (u_out - u_in)` at one node.
#[inline]
pub fn rusanov_flux(u_in: f64, u_out: f64, fn_in: f64, fn_out: f64, alpha: f64) -> f64 {
    0.5 * (fn_in + fn_out) - 0.5 * alpha * (u_out - u_in)
}

/// Interior nodal values `phi @ û`.
#[inline]
pub fn nodal_eval(vander: &Vander, modal: &[f64], out: &mut [f64]) {
    tensor::matvec(&vander.phi, vander.nq(), vander.nphi, modal, out);
}

/// Edge trace `phi_edge[edge] @ û`.
#[inline]
pub fn edge_trace(vander: &Vander, edge: Edge, modal: &[f64], out: &mut [f64]) {
    tensor::matvec(&vander.phi_edge[edge as usize], vander.n1d(), vander.nphi, modal, out);
}

/// `determ · (Gxᵀ (F∘w) / bd_det_x + Gyᵀ (G∘w) / bd_det_y)`.
pub fn volume_integral(vander: &Vander, metrics: &ElementMetrics, fx: &[f64], fy: &[f64], out: &mut [f64]) {
    let (nq, nphi) = (vander.nq(), vander.nphi);
    let mut fw = [0.0; MAX_Q];
    let mut gw = [0.0; MAX_Q];
    for q in 0..nq {
        fw[q] = fx[q] * vander.w[q];
        gw[q] = fy[q] * vander.w[q];
    }
    let mut ax = [0.0; MAX_PHI];
    let mut ay = [0.0; MAX_PHI];
    tensor::matvec_transposed(&vander.phi_grad_x, nq, nphi, &fw[..nq], &mut ax);
    tensor::matvec_transposed(&vander.phi_grad_y, nq, nphi, &gw[..nq], &mut ay);
    for j in 0..nphi {
        out[j] = metrics.determ * (ax[j] / metrics.bd_det_x + ay[j] / metrics.bd_det_y);
    }
}

/// `determ · phiᵀ (S∘w)`.
pub fn source_integral(vander: &Vander, metrics: &ElementMetrics, s: &[f64], out: &mut [f64]) {
    let (nq, nphi) = (vander.nq(), vander.nphi);
    let mut sw = [0.0; MAX_Q];
    for q in 0..nq {
        sw[q] = s[q] * vander.w[q];
    }
    let mut a = [0.0; MAX_PHI];
    tensor::matvec_transposed(&vander.phi, nq, nphi, &sw[..nq], &mut a);
    for j in 0..nphi {
        out[j] = metrics.determ * a[j];
    }
}

/// Edge Jacobian of `edge`: left/right edges run along y.
#[inline]
pub fn edge_jacobian(metrics: &ElementMetrics, edge: Edge) -> f64 {
    if edge.is_x_normal() {
        metrics.bd_det_y
    } else {
        metrics.bd_det_x
    }
}

/// `Σ_edges n_e · bd_det_e · phi_edgeᵀ (f*∘w_edge)`, where `fstar[e]` holds
/// the numerical flux along the positive axis direction and `n_e = ±1` is the
/// outward normal sign. Edges with `skip[e]` contribute nothing.
pub fn boundary_integral(
    vander: &Vander,
    metrics: &ElementMetrics,
    fstar: [&[f64]; 4],
    skip: [bool; 4],
    out: &mut [f64],
) {
    let (n1d, nphi) = (vander.n1d(), vander.nphi);
    out[..nphi].fill(0.0);
    for e in Edge::ALL {
        if skip[e as usize] {
            continue;
        }
        let mut fw = [0.0; MAX_1D];
        for t in 0..n1d {
            fw[t] = fstar[e as usize][t] * vander.w_edge[t];
        }
        let mut a = [0.0; MAX_PHI];
        tensor::matvec_transposed(&vander.phi_edge[e as usize], n1d, nphi, &fw[..n1d], &mut a);
        let scale = e.normal_sign() * edge_jacobian(metrics, e);
        for j in 0..nphi {
            out[j] += scale * a[j];
        }
    }
}
