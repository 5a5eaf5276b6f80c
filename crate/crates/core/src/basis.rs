//! Legendre polynomials, Gauss-Legendre rules, the tensor-product modal basis
//! and its Vandermonde matrices, and element mass matrices.
//!
//! Mode `(a, b)` is the product `P_a(ξ) P_b(η)` of unnormalized Legendre
//! polynomials on the reference square `[-1, 1]²`, stored at index
//! `a * (p + 1) + b`. Interior quadrature node `(qx, qy)` is stored at
//! `qx * n + qy`.

use crate::field::{tensor, DataDims, Field};
use crate::mesh::Mesh;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    #[error("matrix is singular or not positive definite")]
    Singular,
    #[error("quadrature with {n} points cannot support degree {p}")]
    QuadratureTooCoarse { n: usize, p: usize },
}

/// `P_j(x)` by the three-term recurrence.
pub fn legendre_eval(j: usize, x: f64) -> f64 {
    legendre_pair(j, x).0
}

/// `P_j'(x)`.
pub fn legendre_deriv(j: usize, x: f64) -> f64 {
    legendre_pair(j, x).1
}

/// `(P_j(x), P_j'(x))`. The derivative uses `P_j' = j P_{j-1} + x P_{j-1}'`,
/// which stays finite at `x = ±1`.
pub fn legendre_pair(j: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut d0) = (1.0, 0.0);
    if j == 0 {
        return (p0, d0);
    }
    let (mut p1, mut d1) = (x, 1.0);
    for k in 1..j {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = (kf + 1.0) * p1 + x * d1;
        p0 = p1;
        d0 = d1;
        p1 = p2;
        d1 = d2;
    }
    let _ = (p0, d0);
    (p1, d1)
}

/// One-dimensional Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_{-1}^{1} f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre rule with `n ≥ 1` points (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> Quadrature {
    assert!(n >= 1, "quadrature needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        // roots come out descending from +1; mirror to keep exact symmetry
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Quadrature { nodes, weights }
}

/// Reference-element edges, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// ξ = -1
    Left = 0,
    /// ξ = +1
    Right = 1,
    /// η = -1
    Bottom = 2,
    /// η = +1
    Top = 3,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    pub fn opposite(self) -> Edge {
        match self {
            Edge::Left => Edge::Right,
            Edge::Right => Edge::Left,
            Edge::Bottom => Edge::Top,
            Edge::Top => Edge::Bottom,
        }
    }

    /// Sign of the outward normal along its axis.
    pub fn normal_sign(self) -> f64 {
        match self {
            Edge::Left | Edge::Bottom => -1.0,
            Edge::Right | Edge::Top => 1.0,
        }
    }

    /// True for edges normal to the x axis (left/right).
    pub fn is_x_normal(self) -> bool {
        matches!(self, Edge::Left | Edge::Right)
    }

    /// Reference coordinates of the `t`-th edge node given the 1-D node value.
    pub fn reference_point(self, s: f64) -> (f64, f64) {
        match self {
            Edge::Left => (-1.0, s),
            Edge::Right => (1.0, s),
            Edge::Bottom => (s, -1.0),
            Edge::Top => (s, 1.0),
        }
    }
}

/// Modal basis evaluated on a tensor-product quadrature.
#[derive(Debug, Clone)]
pub struct Vander {
    pub p: usize,
    pub nphi: usize,
    pub quad: Quadrature,
    /// Reference coordinates of interior node `q`.
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    /// `(n_q × nφ)` basis values at interior nodes.
    pub phi: Vec<f64>,
    pub phi_grad_x: Vec<f64>,
    pub phi_grad_y: Vec<f64>,
    /// `(n_1d × nφ)` traces, indexed by [`Edge`].
    pub phi_edge: [Vec<f64>; 4],
    /// Tensor-product interior weights (sum 4).
    pub w: Vec<f64>,
    /// 1-D edge weights (sum 2).
    pub w_edge: Vec<f64>,
}

/// Values and reference gradients of every mode at `(ξ, η)`.
pub fn eval_modes(p: usize, xi: f64, eta: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = p + 1;
    let px: Vec<(f64, f64)> = (0..n).map(|a| legendre_pair(a, xi)).collect();
    let py: Vec<(f64, f64)> = (0..n).map(|b| legendre_pair(b, eta)).collect();
    let mut v = Vec::with_capacity(n * n);
    let mut gx = Vec::with_capacity(n * n);
    let mut gy = Vec::with_capacity(n * n);
    for &(pa, da) in &px {
        for &(pb, db) in &py {
            v.push(pa * pb);
            gx.push(da * pb);
            gy.push(pa * db);
        }
    }
    (v, gx, gy)
}

impl Vander {
    pub fn new(p: usize, quad: Quadrature) -> Result<Self, BasisError> {
        let n = quad.n();
        if n < p + 1 {
            return Err(BasisError::QuadratureTooCoarse { n, p });
        }
        let nphi = (p + 1) * (p + 1);
        let nq = n * n;
        let mut xi = Vec::with_capacity(nq);
        let mut eta = Vec::with_capacity(nq);
        let mut w = Vec::with_capacity(nq);
        let mut phi = Vec::with_capacity(nq * nphi);
        let mut phi_grad_x = Vec::with_capacity(nq * nphi);
        let mut phi_grad_y = Vec::with_capacity(nq * nphi);
        for qx in 0..n {
            for qy in 0..n {
                let (x, y) = (quad.nodes[qx], quad.nodes[qy]);
                xi.push(x);
                eta.push(y);
                w.push(quad.weights[qx] * quad.weights[qy]);
                let (v, gx, gy) = eval_modes(p, x, y);
                phi.extend(v);
                phi_grad_x.extend(gx);
                phi_grad_y.extend(gy);
            }
        }
        let phi_edge = Edge::ALL.map(|e| {
            let mut m = Vec::with_capacity(n * nphi);
            for &s in &quad.nodes {
                let (x, y) = e.reference_point(s);
                m.extend(eval_modes(p, x, y).0);
            }
            m
        });
        Ok(Vander {
            p,
            nphi,
            xi,
            eta,
            phi,
            phi_grad_x,
            phi_grad_y,
            phi_edge,
            w,
            w_edge: quad.weights.clone(),
            quad,
        })
    }

    /// Basis with the default `p + 1` point rule.
    pub fn for_degree(p: usize) -> Self {
        Vander::new(p, gauss_legendre(p + 1)).expect("p + 1 points always suffice")
    }

    pub fn n1d(&self) -> usize {
        self.quad.n()
    }

    pub fn nq(&self) -> usize {
        self.w.len()
    }

    /// Nodal values `phi @ û` at the interior nodes.
    pub fn to_nodal(&self, modal: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nq()];
        tensor::matvec(&self.phi, self.nq(), self.nphi, modal, &mut out);
        out
    }

    /// Value of a modal expansion at reference coordinates.
    pub fn evaluate(&self, modal: &[f64], xi: f64, eta: f64) -> f64 {
        let n = self.p + 1;
        let px: Vec<f64> = (0..n).map(|a| legendre_eval(a, xi)).collect();
        let py: Vec<f64> = (0..n).map(|b| legendre_eval(b, eta)).collect();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += modal[a * n + b] * px[a] * py[b];
            }
        }
        acc
    }
}

/// Square dense matrix with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    pub n: usize,
    pub m: Vec<f64>,
    pub inv: Vec<f64>,
}

impl MassMatrix {
    fn from_matrix(n: usize, m: Vec<f64>) -> Result<Self, BasisError> {
        let mut inv = invert_spd(&m, n)?;
        // exact symmetry lets the transposed contraction stand in for M⁻¹ v
        for r in 0..n {
            for c in r + 1..n {
                let s = 0.5 * (inv[r * n + c] + inv[c * n + r]);
                inv[r * n + c] = s;
                inv[c * n + r] = s;
            }
        }
        Ok(MassMatrix { n, m, inv })
    }
}

/// `M_ij = determ Σ_q w_q φ_i φ_j` on a planar element with area Jacobian
/// `determ`.
pub fn mass_matrix_planar(vander: &Vander, determ: f64) -> Result<MassMatrix, BasisError> {
    weighted_mass(vander, determ, |_| 1.0)
}

/// `M_ij = determ Σ_q w_q φ_i φ_j cos θ_q` for an element spanning latitudes
/// `[theta_b, theta_t]` (any longitude: the result only depends on the row).
pub fn mass_matrix_sphere(vander: &Vander, determ: f64, theta_b: f64, theta_t: f64) -> Result<MassMatrix, BasisError> {
    let (mid, half) = (0.5 * (theta_b + theta_t), 0.5 * (theta_t - theta_b));
    weighted_mass(vander, determ, |eta| (mid + half * eta).cos())
}

fn weighted_mass(vander: &Vander, determ: f64, weight: impl Fn(f64) -> f64) -> Result<MassMatrix, BasisError> {
    let (nq, nphi) = (vander.nq(), vander.nphi);
    let mut m = vec![0.0; nphi * nphi];
    for q in 0..nq {
        let wq = determ * vander.w[q] * weight(vander.eta[q]);
        let row = &vander.phi[q * nphi..(q + 1) * nphi];
        for i in 0..nphi {
            for j in i..nphi {
                m[i * nphi + j] += wq * row[i] * row[j];
            }
        }
    }
    for i in 0..nphi {
        for j in 0..i {
            m[i * nphi + j] = m[j * nphi + i];
        }
    }
    MassMatrix::from_matrix(nphi, m)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn invert_spd(a: &[f64], n: usize) -> Result<Vec<f64>, BasisError> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(BasisError::Singular);
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for c in 0..n {
        // solve L y = e_c, then Lᵀ x = y
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i * n + k] * col[k];
            }
            col[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in i + 1..n {
                s -= l[k * n + i] * col[k];
            }
            col[i] = s / l[i * n + i];
        }
        for r in 0..n {
            inv[r * n + c] = col[r];
        }
    }
    Ok(inv)
}

/// Number of points per direction used by [`project_initial`].
pub fn projection_points(p: usize) -> usize {
    p + 3
}

/// L2 projection of `f(x, y, out)` onto the degree-`p` basis of every element
/// (weighted by `cos θ` on lat-lon meshes), copied to all `nz` levels.
///
/// The result has data_dims `(nv, nφ)`. Integrals use a `p + 3` point rule
/// for both `∫ f φ` and the mass matrix, so polynomials of degree ≤ p are
/// reproduced to round-off.
pub fn project_initial<F>(f: F, mesh: &Mesh, p: usize, nv: usize, nz: usize) -> Result<Field, BasisError>
where
    F: Fn(f64, f64, &mut [f64]),
{
    let vh = Vander::new(p, gauss_legendre(projection_points(p)))?;
    let metrics = mesh.metrics();
    let (nq, nphi) = (vh.nq(), vh.nphi);
    let mut out =
        Field::full([mesh.nx, mesh.ny, nz], DataDims::Matrix(nv, nphi), 0.0).expect("mesh extents are positive");
    let mut fq = vec![0.0; nv * nq];
    let mut val = vec![0.0; nv];
    let mut rhs = vec![0.0; nphi];
    let mut coef = vec![0.0; nv * nphi];
    for j in 0..mesh.ny {
        let (yb, yt) = (mesh.y_edge(j), mesh.y_edge(j + 1));
        let weight = |eta: f64| {
            if mesh.is_sphere() {
                (0.5 * (yb + yt) + 0.5 * (yt - yb) * eta).cos()
            } else {
                1.0
            }
        };
        let mass = weighted_mass(&vh, metrics.determ, weight)?;
        for i in 0..mesh.nx {
            for q in 0..nq {
                let (x, y) = mesh.map_point(i, j, vh.xi[q], vh.eta[q]);
                f(x, y, &mut val);
                for v in 0..nv {
                    fq[v * nq + q] = metrics.determ * vh.w[q] * weight(vh.eta[q]) * val[v];
                }
            }
            for v in 0..nv {
                tensor::matvec_transposed(&vh.phi, nq, nphi, &fq[v * nq..(v + 1) * nq], &mut rhs);
                tensor::matvec(&mass.inv, nphi, nphi, &rhs, &mut coef[v * nphi..(v + 1) * nphi]);
            }
            for k in 0..nz {
                out.at_mut([i, j, k]).copy_from_slice(&coef);
            }
        }
    }
    Ok(out)
}
