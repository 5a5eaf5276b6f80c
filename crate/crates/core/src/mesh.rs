//! Structured rectangular meshes, planar or latitude-longitude.
//!
//! Element `(i, j)` spans `[x_l, x_r] × [y_b, y_t]` with `i` along x (or
//! longitude λ) and `j` along y (or latitude θ). Lat-lon meshes cover
//! `λ ∈ [0, 2π]`, `θ ∈ [-π/2, π/2]` and are periodic in λ only.

use std::f64::consts::PI;

use crate::basis::Edge;

/// Earth parameters shared by the spherical test cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Sphere radius in metres (Williamson et al. 1992).
    pub radius: f64,
    /// Rotation rate in s⁻¹.
    pub omega: f64,
    /// Gravitational acceleration in m s⁻².
    pub gravity: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            radius: 6.37122e6,
            omega: 7.292e-5,
            gravity: 9.81,
        }
    }
}

impl PhysicalConstants {
    /// `f(θ) = 2Ω sin θ`.
    pub fn coriolis(&self, theta: f64) -> f64 {
        2.0 * self.omega * theta.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Planar,
    LatLon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborKind {
    Interior,
    PeriodicWrap,
    PoleClosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborRef {
    pub kind: NeighborKind,
    /// `(i, j)` of the element across the edge; `None` for pole edges.
    pub element: Option<(usize, usize)>,
}

/// Jacobians of the affine map from `[-1, 1]²` onto an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMetrics {
    pub determ: f64,
    pub bd_det_x: f64,
    pub bd_det_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub kind: MeshKind,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub lx: f64,
    pub y0: f64,
    pub ly: f64,
    /// Sphere radius for lat-lon meshes.
    pub radius: Option<f64>,
}

impl Mesh {
    /// Periodic mesh of `[0, L]²`.
    pub fn planar(nx: usize, ny: usize, l: f64) -> Self {
        Mesh::planar_rect(nx, ny, l, l)
    }

    pub fn planar_rect(nx: usize, ny: usize, lx: f64, ly: f64) -> Self {
        assert!(nx >= 1 && ny >= 1, "mesh needs at least one element per direction");
        assert!(lx > 0.0 && ly > 0.0, "domain lengths must be positive");
        Mesh {
            kind: MeshKind::Planar,
            nx,
            ny,
            x0: 0.0,
            lx,
            y0: 0.0,
            ly,
            radius: None,
        }
    }

    pub fn latlon(nx: usize, ny: usize, radius: f64) -> Self {
        assert!(nx >= 1 && ny >= 1, "mesh needs at least one element per direction");
        Mesh {
            kind: MeshKind::LatLon,
            nx,
            ny,
            x0: 0.0,
            lx: 2.0 * PI,
            y0: -0.5 * PI,
            ly: PI,
            radius: Some(radius),
        }
    }

    pub fn is_sphere(&self) -> bool {
        self.kind == MeshKind::LatLon
    }

    pub fn num_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// `([x_l, x_r], [y_b, y_t])` of element `(i, j)`.
    pub fn element_bounds(&self, i: usize, j: usize) -> ([f64; 2], [f64; 2]) {
        (
            [self.x_edge(i), self.x_edge(i + 1)],
            [self.y_edge(j), self.y_edge(j + 1)],
        )
    }

    /// x coordinate of the `i`-th vertical grid line (`0..=nx`).
    pub fn x_edge(&self, i: usize) -> f64 {
        if i == self.nx {
            self.x0 + self.lx
        } else {
            self.x0 + i as f64 * self.dx()
        }
    }

    pub fn y_edge(&self, j: usize) -> f64 {
        if j == self.ny {
            self.y0 + self.ly
        } else {
            self.y0 + j as f64 * self.dy()
        }
    }

    /// Physical coordinates of reference point `(ξ, η)` in element `(i, j)`.
    pub fn map_point(&self, i: usize, j: usize, xi: f64, eta: f64) -> (f64, f64) {
        let ([xl, xr], [yb, yt]) = self.element_bounds(i, j);
        (
            0.5 * (xl + xr) + 0.5 * (xr - xl) * xi,
            0.5 * (yb + yt) + 0.5 * (yt - yb) * eta,
        )
    }

    /// All elements share the same metrics on a uniform mesh.
    pub fn metrics(&self) -> ElementMetrics {
        let (dx, dy) = (self.dx(), self.dy());
        ElementMetrics {
            determ: dx * dy / 4.0,
            bd_det_x: dx / 2.0,
            bd_det_y: dy / 2.0,
        }
    }

    pub fn neighbor(&self, i: usize, j: usize, edge: Edge) -> NeighborRef {
        let wrap = |k: usize, n: usize, up: bool| -> (usize, bool) {
            if up {
                if k + 1 == n {
                    (0, true)
                } else {
                    (k + 1, false)
                }
            } else if k == 0 {
                (n - 1, true)
            } else {
                (k - 1, false)
            }
        };
        let kind = |wrapped: bool| {
            if wrapped {
                NeighborKind::PeriodicWrap
            } else {
                NeighborKind::Interior
            }
        };
        match edge {
            Edge::Left | Edge::Right => {
                let (ni, w) = wrap(i, self.nx, edge == Edge::Right);
                NeighborRef {
                    kind: kind(w),
                    element: Some((ni, j)),
                }
            }
            Edge::Bottom | Edge::Top => {
                let (nj, w) = wrap(j, self.ny, edge == Edge::Top);
                if w && self.is_sphere() {
                    NeighborRef {
                        kind: NeighborKind::PoleClosed,
                        element: None,
                    }
                } else {
                    NeighborRef {
                        kind: kind(w),
                        element: Some((i, nj)),
                    }
                }
            }
        }
    }

    /// Cosine used for the zonal width of row `j` when computing `H`: the
    /// latitude edge farthest from the equator, or the equator-nearest one
    /// for rows touching a pole.
    fn row_width_cos(&self, j: usize) -> f64 {
        let (tb, tt) = (self.y_edge(j), self.y_edge(j + 1));
        let touches_pole = j == 0 || j + 1 == self.ny;
        if touches_pole {
            if self.ny == 1 {
                return 1.0;
            }
            // the pole edge has zero length; use the other one
            let inner = if j == 0 { tt } else { tb };
            inner.cos()
        } else {
            tb.cos().min(tt.cos())
        }
    }

    /// Minimum element diameter `H` in metres (planar units for planar
    /// meshes).
    pub fn min_effective_diameter(&self) -> f64 {
        match self.kind {
            MeshKind::Planar => self.dx().min(self.dy()),
            MeshKind::LatLon => {
                let r = self.radius.expect("lat-lon mesh carries a radius");
                (0..self.ny)
                    .map(|j| (r * self.dy()).min(r * self.row_width_cos(j) * self.dx()))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// `∫ 1` (planar) or `∫ cos θ dλ dθ` (lat-lon) over the domain.
    pub fn domain_measure(&self) -> f64 {
        match self.kind {
            MeshKind::Planar => self.lx * self.ly,
            MeshKind::LatLon => 4.0 * PI,
        }
    }
}
