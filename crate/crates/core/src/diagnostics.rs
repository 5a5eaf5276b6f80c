//! Error norms, convergence rates, conservation monitors and field export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{gauss_legendre, Vander};
use crate::error::{Error, Result};
use crate::field::{tensor, Field};
use crate::mesh::Mesh;

/// Points per direction of the error quadrature for degree `p`.
pub fn error_points(p: usize) -> usize {
    p + 2
}

/// Modal vector of variable `var` of element `(i, j)` at level 0.
fn modal<'a>(state: &'a Field, i: usize, j: usize, var: usize, nphi: usize) -> &'a [f64] {
    &state.at([i, j, 0])[var * nphi..(var + 1) * nphi]
}

/// `√(∫ (u_h - u_ref)²)` for variable `var`, integrated with `p + 2` points per
/// direction and the `cos θ` metric on lat-lon meshes. `reference(x, y)`
/// returns the reference value of the same variable.
pub fn l2_error(state: &Field, var: usize, reference: impl Fn(f64, f64) -> f64, mesh: &Mesh, p: usize) -> Result<f64> {
    let v = Vander::new(p, gauss_legendre(error_points(p)))?;
    let metrics = mesh.metrics();
    let nq = v.nq();
    let mut uq = vec![0.0; nq];
    let mut sum = 0.0;
    for i in 0..mesh.nx {
        for j in 0..mesh.ny {
            tensor::matvec(&v.phi, nq, v.nphi, modal(state, i, j, var, v.nphi), &mut uq);
            for q in 0..nq {
                let (x, y) = mesh.map_point(i, j, v.xi[q], v.eta[q]);
                let metric = if mesh.is_sphere() { y.cos() } else { 1.0 };
                let d = uq[q] - reference(x, y);
                sum += metrics.determ * v.w[q] * metric * d * d;
            }
        }
    }
    Ok(sum.sqrt())
}

/// `√(∫ f²)` with the same quadrature as [`l2_error`].
pub fn l2_norm(f: impl Fn(f64, f64) -> f64, mesh: &Mesh, p: usize) -> f64 {
    let q = gauss_legendre(error_points(p));
    let metrics = mesh.metrics();
    let mut sum = 0.0;
    for i in 0..mesh.nx {
        for j in 0..mesh.ny {
            for (a, &xa) in q.nodes.iter().enumerate() {
                for (b, &yb) in q.nodes.iter().enumerate() {
                    let (x, y) = mesh.map_point(i, j, xa, yb);
                    let metric = if mesh.is_sphere() { y.cos() } else { 1.0 };
                    let fv = f(x, y);
                    sum += metrics.determ * q.weights[a] * q.weights[b] * metric * fv * fv;
                }
            }
        }
    }
    sum.sqrt()
}

/// `r = (log ε₁ - log ε₂) / (log h₁ - log h₂)`.
pub fn convergence_rate(e1: f64, h1: f64, e2: f64, h2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0 && h1 > 0.0 && h2 > 0.0) {
        return Err(Error::Config(format!(
            "convergence rate needs positive inputs, got ε=({e1}, {e2}) h=({h1}, {h2})"
        )));
    }
    if h1 == h2 {
        return Err(Error::Config("convergence rate needs two distinct mesh sizes".into()));
    }
    Ok((e1.ln() - e2.ln()) / (h1.ln() - h2.ln()))
}

/// `Σ_k (M^(k) û^(k))₀` for variable `var`, i.e. `∫ u` (or `∫ u cos θ`).
///
/// `mass(j)` returns the row-major mass matrix of element row `j`.
pub fn mass_integral<'a>(
    state: &Field,
    var: usize,
    mesh: &Mesh,
    nphi: usize,
    mass: impl Fn(usize) -> &'a [f64],
) -> f64 {
    let mut total = 0.0;
    for i in 0..mesh.nx {
        for j in 0..mesh.ny {
            let m0 = &mass(j)[..nphi];
            let u = modal(state, i, j, var, nphi);
            let mut acc = 0.0;
            for (a, b) in m0.iter().zip(u) {
                acc += a * b;
            }
            total += acc;
        }
    }
    total
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    #[serde(rename = "K")]
    pub k: usize,
    pub h: f64,
    pub epsilon: f64,
    pub rate: Option<f64>,
}

/// Builds records from `(K, h, ε)` triples ordered by decreasing `h`.
pub fn convergence_table(rows: &[(usize, f64, f64)]) -> Result<Vec<ConvergenceRecord>> {
    let mut out = Vec::with_capacity(rows.len());
    for (n, &(k, h, e)) in rows.iter().enumerate() {
        let rate = if n == 0 {
            None
        } else {
            let (_, h1, e1) = rows[n - 1];
            Some(convergence_rate(e1, h1, e, h)?)
        };
        out.push(ConvergenceRecord { k, h, epsilon: e, rate });
    }
    Ok(out)
}

pub fn write_convergence_csv(path: &Path, records: &[ConvergenceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
        ),
    }
}

/// Evaluates every variable of `state` (level 0) at the cell centres of a
/// `res[0] × res[1]` lattice over the mesh. Returns `(x, y, values)` rows
/// with `x` varying fastest.
pub fn sample_lattice(state: &Field, mesh: &Mesh, vander: &Vander, res: [usize; 2]) -> Vec<(f64, f64, Vec<f64>)> {
    let nv = state.ncomp() / vander.nphi;
    let mut rows = Vec::with_capacity(res[0] * res[1]);
    for b in 0..res[1] {
        let y = mesh.y0 + (b as f64 + 0.5) * mesh.ly / res[1] as f64;
        for a in 0..res[0] {
            let x = mesh.x0 + (a as f64 + 0.5) * mesh.lx / res[0] as f64;
            let vals = (0..nv).map(|v| sample(state, mesh, vander, v, x, y)).collect();
            rows.push((x, y, vals));
        }
    }
    rows
}

/// Value of variable `var` at physical coordinates `(x, y)` (level 0).
/// Points outside the domain are clamped onto it.
pub fn sample(state: &Field, mesh: &Mesh, vander: &Vander, var: usize, x: f64, y: f64) -> f64 {
    let locate = |c: f64, c0: f64, len: f64, n: usize| -> (usize, f64) {
        let s = ((c - c0) / len * n as f64).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        (i, 2.0 * (s - i as f64) - 1.0)
    };
    let (i, xi) = locate(x, mesh.x0, mesh.lx, mesh.nx);
    let (j, eta) = locate(y, mesh.y0, mesh.ly, mesh.ny);
    vander.evaluate(modal(state, i, j, var, vander.nphi), xi, eta)
}

/// Metadata written in the dump header.
#[derive(Debug, Clone)]
pub struct DumpHeader<'a> {
    pub case: &'a str,
    pub time: f64,
    pub vars: &'a [&'a str],
}

/// Writes the field dump: one header line, then `x y v...` rows (`lon lat`
/// in degrees on lat-lon meshes), 17 significant digits.
pub fn export_field(
    state: &Field,
    mesh: &Mesh,
    vander: &Vander,
    header: &DumpHeader<'_>,
    path: &Path,
    res: [usize; 2],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(
        w,
        "# case={} t={} vars={} nx={} ny={}",
        header.case,
        header.time,
        header.vars.join(","),
        res[0],
        res[1]
    )
    .map_err(io)?;
    let deg = if mesh.is_sphere() {
        180.0 / std::f64::consts::PI
    } else {
        1.0
    };
    for (x, y, vals) in sample_lattice(state, mesh, vander, res) {
        write!(w, "{:.16e} {:.16e}", x * deg, y * deg).map_err(io)?;
        for v in vals {
            write!(w, " {:.16e}", v).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Parsed field dump.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub header: String,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_dump(path: &Path) -> Result<Dump> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().to_string();
    let mut rows = Vec::new();
    for line in lines {
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        rows.push(row);
    }
    Ok(Dump { header, rows })
}
