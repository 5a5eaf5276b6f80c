//! Dense per-point tensor contractions.
//!
//! Matrices are row-major. Every output component accumulates its terms in
//! ascending inner index, starting from `0.0`, so results do not depend on how
//! the loops are arranged.

/// `out = M v` for an `rows x cols` matrix.
///
/// Four rows are reduced side by side; each keeps its own ascending sum.
#[inline]
pub fn matvec(mat: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(mat.len(), rows * cols);
    debug_assert_eq!(v.len(), cols);
    let v = &v[..cols];
    let mut r = 0;
    while r + 4 <= rows {
        let m0 = &mat[r * cols..(r + 1) * cols];
        let m1 = &mat[(r + 1) * cols..(r + 2) * cols];
        let m2 = &mat[(r + 2) * cols..(r + 3) * cols];
        let m3 = &mat[(r + 3) * cols..(r + 4) * cols];
        let (mut a0, mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0, 0.0);
        for c in 0..cols {
            let x = v[c];
            a0 += m0[c] * x;
            a1 += m1[c] * x;
            a2 += m2[c] * x;
            a3 += m3[c] * x;
        }
        out[r] = a0;
        out[r + 1] = a1;
        out[r + 2] = a2;
        out[r + 3] = a3;
        r += 4;
    }
    for (r, o) in out[..rows].iter_mut().enumerate().skip(r) {
        let row = &mat[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (m, x) in row.iter().zip(v) {
            acc += m * x;
        }
        *o = acc;
    }
}

/// `out = Mᵀ v` for an `rows x cols` matrix (`v` has `rows` entries).
///
/// Accumulates row by row so the inner loop runs over contiguous memory.
#[inline]
pub fn matvec_transposed(mat: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(mat.len(), rows * cols);
    debug_assert_eq!(v.len(), rows);
    let out = &mut out[..cols];
    out.fill(0.0);
    for (r, &x) in v.iter().enumerate() {
        let row = &mat[r * cols..(r + 1) * cols];
        for (o, m) in out.iter_mut().zip(row) {
            *o += m * x;
        }
    }
}

/// Row-major transpose of an `rows x cols` matrix.
pub fn transpose(mat: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = mat[r * cols + c];
        }
    }
    t
}
