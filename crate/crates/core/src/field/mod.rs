//! Higher-dimensional fields and the kernels that run over them.
//!
//! A [`Field`] is a 3-D grid (`i`, `j`, `k`) where every grid point carries a
//! small tensor (`data_dims`): a scalar, a vector or a matrix. Axes can be
//! *replicated* ("masked"): the field is stored once along that axis and every
//! logical index along it reads the same values.
//!
//! Kernels are plain closures applied to every point of an
//! [`ExecutionRegion`]. Inputs are read through a [`Neighborhood`] using
//! relative offsets; every output point is written exactly once, so points
//! (and vertical levels) are processed in parallel.

mod ops;
mod region;
pub mod tensor;

pub use ops::{elementwise, matvec, scaled_sum, BinOp, Operand};
pub use region::{apply_kernel, ExecutionRegion, Extent, Neighborhood};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("out of bounds: {0}")]
    OutOfBounds(String),
}

/// Per-point tensor shape. Rank is limited to 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataDims {
    Scalar,
    Vector(usize),
    Matrix(usize, usize),
}

impl DataDims {
    pub fn from_slice(dims: &[usize]) -> Result<Self, FieldError> {
        let dd = match *dims {
            [] => DataDims::Scalar,
            [m] => DataDims::Vector(m),
            [m, n] => DataDims::Matrix(m, n),
            _ => return Err(FieldError::InvalidShape(format!("data_dims rank {} > 2", dims.len()))),
        };
        if dd.len() == 0 {
            return Err(FieldError::InvalidShape("zero data_dims extent".into()));
        }
        Ok(dd)
    }

    /// Number of scalar components per grid point.
    pub fn len(&self) -> usize {
        match *self {
            DataDims::Scalar => 1,
            DataDims::Vector(m) => m,
            DataDims::Matrix(m, n) => m * n,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, DataDims::Scalar)
    }
}

/// Dense grid of per-point tensors, stored grid-point-major with the tensor
/// components innermost (`((i * ny + j) * nz + k) * ncomp + d`).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    extent: [usize; 3],
    stored: [bool; 3],
    dims: DataDims,
    values: Vec<f64>,
}

impl Field {
    /// Creates a field filled with `fill`.
    ///
    /// `mask[a]` follows the storage convention of GridTools: `true` means
    /// the axis is stored, `false` means it is replicated. The extent given
    /// for a replicated axis is ignored and stored as 1.
    pub fn new(shape: [usize; 3], dims: DataDims, mask: [bool; 3], fill: f64) -> Result<Self, FieldError> {
        if dims.len() == 0 {
            return Err(FieldError::InvalidShape("zero data_dims extent".into()));
        }
        let mut extent = [1usize; 3];
        for a in 0..3 {
            if mask[a] {
                if shape[a] == 0 {
                    return Err(FieldError::InvalidShape(format!("zero extent on axis {a}")));
                }
                extent[a] = shape[a];
            }
        }
        let n = extent.iter().product::<usize>() * dims.len();
        Ok(Field {
            extent,
            stored: mask,
            dims,
            values: vec![fill; n],
        })
    }

    /// Fully stored field (no replicated axes).
    pub fn full(shape: [usize; 3], dims: DataDims, fill: f64) -> Result<Self, FieldError> {
        Field::new(shape, dims, [true; 3], fill)
    }

    /// A single tensor replicated over the whole grid.
    pub fn replicated(dims: DataDims, values: &[f64]) -> Result<Self, FieldError> {
        if values.len() != dims.len() {
            return Err(FieldError::ShapeMismatch(format!(
                "{} values for data_dims of size {}",
                values.len(),
                dims.len()
            )));
        }
        let mut f = Field::new([1, 1, 1], dims, [false; 3], 0.0)?;
        f.values.copy_from_slice(values);
        Ok(f)
    }

    /// Stored extents; replicated axes report 1.
    pub fn extent(&self) -> [usize; 3] {
        self.extent
    }

    pub fn is_stored(&self, axis: usize) -> bool {
        self.stored[axis]
    }

    pub fn mask(&self) -> [bool; 3] {
        self.stored
    }

    pub fn dims(&self) -> DataDims {
        self.dims
    }

    pub fn ncomp(&self) -> usize {
        self.dims.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Same grid, mask and data_dims.
    pub fn same_layout(&self, other: &Field) -> bool {
        self.extent == other.extent && self.stored == other.stored && self.dims == other.dims
    }

    #[inline]
    pub(crate) fn offset(&self, idx: [usize; 3]) -> usize {
        let i = if self.stored[0] { idx[0] } else { 0 };
        let j = if self.stored[1] { idx[1] } else { 0 };
        let k = if self.stored[2] { idx[2] } else { 0 };
        debug_assert!(i < self.extent[0] && j < self.extent[1] && k < self.extent[2]);
        ((i * self.extent[1] + j) * self.extent[2] + k) * self.dims.len()
    }

    fn check_index(&self, idx: [usize; 3]) {
        for a in 0..3 {
            if self.stored[a] {
                assert!(
                    idx[a] < self.extent[a],
                    "index {idx:?} outside field extent {:?}",
                    self.extent
                );
            }
        }
    }

    /// Tensor at a logical grid index. Indices on replicated axes are ignored.
    pub fn at(&self, idx: [usize; 3]) -> &[f64] {
        self.check_index(idx);
        let o = self.offset(idx);
        &self.values[o..o + self.dims.len()]
    }

    pub fn at_mut(&mut self, idx: [usize; 3]) -> &mut [f64] {
        self.check_index(idx);
        let o = self.offset(idx);
        let n = self.dims.len();
        &mut self.values[o..o + n]
    }

    /// Copies the periodic images into a halo of `width` cells on both ends of
    /// `axis`. The interior occupies `width..extent - width`.
    pub fn wrap_halo(&mut self, axis: usize, width: usize) -> Result<(), FieldError> {
        if !self.stored[axis] {
            return Ok(());
        }
        let n = self.extent[axis];
        if n <= 2 * width {
            return Err(FieldError::InvalidShape(format!(
                "extent {n} too small for halo width {width}"
            )));
        }
        let interior = n - 2 * width;
        let [ex, ey, ez] = self.extent;
        let copy = |f: &mut Field, dst: usize, src: usize| {
            let mut idx_src = [0usize; 3];
            let mut idx_dst = [0usize; 3];
            let ranges = [ex, ey, ez];
            let (a1, a2) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for p in 0..ranges[a1] {
                for q in 0..ranges[a2] {
                    idx_src[axis] = src;
                    idx_src[a1] = p;
                    idx_src[a2] = q;
                    idx_dst[axis] = dst;
                    idx_dst[a1] = p;
                    idx_dst[a2] = q;
                    let so = f.offset(idx_src);
                    let d = f.offset(idx_dst);
                    let nc = f.dims.len();
                    f.values.copy_within(so..so + nc, d);
                }
            }
        };
        for h in 0..width {
            // low halo <- high interior, high halo <- low interior
            copy(self, h, h + interior);
            copy(self, width + interior + h, width + h);
        }
        Ok(())
    }
}
