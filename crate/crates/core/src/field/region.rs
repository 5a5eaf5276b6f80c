use rayon::prelude::*;

use super::{Field, FieldError};

/// Largest negative and positive relative offset a kernel reads from an input,
/// per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Extent {
    pub neg: [usize; 3],
    pub pos: [usize; 3],
}

impl Extent {
    pub const ZERO: Extent = Extent {
        neg: [0; 3],
        pos: [0; 3],
    };

    pub fn symmetric(halo: [usize; 3]) -> Self {
        Extent { neg: halo, pos: halo }
    }

    fn admits(&self, off: [isize; 3]) -> bool {
        (0..3).all(|a| {
            let o = off[a];
            if o < 0 {
                o.unsigned_abs() <= self.neg[a]
            } else {
                (o as usize) <= self.pos[a]
            }
        })
    }
}

/// Iteration space of one kernel application plus the origin of every field.
///
/// Fields are numbered by their position in the call: inputs first, the output
/// last. Origins that are not set individually fall back to the `_all_`
/// origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionRegion {
    domain: [usize; 3],
    all: [usize; 3],
    per_field: Vec<Option<[usize; 3]>>,
}

impl ExecutionRegion {
    pub fn new(domain: [usize; 3]) -> Self {
        ExecutionRegion {
            domain,
            all: [0; 3],
            per_field: Vec::new(),
        }
    }

    /// Region covering every stored point of `field`.
    pub fn covering(field: &Field) -> Self {
        ExecutionRegion::new(field.extent())
    }

    pub fn origin_all(mut self, origin: [usize; 3]) -> Self {
        self.all = origin;
        self
    }

    pub fn origin(mut self, field_index: usize, origin: [usize; 3]) -> Self {
        if self.per_field.len() <= field_index {
            self.per_field.resize(field_index + 1, None);
        }
        self.per_field[field_index] = Some(origin);
        self
    }

    pub fn domain(&self) -> [usize; 3] {
        self.domain
    }

    pub fn origin_of(&self, field_index: usize) -> [usize; 3] {
        self.per_field.get(field_index).copied().flatten().unwrap_or(self.all)
    }

    fn is_empty(&self) -> bool {
        self.domain.iter().any(|&d| d == 0)
    }

    /// Checks that every access `origin + point + offset` with offsets inside
    /// `extents` stays within the stored extent of each input, and that the
    /// output region is in bounds and written by a single point per cell.
    pub fn validate(&self, inputs: &[&Field], extents: &[Extent], output: &Field) -> Result<(), FieldError> {
        if extents.len() != inputs.len() {
            return Err(FieldError::ShapeMismatch(format!(
                "{} extents for {} inputs",
                extents.len(),
                inputs.len()
            )));
        }
        if self.is_empty() {
            return Ok(());
        }
        for (n, (f, ext)) in inputs.iter().zip(extents).enumerate() {
            let o = self.origin_of(n);
            for a in 0..3 {
                if !f.is_stored(a) {
                    continue;
                }
                let lo_ok = o[a] >= ext.neg[a];
                let hi = o[a] + self.domain[a] - 1 + ext.pos[a];
                if !lo_ok || hi >= f.extent()[a] {
                    return Err(FieldError::OutOfBounds(format!(
                        "input {n}: axis {a} origin {} domain {} extent -{}/+{} exceeds stored extent {}",
                        o[a],
                        self.domain[a],
                        ext.neg[a],
                        ext.pos[a],
                        f.extent()[a]
                    )));
                }
            }
        }
        let o = self.origin_of(inputs.len());
        for a in 0..3 {
            if !output.is_stored(a) {
                if self.domain[a] > 1 {
                    return Err(FieldError::ShapeMismatch(format!(
                        "output replicated along axis {a} cannot be written over a domain of {}",
                        self.domain[a]
                    )));
                }
                continue;
            }
            if o[a] + self.domain[a] > output.extent()[a] {
                return Err(FieldError::OutOfBounds(format!(
                    "output: axis {a} origin {} + domain {} exceeds extent {}",
                    o[a],
                    self.domain[a],
                    output.extent()[a]
                )));
            }
        }
        Ok(())
    }
}

/// Read access to the kernel inputs around the current iteration point.
pub struct Neighborhood<'a> {
    inputs: &'a [&'a Field],
    origins: &'a [[usize; 3]],
    extents: &'a [Extent],
    point: [usize; 3],
}

impl<'a> Neighborhood<'a> {
    /// Iteration-space coordinates of the current point.
    #[inline]
    pub fn point(&self) -> [usize; 3] {
        self.point
    }

    /// Tensor of input `n` at relative offset `off`.
    #[inline]
    pub fn at(&self, n: usize, off: [isize; 3]) -> &'a [f64] {
        assert!(
            self.extents[n].admits(off),
            "offset {off:?} outside declared extent of input {n}"
        );
        let o = self.origins[n];
        let p = self.point;
        let idx = [
            (o[0] + p[0]).wrapping_add_signed(off[0]),
            (o[1] + p[1]).wrapping_add_signed(off[1]),
            (o[2] + p[2]).wrapping_add_signed(off[2]),
        ];
        let f = self.inputs[n];
        let start = f.offset(idx);
        &f.values[start..start + f.ncomp()]
    }

    /// Tensor of input `n` at the current point.
    #[inline]
    pub fn center(&self, n: usize) -> &'a [f64] {
        self.at(n, [0, 0, 0])
    }
}

/// Applies `kernel` to every point of `region`, writing one tensor of `output`
/// per point. Input `n` may be read at offsets within `extents[n]`.
///
/// Bounds are checked once, before anything is written. Points are processed
/// in parallel; the kernel must not depend on evaluation order. The first
/// error returned by the kernel aborts the application.
pub fn apply_kernel<E, K>(
    inputs: &[&Field],
    extents: &[Extent],
    output: &mut Field,
    region: &ExecutionRegion,
    kernel: K,
) -> Result<(), E>
where
    E: From<FieldError> + Send,
    K: Fn(&Neighborhood<'_>, &mut [f64]) -> Result<(), E> + Sync,
{
    region.validate(inputs, extents, output)?;
    if region.is_empty() {
        return Ok(());
    }
    let origins: Vec<[usize; 3]> = (0..inputs.len()).map(|n| region.origin_of(n)).collect();
    let out_origin = region.origin_of(inputs.len());
    let domain = region.domain();
    let [_, ey, ez] = output.extent();
    let stored = output.mask();
    let ncomp = output.ncomp();
    let column = ez * ncomp;

    output
        .values
        .par_chunks_mut(column)
        .enumerate()
        .try_for_each(|(c, col)| {
            let (fi, fj) = (c / ey, c % ey);
            let it = |f: usize, a: usize| -> Option<usize> {
                if !stored[a] {
                    return Some(0);
                }
                f.checked_sub(out_origin[a]).filter(|&v| v < domain[a])
            };
            let (Some(i), Some(j)) = (it(fi, 0), it(fj, 1)) else {
                return Ok(());
            };
            for k in 0..domain[2] {
                let fk = if stored[2] { out_origin[2] + k } else { 0 };
                let nb = Neighborhood {
                    inputs,
                    origins: &origins,
                    extents,
                    point: [i, j, k],
                };
                kernel(&nb, &mut col[fk * ncomp..(fk + 1) * ncomp])?;
            }
            Ok(())
        })
}
