use super::region::{apply_kernel, ExecutionRegion, Extent};
use super::{tensor, DataDims, Field, FieldError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Field(&'a Field),
    Scalar(f64),
}

fn broadcast_ok(f: &Field, out: DataDims) -> bool {
    f.dims() == out || f.dims().is_scalar()
}

/// `out[d] = a[d] op b[d]` at every point of `region`. Scalars (and fields with
/// scalar data_dims) are broadcast over all components.
///
/// Field numbering for origins: `a` is 0, `b` is 1, `out` is 2.
pub fn elementwise(
    op: BinOp,
    a: Operand<'_>,
    b: Operand<'_>,
    out: &mut Field,
    region: &ExecutionRegion,
) -> Result<(), FieldError> {
    let od = out.dims();
    for (name, x) in [("a", &a), ("b", &b)] {
        if let Operand::Field(f) = x {
            if !broadcast_ok(f, od) {
                return Err(FieldError::ShapeMismatch(format!(
                    "operand {name} data_dims {:?} vs output {:?}",
                    f.dims(),
                    od
                )));
            }
        }
    }
    // scalar operands still take a slot in the origin numbering
    let dummy = Field::replicated(DataDims::Scalar, &[0.0])?;
    let fa = match a {
        Operand::Field(f) => f,
        Operand::Scalar(_) => &dummy,
    };
    let fb = match b {
        Operand::Field(f) => f,
        Operand::Scalar(_) => &dummy,
    };
    apply_kernel(
        &[fa, fb],
        &[Extent::ZERO, Extent::ZERO],
        out,
        region,
        |nb, o: &mut [f64]| {
            let read = |x: &Operand<'_>, n: usize| -> Result<&[f64], f64> {
                match x {
                    Operand::Scalar(s) => Err(*s),
                    Operand::Field(_) => Ok(nb.center(n)),
                }
            };
            let (ra, rb) = (read(&a, 0), read(&b, 1));
            for (d, od) in o.iter_mut().enumerate() {
                let x = match ra {
                    Err(s) => s,
                    Ok(v) if v.len() == 1 => v[0],
                    Ok(v) => v[d],
                };
                let y = match rb {
                    Err(s) => s,
                    Ok(v) if v.len() == 1 => v[0],
                    Ok(v) => v[d],
                };
                *od = op.apply(x, y);
            }
            Ok(())
        },
    )
}

/// `out = M v` (or `Mᵀ v` when `transpose`) at every point of `region`.
///
/// `matrix` must have matrix data_dims `(m, n)`; `vec` is `(n,)` and `out` is
/// `(m,)`, or the other way around when transposed. Field numbering for
/// origins: matrix 0, vec 1, out 2.
pub fn matvec(
    matrix: &Field,
    vec: &Field,
    transpose: bool,
    out: &mut Field,
    region: &ExecutionRegion,
) -> Result<(), FieldError> {
    let DataDims::Matrix(m, n) = matrix.dims() else {
        return Err(FieldError::ShapeMismatch(format!(
            "matvec needs a matrix field, got {:?}",
            matrix.dims()
        )));
    };
    let (vin, vout) = if transpose { (m, n) } else { (n, m) };
    if vec.dims() != DataDims::Vector(vin) || out.dims() != DataDims::Vector(vout) {
        return Err(FieldError::ShapeMismatch(format!(
            "matrix ({m},{n}){} with vec {:?} into {:?}",
            if transpose { "^T" } else { "" },
            vec.dims(),
            out.dims()
        )));
    }
    apply_kernel(
        &[matrix, vec],
        &[Extent::ZERO, Extent::ZERO],
        out,
        region,
        |nb, o: &mut [f64]| {
            let (a, v) = (nb.center(0), nb.center(1));
            if transpose {
                tensor::matvec_transposed(a, m, n, v, o);
            } else {
                tensor::matvec(a, m, n, v, o);
            }
            Ok(())
        },
    )
}

/// `out = base + scale * Σ c_i f_i`, terms accumulated in order. Terms with a
/// zero coefficient are skipped, so an empty sum leaves `base` bit-for-bit.
///
/// All fields share `out`'s layout and the region covers them identically.
pub fn scaled_sum(
    base: &Field,
    scale: f64,
    terms: &[(f64, &Field)],
    out: &mut Field,
    region: &ExecutionRegion,
) -> Result<(), FieldError> {
    let live: Vec<(f64, &Field)> = terms.iter().copied().filter(|(c, _)| *c != 0.0).collect();
    for (_, f) in std::iter::once(&(1.0, base)).chain(live.iter()) {
        if f.dims() != out.dims() {
            return Err(FieldError::ShapeMismatch(format!(
                "term data_dims {:?} vs output {:?}",
                f.dims(),
                out.dims()
            )));
        }
    }
    let mut inputs: Vec<&Field> = vec![base];
    inputs.extend(live.iter().map(|(_, f)| *f));
    let extents = vec![Extent::ZERO; inputs.len()];
    apply_kernel(&inputs, &extents, out, region, |nb, o: &mut [f64]| {
        let b = nb.center(0);
        if live.is_empty() {
            o.copy_from_slice(b);
            return Ok(());
        }
        for (d, od) in o.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (t, (c, _)) in live.iter().enumerate() {
                acc += c * nb.center(t + 1)[d];
            }
            *od = b[d] + scale * acc;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec3(vals: [f64; 3]) -> Field {
        let mut f = Field::full([1, 1, 1], DataDims::Vector(3), 0.0).unwrap();
        f.values_mut().copy_from_slice(&vals);
        f
    }

    #[test]
    fn componentwise_product() {
        let a = vec3([1.0, 2.0, 3.0]);
        let b = vec3([4.0, 5.0, 6.0]);
        let mut out = vec3([0.0; 3]);
        let r = ExecutionRegion::covering(&out);
        elementwise(BinOp::Mul, Operand::Field(&a), Operand::Field(&b), &mut out, &r).unwrap();
        assert_eq!(out.values(), &[4.0, 10.0, 18.0]);
    }

    #[test]
    fn scalar_broadcast_identity() {
        let a = vec3([0.5, -2.0, 1e300]);
        let mut out = vec3([0.0; 3]);
        let r = ExecutionRegion::covering(&out);
        elementwise(BinOp::Mul, Operand::Field(&a), Operand::Scalar(1.0), &mut out, &r).unwrap();
        assert_eq!(out.values(), a.values());
    }

    #[test]
    fn mismatched_dims_rejected() {
        let a = vec3([1.0; 3]);
        let b = Field::full([1, 1, 1], DataDims::Vector(2), 1.0).unwrap();
        let mut out = vec3([0.0; 3]);
        let r = ExecutionRegion::covering(&out);
        assert!(matches!(
            elementwise(BinOp::Add, Operand::Field(&a), Operand::Field(&b), &mut out, &r),
            Err(FieldError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn transposed_matvec_signature() {
        // matrix (3,2), vec (3,), transpose -> (2,)
        let m = Field::replicated(DataDims::Matrix(3, 2), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let v = Field::full([2, 2, 1], DataDims::Vector(3), 1.0).unwrap();
        let mut out = Field::full([2, 2, 1], DataDims::Vector(2), 0.0).unwrap();
        let r = ExecutionRegion::covering(&out);
        matvec(&m, &v, true, &mut out, &r).unwrap();
        for c in out.values().chunks(2) {
            assert_eq!(c, &[9.0, 12.0]);
        }
        let mut bad = Field::full([2, 2, 1], DataDims::Vector(3), 0.0).unwrap();
        assert!(matvec(&m, &v, true, &mut bad, &r).is_err());
    }

    #[test]
    fn identity_matvec() {
        let id = Field::replicated(DataDims::Matrix(3, 3), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let v = vec3([1.0, 2.0, 3.0]);
        let mut out = vec3([0.0; 3]);
        let r = ExecutionRegion::covering(&out);
        matvec(&id, &v, false, &mut out, &r).unwrap();
        assert_eq!(out.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn scaled_sum_without_terms_is_identity() {
        let a = vec3([0.1, 0.2, 0.3]);
        let k = vec3([5.0, 5.0, 5.0]);
        let mut out = vec3([0.0; 3]);
        let r = ExecutionRegion::covering(&out);
        scaled_sum(&a, 0.5, &[(0.0, &k)], &mut out, &r).unwrap();
        assert_eq!(out.values(), a.values());
        scaled_sum(&a, 0.5, &[(2.0, &k)], &mut out, &r).unwrap();
        assert_eq!(out.values(), &[5.1, 5.2, 5.3]);
    }
}
