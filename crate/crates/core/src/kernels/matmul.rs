//! Dense matrix product with backward contract for both factors.

use super::KernelGrad;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// `out += a * b` on raw slices, `a` is `m x k`, `b` is `k x n`.
#[inline]
pub fn matmul_into(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.rank() != 2 || b.rank() != 2 {
        return Err(Error::Dimension(format!(
            "matmul expects rank-2 tensors, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let (k2, n) = (b.shape()[0], b.shape()[1]);
    if k != k2 {
        return Err(Error::Dimension(format!(
            "matmul inner dimensions disagree: {k} vs {k2}"
        )));
    }
    let mut out = Tensor::zeros(&[m, n]);
    matmul_into(a.data(), b.data(), out.data_mut(), m, k, n);
    Ok(out)
}

/// Gradients w.r.t. `[a, b]`: `da = dout * b^T`, `db = a^T * dout`.
pub fn matmul_backward(a: &Tensor, b: &Tensor, dout: &Tensor) -> Result<KernelGrad> {
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let (_, n) = (b.shape()[0], b.shape()[1]);
    if dout.shape() != [m, n] {
        return Err(Error::Dimension(format!(
            "matmul upstream gradient shape {:?}, expected [{m}, {n}]",
            dout.shape()
        )));
    }
    let bt = b.transposed();
    let at = a.transposed();
    let mut da = Tensor::zeros(&[m, k]);
    matmul_into(dout.data(), bt.data(), da.data_mut(), m, n, k);
    let mut db = Tensor::zeros(&[k, n]);
    matmul_into(at.data(), dout.data(), db.data_mut(), k, m, n);
    Ok(KernelGrad {
        inputs_grad: vec![da, db],
    })
}
