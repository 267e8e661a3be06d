//! 1-D convolution, valid and centered zero-padded modes.
//!
//! True convolution (kernel flipped): `out[j] = sum_k kernel[k] * signal[j']`
//! with `j' = j + L - 1 - k` in valid mode and `j' = j + c - k`,
//! `c = (L - 1) / 2`, in same mode (indices outside the signal read as 0).

use super::KernelGrad;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    /// Fully-overlapping region only; output length `T - L + 1`.
    Valid,
    /// Kernel centered, signal zero-extended; output length `T`.
    SameZeroPad,
}

/// Valid-mode convolution into a preallocated output of length `T - L + 1`.
#[inline]
pub fn conv_valid_into(signal: &[f64], kernel: &[f64], out: &mut [f64]) {
    let l = kernel.len();
    debug_assert_eq!(out.len(), signal.len() - l + 1);
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        // signal index j + l - 1 - k runs j .. j + l - 1 as k descends
        for (k, &h) in kernel.iter().enumerate() {
            acc += h * signal[j + l - 1 - k];
        }
        *o = acc;
    }
}

/// Centered zero-padded convolution into a preallocated output of length `T`.
#[inline]
pub fn conv_same_into(signal: &[f64], kernel: &[f64], out: &mut [f64]) {
    let t = signal.len() as isize;
    let l = kernel.len() as isize;
    let c = (l - 1) / 2;
    debug_assert_eq!(out.len(), signal.len());
    for j in 0..t {
        let mut acc = 0.0;
        for k in 0..l {
            let idx = j + c - k;
            if idx >= 0 && idx < t {
                acc += kernel[k as usize] * signal[idx as usize];
            }
        }
        out[j as usize] = acc;
    }
}

/// Accumulate d(loss)/d(signal) for valid mode.
#[inline]
pub fn conv_valid_grad_signal_acc(dout: &[f64], kernel: &[f64], dsignal: &mut [f64]) {
    let l = kernel.len();
    for (j, &d) in dout.iter().enumerate() {
        for (k, &h) in kernel.iter().enumerate() {
            dsignal[j + l - 1 - k] += d * h;
        }
    }
}

/// Accumulate d(loss)/d(kernel) for valid mode.
#[inline]
pub fn conv_valid_grad_kernel_acc(dout: &[f64], signal: &[f64], dkernel: &mut [f64]) {
    let l = dkernel.len();
    for (j, &d) in dout.iter().enumerate() {
        for (k, g) in dkernel.iter_mut().enumerate() {
            *g += d * signal[j + l - 1 - k];
        }
    }
}

/// Accumulate d(loss)/d(signal) for same mode.
#[inline]
pub fn conv_same_grad_signal_acc(dout: &[f64], kernel: &[f64], dsignal: &mut [f64]) {
    let t = dsignal.len() as isize;
    let l = kernel.len() as isize;
    let c = (l - 1) / 2;
    for (j, &d) in dout.iter().enumerate() {
        for k in 0..l {
            let idx = j as isize + c - k;
            if idx >= 0 && idx < t {
                dsignal[idx as usize] += d * kernel[k as usize];
            }
        }
    }
}

/// Accumulate d(loss)/d(kernel) for same mode.
#[inline]
pub fn conv_same_grad_kernel_acc(dout: &[f64], signal: &[f64], dkernel: &mut [f64]) {
    let t = signal.len() as isize;
    let l = dkernel.len() as isize;
    let c = (l - 1) / 2;
    for (j, &d) in dout.iter().enumerate() {
        for k in 0..l {
            let idx = j as isize + c - k;
            if idx >= 0 && idx < t {
                dkernel[k as usize] += d * signal[idx as usize];
            }
        }
    }
}

fn check_1d(signal: &Tensor, kernel: &Tensor, mode: ConvMode) -> Result<(usize, usize)> {
    if signal.rank() != 1 || kernel.rank() != 1 {
        return Err(Error::Dimension(format!(
            "conv1d expects rank-1 tensors, got {:?} and {:?}",
            signal.shape(),
            kernel.shape()
        )));
    }
    let (t, l) = (signal.len(), kernel.len());
    if l == 0 {
        return Err(Error::Dimension("conv1d kernel is empty".into()));
    }
    if mode == ConvMode::Valid && t < l {
        return Err(Error::Dimension(format!(
            "valid conv needs signal length >= kernel length ({t} < {l})"
        )));
    }
    Ok((t, l))
}

pub fn conv1d(signal: &Tensor, kernel: &Tensor, mode: ConvMode) -> Result<Tensor> {
    let (t, l) = check_1d(signal, kernel, mode)?;
    let out_len = match mode {
        ConvMode::Valid => t - l + 1,
        ConvMode::SameZeroPad => t,
    };
    let mut out = Tensor::zeros(&[out_len]);
    match mode {
        ConvMode::Valid => conv_valid_into(signal.data(), kernel.data(), out.data_mut()),
        ConvMode::SameZeroPad => conv_same_into(signal.data(), kernel.data(), out.data_mut()),
    }
    Ok(out)
}

/// Gradients w.r.t. `[signal, kernel]`.
pub fn conv1d_backward(
    signal: &Tensor,
    kernel: &Tensor,
    mode: ConvMode,
    dout: &Tensor,
) -> Result<KernelGrad> {
    let (t, l) = check_1d(signal, kernel, mode)?;
    let expect = match mode {
        ConvMode::Valid => t - l + 1,
        ConvMode::SameZeroPad => t,
    };
    if dout.len() != expect {
        return Err(Error::Dimension(format!(
            "conv1d upstream gradient length {} != output length {}",
            dout.len(),
            expect
        )));
    }
    let mut dsignal = Tensor::zeros(&[t]);
    let mut dkernel = Tensor::zeros(&[l]);
    match mode {
        ConvMode::Valid => {
            conv_valid_grad_signal_acc(dout.data(), kernel.data(), dsignal.data_mut());
            conv_valid_grad_kernel_acc(dout.data(), signal.data(), dkernel.data_mut());
        }
        ConvMode::SameZeroPad => {
            conv_same_grad_signal_acc(dout.data(), kernel.data(), dsignal.data_mut());
            conv_same_grad_kernel_acc(dout.data(), signal.data(), dkernel.data_mut());
        }
    }
    Ok(KernelGrad {
        inputs_grad: vec![dsignal, dkernel],
    })
}
