//! Minimal differentiable compute kernels.
//!
//! Every operation here comes in a forward form plus a backward contract:
//! given the upstream gradient, it returns gradients matching the shape of
//! each differentiable input. Gradients are hand-derived; there is no tape.
//! Kernels are pure (batch-norm running state excepted) and all arithmetic
//! is 64-bit.

mod batchnorm;
mod conv;
mod elementwise;
mod matmul;
mod softmax;

pub use batchnorm::{batch_norm_backward, batch_norm_infer, batch_norm_train, BnCache, BnState};
pub use conv::{
    conv1d, conv1d_backward, conv_same_grad_kernel_acc, conv_same_grad_signal_acc, conv_same_into,
    conv_valid_grad_kernel_acc, conv_valid_grad_signal_acc, conv_valid_into, ConvMode,
};
pub use elementwise::{
    sqrt_eps, sqrt_eps_backward, square, square_backward, DEFAULT_SQRT_EPS,
};
pub use matmul::{matmul, matmul_backward, matmul_into};
pub use softmax::{softmax_ce_slice, softmax_cross_entropy};

use crate::tensor::Tensor;

/// Gradients of one kernel call, one tensor per differentiable input,
/// in the input order of the forward signature.
#[derive(Debug, Clone)]
pub struct KernelGrad {
    pub inputs_grad: Vec<Tensor>,
}
