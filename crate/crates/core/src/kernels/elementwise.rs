//! Elementwise square and eps-guarded square root.

use super::KernelGrad;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Default guard for `sqrt_eps`; bounds the gradient at zero.
pub const DEFAULT_SQRT_EPS: f64 = 1e-8;

pub fn square(x: &Tensor) -> Tensor {
    x.map(|v| v * v)
}

pub fn square_backward(x: &Tensor, dout: &Tensor) -> KernelGrad {
    assert_eq!(x.shape(), dout.shape());
    let mut g = x.clone();
    for (gi, di) in g.data_mut().iter_mut().zip(dout.data()) {
        *gi = 2.0 * *gi * di;
    }
    KernelGrad {
        inputs_grad: vec![g],
    }
}

/// Elementwise `sqrt(x + eps)`. Entries below `-eps` are a domain error.
pub fn sqrt_eps(x: &Tensor, eps: f64) -> Result<Tensor> {
    for &v in x.data() {
        if v < -eps {
            return Err(Error::Domain(format!(
                "sqrt_eps input {v} below -eps ({})",
                -eps
            )));
        }
    }
    Ok(x.map(|v| (v + eps).max(0.0).sqrt()))
}

/// Gradient `dout / (2 * sqrt(x + eps))`, using the cached forward output.
pub fn sqrt_eps_backward(out: &Tensor, dout: &Tensor) -> KernelGrad {
    assert_eq!(out.shape(), dout.shape());
    let mut g = out.clone();
    for (gi, di) in g.data_mut().iter_mut().zip(dout.data()) {
        *gi = di / (2.0 * *gi);
    }
    KernelGrad {
        inputs_grad: vec![g],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check;
    use rand::Rng;

    #[test]
    fn square_values_and_grad() {
        let x = Tensor::from_vec(&[3], vec![0.0, 1.0, -2.0]).unwrap();
        assert_eq!(square(&x).data(), &[0.0, 1.0, 4.0]);
        let x3 = Tensor::from_vec(&[1], vec![3.0]).unwrap();
        let up = Tensor::from_vec(&[1], vec![1.0]).unwrap();
        assert_eq!(square_backward(&x3, &up).inputs_grad[0].data(), &[6.0]);
    }

    #[test]
    fn sqrt_values() {
        let x = Tensor::from_vec(&[1], vec![4.0]).unwrap();
        assert_eq!(sqrt_eps(&x, 0.0).unwrap().data(), &[2.0]);
        let z = Tensor::from_vec(&[1], vec![0.0]).unwrap();
        let got = sqrt_eps(&z, 1e-8).unwrap().data()[0];
        assert!((got - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let x = Tensor::from_vec(&[1], vec![-1e-6]).unwrap();
        assert!(matches!(
            sqrt_eps(&x, 1e-8),
            Err(crate::error::Error::Domain(_))
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = crate::seed::SeedTree::new(21).rng();
        let x = Tensor::from_fn(&[10], |_| rng.gen_range(-1.5..1.5));
        let w: Vec<f64> = (0..10).map(|i| (i as f64) * 0.21 - 1.0).collect();
        let dout = Tensor::from_vec(&[10], w.clone()).unwrap();

        let g = square_backward(&x, &dout);
        let loss_sq = |t: &Tensor| {
            square(t)
                .data()
                .iter()
                .zip(&w)
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        check::check_grad(loss_sq, &x, &g.inputs_grad[0], 1e-5, 1e-6);

        let xp = Tensor::from_fn(&[10], |_| rng.gen_range(0.1..2.0));
        let eps = 1e-8;
        let out = sqrt_eps(&xp, eps).unwrap();
        let g = sqrt_eps_backward(&out, &dout);
        let loss_sqrt = |t: &Tensor| {
            sqrt_eps(t, eps)
                .unwrap()
                .data()
                .iter()
                .zip(&w)
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        check::check_grad(loss_sqrt, &xp, &g.inputs_grad[0], 1e-5, 1e-5);
    }
}
