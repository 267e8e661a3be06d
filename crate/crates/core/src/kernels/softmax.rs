//! Softmax cross-entropy with gradient, stabilized by max subtraction.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Loss and gradient on a raw logit slice.
/// `loss = -log softmax(logits)[label]`, `grad = softmax - one_hot(label)`.
#[inline]
pub fn softmax_ce_slice(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    debug_assert!(label < logits.len());
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut grad: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let denom: f64 = grad.iter().sum();
    let loss = denom.ln() - (logits[label] - max);
    for g in grad.iter_mut() {
        *g /= denom;
    }
    grad[label] -= 1.0;
    (loss, grad)
}

pub fn softmax_cross_entropy(logits: &Tensor, label: usize) -> Result<(f64, Tensor)> {
    if logits.rank() != 1 {
        return Err(Error::Dimension(format!(
            "softmax_cross_entropy expects rank-1 logits, got {:?}",
            logits.shape()
        )));
    }
    if label >= logits.len() {
        return Err(Error::Index(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let (loss, grad) = softmax_ce_slice(logits.data(), label);
    Ok((loss, Tensor::from_vec(logits.shape(), grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check;
    use rand::Rng;

    #[test]
    fn uniform_logits_give_ln_k() {
        let logits = Tensor::zeros(&[4]);
        let (loss, _) = softmax_cross_entropy(&logits, 2).unwrap();
        assert!((loss - 4.0f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn confident_correct_is_near_zero() {
        let logits = Tensor::from_vec(&[4], vec![10.0, 0.0, 0.0, 0.0]).unwrap();
        let (loss, _) = softmax_cross_entropy(&logits, 0).unwrap();
        assert!(loss < 1e-4);
    }

    #[test]
    fn label_out_of_range() {
        let logits = Tensor::zeros(&[4]);
        assert!(matches!(
            softmax_cross_entropy(&logits, 4),
            Err(Error::Index(_))
        ));
    }

    #[test]
    fn shift_invariance() {
        let mut rng = crate::seed::SeedTree::new(17).rng();
        let z: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let shifted: Vec<f64> = z.iter().map(|v| v + 123.456).collect();
        let (l1, g1) = softmax_ce_slice(&z, 3);
        let (l2, g2) = softmax_ce_slice(&shifted, 3);
        assert!((l1 - l2).abs() <= 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::seed::SeedTree::new(19).rng();
        let logits = Tensor::from_fn(&[6], |_| rng.gen_range(-2.0..2.0));
        let (_, grad) = softmax_cross_entropy(&logits, 4).unwrap();
        let loss = |t: &Tensor| softmax_ce_slice(t.data(), 4).0;
        check::check_grad(loss, &logits, &grad, 1e-5, 1e-6);
    }
}
