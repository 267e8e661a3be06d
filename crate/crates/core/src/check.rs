//! Test-only finite-difference gradient checking. The oracle is independent
//! of every backward implementation: it only ever calls the forward path.

use crate::tensor::Tensor;

pub(crate) fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

/// Central-difference check of `analytic` against d(loss)/dx at every
/// coordinate of `x`. Panics with coordinates on failure.
pub(crate) fn check_grad(
    loss: impl Fn(&Tensor) -> f64,
    x: &Tensor,
    analytic: &Tensor,
    h: f64,
    tol: f64,
) {
    assert_eq!(x.shape(), analytic.shape(), "gradient shape mismatch");
    for i in 0..x.len() {
        let mut xp = x.clone();
        xp.data_mut()[i] += h;
        let fp = loss(&xp);
        let mut xm = x.clone();
        xm.data_mut()[i] -= h;
        let fm = loss(&xm);
        let fd = (fp - fm) / (2.0 * h);
        let a = analytic.data()[i];
        let err = rel_err(a, fd);
        assert!(
            err <= tol,
            "gradient mismatch at flat index {i}: analytic {a}, finite-diff {fd}, rel err {err:.3e} > {tol:.1e}"
        );
    }
}
