//! Batch normalization over `[batch, channel, time]`, per-channel statistics
//! taken across the batch and time axes.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Running statistics owned by a single training loop.
#[derive(Debug, Clone)]
pub struct BnState {
    pub running_mean: Tensor,
    pub running_var: Tensor,
    pub momentum: f64,
    pub eps: f64,
}

impl BnState {
    pub fn new(channels: usize) -> Self {
        BnState {
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::filled(&[channels], 1.0),
            momentum: 0.1,
            eps: 1e-5,
        }
    }

    pub fn channels(&self) -> usize {
        self.running_mean.len()
    }
}

/// Everything the backward pass needs: normalized values and per-channel
/// inverse standard deviations from the batch statistics.
#[derive(Debug, Clone)]
pub struct BnCache {
    pub xhat: Tensor,
    pub inv_std: Vec<f64>,
    pub gamma: Tensor,
}

fn check_shape(x: &Tensor, gamma: &Tensor, beta: &Tensor, channels: usize) -> Result<()> {
    if x.rank() != 3 {
        return Err(Error::Dimension(format!(
            "batch_norm expects [batch, channel, time], got {:?}",
            x.shape()
        )));
    }
    if x.shape()[1] != channels {
        return Err(Error::Dimension(format!(
            "batch_norm channel count {} != state channels {}",
            x.shape()[1],
            channels
        )));
    }
    if gamma.len() != channels || beta.len() != channels {
        return Err(Error::Dimension(format!(
            "gamma/beta length {}/{} != channels {}",
            gamma.len(),
            beta.len(),
            channels
        )));
    }
    Ok(())
}

/// Train-mode forward: normalize with batch statistics, update running stats
/// with momentum (unbiased variance in the running estimate).
pub fn batch_norm_train(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    state: &mut BnState,
) -> Result<(Tensor, BnCache)> {
    check_shape(x, gamma, beta, state.channels())?;
    let (b, c, t) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    if b < 2 {
        return Err(Error::Config(
            "batch_norm train mode needs batch size >= 2".into(),
        ));
    }
    let m = (b * t) as f64;
    let mut out = Tensor::zeros(x.shape());
    let mut xhat = Tensor::zeros(x.shape());
    let mut inv_std = vec![0.0; c];

    for ch in 0..c {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for bi in 0..b {
            for v in x.lane(bi, ch) {
                sum += v;
                sumsq += v * v;
            }
        }
        let mean = sum / m;
        let var = (sumsq / m - mean * mean).max(0.0);
        let istd = 1.0 / (var + state.eps).sqrt();
        inv_std[ch] = istd;

        let (g, be) = (gamma.data()[ch], beta.data()[ch]);
        for bi in 0..b {
            let src = x.lane(bi, ch).to_vec();
            for (k, v) in src.iter().enumerate() {
                let xh = (v - mean) * istd;
                xhat.lane_mut(bi, ch)[k] = xh;
                out.lane_mut(bi, ch)[k] = g * xh + be;
            }
        }

        let mom = state.momentum;
        let var_unbiased = var * m / (m - 1.0);
        state.running_mean.data_mut()[ch] = (1.0 - mom) * state.running_mean.data()[ch] + mom * mean;
        state.running_var.data_mut()[ch] =
            (1.0 - mom) * state.running_var.data()[ch] + mom * var_unbiased;
    }

    Ok((
        out,
        BnCache {
            xhat,
            inv_std,
            gamma: gamma.clone(),
        },
    ))
}

/// Infer-mode forward using running statistics; works for any batch size.
pub fn batch_norm_infer(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    state: &BnState,
) -> Result<Tensor> {
    check_shape(x, gamma, beta, state.channels())?;
    let (b, c, _) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let mut out = Tensor::zeros(x.shape());
    for ch in 0..c {
        let mean = state.running_mean.data()[ch];
        let istd = 1.0 / (state.running_var.data()[ch] + state.eps).sqrt();
        let (g, be) = (gamma.data()[ch], beta.data()[ch]);
        for bi in 0..b {
            let src = x.lane(bi, ch).to_vec();
            for (k, v) in src.iter().enumerate() {
                out.lane_mut(bi, ch)[k] = g * (v - mean) * istd + be;
            }
        }
    }
    Ok(out)
}

/// Backward through train-mode normalization.
/// Returns `(dx, dgamma, dbeta)`.
pub fn batch_norm_backward(cache: &BnCache, dout: &Tensor) -> (Tensor, Tensor, Tensor) {
    let shape = cache.xhat.shape();
    assert_eq!(dout.shape(), shape, "batch_norm upstream shape mismatch");
    let (b, c, t) = (shape[0], shape[1], shape[2]);
    let m = (b * t) as f64;

    let mut dx = Tensor::zeros(shape);
    let mut dgamma = Tensor::zeros(&[c]);
    let mut dbeta = Tensor::zeros(&[c]);

    for ch in 0..c {
        let mut sum_dy = 0.0;
        let mut sum_dy_xhat = 0.0;
        for bi in 0..b {
            let dy = dout.lane(bi, ch);
            let xh = cache.xhat.lane(bi, ch);
            for (d, x) in dy.iter().zip(xh) {
                sum_dy += d;
                sum_dy_xhat += d * x;
            }
        }
        dgamma.data_mut()[ch] = sum_dy_xhat;
        dbeta.data_mut()[ch] = sum_dy;

        let g = cache.gamma.data()[ch];
        let istd = cache.inv_std[ch];
        let mean_dy = sum_dy / m;
        let mean_dy_xhat = sum_dy_xhat / m;
        for bi in 0..b {
            let dy = dout.lane(bi, ch).to_vec();
            let xh = cache.xhat.lane(bi, ch).to_vec();
            let dst = dx.lane_mut(bi, ch);
            for k in 0..dy.len() {
                dst[k] = g * istd * (dy[k] - mean_dy - xh[k] * mean_dy_xhat);
            }
        }
    }
    (dx, dgamma, dbeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check;
    use rand::Rng;

    fn random_x(b: usize, c: usize, t: usize, seed: u64) -> Tensor {
        let mut rng = crate::seed::SeedTree::new(seed).rng();
        Tensor::from_fn(&[b, c, t], |_| rng.gen_range(-2.0..2.0) + 0.5)
    }

    #[test]
    fn train_normalizes_per_channel() {
        let x = random_x(4, 3, 25, 2);
        let gamma = Tensor::filled(&[3], 1.0);
        let beta = Tensor::zeros(&[3]);
        let mut state = BnState::new(3);
        let (out, _) = batch_norm_train(&x, &gamma, &beta, &mut state).unwrap();
        for ch in 0..3 {
            let mut vals = Vec::new();
            for bi in 0..4 {
                vals.extend_from_slice(out.lane(bi, ch));
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / vals.len() as f64;
            assert!(m.abs() <= 1e-6, "mean {m}");
            assert!((v - 1.0).abs() <= 1e-4, "var {v}");
        }
    }

    #[test]
    fn infer_with_identity_stats_is_identity() {
        let x = random_x(2, 3, 10, 4);
        let gamma = Tensor::filled(&[3], 1.0);
        let beta = Tensor::zeros(&[3]);
        let state = BnState::new(3); // running mean 0, var 1
        let out = batch_norm_infer(&x, &gamma, &beta, &state).unwrap();
        for (a, b) in out.data().iter().zip(x.data()) {
            assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0));
        }
    }

    #[test]
    fn batch_of_one_is_config_error() {
        let x = random_x(1, 3, 10, 4);
        let gamma = Tensor::filled(&[3], 1.0);
        let beta = Tensor::zeros(&[3]);
        let mut state = BnState::new(3);
        assert!(matches!(
            batch_norm_train(&x, &gamma, &beta, &mut state),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = crate::seed::SeedTree::new(31).rng();
        let x = random_x(3, 2, 7, 6);
        let gamma = Tensor::from_fn(&[2], |_| rng.gen_range(0.5..1.5));
        let beta = Tensor::from_fn(&[2], |_| rng.gen_range(-0.5..0.5));
        let w: Vec<f64> = (0..x.len()).map(|i| ((i % 7) as f64) * 0.3 - 1.0).collect();
        let dout = Tensor::from_vec(x.shape(), w.clone()).unwrap();

        let fresh = || BnState::new(2);
        let (_, cache) = batch_norm_train(&x, &gamma, &beta, &mut fresh()).unwrap();
        let (dx, dgamma, dbeta) = batch_norm_backward(&cache, &dout);

        let loss_x = |t: &Tensor| {
            let (o, _) = batch_norm_train(t, &gamma, &beta, &mut fresh()).unwrap();
            o.data().iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
        };
        check::check_grad(loss_x, &x, &dx, 1e-5, 1e-4);

        let loss_g = |t: &Tensor| {
            let (o, _) = batch_norm_train(&x, t, &beta, &mut fresh()).unwrap();
            o.data().iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
        };
        check::check_grad(loss_g, &gamma, &dgamma, 1e-5, 1e-4);

        let loss_b = |t: &Tensor| {
            let (o, _) = batch_norm_train(&x, &gamma, t, &mut fresh()).unwrap();
            o.data().iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
        };
        check::check_grad(loss_b, &beta, &dbeta, 1e-5, 1e-4);
    }
}
