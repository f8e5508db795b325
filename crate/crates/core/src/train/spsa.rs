//! Simultaneous perturbation stochastic approximation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OptimResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    pub iterations: usize,
    /// Step-size decay exponent.
    pub alpha: f64,
    /// Perturbation decay exponent.
    pub gamma: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            a: 0.1,
            c: 0.1,
            iterations: 1000,
            alpha: 0.602,
            gamma: 0.101,
        }
    }
}

/// Minimizes `f` with two evaluations per iteration along a random `±1`
/// direction. The trace holds the mean of the two perturbed costs; the
/// returned cost is one further evaluation at the final point.
pub fn spsa_minimize<F>(
    mut f: F,
    theta0: &[f64],
    cfg: &SpsaConfig,
    seed: u64,
) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if cfg.iterations == 0 {
        return Err(Error::Config("SPSA needs at least one iteration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = theta0.to_vec();
    let mut delta = vec![0.0; theta.len()];
    let mut plus = vec![0.0; theta.len()];
    let mut minus = vec![0.0; theta.len()];
    let mut trace = Vec::with_capacity(cfg.iterations);
    for k in 0..cfg.iterations {
        let ak = cfg.a / ((k + 1) as f64).powf(cfg.alpha);
        let ck = cfg.c / ((k + 1) as f64).powf(cfg.gamma);
        for d in delta.iter_mut() {
            *d = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }
        for i in 0..theta.len() {
            plus[i] = theta[i] + ck * delta[i];
            minus[i] = theta[i] - ck * delta[i];
        }
        let fp = f(&plus);
        let fm = f(&minus);
        let slope = (fp - fm) / (2.0 * ck);
        for (t, d) in theta.iter_mut().zip(&delta) {
            // 1/d == d for d in {-1, 1}
            *t -= ak * slope * d;
        }
        trace.push((k + 1, 0.5 * (fp + fm)));
    }
    let cost = f(&theta);
    Ok(OptimResult {
        theta,
        cost,
        trace,
        evaluations: 2 * cfg.iterations + 1,
    })
}
