//! Global minimization by random hops between local minima.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadConfig};
use super::OptimResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinhoppingConfig {
    pub hops: usize,
    pub temperature: f64,
    pub step_size: f64,
    pub inner: NelderMeadConfig,
}

impl Default for BasinhoppingConfig {
    fn default() -> Self {
        BasinhoppingConfig {
            hops: 100,
            temperature: 1.0,
            step_size: 0.5,
            inner: NelderMeadConfig {
                max_iter: 2000,
                max_evals: None,
                xtol: 1e-4,
                ftol: 1e-4,
            },
        }
    }
}

impl BasinhoppingConfig {
    /// Inner configuration with the evaluation budget scaled to the
    /// dimension when none is set.
    fn inner_for(&self, dim: usize) -> NelderMeadConfig {
        NelderMeadConfig {
            max_evals: self.inner.max_evals.or(Some(200 * dim.max(1))),
            ..self.inner
        }
    }
}

/// Trace entry `h` is the lowest cost found after `h` hops.
pub fn basinhopping<F>(mut f: F, theta0: &[f64], cfg: &BasinhoppingConfig, seed: u64) -> OptimResult
where
    F: FnMut(&[f64]) -> f64,
{
    let inner = cfg.inner_for(theta0.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluations = 0;
    let mut local = |x: &[f64], evaluations: &mut usize| {
        let r = nelder_mead(&mut f, x, &inner);
        *evaluations += r.evaluations;
        r
    };
    let start = local(theta0, &mut evaluations);
    let (mut current, mut current_cost) = (start.theta.clone(), start.cost);
    let (mut best, mut best_cost) = (start.theta, start.cost);
    let mut trace = vec![(0, best_cost)];
    for hop in 1..=cfg.hops {
        let trial: Vec<f64> = current
            .iter()
            .map(|x| x + rng.gen_range(-cfg.step_size..=cfg.step_size))
            .collect();
        let r = local(&trial, &mut evaluations);
        let delta = r.cost - current_cost;
        let accept = delta <= 0.0
            || (cfg.temperature > 0.0 && rng.gen::<f64>() < (-delta / cfg.temperature).exp());
        if r.cost < best_cost {
            best_cost = r.cost;
            best = r.theta.clone();
        }
        if accept {
            current = r.theta;
            current_cost = r.cost;
        }
        trace.push((hop, best_cost));
    }
    OptimResult {
        theta: best,
        cost: best_cost,
        trace,
        evaluations,
    }
}
