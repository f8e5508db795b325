//! Downhill simplex minimization.

use serde::{Deserialize, Serialize};

use super::OptimResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    pub max_iter: usize,
    /// Evaluation budget; unlimited when absent.
    pub max_evals: Option<usize>,
    /// Converged once every vertex lies within this sup-norm distance of
    /// the best and the value spread is at most `ftol`.
    pub xtol: f64,
    /// Written as `null` in JSON when unbounded.
    #[serde(with = "unbounded")]
    pub ftol: f64,
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            max_iter: 2000,
            max_evals: None,
            xtol: 1e-6,
            ftol: f64::INFINITY,
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn initial_simplex(theta0: &[f64]) -> Vec<Vec<f64>> {
    let mut sim = vec![theta0.to_vec()];
    for i in 0..theta0.len() {
        let mut v = theta0.to_vec();
        v[i] = if v[i] != 0.0 { 1.05 * v[i] } else { 0.00025 };
        sim.push(v);
    }
    sim
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub fn nelder_mead<F>(mut f: F, theta0: &[f64], cfg: &NelderMeadConfig) -> OptimResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = theta0.len();
    let evals = std::cell::Cell::new(0);
    let mut eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };
    if n == 0 {
        let cost = eval(theta0);
        return OptimResult {
            theta: Vec::new(),
            cost,
            trace: vec![(0, cost)],
            evaluations: 1,
        };
    }
    let mut sim = initial_simplex(theta0);
    let mut fs: Vec<f64> = sim.iter().map(|v| eval(v)).collect();
    let budget = cfg.max_evals.unwrap_or(usize::MAX);
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..=n).collect();

    for iter in 0..cfg.max_iter {
        order.sort_by(|&i, &j| fs[i].total_cmp(&fs[j]));
        sim = order.iter().map(|&i| sim[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();
        order = (0..=n).collect();
        trace.push((iter, fs[0]));

        let size = sim[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&sim[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread = fs[n] - fs[0];
        // equal values everywhere means no move can make progress
        let stalled = spread == 0.0;
        if (size < cfg.xtol && spread <= cfg.ftol) || stalled || evals.get() >= budget {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &sim[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = sim[n].clone();
        let xr = affine(&centroid, &worst, -REFLECT);
        let fr = eval(&xr);
        if fr < fs[0] {
            let xe = affine(&centroid, &worst, -REFLECT * EXPAND);
            let fe = eval(&xe);
            if fe < fr {
                sim[n] = xe;
                fs[n] = fe;
            } else {
                sim[n] = xr;
                fs[n] = fr;
            }
            continue;
        }
        if fr < fs[n - 1] {
            sim[n] = xr;
            fs[n] = fr;
            continue;
        }
        let accepted = if fr < fs[n] {
            let xc = affine(&centroid, &xr, CONTRACT);
            let fc = eval(&xc);
            (fc <= fr).then_some((xc, fc))
        } else {
            let xc = affine(&centroid, &worst, CONTRACT);
            let fc = eval(&xc);
            (fc < fs[n]).then_some((xc, fc))
        };
        match accepted {
            Some((x, fx)) => {
                sim[n] = x;
                fs[n] = fx;
            }
            None => {
                for i in 1..=n {
                    sim[i] = affine(&sim[0], &sim[i], SHRINK);
                    fs[i] = eval(&sim[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| fs[i].total_cmp(&fs[j]))
        .expect("nonempty simplex");
    OptimResult {
        theta: sim[best].clone(),
        cost: fs[best],
        trace,
        evaluations: evals.get(),
    }
}
