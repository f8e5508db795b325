//! Training sentence circuits for question answering: corpus splits, costs,
//! error rates, and three gradient-free optimizers.

pub mod basinhopping;
pub mod nelder_mead;
pub mod spsa;

use std::cell::RefCell;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::distributions::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use basinhopping::{basinhopping, BasinhoppingConfig};
pub use nelder_mead::{nelder_mead, NelderMeadConfig};
pub use spsa::{spsa_minimize, SpsaConfig};

use crate::circuit::{compile, diagram_scale, HyperParams, ParamRegistry, SentenceCircuit};
use crate::corpora::LabeledCorpus;
use crate::diagram::from_sentence;
use crate::error::{Error, Result};
use crate::pregroup::Dictionary;
use crate::simulator::{amplitude_zero, SentenceNetwork, WordStateTable};

/// Outcome of any of the optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub theta: Vec<f64>,
    pub cost: f64,
    pub trace: Vec<(usize, f64)>,
    pub evaluations: usize,
}

/// Nearest integer to `x >= 0`, ties to even.
fn round_half_even(x: f64) -> usize {
    let r = x.round();
    let r = if (x - x.trunc() - 0.5).abs() < 1e-12 && r % 2.0 != 0.0 {
        r - 1.0
    } else {
        r
    };
    r as usize
}

/// First `round(p N)` sentences train, the rest test.
pub fn split(corpus: &LabeledCorpus, p: f64) -> Result<(LabeledCorpus, LabeledCorpus)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Config(format!(
            "split fraction {p} is not in (0, 1)"
        )));
    }
    let k = round_half_even(p * corpus.len() as f64);
    Ok((
        LabeledCorpus {
            items: corpus.items[..k].to_vec(),
        },
        LabeledCorpus {
            items: corpus.items[k..].to_vec(),
        },
    ))
}

/// Every test word must have been seen in training.
pub fn check_vocabulary(train: &LabeledCorpus, test: &LabeledCorpus) -> Result<()> {
    let seen: HashSet<&str> = train.vocabulary().into_iter().collect();
    for item in &test.items {
        if let Some(w) = item.words.iter().find(|w| !seen.contains(w.as_str())) {
            return Err(Error::InvalidCorpus(format!(
                "test sentence `{}` uses `{w}`, which is absent from the training split",
                item.text()
            )));
        }
    }
    Ok(())
}

pub fn round_label(prediction: f64) -> u8 {
    u8::from(prediction >= 0.5)
}

pub fn squared_loss(predictions: &[f64], labels: &[u8]) -> f64 {
    predictions
        .iter()
        .zip(labels)
        .map(|(p, &l)| (p - f64::from(l)).powi(2))
        .sum()
}

pub const BCE_EPS: f64 = 1e-9;

pub fn bce_loss(predictions: &[f64], labels: &[u8]) -> f64 {
    if predictions.is_empty() {
        return 0.0;
    }
    let total: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(p, &l)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            if l == 1 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum();
    -total / predictions.len() as f64
}

pub fn error_fraction(predictions: &[f64], labels: &[u8]) -> f64 {
    if predictions.is_empty() {
        return 0.0;
    }
    let wrong = predictions
        .iter()
        .zip(labels)
        .filter(|(p, &l)| round_label(**p) != l)
        .count();
    wrong as f64 / predictions.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "shots", rename_all = "snake_case")]
pub enum EvalMode {
    /// Exact amplitudes by contracting word states.
    Exact,
    /// Exact amplitudes from the full register statevector.
    Statevector,
    /// Fraction of all-zero outcomes over this many shots.
    Shots(usize),
}

/// How a postselected circuit probability becomes a predicted label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LabelScale {
    /// Squared diagram scalar: the probability times the squared
    /// [`diagram_scale`] of the circuit.
    #[default]
    Diagram,
    /// The probability of postselecting all zeros.
    Postselected,
}

impl std::str::FromStr for LabelScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagram" => Ok(LabelScale::Diagram),
            "postselected" => Ok(LabelScale::Postselected),
            other => Err(Error::Config(format!("unknown label scale `{other}`"))),
        }
    }
}

/// Predicted labels for a fixed list of compiled sentences.
pub struct Evaluator {
    mode: EvalMode,
    factors: Vec<f64>,
    circuits: Vec<SentenceCircuit>,
    labels: Vec<u8>,
    table: WordStateTable,
    networks: Vec<SentenceNetwork>,
    param_count: usize,
    shot_seed: u64,
    calls: AtomicU64,
}

impl Evaluator {
    pub fn new(
        circuits: Vec<SentenceCircuit>,
        labels: Vec<u8>,
        param_count: usize,
        mode: EvalMode,
        scale: LabelScale,
        shot_seed: u64,
    ) -> Result<Evaluator> {
        if circuits.len() != labels.len() {
            return Err(Error::InvalidCorpus(format!(
                "{} circuits but {} labels",
                circuits.len(),
                labels.len()
            )));
        }
        if mode == EvalMode::Shots(0) {
            return Err(Error::Config("shots must be positive".into()));
        }
        let mut table = WordStateTable::new();
        let networks = circuits
            .iter()
            .map(|c| table.add_sentence(c))
            .collect::<Result<_>>()?;
        let factors = circuits
            .iter()
            .map(|c| match scale {
                LabelScale::Diagram => diagram_scale(c).powi(2),
                LabelScale::Postselected => 1.0,
            })
            .collect();
        Ok(Evaluator {
            mode,
            factors,
            circuits,
            labels,
            table,
            networks,
            param_count,
            shot_seed,
            calls: AtomicU64::new(0),
        })
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    fn exact(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let states = self.table.states(theta)?;
        Ok(self
            .networks
            .iter()
            .map(|n| n.contract(&states).norm_sqr().clamp(0.0, 1.0))
            .collect())
    }

    /// Predicted labels in sentence order. In shot mode every call draws
    /// fresh samples from a seed advanced once per call.
    pub fn predict(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut p = self.postselected(theta)?;
        for (x, f) in p.iter_mut().zip(&self.factors) {
            *x *= f;
        }
        Ok(p)
    }

    /// All-zero outcome probabilities in sentence order.
    pub fn postselected(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.param_count {
            return Err(Error::ParamLength {
                got: theta.len(),
                expected: self.param_count,
            });
        }
        match self.mode {
            EvalMode::Exact => self.exact(theta),
            EvalMode::Statevector => self
                .circuits
                .par_iter()
                .map(|c| Ok(amplitude_zero(c, theta)?.norm_sqr().clamp(0.0, 1.0)))
                .collect(),
            EvalMode::Shots(shots) => {
                let call = self.calls.fetch_add(1, Ordering::Relaxed);
                let mut rng = ChaCha8Rng::seed_from_u64(self.shot_seed ^ call.rotate_left(32));
                self.exact(theta)?
                    .into_iter()
                    .map(|p| {
                        let coin = Bernoulli::new(p).map_err(|e| Error::Config(e.to_string()))?;
                        let hits = (0..shots).filter(|_| coin.sample(&mut rng)).count();
                        Ok(hits as f64 / shots as f64)
                    })
                    .collect()
            }
        }
    }
}

pub fn cost_squared(theta: &[f64], data: &Evaluator) -> Result<f64> {
    Ok(squared_loss(&data.predict(theta)?, data.labels()))
}

pub fn cost_bce(theta: &[f64], data: &Evaluator) -> Result<f64> {
    Ok(bce_loss(&data.predict(theta)?, data.labels()))
}

pub fn error_rate(theta: &[f64], data: &Evaluator) -> Result<f64> {
    Ok(error_fraction(&data.predict(theta)?, data.labels()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Squared,
    Bce,
}

impl CostKind {
    pub fn eval(self, theta: &[f64], data: &Evaluator) -> Result<f64> {
        match self {
            CostKind::Squared => cost_squared(theta, data),
            CostKind::Bce => cost_bce(theta, data),
        }
    }
}

impl std::str::FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(CostKind::Squared),
            "bce" => Ok(CostKind::Bce),
            other => Err(Error::Config(format!("unknown cost `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Spsa(SpsaConfig),
    NelderMead(NelderMeadConfig),
    Basinhopping(BasinhoppingConfig),
}

impl OptimizerConfig {
    /// Default configuration for `spsa`, `nelder_mead` or `basinhopping`.
    pub fn by_name(name: &str) -> Result<OptimizerConfig> {
        match name {
            "spsa" => Ok(OptimizerConfig::Spsa(SpsaConfig::default())),
            "nelder_mead" | "nelder-mead" => {
                Ok(OptimizerConfig::NelderMead(NelderMeadConfig::default()))
            }
            "basinhopping" => Ok(OptimizerConfig::Basinhopping(BasinhoppingConfig::default())),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }

    pub fn minimize<F>(&self, f: F, theta0: &[f64], seed: u64) -> Result<OptimResult>
    where
        F: FnMut(&[f64]) -> f64,
    {
        match self {
            OptimizerConfig::Spsa(c) => spsa_minimize(f, theta0, c, seed),
            OptimizerConfig::NelderMead(c) => Ok(nelder_mead(f, theta0, c)),
            OptimizerConfig::Basinhopping(c) => Ok(basinhopping(f, theta0, c, seed)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub cost: CostKind,
    pub hyper: HyperParams,
    pub split_p: f64,
    pub evaluator: EvalMode,
    #[serde(default)]
    pub label_scale: LabelScale,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerConfig::Spsa(SpsaConfig::default()),
            cost: CostKind::Squared,
            hyper: HyperParams {
                q_n: 1,
                q_s: 0,
                depth: 1,
            },
            split_p: 0.5,
            evaluator: EvalMode::Exact,
            label_scale: LabelScale::Diagram,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn init_seed(&self) -> u64 {
        self.seed
    }

    pub fn optimizer_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    pub fn shot_seed(&self) -> u64 {
        self.seed.wrapping_add(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub cost_trace: Vec<(usize, f64)>,
    pub theta_star: Vec<f64>,
    /// Training cost at `theta_star`.
    pub final_cost: f64,
    pub e_train: f64,
    pub e_test: f64,
    pub param_count: usize,
    pub evaluations: usize,
}

/// Compiled corpus ready for training: one shared registry, train and test
/// evaluators.
pub struct Experiment {
    pub registry: ParamRegistry,
    pub train: Evaluator,
    pub test: Evaluator,
}

impl Experiment {
    pub fn prepare(
        corpus: &LabeledCorpus,
        dict: &Dictionary,
        config: &TrainConfig,
    ) -> Result<Experiment> {
        let (train, test) = split(corpus, config.split_p)?;
        check_vocabulary(&train, &test)?;
        let mut registry = ParamRegistry::new();
        let build = |part: &LabeledCorpus, registry: &mut ParamRegistry| -> Result<_> {
            let circuits = part
                .items
                .iter()
                .map(|it| compile(&from_sentence(&it.words, dict)?, &config.hyper, registry))
                .collect::<Result<Vec<_>>>()?;
            Ok((
                circuits,
                part.items.iter().map(|it| it.label).collect::<Vec<_>>(),
            ))
        };
        let (train_c, train_l) = build(&train, &mut registry)?;
        let (test_c, test_l) = build(&test, &mut registry)?;
        let n = registry.total_slots();
        Ok(Experiment {
            train: Evaluator::new(
                train_c,
                train_l,
                n,
                config.evaluator,
                config.label_scale,
                config.shot_seed(),
            )?,
            test: Evaluator::new(
                test_c,
                test_l,
                n,
                config.evaluator,
                config.label_scale,
                config.shot_seed().wrapping_add(1),
            )?,
            registry,
        })
    }

    pub fn param_count(&self) -> usize {
        self.registry.total_slots()
    }

    pub fn initial_theta(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.param_count())
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect()
    }

    pub fn run(&self, config: &TrainConfig) -> Result<TrainRecord> {
        let theta0 = self.initial_theta(config.init_seed());
        let failure = RefCell::new(None);
        let objective = |theta: &[f64]| match config.cost.eval(theta, &self.train) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let result = config
            .optimizer
            .minimize(objective, &theta0, config.optimizer_seed())?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(TrainRecord {
            cost_trace: result.trace,
            e_train: error_rate(&result.theta, &self.train)?,
            e_test: error_rate(&result.theta, &self.test)?,
            final_cost: result.cost,
            theta_star: result.theta,
            param_count: self.param_count(),
            evaluations: result.evaluations,
        })
    }
}

/// Compiles, splits, trains on the first part and scores both parts.
pub fn run_experiment(
    corpus: &LabeledCorpus,
    dict: &Dictionary,
    config: &TrainConfig,
) -> Result<TrainRecord> {
    Experiment::prepare(corpus, dict, config)?.run(config)
}

pub fn trace_csv(record: &TrainRecord) -> String {
    let mut out = String::from("iteration,cost\n");
    for (i, c) in &record.cost_trace {
        let _ = writeln!(out, "{i},{c}");
    }
    out
}

pub fn write_trace_csv(path: &Path, record: &TrainRecord) -> Result<()> {
    std::fs::write(path, trace_csv(record))?;
    Ok(())
}

/// Run summary for plotting. Everything except `timestamp` is a function of
/// the inputs.
pub fn summary_json(
    corpus_name: &str,
    config: &TrainConfig,
    record: &TrainRecord,
    wall_seconds: f64,
) -> serde_json::Value {
    json!({
        "corpus": corpus_name,
        "config": config,
        "param_count": record.param_count,
        "e_train": record.e_train,
        "e_test": record.e_test,
        "final_cost": record.final_cost,
        "evaluations": record.evaluations,
        "theta_star": record.theta_star,
        "timestamp": { "wall_seconds": wall_seconds },
    })
}

/// Least-squares slope of `ln y` against `ln x`. Zero values are replaced by
/// `floor` so that perfect runs stay on the log scale.
pub fn log_log_slope(xs: &[f64], ys: &[f64], floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x.ln(), y.max(floor).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
