//! Dense statevector simulation of sentence circuits.
//!
//! With `q_s = 0` every qubit of a sentence circuit is postselected on `|0>`,
//! so the sentence scalar is the `|0...0>` amplitude of the final state and
//! postselection reduces to reading one amplitude.

pub mod contract;

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Gate, SentenceCircuit};
use crate::error::{Error, Result};

pub use contract::{SentenceNetwork, WordStateTable};

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// All-zeros state on `qubits` qubits.
    pub fn zero(qubits: usize) -> Self {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << qubits];
        amps[index] = ONE;
        StateVector { qubits, amps }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a 2x2 matrix to `target` on the basis states where every bit of
    /// `controls` is set.
    fn apply_matrix(&mut self, m: &Mat2, target: usize, controls: usize) {
        let bit = 1usize << target;
        let diagonal = m[0][1] == ZERO && m[1][0] == ZERO;
        for i in 0..self.amps.len() {
            if i & bit != 0 || i & controls != controls {
                continue;
            }
            let j = i | bit;
            let (a, b) = (self.amps[i], self.amps[j]);
            if diagonal {
                self.amps[i] = m[0][0] * a;
                self.amps[j] = m[1][1] * b;
            } else {
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    /// Applies `gate`, additionally controlled on every bit of `extra_controls`.
    pub fn apply(&mut self, gate: &Gate, theta: &[f64], extra_controls: usize) -> Result<()> {
        if gate.max_qubit() >= self.qubits {
            return Err(Error::InvalidDiagram(format!(
                "gate {gate:?} outside a {}-qubit register",
                self.qubits
            )));
        }
        let angle = |slot: usize| {
            theta.get(slot).copied().ok_or(Error::ParamLength {
                got: theta.len(),
                expected: slot + 1,
            })
        };
        let (m, target, controls) = match *gate {
            Gate::H { qubit } => (hadamard(), qubit, 0),
            Gate::X { qubit } => (pauli_x(), qubit, 0),
            Gate::S { qubit } => (phase(Complex64::i()), qubit, 0),
            Gate::Sdg { qubit } => (phase(-Complex64::i()), qubit, 0),
            Gate::Rx { qubit, slot } => (rx(angle(slot)?), qubit, 0),
            Gate::Rz { qubit, slot } => (rz(angle(slot)?), qubit, 0),
            Gate::Crz {
                control,
                target,
                slot,
            } => (rz(angle(slot)?), target, 1 << control),
            Gate::Cnot { control, target } => (pauli_x(), target, 1 << control),
        };
        self.apply_matrix(&m, target, controls | extra_controls);
        Ok(())
    }

    /// Raw little-endian dump: `(re, im)` f64 pairs in basis order.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for a in &self.amps {
            out.write_all(&a.re.to_le_bytes())?;
            out.write_all(&a.im.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }
}

fn hadamard() -> Mat2 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

fn phase(p: Complex64) -> Mat2 {
    [[ONE, ZERO], [ZERO, p]]
}

fn rx(t: f64) -> Mat2 {
    let c = Complex64::new((t / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(t / 2.0).sin());
    [[c, s], [s, c]]
}

fn rz(t: f64) -> Mat2 {
    [
        [Complex64::from_polar(1.0, -t / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, t / 2.0)],
    ]
}

/// Evolves `initial` through every gate of `c`.
pub fn run_from(c: &SentenceCircuit, theta: &[f64], initial: StateVector) -> Result<StateVector> {
    let mut state = initial;
    for g in &c.gates {
        state.apply(g, theta, 0)?;
    }
    Ok(state)
}

pub fn run(c: &SentenceCircuit, theta: &[f64]) -> Result<StateVector> {
    run_from(c, theta, StateVector::zero(c.qubit_count))
}

fn require_scalar(c: &SentenceCircuit) -> Result<()> {
    if c.open_qubits.is_empty() {
        Ok(())
    } else {
        Err(Error::NotScalar(c.open_qubits.len()))
    }
}

/// `<0...0| C(theta) |0...0>`, the postselected sentence scalar.
pub fn amplitude_zero(c: &SentenceCircuit, theta: &[f64]) -> Result<Complex64> {
    require_scalar(c)?;
    Ok(run(c, theta)?.amps[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Exact,
    Shots(usize),
    Hadamard(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelEstimate {
    /// In `[0, 1]`.
    pub value: f64,
    pub method: EstimateMethod,
    pub stderr: Option<f64>,
}

pub fn predicted_label(c: &SentenceCircuit, theta: &[f64]) -> Result<LabelEstimate> {
    let amp = amplitude_zero(c, theta)?;
    Ok(LabelEstimate {
        value: amp.norm_sqr().clamp(0.0, 1.0),
        method: EstimateMethod::Exact,
        stderr: None,
    })
}

/// Draws basis-state indices from `probs` by inverse CDF.
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Sampler { cdf }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap_or(&0.0);
        let u = rng.gen::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

/// Fraction of sampled bitstrings equal to all zeros.
pub fn predicted_label_shots(
    c: &SentenceCircuit,
    theta: &[f64],
    shots: usize,
    seed: u64,
) -> Result<LabelEstimate> {
    require_scalar(c)?;
    if shots == 0 {
        return Err(Error::Config("shots must be positive".into()));
    }
    let probs = run(c, theta)?.probabilities();
    let sampler = Sampler::new(&probs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = (0..shots).filter(|_| sampler.sample(&mut rng) == 0).count();
    let p = zeros as f64 / shots as f64;
    Ok(LabelEstimate {
        value: p,
        method: EstimateMethod::Shots(shots),
        stderr: Some((p * (1.0 - p) / shots as f64).sqrt()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Real,
    Imaginary,
}

/// Ancilla expectation `<Z>` together with the probability it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub stderr: Option<f64>,
    pub shots: Option<usize>,
}

/// Final state of the Hadamard-test register: `c`'s qubits plus the ancilla
/// as the top qubit.
fn hadamard_state(c: &SentenceCircuit, theta: &[f64], part: Part) -> Result<StateVector> {
    let anc = c.qubit_count;
    let mut state = StateVector::zero(anc + 1);
    state.apply(&Gate::H { qubit: anc }, theta, 0)?;
    if part == Part::Imaginary {
        state.apply(&Gate::Sdg { qubit: anc }, theta, 0)?;
    }
    for g in &c.gates {
        state.apply(g, theta, 1 << anc)?;
    }
    state.apply(&Gate::H { qubit: anc }, theta, 0)?;
    Ok(state)
}

fn ancilla_zero_probability(state: &StateVector) -> f64 {
    let anc = 1usize << (state.qubits - 1);
    state
        .amps
        .iter()
        .enumerate()
        .filter(|(i, _)| i & anc == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Exact ancilla `<Z>`: `Re <0|U|0>` for [`Part::Real`], `Im <0|U|0>` for
/// [`Part::Imaginary`].
pub fn hadamard_test(c: &SentenceCircuit, theta: &[f64], part: Part) -> Result<f64> {
    let p0 = ancilla_zero_probability(&hadamard_state(c, theta, part)?);
    Ok(2.0 * p0 - 1.0)
}

/// Shot estimate of the ancilla `<Z>`, sampling the whole register.
pub fn hadamard_test_shots(
    c: &SentenceCircuit,
    theta: &[f64],
    part: Part,
    shots: usize,
    seed: u64,
) -> Result<ExpectationEstimate> {
    if shots == 0 {
        return Err(Error::Config("shots must be positive".into()));
    }
    let state = hadamard_state(c, theta, part)?;
    let anc = 1usize << c.qubit_count;
    let sampler = Sampler::new(&state.probabilities());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = (0..shots)
        .filter(|_| sampler.sample(&mut rng) & anc == 0)
        .count();
    let p0 = zeros as f64 / shots as f64;
    let z = 2.0 * p0 - 1.0;
    Ok(ExpectationEstimate {
        value: z,
        stderr: Some(((1.0 - z * z).max(0.0) / shots as f64).sqrt()),
        shots: Some(shots),
    })
}
