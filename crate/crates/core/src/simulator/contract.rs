//! Exact sentence amplitudes without simulating the full register.
//!
//! A sentence circuit prepares a product of word states and then applies Bell
//! effects, each equal to `(<00| + <11|) / sqrt 2` once postselected. The zero
//! amplitude is therefore a contraction of small word statevectors along the
//! cup pairs. Word states are simulated on their own qubits and shared by every
//! sentence that uses the word, so a cost evaluation over a corpus costs one
//! simulation per vocabulary word plus the contractions.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{run, StateVector};
use crate::circuit::{Gate, SentenceCircuit};
use crate::error::{Error, Result};

struct WordCircuit {
    circuit: SentenceCircuit,
    /// Kronecker words do not depend on the parameters.
    fixed: Option<Vec<Complex64>>,
}

/// Distinct word circuits of a set of sentences.
#[derive(Default)]
pub struct WordStateTable {
    words: Vec<WordCircuit>,
    index: HashMap<(String, usize), usize>,
}

fn localise(g: Gate, dq: usize) -> Gate {
    match g {
        Gate::H { qubit } => Gate::H { qubit: qubit - dq },
        Gate::X { qubit } => Gate::X { qubit: qubit - dq },
        Gate::S { qubit } => Gate::S { qubit: qubit - dq },
        Gate::Sdg { qubit } => Gate::Sdg { qubit: qubit - dq },
        Gate::Rx { qubit, slot } => Gate::Rx {
            qubit: qubit - dq,
            slot,
        },
        Gate::Rz { qubit, slot } => Gate::Rz {
            qubit: qubit - dq,
            slot,
        },
        Gate::Crz {
            control,
            target,
            slot,
        } => Gate::Crz {
            control: control - dq,
            target: target - dq,
            slot,
        },
        Gate::Cnot { control, target } => Gate::Cnot {
            control: control - dq,
            target: target - dq,
        },
    }
}

struct BlockPlan {
    word: usize,
    /// (position in the incoming open list, local bit) that must agree.
    closes: Vec<(usize, usize)>,
    /// Incoming open positions carried forward, in order.
    keeps: Vec<usize>,
    /// Local bit pairs cupped inside the same word.
    internal: Vec<(usize, usize)>,
    /// Local bits whose partner lies to the right.
    opens: Vec<usize>,
}

/// Contraction schedule of one sentence over a [`WordStateTable`].
pub struct SentenceNetwork {
    blocks: Vec<BlockPlan>,
    scale: f64,
}

impl WordStateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Registers the words of `c` and returns its contraction schedule.
    pub fn add_sentence(&mut self, c: &SentenceCircuit) -> Result<SentenceNetwork> {
        if !c.open_qubits.is_empty() {
            return Err(Error::NotScalar(c.open_qubits.len()));
        }
        let mut partner = vec![None; c.qubit_count];
        for &(l, r) in &c.bell_pairs {
            partner[l] = Some(r);
            partner[r] = Some(l);
        }
        let mut open: Vec<usize> = Vec::new();
        let mut blocks = Vec::with_capacity(c.blocks.len());
        for b in &c.blocks {
            let key = (b.word.clone(), b.qubits.len());
            let word = match self.index.get(&key) {
                Some(&i) => i,
                None => {
                    let gates = c.gates[b.gates.clone()]
                        .iter()
                        .map(|&g| localise(g, b.qubits.start))
                        .collect();
                    let circuit = SentenceCircuit::from_gates(b.qubits.len(), gates);
                    let fixed = if b.kronecker {
                        Some(run(&circuit, &[])?.into_amplitudes())
                    } else {
                        None
                    };
                    self.words.push(WordCircuit { circuit, fixed });
                    self.index.insert(key, self.words.len() - 1);
                    self.words.len() - 1
                }
            };
            let mut plan = BlockPlan {
                word,
                closes: Vec::new(),
                keeps: Vec::new(),
                internal: Vec::new(),
                opens: Vec::new(),
            };
            let mut closed = Vec::new();
            for q in b.qubits.clone() {
                let local = q - b.qubits.start;
                match partner[q] {
                    None => {
                        return Err(Error::InvalidDiagram(format!(
                            "qubit {q} is not joined by any cup"
                        )))
                    }
                    Some(p) if p < b.qubits.start => {
                        let pos = open
                            .iter()
                            .position(|&o| o == p)
                            .expect("left partner is open");
                        plan.closes.push((pos, local));
                        closed.push(pos);
                    }
                    Some(p) if p < b.qubits.end => {
                        if q < p {
                            plan.internal.push((local, p - b.qubits.start));
                        }
                    }
                    Some(_) => plan.opens.push(local),
                }
            }
            plan.keeps = (0..open.len()).filter(|i| !closed.contains(i)).collect();
            let mut next: Vec<usize> = plan.keeps.iter().map(|&i| open[i]).collect();
            next.extend(plan.opens.iter().map(|&l| b.qubits.start + l));
            open = next;
            blocks.push(plan);
        }
        debug_assert!(open.is_empty());
        Ok(SentenceNetwork {
            blocks,
            scale: std::f64::consts::FRAC_1_SQRT_2.powi(c.bell_pairs.len() as i32),
        })
    }

    /// Word statevectors at `theta`, indexed like the table.
    pub fn states(&self, theta: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        self.words
            .iter()
            .map(|w| match &w.fixed {
                Some(s) => Ok(s.clone()),
                None => Ok(super::run_from(
                    &w.circuit,
                    theta,
                    StateVector::zero(w.circuit.qubit_count),
                )?
                .into_amplitudes()),
            })
            .collect()
    }
}

fn compact(x: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | (((x >> p) & 1) << k))
}

impl SentenceNetwork {
    /// Zero amplitude of the sentence given the table's word states.
    pub fn contract(&self, states: &[Vec<Complex64>]) -> Complex64 {
        let mut tensor = vec![Complex64::new(1.0, 0.0)];
        for plan in &self.blocks {
            let psi = &states[plan.word];
            let width = plan.keeps.len();
            let mut next = vec![Complex64::new(0.0, 0.0); 1 << (width + plan.opens.len())];
            for (a, &ta) in tensor.iter().enumerate() {
                if ta == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let kept = compact(a, &plan.keeps);
                for (b, &pb) in psi.iter().enumerate() {
                    let agrees = plan
                        .closes
                        .iter()
                        .all(|&(pos, bit)| (a >> pos) & 1 == (b >> bit) & 1)
                        && plan
                            .internal
                            .iter()
                            .all(|&(x, y)| (b >> x) & 1 == (b >> y) & 1);
                    if agrees {
                        next[kept | (compact(b, &plan.opens) << width)] += ta * pb;
                    }
                }
            }
            tensor = next;
        }
        tensor[0] * self.scale
    }
}

/// Zero amplitude of a single scalar circuit by word-wise contraction.
pub fn factorized_amplitude(c: &SentenceCircuit, theta: &[f64]) -> Result<Complex64> {
    let mut table = WordStateTable::new();
    let net = table.add_sentence(c)?;
    Ok(net.contract(&table.states(theta)?))
}
