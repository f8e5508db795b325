//! Lowering of sentence diagrams to parameterised circuits.
//!
//! Each wire of basic type `b` gets `q_b` qubits. Single-qubit words are
//! prepared by `Rx` then `Rz`; wider words by `d` layers of Hadamards followed
//! by a chain of `CRz` gates; relative pronouns by a GHZ state. Every cup
//! becomes Bell effects: a CNOT, a Hadamard on the control, and postselection
//! of both qubits on `|0>`.
//!
//! Gate conventions: `Rx(t) = exp(-i t X / 2)`, `Rz(t) = exp(-i t Z / 2)`,
//! `CRz(t) = diag(1, 1, e^{-i t/2}, e^{i t/2})` with the control first.
//! Qubit `q` is bit `q` of a basis-state index.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::diagram::{validate, wire_qubits, SentenceDiagram};
use crate::error::{Error, Result};
use crate::pregroup::{BasicType, Dictionary, PregroupType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperParams {
    pub q_n: usize,
    pub q_s: usize,
    pub depth: usize,
}

impl HyperParams {
    pub fn new(q_n: usize, q_s: usize, depth: usize) -> Result<Self> {
        if q_n == 0 {
            return Err(Error::InvalidHyper("q_n must be positive".into()));
        }
        if depth == 0 {
            return Err(Error::InvalidHyper("depth must be positive".into()));
        }
        Ok(HyperParams { q_n, q_s, depth })
    }

    pub fn qubits_for(&self, base: BasicType) -> usize {
        match base {
            BasicType::N => self.q_n,
            BasicType::S => self.q_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    H {
        qubit: usize,
    },
    X {
        qubit: usize,
    },
    S {
        qubit: usize,
    },
    Sdg {
        qubit: usize,
    },
    Rx {
        qubit: usize,
        slot: usize,
    },
    Rz {
        qubit: usize,
        slot: usize,
    },
    Crz {
        control: usize,
        target: usize,
        slot: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn slot(&self) -> Option<usize> {
        match *self {
            Gate::Rx { slot, .. } | Gate::Rz { slot, .. } | Gate::Crz { slot, .. } => Some(slot),
            _ => None,
        }
    }

    /// Largest qubit index touched.
    pub fn max_qubit(&self) -> usize {
        match *self {
            Gate::H { qubit }
            | Gate::X { qubit }
            | Gate::S { qubit }
            | Gate::Sdg { qubit }
            | Gate::Rx { qubit, .. }
            | Gate::Rz { qubit, .. } => qubit,
            Gate::Crz {
                control, target, ..
            }
            | Gate::Cnot { control, target } => control.max(target),
        }
    }

    /// Moves the gate by `dq` qubits and `ds` parameter slots.
    pub fn shifted(self, dq: usize, ds: usize) -> Gate {
        match self {
            Gate::H { qubit } => Gate::H { qubit: qubit + dq },
            Gate::X { qubit } => Gate::X { qubit: qubit + dq },
            Gate::S { qubit } => Gate::S { qubit: qubit + dq },
            Gate::Sdg { qubit } => Gate::Sdg { qubit: qubit + dq },
            Gate::Rx { qubit, slot } => Gate::Rx {
                qubit: qubit + dq,
                slot: slot + ds,
            },
            Gate::Rz { qubit, slot } => Gate::Rz {
                qubit: qubit + dq,
                slot: slot + ds,
            },
            Gate::Crz {
                control,
                target,
                slot,
            } => Gate::Crz {
                control: control + dq,
                target: target + dq,
                slot: slot + ds,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: control + dq,
                target: target + dq,
            },
        }
    }
}

/// Qubits a word occupies: the sum of its wire widths.
pub fn word_arity(t: &PregroupType, hyper: &HyperParams) -> usize {
    t.factors().iter().map(|f| hyper.qubits_for(f.base)).sum()
}

/// Local word circuit over qubits `0..arity` and slots `0..slots`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordAnsatz {
    pub gates: Vec<Gate>,
    pub slots: usize,
}

/// Number of parameters a non-Kronecker word of the given arity takes.
pub fn ansatz_slots(arity: usize, depth: usize) -> usize {
    match arity {
        0 => 0,
        1 => 2,
        k => depth * (k - 1),
    }
}

pub fn word_ansatz(arity: usize, depth: usize) -> Result<WordAnsatz> {
    match arity {
        0 => Err(Error::InvalidHyper(
            "a word state needs at least one qubit".into(),
        )),
        1 => Ok(WordAnsatz {
            gates: vec![
                Gate::Rx { qubit: 0, slot: 0 },
                Gate::Rz { qubit: 0, slot: 1 },
            ],
            slots: 2,
        }),
        k => {
            let mut gates = Vec::with_capacity(depth * (2 * k - 1));
            let mut slot = 0;
            for _ in 0..depth {
                gates.extend((0..k).map(|qubit| Gate::H { qubit }));
                for j in 0..k - 1 {
                    gates.push(Gate::Crz {
                        control: j,
                        target: j + 1,
                        slot,
                    });
                    slot += 1;
                }
            }
            Ok(WordAnsatz { gates, slots: slot })
        }
    }
}

/// GHZ preparation on `n_wires` groups of `q_b` consecutive qubits:
/// `2^{-q_b/2} sum_x |x>^{n_wires}`.
pub fn ghz_prep(n_wires: usize, q_b: usize) -> Vec<Gate> {
    let mut gates: Vec<Gate> = (0..q_b).map(|qubit| Gate::H { qubit }).collect();
    for bit in 0..q_b {
        for wire in 1..n_wires {
            gates.push(Gate::Cnot {
                control: bit,
                target: wire * q_b + bit,
            });
        }
    }
    gates
}

/// Bell effects joining two equally wide qubit groups, qubit `j` of the left
/// group with qubit `j` of the right group. Returns the gates and the qubits
/// to postselect.
pub fn cup_effect(left: &[usize], right: &[usize]) -> (Vec<Gate>, Vec<usize>) {
    assert_eq!(left.len(), right.len(), "cup joins groups of unequal width");
    let mut gates = Vec::with_capacity(2 * left.len());
    let mut post = Vec::with_capacity(2 * left.len());
    for (&l, &r) in left.iter().zip(right) {
        gates.push(Gate::Cnot {
            control: l,
            target: r,
        });
        gates.push(Gate::H { qubit: l });
        post.push(l);
        post.push(r);
    }
    (gates, post)
}

/// Word to parameter-slot assignment shared by every sentence of a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRegistry {
    entries: Vec<(String, Range<usize>)>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    total_slots: usize,
}

impl ParamRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the word's slots, allocating `count` fresh ones on first sight.
    pub fn register(&mut self, word: &str, count: usize) -> Result<Range<usize>> {
        if let Some(&i) = self.index.get(word) {
            let range = self.entries[i].1.clone();
            if range.len() != count {
                return Err(Error::SlotMismatch {
                    word: word.to_string(),
                    existing: range.len(),
                    requested: count,
                });
            }
            return Ok(range);
        }
        let range = self.total_slots..self.total_slots + count;
        self.total_slots += count;
        self.index.insert(word.to_string(), self.entries.len());
        self.entries.push((word.to_string(), range.clone()));
        Ok(range)
    }

    pub fn slots(&self, word: &str) -> Option<Range<usize>> {
        self.index.get(word).map(|&i| self.entries[i].1.clone())
    }

    pub fn total_slots(&self) -> usize {
        self.total_slots
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, Range<usize>)> {
        self.entries.iter().map(|(w, r)| (w.as_str(), r.clone()))
    }

    /// Index of a word in registration order.
    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The part of a sentence circuit that prepares one word state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBlock {
    pub word: String,
    pub qubits: Range<usize>,
    pub gates: Range<usize>,
    pub slots: Range<usize>,
    pub kronecker: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceCircuit {
    pub qubit_count: usize,
    pub gates: Vec<Gate>,
    /// Qubits read in `|0>`, sorted.
    pub postselect_mask: Vec<usize>,
    pub open_qubits: Vec<usize>,
    pub blocks: Vec<WordBlock>,
    /// (control, target) of every Bell effect.
    pub bell_pairs: Vec<(usize, usize)>,
}

impl SentenceCircuit {
    pub fn empty(qubit_count: usize) -> Self {
        SentenceCircuit {
            qubit_count,
            gates: Vec::new(),
            postselect_mask: (0..qubit_count).collect(),
            open_qubits: Vec::new(),
            blocks: Vec::new(),
            bell_pairs: Vec::new(),
        }
    }

    /// Circuit made of a bare gate list, every qubit postselected.
    pub fn from_gates(qubit_count: usize, gates: Vec<Gate>) -> Self {
        SentenceCircuit {
            gates,
            ..SentenceCircuit::empty(qubit_count)
        }
    }

    pub fn slot_count(&self) -> usize {
        self.gates
            .iter()
            .filter_map(Gate::slot)
            .map(|s| s + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "qubit_count": self.qubit_count,
            "gates": self.gates,
            "postselect": self.postselect_mask,
            "open_qubits": self.open_qubits,
            "words": self.blocks,
        })
    }

    /// OpenQASM 2 text. Without `theta`, angles are printed as `theta[k]`.
    pub fn to_qasm(&self, theta: Option<&[f64]>) -> String {
        let angle = |slot: usize| match theta {
            Some(t) => format!("{:.17}", t[slot]),
            None => format!("theta[{slot}]"),
        };
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.qubit_count);
        let _ = writeln!(out, "creg c[{}];", self.qubit_count);
        for g in &self.gates {
            let _ = match *g {
                Gate::H { qubit } => writeln!(out, "h q[{qubit}];"),
                Gate::X { qubit } => writeln!(out, "x q[{qubit}];"),
                Gate::S { qubit } => writeln!(out, "s q[{qubit}];"),
                Gate::Sdg { qubit } => writeln!(out, "sdg q[{qubit}];"),
                Gate::Rx { qubit, slot } => writeln!(out, "rx({}) q[{qubit}];", angle(slot)),
                Gate::Rz { qubit, slot } => writeln!(out, "rz({}) q[{qubit}];", angle(slot)),
                Gate::Crz {
                    control,
                    target,
                    slot,
                } => {
                    writeln!(out, "crz({}) q[{control}],q[{target}];", angle(slot))
                }
                Gate::Cnot { control, target } => writeln!(out, "cx q[{control}],q[{target}];"),
            };
        }
        for &q in &self.postselect_mask {
            let _ = writeln!(out, "measure q[{q}] -> c[{q}]; // postselect 0");
        }
        for &q in &self.open_qubits {
            let _ = writeln!(out, "measure q[{q}] -> c[{q}];");
        }
        out
    }
}

/// Compiles a diagram: word circuits side by side, then Bell effects for
/// every cup. Words are registered in `registry` on first sight.
pub fn compile(
    d: &SentenceDiagram,
    hyper: &HyperParams,
    registry: &mut ParamRegistry,
) -> Result<SentenceCircuit> {
    validate(d)?;
    let layout = wire_qubits(d, hyper);
    let mut gates = Vec::new();
    let mut blocks = Vec::with_capacity(d.words.len());
    for (pos, w) in d.words.iter().enumerate() {
        let first_wire = w.wire_offset;
        let wires = first_wire..first_wire + w.wtype.len();
        let start = layout
            .offsets
            .get(first_wire)
            .copied()
            .unwrap_or(layout.total);
        let arity: usize = wires.clone().map(|i| layout.widths[i]).sum();
        let gate_start = gates.len();
        let kronecker = d.kronecker_words.contains(&pos);
        let slots = if kronecker {
            let widths: Vec<usize> = wires.map(|i| layout.widths[i]).filter(|&w| w > 0).collect();
            let q_b = widths.first().copied().unwrap_or(0);
            if widths.iter().any(|&x| x != q_b) {
                return Err(Error::InvalidHyper(format!(
                    "Kronecker word `{}` has legs of unequal width {widths:?}",
                    w.word
                )));
            }
            gates.extend(
                ghz_prep(widths.len(), q_b)
                    .into_iter()
                    .map(|g| g.shifted(start, 0)),
            );
            0..0
        } else {
            let ansatz = word_ansatz(arity, hyper.depth)?;
            let slots = registry.register(&w.word, ansatz.slots)?;
            gates.extend(
                ansatz
                    .gates
                    .into_iter()
                    .map(|g| g.shifted(start, slots.start)),
            );
            slots
        };
        blocks.push(WordBlock {
            word: w.word.clone(),
            qubits: start..start + arity,
            gates: gate_start..gates.len(),
            slots,
            kronecker,
        });
    }
    let mut postselect = Vec::new();
    let mut bell_pairs = Vec::new();
    for &(i, j) in &d.cups.pairs {
        let left: Vec<usize> = layout.qubits(i).collect();
        let right: Vec<usize> = layout.qubits(j).collect();
        let (g, post) = cup_effect(&left, &right);
        gates.extend(g);
        postselect.extend(post);
        bell_pairs.extend(left.into_iter().zip(right));
    }
    postselect.sort_unstable();
    let open_qubits = d.cups.open.iter().flat_map(|&o| layout.qubits(o)).collect();
    Ok(SentenceCircuit {
        qubit_count: layout.total,
        gates,
        postselect_mask: postselect,
        open_qubits,
        blocks,
        bell_pairs,
    })
}

/// Total parameters for a vocabulary; relative pronouns contribute none.
pub fn param_count(dict: &Dictionary, hyper: &HyperParams) -> usize {
    let pronoun = PregroupType::relative_pronoun();
    dict.iter()
        .map(|(_, t)| {
            if *t == pronoun {
                0
            } else {
                ansatz_slots(word_arity(t, hyper), hyper.depth)
            }
        })
        .sum()
}

pub fn cnot_count(c: &SentenceCircuit) -> usize {
    c.gates
        .iter()
        .filter(|g| matches!(g, Gate::Cnot { .. }))
        .count()
}

/// Ratio between the diagram scalar, built from unnormalized cups
/// `sum_i <ii|` and copy tensors `sum_x |x...x>`, and the circuit's zero
/// amplitude. Each Bell pair contributes `sqrt 2` and each GHZ preparation on
/// `q_b` Hadamards contributes `sqrt(2^q_b)`.
pub fn diagram_scale(c: &SentenceCircuit) -> f64 {
    let ghz_hadamards: usize = c
        .blocks
        .iter()
        .filter(|b| b.kronecker)
        .map(|b| {
            c.gates[b.gates.clone()]
                .iter()
                .filter(|g| matches!(g, Gate::H { .. }))
                .count()
        })
        .sum();
    std::f64::consts::SQRT_2.powi((c.bell_pairs.len() + ghz_hadamards) as i32)
}
