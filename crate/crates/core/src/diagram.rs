//! Sentence diagrams: a row of word states joined by non-crossing cups.

use std::fmt::Write as _;

use serde_json::json;

use crate::circuit::HyperParams;
use crate::error::{Error, Result};
use crate::pregroup::{reduce, BasicType, CupPattern, Dictionary, Factor, PregroupType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordState {
    pub word: String,
    pub wtype: PregroupType,
    /// Index of the word's first wire in the flattened wire list.
    pub wire_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceDiagram {
    pub words: Vec<WordState>,
    pub cups: CupPattern,
    /// Word positions realised as Kronecker (copy) tensors.
    pub kronecker_words: Vec<usize>,
}

impl SentenceDiagram {
    /// Lays out word states for `words` and attaches the given cups. The
    /// relative pronouns (words typed `n@1 n s@-1 n`) become Kronecker words.
    pub fn from_parts<S: AsRef<str>>(
        words: &[S],
        dict: &Dictionary,
        cups: CupPattern,
    ) -> Result<SentenceDiagram> {
        let mut states = Vec::with_capacity(words.len());
        let mut offset = 0;
        let mut kronecker_words = Vec::new();
        let pronoun = PregroupType::relative_pronoun();
        for (pos, w) in words.iter().enumerate() {
            let wtype = dict.lookup(w.as_ref())?.clone();
            if wtype == pronoun {
                kronecker_words.push(pos);
            }
            let len = wtype.len();
            states.push(WordState {
                word: w.as_ref().to_string(),
                wtype,
                wire_offset: offset,
            });
            offset += len;
        }
        Ok(SentenceDiagram {
            words: states,
            cups,
            kronecker_words,
        })
    }

    pub fn wire_count(&self) -> usize {
        self.words.iter().map(|w| w.wtype.len()).sum()
    }

    pub fn sentence_type(&self) -> PregroupType {
        self.words
            .iter()
            .flat_map(|w| w.wtype.factors().iter().copied())
            .collect()
    }

    /// Word position owning a flattened wire.
    pub fn word_of_wire(&self, wire: usize) -> usize {
        self.words
            .iter()
            .rposition(|w| w.wire_offset <= wire)
            .expect("wire index within diagram")
    }

    pub fn text(&self) -> String {
        self.words
            .iter()
            .map(|w| w.word.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "words": self.words.iter().map(|w| json!({
                "word": w.word,
                "type": w.wtype.to_string(),
                "wire_offset": w.wire_offset,
            })).collect::<Vec<_>>(),
            "cups": self.cups.pairs,
            "open": self.cups.open,
            "kronecker_words": self.kronecker_words,
        })
    }

    /// Graphviz rendering: one node per wire grouped into word clusters, one
    /// edge per cup.
    pub fn to_dot(&self) -> String {
        let ty = self.sentence_type();
        let factors = ty.factors();
        let mut out = String::from("graph sentence {\n  rankdir=LR;\n  node [shape=plaintext];\n");
        for (pos, w) in self.words.iter().enumerate() {
            let _ = writeln!(
                out,
                "  subgraph cluster_{pos} {{\n    label=\"{}\";",
                w.word
            );
            for k in 0..w.wtype.len() {
                let wire = w.wire_offset + k;
                let _ = writeln!(out, "    w{wire} [label=\"{}\"];", factors[wire]);
            }
            out.push_str("  }\n");
        }
        for &(i, j) in &self.cups.pairs {
            let _ = writeln!(out, "  w{i} -- w{j} [label=\"{}\"];", factors[i].base);
        }
        for &o in &self.cups.open {
            let _ = writeln!(
                out,
                "  out{o} [label=\"open\", shape=point];\n  w{o} -- out{o};"
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Checks wire layout, cup structure, a single open `s` wire, and the types
/// of the Kronecker words.
pub fn validate(d: &SentenceDiagram) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidDiagram(msg));
    let mut offset = 0;
    for w in &d.words {
        if w.wire_offset != offset {
            return bad(format!(
                "word `{}` starts at wire {}, expected {offset}",
                w.word, w.wire_offset
            ));
        }
        offset += w.wtype.len();
    }
    let ty = d.sentence_type();
    d.cups.check(&ty).map_err(Error::InvalidDiagram)?;
    match d.cups.open.as_slice() {
        [p] if ty.factors()[*p] == Factor::new(BasicType::S, 0) => {}
        [p] => {
            return bad(format!(
                "open wire {p} has type {}, expected s",
                ty.factors()[*p]
            ))
        }
        open => {
            return bad(format!(
                "{} open wires, expected exactly one s wire",
                open.len()
            ))
        }
    }
    let pronoun = PregroupType::relative_pronoun();
    for &pos in &d.kronecker_words {
        match d.words.get(pos) {
            Some(w) if w.wtype == pronoun => {}
            Some(w) => return bad(format!("Kronecker word `{}` has type {}", w.word, w.wtype)),
            None => return bad(format!("Kronecker position {pos} out of range")),
        }
    }
    Ok(())
}

/// Canonical diagram from the pregroup reduction of the sentence.
pub fn from_sentence<S: AsRef<str>>(words: &[S], dict: &Dictionary) -> Result<SentenceDiagram> {
    let ty = crate::pregroup::sentence_type(words, dict)?;
    let cups = reduce(&ty).ok_or_else(|| {
        Error::Ungrammatical(
            words
                .iter()
                .map(|w| w.as_ref())
                .collect::<Vec<_>>()
                .join(" "),
        )
    })?;
    SentenceDiagram::from_parts(words, dict, cups)
}

/// Qubit widths and register offsets of every wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireLayout {
    pub widths: Vec<usize>,
    pub offsets: Vec<usize>,
    pub total: usize,
}

impl WireLayout {
    pub fn qubits(&self, wire: usize) -> std::ops::Range<usize> {
        self.offsets[wire]..self.offsets[wire] + self.widths[wire]
    }
}

pub fn wire_qubits(d: &SentenceDiagram, hyper: &HyperParams) -> WireLayout {
    let mut widths = Vec::new();
    let mut offsets = Vec::new();
    let mut total = 0;
    for f in d.sentence_type().factors() {
        let w = hyper.qubits_for(f.base);
        offsets.push(total);
        widths.push(w);
        total += w;
    }
    WireLayout {
        widths,
        offsets,
        total,
    }
}
