//! The three labelled corpora used in the experiments, plus JSON-lines I/O.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pregroup::Dictionary;

/// One labelled sentence; the sentence is stored pre-split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub words: Vec<String>,
    pub label: u8,
}

impl LabeledSentence {
    pub fn new(sentence: &str, label: u8) -> Self {
        LabeledSentence {
            words: sentence.split_whitespace().map(String::from).collect(),
            label,
        }
    }

    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledCorpus {
    pub items: Vec<LabeledSentence>,
}

impl LabeledCorpus {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Distinct words in order of first appearance.
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut vocab: Vec<&str> = Vec::new();
        for item in &self.items {
            for w in &item.words {
                if !vocab.contains(&w.as_str()) {
                    vocab.push(w);
                }
            }
        }
        vocab
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinCorpus {
    K30,
    K6,
    K16,
}

impl BuiltinCorpus {
    pub const ALL: [BuiltinCorpus; 3] = [BuiltinCorpus::K30, BuiltinCorpus::K6, BuiltinCorpus::K16];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinCorpus::K30 => "K30",
            BuiltinCorpus::K6 => "K6",
            BuiltinCorpus::K16 => "K16",
        }
    }

    pub fn dictionary(self) -> Dictionary {
        match self {
            BuiltinCorpus::K30 => Dictionary::from_parts_of_speech(
                &["Dude", "Walter"],
                &["loves", "annoys"],
                &["abides", "bowls"],
                &["who"],
            ),
            BuiltinCorpus::K6 => Dictionary::from_parts_of_speech(
                &["Romeo", "Juliet"],
                &["loves"],
                &["dies"],
                &["who"],
            ),
            BuiltinCorpus::K16 => Dictionary::from_parts_of_speech(
                &["Romeo", "Juliet"],
                &["loves", "kills"],
                &["dies"],
                &["who"],
            ),
        }
    }

    fn listing(self) -> &'static [(&'static str, u8)] {
        match self {
            BuiltinCorpus::K30 => K30,
            BuiltinCorpus::K6 => K6,
            BuiltinCorpus::K16 => K16,
        }
    }

    pub fn load(self) -> LabeledCorpus {
        LabeledCorpus {
            items: self
                .listing()
                .iter()
                .map(|&(s, l)| LabeledSentence::new(s, l))
                .collect(),
        }
    }
}

impl FromStr for BuiltinCorpus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "K30" => Ok(BuiltinCorpus::K30),
            "K6" => Ok(BuiltinCorpus::K6),
            "K16" => Ok(BuiltinCorpus::K16),
            _ => Err(Error::Config(format!("unknown builtin corpus `{s}`"))),
        }
    }
}

impl fmt::Display for BuiltinCorpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn load_builtin(name: BuiltinCorpus) -> LabeledCorpus {
    name.load()
}

#[derive(Serialize, Deserialize)]
struct Line<'a> {
    sentence: std::borrow::Cow<'a, str>,
    label: Option<u8>,
}

pub fn write_corpus(path: &Path, corpus: &LabeledCorpus) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in &corpus.items {
        let line = Line {
            sentence: item.text().into(),
            label: Some(item.label),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes sentences with `"label": null`, for hand curation.
pub fn write_unlabeled(path: &Path, sentences: &[Vec<String>]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for words in sentences {
        let line = Line {
            sentence: words.join(" ").into(),
            label: None,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_corpus(text: impl BufRead) -> Result<LabeledCorpus> {
    let mut items = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::CorpusFormat {
                line: lineno,
                msg: e.to_string(),
            })?;
        let err = |msg: &str| Error::CorpusFormat {
            line: lineno,
            msg: msg.to_string(),
        };
        let sentence = value
            .get("sentence")
            .and_then(|s| s.as_str())
            .ok_or_else(|| err("missing string field `sentence`"))?;
        let label = match value.get("label") {
            None | Some(serde_json::Value::Null) => return Err(err("missing field `label`")),
            Some(l) => match l.as_u64() {
                Some(0) => 0,
                Some(1) => 1,
                _ => return Err(err(&format!("label must be 0 or 1, got {l}"))),
            },
        };
        items.push(LabeledSentence::new(sentence, label));
    }
    Ok(LabeledCorpus { items })
}

pub fn read_corpus(path: &Path) -> Result<LabeledCorpus> {
    parse_corpus(BufReader::new(std::fs::File::open(path)?))
}

const K30: &[(&str, u8)] = &[
    ("Dude who loves Walter bowls", 1),
    ("Dude bowls", 1),
    ("Dude annoys Walter", 0),
    ("Walter who abides bowls", 0),
    ("Walter loves Walter", 1),
    ("Walter annoys Dude", 1),
    ("Walter bowls", 1),
    ("Walter abides", 0),
    ("Dude loves Walter", 1),
    ("Dude who bowls abides", 1),
    ("Walter who bowls annoys Dude", 1),
    ("Dude who bowls bowls", 1),
    ("Dude who abides abides", 1),
    ("Dude annoys Dude who bowls", 0),
    ("Walter annoys Walter", 0),
    ("Dude who abides bowls", 1),
    ("Walter who abides loves Walter", 0),
    ("Walter who bowls bowls", 1),
    ("Walter loves Walter who abides", 0),
    ("Walter annoys Walter who bowls", 0),
    ("Dude abides", 1),
    ("Dude loves Walter who bowls", 1),
    ("Walter who loves Dude bowls", 1),
    ("Dude loves Dude who abides", 1),
    ("Walter who abides loves Dude", 0),
    ("Dude annoys Dude", 0),
    ("Walter who annoys Dude bowls", 1),
    ("Walter who annoys Dude abides", 0),
    ("Walter loves Dude", 1),
    ("Dude who bowls loves Walter", 1),
];

const K6: &[(&str, u8)] = &[
    ("Romeo dies", 1),
    ("Romeo loves Juliet", 0),
    ("Juliet who dies dies", 1),
    ("Romeo loves Romeo", 0),
    ("Juliet loves Romeo", 0),
    ("Juliet dies", 1),
];

const K16: &[(&str, u8)] = &[
    ("Juliet kills Romeo who dies", 0),
    ("Juliet dies", 1),
    ("Romeo who loves Juliet dies", 1),
    ("Romeo dies", 1),
    ("Juliet who dies dies", 1),
    ("Romeo loves Juliet", 1),
    ("Juliet who dies loves Juliet", 0),
    ("Romeo kills Juliet who dies", 0),
    ("Romeo who kills Romeo dies", 1),
    ("Romeo who dies dies", 1),
    ("Romeo who loves Romeo dies", 0),
    ("Romeo kills Juliet", 0),
    ("Romeo who dies kills Romeo", 1),
    ("Juliet who dies kills Romeo", 0),
    ("Romeo loves Romeo", 0),
    ("Romeo who dies kills Juliet", 0),
];
