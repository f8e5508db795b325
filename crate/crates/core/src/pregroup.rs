//! Pregroup types, dictionaries and contraction-only reduction.
//!
//! A type is an ordered product of basic types `b^k`. Reduction only uses
//! contractions `b^k b^(k+1) -> 1`, which is enough for every sentence this
//! grammar produces. The search is an interval dynamic program over the
//! flattened factor list, so it runs in cubic time in the number of factors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasicType {
    #[serde(rename = "n")]
    N,
    #[serde(rename = "s")]
    S,
}

impl BasicType {
    pub fn name(self) -> &'static str {
        match self {
            BasicType::N => "n",
            BasicType::S => "s",
        }
    }
}

impl FromStr for BasicType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(BasicType::N),
            "s" => Ok(BasicType::S),
            other => Err(Error::UnknownBase(other.to_string())),
        }
    }
}

impl fmt::Display for BasicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A basic type raised to an adjoint order: negative orders are left
/// adjoints, positive orders right adjoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub base: BasicType,
    pub order: i64,
}

impl Factor {
    pub const fn new(base: BasicType, order: i64) -> Self {
        Factor { base, order }
    }

    /// `self` followed by `right` annihilates.
    pub fn contracts_with(&self, right: &Factor) -> bool {
        self.base == right.base && right.order == self.order + 1
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}@{}", self.base, self.order)
        }
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        let (base, order) = match token.split_once('@') {
            Some((b, o)) => {
                let order = o
                    .parse::<i64>()
                    .map_err(|_| Error::InvalidOrder(o.to_string()))?;
                (b, order)
            }
            None => (token, 0),
        };
        Ok(Factor::new(base.parse()?, order))
    }
}

/// An ordered product of factors. The empty product is the unit type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PregroupType(Vec<Factor>);

impl PregroupType {
    pub fn unit() -> Self {
        PregroupType(Vec::new())
    }

    pub fn new(factors: Vec<Factor>) -> Self {
        PregroupType(factors)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &PregroupType) -> PregroupType {
        let mut factors = self.0.clone();
        factors.extend_from_slice(&other.0);
        PregroupType(factors)
    }

    pub fn noun() -> Self {
        PregroupType(vec![Factor::new(BasicType::N, 0)])
    }

    pub fn sentence() -> Self {
        PregroupType(vec![Factor::new(BasicType::S, 0)])
    }

    pub fn transitive_verb() -> Self {
        use BasicType::*;
        PregroupType(vec![
            Factor::new(N, 1),
            Factor::new(S, 0),
            Factor::new(N, -1),
        ])
    }

    pub fn intransitive_verb() -> Self {
        use BasicType::*;
        PregroupType(vec![Factor::new(N, 1), Factor::new(S, 0)])
    }

    pub fn relative_pronoun() -> Self {
        use BasicType::*;
        PregroupType(vec![
            Factor::new(N, 1),
            Factor::new(N, 0),
            Factor::new(S, -1),
            Factor::new(N, 0),
        ])
    }
}

impl FromIterator<Factor> for PregroupType {
    fn from_iter<I: IntoIterator<Item = Factor>>(iter: I) -> Self {
        PregroupType(iter.into_iter().collect())
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl FromStr for PregroupType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_type(s)
    }
}

/// Parses whitespace separated `base@order` tokens; a missing order means 0.
pub fn parse_type(text: &str) -> Result<PregroupType> {
    text.split_whitespace().map(str::parse).collect()
}

/// Word to type assignment. Words are case-sensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    entries: BTreeMap<String, PregroupType>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, ty: PregroupType) {
        self.entries.insert(word.into(), ty);
    }

    pub fn get(&self, word: &str) -> Option<&PregroupType> {
        self.entries.get(word)
    }

    pub fn lookup(&self, word: &str) -> Result<&PregroupType> {
        self.get(word)
            .ok_or_else(|| Error::DictionaryMiss(word.to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PregroupType)> {
        self.entries.iter().map(|(w, t)| (w.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Builds the standard typing: nouns `n`, transitive verbs `n@1 s n@-1`,
    /// intransitive verbs `n@1 s`, relative pronouns `n@1 n s@-1 n`.
    pub fn from_parts_of_speech(
        nouns: &[&str],
        transitive: &[&str],
        intransitive: &[&str],
        pronouns: &[&str],
    ) -> Self {
        let mut dict = Dictionary::new();
        for w in nouns {
            dict.insert(*w, PregroupType::noun());
        }
        for w in transitive {
            dict.insert(*w, PregroupType::transitive_verb());
        }
        for w in intransitive {
            dict.insert(*w, PregroupType::intransitive_verb());
        }
        for w in pronouns {
            dict.insert(*w, PregroupType::relative_pronoun());
        }
        dict
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<&str, String> = self
            .entries
            .iter()
            .map(|(w, t)| (w.as_str(), t.to_string()))
            .collect();
        serde_json::to_value(map).expect("string map serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let map: BTreeMap<String, String> = serde_json::from_str(text)?;
        let mut dict = Dictionary::new();
        for (word, ty) in map {
            dict.insert(word, parse_type(&ty)?);
        }
        Ok(dict)
    }

    /// Line format: `word: n@1 s`. Blank lines and `#` comments are skipped.
    pub fn from_lines(text: &str) -> Result<Self> {
        let mut dict = Dictionary::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, ty) = line.split_once(':').ok_or_else(|| Error::CorpusFormat {
                line: idx + 1,
                msg: "expected `word: type`".into(),
            })?;
            dict.insert(word.trim(), parse_type(ty)?);
        }
        Ok(dict)
    }

    pub fn to_lines(&self) -> String {
        self.entries
            .iter()
            .map(|(w, t)| format!("{w}: {t}\n"))
            .collect()
    }

    /// Reads a `.json` map or the line format, chosen by extension.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_lines(&text)
        }
    }
}

/// Concatenation of the word types in sentence order.
pub fn sentence_type<S: AsRef<str>>(words: &[S], dict: &Dictionary) -> Result<PregroupType> {
    let mut factors = Vec::new();
    for w in words {
        factors.extend_from_slice(dict.lookup(w.as_ref())?.factors());
    }
    Ok(PregroupType(factors))
}

/// Non-crossing cups over factor positions plus the positions left open.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CupPattern {
    /// Sorted by opening position; always `i < j`.
    pub pairs: Vec<(usize, usize)>,
    pub open: Vec<usize>,
}

impl CupPattern {
    /// Checks the pattern against a factor list: every position covered
    /// exactly once, no crossings, and every cup a valid contraction.
    pub fn check(&self, ty: &PregroupType) -> std::result::Result<(), String> {
        let factors = ty.factors();
        let mut seen = vec![false; factors.len()];
        let mut mark = |p: usize| -> std::result::Result<(), String> {
            match seen.get_mut(p) {
                None => Err(format!("position {p} out of range")),
                Some(true) => Err(format!("position {p} used twice")),
                Some(slot) => {
                    *slot = true;
                    Ok(())
                }
            }
        };
        for &(i, j) in &self.pairs {
            if i >= j {
                return Err(format!("cup ({i}, {j}) is not ordered"));
            }
            mark(i)?;
            mark(j)?;
        }
        for &p in &self.open {
            mark(p)?;
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(format!("position {p} is neither cupped nor open"));
        }
        for &(i, j) in &self.pairs {
            if !factors[i].contracts_with(&factors[j]) {
                return Err(format!(
                    "cup ({i}, {j}) joins {} and {}, which do not contract",
                    factors[i], factors[j]
                ));
            }
        }
        for (a, &(i, j)) in self.pairs.iter().enumerate() {
            for &(k, l) in &self.pairs[a + 1..] {
                if (i < k && k < j && j < l) || (k < i && i < l && l < j) {
                    return Err(format!("cups ({i}, {j}) and ({k}, {l}) cross"));
                }
            }
            // an open wire under a cup would have to cross it
            if let Some(&p) = self.open.iter().find(|&&p| i < p && p < j) {
                return Err(format!("open position {p} is enclosed by cup ({i}, {j})"));
            }
        }
        Ok(())
    }

    /// Groups the cups into rounds of simultaneous adjacent contractions,
    /// innermost first, as in a step-by-step reduction.
    pub fn rounds(&self) -> Vec<Vec<(usize, usize)>> {
        let mut remaining = self.pairs.clone();
        let mut removed: Vec<(usize, usize)> = Vec::new();
        let mut rounds = Vec::new();
        while !remaining.is_empty() {
            let (ready, rest): (Vec<_>, Vec<_>) = remaining.iter().partition(|&&(i, j)| {
                // ready when every position strictly inside has been removed
                (i + 1..j).all(|p| removed.iter().any(|&(a, b)| a == p || b == p))
            });
            removed.extend(&ready);
            rounds.push(ready);
            remaining = rest;
        }
        rounds
    }
}

/// Interval table: `full[i][j]` iff factors `i..j` contract to the unit.
struct Intervals<'a> {
    factors: &'a [Factor],
    full: Vec<Vec<bool>>,
}

impl<'a> Intervals<'a> {
    fn new(factors: &'a [Factor]) -> Self {
        let n = factors.len();
        let mut full = vec![vec![false; n + 1]; n + 1];
        for (i, row) in full.iter_mut().enumerate() {
            row[i] = true;
        }
        for len in (2..=n).step_by(2) {
            for i in 0..=n - len {
                let j = i + len;
                full[i][j] = (i + 1..j).step_by(2).any(|l| {
                    factors[i].contracts_with(&factors[l]) && full[i + 1][l] && full[l + 1][j]
                });
            }
        }
        Intervals { factors, full }
    }

    /// Canonical matching of a fully reducible interval: the first factor takes
    /// its nearest feasible partner.
    fn build(&self, i: usize, j: usize, out: &mut Vec<(usize, usize)>) {
        if i == j {
            return;
        }
        let l = (i + 1..j)
            .step_by(2)
            .find(|&l| {
                self.factors[i].contracts_with(&self.factors[l])
                    && self.full[i + 1][l]
                    && self.full[l + 1][j]
            })
            .expect("interval marked reducible");
        out.push((i, l));
        self.build(i + 1, l, out);
        self.build(l + 1, j, out);
    }
}

/// Finds a non-crossing contraction pattern that leaves exactly `target`
/// open, in order. Among several, cups are opened as early as possible.
pub fn contract_to(ty: &PregroupType, target: &[Factor]) -> Option<CupPattern> {
    let factors = ty.factors();
    let (n, m) = (factors.len(), target.len());
    let intervals = Intervals::new(factors);
    // rest[i][j]: factors i.. reduce to target[j..]
    let mut rest = vec![vec![false; m + 1]; n + 1];
    rest[n][m] = true;
    for i in (0..n).rev() {
        for j in 0..=m {
            let keep = j < m && factors[i] == target[j] && rest[i + 1][j + 1];
            rest[i][j] = keep
                || (i + 2..=n)
                    .step_by(2)
                    .any(|k| intervals.full[i][k] && rest[k][j]);
        }
    }
    if !rest[0][0] {
        return None;
    }
    let mut pairs = Vec::new();
    let mut open = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n {
        if let Some(k) = (i + 2..=n)
            .step_by(2)
            .find(|&k| intervals.full[i][k] && rest[k][j])
        {
            intervals.build(i, k, &mut pairs);
            i = k;
        } else {
            open.push(i);
            i += 1;
            j += 1;
        }
    }
    pairs.sort_unstable();
    Some(CupPattern { pairs, open })
}

/// Reduction of a type to the sentence type `s`.
pub fn reduce(ty: &PregroupType) -> Option<CupPattern> {
    contract_to(ty, &[Factor::new(BasicType::S, 0)])
}

pub fn is_grammatical<S: AsRef<str>>(words: &[S], dict: &Dictionary) -> Result<bool> {
    Ok(reduce(&sentence_type(words, dict)?).is_some())
}
