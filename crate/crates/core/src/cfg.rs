//! Random sentence generation from a small context-free grammar and the
//! translation of its derivation trees into sentence diagrams.
//!
//! Symbols map to pregroup types (`N -> n`, `S -> s`, parts of speech to their
//! word types), so every production box becomes the cups that contract the
//! concatenated child types down to the parent type.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::SentenceDiagram;
use crate::error::{Error, Result};
use crate::pregroup::{contract_to, CupPattern, Dictionary, PregroupType};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CfgSymbol {
    S,
    N,
    TV,
    IV,
    RPRON,
    Terminal(String),
}

impl CfgSymbol {
    pub fn is_terminal(&self) -> bool {
        matches!(self, CfgSymbol::Terminal(_))
    }

    /// Pregroup image of a nonterminal.
    pub fn pregroup_type(&self) -> Option<PregroupType> {
        match self {
            CfgSymbol::S => Some(PregroupType::sentence()),
            CfgSymbol::N => Some(PregroupType::noun()),
            CfgSymbol::TV => Some(PregroupType::transitive_verb()),
            CfgSymbol::IV => Some(PregroupType::intransitive_verb()),
            CfgSymbol::RPRON => Some(PregroupType::relative_pronoun()),
            CfgSymbol::Terminal(_) => None,
        }
    }
}

impl fmt::Display for CfgSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfgSymbol::S => f.write_str("S"),
            CfgSymbol::N => f.write_str("N"),
            CfgSymbol::TV => f.write_str("TV"),
            CfgSymbol::IV => f.write_str("IV"),
            CfgSymbol::RPRON => f.write_str("RPRON"),
            CfgSymbol::Terminal(w) => write!(f, "'{w}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgRule {
    pub lhs: CfgSymbol,
    pub rhs: Vec<CfgSymbol>,
}

impl CfgRule {
    fn new(lhs: CfgSymbol, rhs: Vec<CfgSymbol>) -> Self {
        CfgRule { lhs, rhs }
    }

    /// Rules whose right side mentions their own left side.
    pub fn is_recursive(&self) -> bool {
        self.rhs.contains(&self.lhs)
    }
}

/// Words per part of speech.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    pub nouns: Vec<String>,
    pub transitive: Vec<String>,
    pub intransitive: Vec<String>,
    pub pronouns: Vec<String>,
}

impl Vocab {
    /// Sorts dictionary words by their type; other types are ignored.
    pub fn from_dictionary(dict: &Dictionary) -> Vocab {
        let mut v = Vocab::default();
        for (word, ty) in dict.iter() {
            let bucket = if *ty == PregroupType::noun() {
                &mut v.nouns
            } else if *ty == PregroupType::transitive_verb() {
                &mut v.transitive
            } else if *ty == PregroupType::intransitive_verb() {
                &mut v.intransitive
            } else if *ty == PregroupType::relative_pronoun() {
                &mut v.pronouns
            } else {
                continue;
            };
            bucket.push(word.to_string());
        }
        v
    }

    pub fn dictionary(&self) -> Dictionary {
        fn refs(ws: &[String]) -> Vec<&str> {
            ws.iter().map(String::as_str).collect()
        }
        Dictionary::from_parts_of_speech(
            &refs(&self.nouns),
            &refs(&self.transitive),
            &refs(&self.intransitive),
            &refs(&self.pronouns),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub rules: Vec<CfgRule>,
}

impl Grammar {
    /// `S -> N IV | N TV N`, `N -> N RPRON IV | N RPRON TV N`, and one
    /// terminal rule per vocabulary word.
    pub fn from_vocab(vocab: &Vocab) -> Result<Grammar> {
        use CfgSymbol::*;
        for (name, words) in [
            ("noun", &vocab.nouns),
            ("transitive verb", &vocab.transitive),
            ("intransitive verb", &vocab.intransitive),
            ("relative pronoun", &vocab.pronouns),
        ] {
            if words.is_empty() {
                return Err(Error::Config(format!("vocabulary has no {name}")));
            }
        }
        let mut rules = vec![
            CfgRule::new(S, vec![N, IV]),
            CfgRule::new(S, vec![N, TV, N]),
            CfgRule::new(N, vec![N, RPRON, IV]),
            CfgRule::new(N, vec![N, RPRON, TV, N]),
        ];
        let terminals = [
            (N, &vocab.nouns),
            (TV, &vocab.transitive),
            (IV, &vocab.intransitive),
            (RPRON, &vocab.pronouns),
        ];
        for (sym, words) in terminals {
            for w in words {
                rules.push(CfgRule::new(sym.clone(), vec![Terminal(w.clone())]));
            }
        }
        Ok(Grammar { rules })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgTree {
    pub symbol: CfgSymbol,
    pub children: Vec<CfgTree>,
}

impl CfgTree {
    pub fn leaf(word: &str) -> CfgTree {
        CfgTree {
            symbol: CfgSymbol::Terminal(word.to_string()),
            children: Vec::new(),
        }
    }

    pub fn node(symbol: CfgSymbol, children: Vec<CfgTree>) -> CfgTree {
        CfgTree { symbol, children }
    }

    /// Nesting depth of relative clauses.
    pub fn clause_depth(&self) -> usize {
        let own = usize::from(self.symbol == CfgSymbol::N && self.children.len() > 1);
        own + self
            .children
            .iter()
            .map(CfgTree::clause_depth)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for CfgTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return write!(f, "{}", self.symbol);
        }
        write!(f, "[{}", self.symbol)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str("]")
    }
}

fn expand(
    grammar: &Grammar,
    symbol: &CfgSymbol,
    depth: usize,
    max_depth: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CfgTree> {
    if symbol.is_terminal() {
        return Ok(CfgTree::node(symbol.clone(), Vec::new()));
    }
    let choices: Vec<&CfgRule> = grammar
        .rules
        .iter()
        .filter(|r| &r.lhs == symbol && (depth < max_depth || !r.is_recursive()))
        .collect();
    let rule = choices
        .choose(rng)
        .ok_or_else(|| Error::Config(format!("no applicable rule for {symbol}")))?;
    let children = rule
        .rhs
        .iter()
        .map(|s| expand(grammar, s, depth + 1, max_depth, rng))
        .collect::<Result<_>>()?;
    Ok(CfgTree::node(symbol.clone(), children))
}

fn generate_with(grammar: &Grammar, max_depth: usize, rng: &mut ChaCha8Rng) -> Result<CfgTree> {
    if max_depth == 0 {
        return Err(Error::Config("max_depth must be at least 1".into()));
    }
    // S sits at depth 0, so its noun phrases start at depth 1
    expand(grammar, &CfgSymbol::S, 0, max_depth, rng)
}

/// Derivation from `S`, choosing uniformly among applicable rules. Relative
/// clause rules are only applicable to noun phrases shallower than
/// `max_depth`.
pub fn generate(grammar: &Grammar, seed: u64, max_depth: usize) -> Result<CfgTree> {
    generate_with(grammar, max_depth, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn leaves(tree: &CfgTree) -> Vec<String> {
    fn walk(t: &CfgTree, out: &mut Vec<String>) {
        if let CfgSymbol::Terminal(w) = &t.symbol {
            out.push(w.clone());
        }
        for c in &t.children {
            walk(c, out);
        }
    }
    let mut out = Vec::new();
    walk(tree, &mut out);
    out
}

/// Returns the open wire positions of the subtree after adding its cups.
fn translate(
    tree: &CfgTree,
    dict: &Dictionary,
    next_wire: &mut usize,
    factors: &mut Vec<crate::pregroup::Factor>,
    pairs: &mut Vec<(usize, usize)>,
) -> Result<Vec<usize>> {
    if let CfgSymbol::Terminal(word) = &tree.symbol {
        let ty = dict.lookup(word)?;
        let start = *next_wire;
        *next_wire += ty.len();
        factors.extend_from_slice(ty.factors());
        return Ok((start..*next_wire).collect());
    }
    let mut child_open = Vec::new();
    for c in &tree.children {
        child_open.extend(translate(c, dict, next_wire, factors, pairs)?);
    }
    let target = tree
        .symbol
        .pregroup_type()
        .expect("nonterminal has a pregroup type");
    let local: PregroupType = child_open.iter().map(|&w| factors[w]).collect();
    let box_cups = contract_to(&local, target.factors()).ok_or_else(|| {
        Error::InvalidDiagram(format!(
            "production {} does not contract `{local}` to `{target}`",
            tree.symbol
        ))
    })?;
    pairs.extend(
        box_cups
            .pairs
            .iter()
            .map(|&(i, j)| (child_open[i], child_open[j])),
    );
    Ok(box_cups.open.iter().map(|&i| child_open[i]).collect())
}

/// Sentence diagram read off the derivation tree, one production box at a
/// time.
pub fn to_diagram(tree: &CfgTree, dict: &Dictionary) -> Result<SentenceDiagram> {
    let mut next_wire = 0;
    let mut factors = Vec::new();
    let mut pairs = Vec::new();
    let open = translate(tree, dict, &mut next_wire, &mut factors, &mut pairs)?;
    pairs.sort_unstable();
    let d = SentenceDiagram::from_parts(&leaves(tree), dict, CupPattern { pairs, open })?;
    crate::diagram::validate(&d)?;
    Ok(d)
}

/// `count` distinct sentences. Duplicates are redrawn up to a retry budget
/// of `100 * count` extra draws.
pub fn generate_corpus(
    grammar: &Grammar,
    count: usize,
    seed: u64,
    max_depth: usize,
) -> Result<Vec<Vec<String>>> {
    if count == 0 {
        return Err(Error::Config("count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let budget = 100 * count;
    let mut retries = 0;
    while out.len() < count {
        let words = leaves(&generate_with(grammar, max_depth, &mut rng)?);
        if seen.insert(words.clone()) {
            out.push(words);
        } else {
            retries += 1;
            if retries > budget {
                return Err(Error::RetryBudget(budget));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpora::BuiltinCorpus;
    use crate::diagram::from_sentence;
    use crate::pregroup::is_grammatical;
    use CfgSymbol::*;

    fn k16() -> (Grammar, Dictionary) {
        let dict = BuiltinCorpus::K16.dictionary();
        (
            Grammar::from_vocab(&Vocab::from_dictionary(&dict)).unwrap(),
            dict,
        )
    }

    fn t(sym: CfgSymbol, kids: Vec<CfgTree>) -> CfgTree {
        CfgTree::node(sym, kids)
    }

    fn noun(w: &str) -> CfgTree {
        t(N, vec![CfgTree::leaf(w)])
    }

    #[test]
    fn rule_set() {
        let (g, _) = k16();
        assert_eq!(g.rules.len(), 4 + 2 + 2 + 1 + 1);
        assert_eq!(g.rules.iter().filter(|r| r.is_recursive()).count(), 2);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let (g, _) = k16();
        assert_eq!(generate(&g, 11, 3).unwrap(), generate(&g, 11, 3).unwrap());
    }

    #[test]
    fn generated_sentences_are_grammatical() {
        let (g, dict) = k16();
        let tree = generate(&g, 0, 2).unwrap();
        assert!(is_grammatical(&leaves(&tree), &dict).unwrap());
    }

    #[test]
    fn depth_one_matches_enumeration() {
        let (g, _) = k16();
        let nouns = ["Romeo", "Juliet"];
        let mut expected = HashSet::new();
        for s in nouns {
            expected.insert(vec![s.to_string(), "dies".to_string()]);
            for v in ["loves", "kills"] {
                for o in nouns {
                    expected.insert(vec![s.to_string(), v.to_string(), o.to_string()]);
                }
            }
        }
        let mut seen = HashSet::new();
        for seed in 0..400 {
            let tree = generate(&g, seed, 1).unwrap();
            assert_eq!(tree.clause_depth(), 0);
            seen.insert(leaves(&tree));
        }
        assert_eq!(seen, expected);
    }

    #[test]
    fn leaves_in_order() {
        let tree = t(S, vec![noun("Romeo"), t(IV, vec![CfgTree::leaf("dies")])]);
        assert_eq!(leaves(&tree), ["Romeo", "dies"]);
        let tree = t(S, vec![noun("Juliet"), t(IV, vec![CfgTree::leaf("dies")])]);
        assert_eq!(leaves(&tree), ["Juliet", "dies"]);
        let (g, _) = k16();
        for seed in 0..50 {
            assert!(leaves(&generate(&g, seed, 3).unwrap()).len() >= 2);
        }
    }

    #[test]
    fn translation_of_known_trees() {
        let dict = BuiltinCorpus::K16.dictionary();
        let relative = t(
            S,
            vec![
                t(
                    N,
                    vec![
                        noun("Romeo"),
                        t(RPRON, vec![CfgTree::leaf("who")]),
                        t(TV, vec![CfgTree::leaf("loves")]),
                        noun("Juliet"),
                    ],
                ),
                t(IV, vec![CfgTree::leaf("dies")]),
            ],
        );
        let d = to_diagram(&relative, &dict).unwrap();
        assert_eq!(d.cups.pairs, vec![(0, 1), (2, 9), (3, 6), (4, 5), (7, 8)]);
        assert_eq!(d.cups.open, vec![10]);

        let d = to_diagram(
            &t(S, vec![noun("Romeo"), t(IV, vec![CfgTree::leaf("dies")])]),
            &dict,
        )
        .unwrap();
        assert_eq!(d.cups.pairs, vec![(0, 1)]);
        assert_eq!(d.cups.open, vec![2]);

        let d = to_diagram(
            &t(
                S,
                vec![
                    noun("Romeo"),
                    t(TV, vec![CfgTree::leaf("loves")]),
                    noun("Juliet"),
                ],
            ),
            &dict,
        )
        .unwrap();
        assert_eq!(d.cups.pairs, vec![(0, 1), (3, 4)]);
        assert_eq!(d.cups.open, vec![2]);
    }

    #[test]
    fn translation_agrees_with_reduction() {
        let (g, dict) = k16();
        let mut compared = 0;
        for seed in 0..300 {
            let tree = generate(&g, seed, 3).unwrap();
            let words = leaves(&tree);
            let d = to_diagram(&tree, &dict).unwrap();
            let canonical = from_sentence(&words, &dict).unwrap();
            assert_eq!(d.words, canonical.words);
            // more than one relative clause can make the word string ambiguous
            if tree.clause_depth() <= 1 && words.iter().filter(|w| *w == "who").count() <= 1 {
                assert_eq!(d, canonical, "{tree}");
                compared += 1;
            }
        }
        assert!(compared > 50);
    }

    #[test]
    fn missing_leaf_in_dictionary() {
        let tree = t(S, vec![noun("Romeo"), t(IV, vec![CfgTree::leaf("dies")])]);
        let dict = BuiltinCorpus::K30.dictionary();
        assert!(matches!(
            to_diagram(&tree, &dict),
            Err(Error::DictionaryMiss(_))
        ));
    }

    #[test]
    fn corpus_generation() {
        let dict = BuiltinCorpus::K6.dictionary();
        let g = Grammar::from_vocab(&Vocab::from_dictionary(&dict)).unwrap();
        let corpus = generate_corpus(&g, 6, 5, 3).unwrap();
        assert_eq!(corpus.len(), 6);
        let distinct: HashSet<_> = corpus.iter().collect();
        assert_eq!(distinct.len(), 6);
        for s in &corpus {
            assert!(is_grammatical(s, &dict).unwrap());
        }
        assert_eq!(generate_corpus(&g, 1, 5, 3).unwrap().len(), 1);
        assert_eq!(generate_corpus(&g, 6, 5, 3).unwrap(), corpus);
        // depth 1 over K6 admits only 2 + 4 sentences
        assert!(matches!(
            generate_corpus(&g, 7, 5, 1),
            Err(Error::RetryBudget(_))
        ));
    }

    #[test]
    fn empty_part_of_speech_is_rejected() {
        let v = Vocab {
            nouns: vec!["Romeo".into()],
            ..Vocab::default()
        };
        assert!(Grammar::from_vocab(&v).is_err());
    }
}
