//! Independent oracles shared by the integration tests. Nothing here calls
//! the parser, the gate lists, or the simulator.

#![allow(dead_code)]

use num_complex::Complex64;
use qnlp_core::circuit::ParamRegistry;
use qnlp_core::diagram::SentenceDiagram;
use qnlp_core::pregroup::{BasicType, Factor};

/// Every reduction of `factors` to a single `s`: one open `s` factor plus a
/// perfect matching of the rest, found by trying every pairing and then
/// filtering for adjacent orders, planarity, and an uncovered open wire.
pub fn all_reductions(factors: &[Factor]) -> Vec<(Vec<(usize, usize)>, usize)> {
    fn go(
        factors: &[Factor],
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize)>,
        open: Option<usize>,
        out: &mut Vec<(Vec<(usize, usize)>, usize)>,
    ) {
        let Some(i) = used.iter().position(|u| !u) else {
            if let Some(o) = open {
                out.push((pairs.clone(), o));
            }
            return;
        };
        used[i] = true;
        if open.is_none() {
            go(factors, used, pairs, Some(i), out);
        }
        for j in i + 1..factors.len() {
            if !used[j] {
                used[j] = true;
                pairs.push((i, j));
                go(factors, used, pairs, open, out);
                pairs.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    let mut raw = Vec::new();
    go(
        factors,
        &mut vec![false; factors.len()],
        &mut Vec::new(),
        None,
        &mut raw,
    );
    raw.into_iter()
        .filter(|(pairs, open)| {
            let s = Factor {
                base: BasicType::S,
                order: 0,
            };
            factors[*open] == s
                && pairs.iter().all(|&(i, j)| {
                    factors[i].base == factors[j].base && factors[j].order == factors[i].order + 1
                })
                && pairs.iter().all(|&(a, b)| {
                    pairs.iter().all(|&(c, d)| !(a < c && c < b && b < d))
                        && !(a < *open && *open < b)
                })
        })
        .collect()
}

/// Part-of-speech recognizer for `S -> N IV | N TV N`, `N -> noun | N who IV
/// | N who TV N`, written as a plain recursive descent over all split points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pos {
    Noun,
    Tv,
    Iv,
    Who,
}

fn noun_phrase(p: &[Pos]) -> bool {
    match p {
        [Pos::Noun] => true,
        _ => (1..p.len()).any(|k| {
            noun_phrase(&p[..k])
                && match &p[k..] {
                    [Pos::Who, Pos::Iv] => true,
                    [Pos::Who, Pos::Tv, rest @ ..] => !rest.is_empty() && noun_phrase(rest),
                    _ => false,
                }
        }),
    }
}

pub fn cfg_accepts(p: &[Pos]) -> bool {
    (1..p.len()).any(|k| {
        noun_phrase(&p[..k])
            && match &p[k..] {
                [Pos::Iv] => true,
                [Pos::Tv, rest @ ..] => !rest.is_empty() && noun_phrase(rest),
                _ => false,
            }
    })
}

// ---- dense linear algebra on little-endian qubit registers ----

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| c(f64::from(u8::from(i == j)), 0.0))
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k] != c(0.0, 0.0) {
                for j in 0..m {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

/// `high ⊗ low`, with `low` acting on the least significant bits.
pub fn kron(high: &Matrix, low: &Matrix) -> Matrix {
    let (h, l) = (high.len(), low.len());
    let mut out = vec![vec![c(0.0, 0.0); h * l]; h * l];
    for i in 0..h {
        for j in 0..h {
            for a in 0..l {
                for b in 0..l {
                    out[i * l + a][j * l + b] = high[i][j] * low[a][b];
                }
            }
        }
    }
    out
}

pub fn hadamard() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
}

pub fn rx(t: f64) -> Matrix {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    vec![vec![c(co, 0.0), c(0.0, -si)], vec![c(0.0, -si), c(co, 0.0)]]
}

pub fn rz(t: f64) -> Matrix {
    vec![
        vec![Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
    ]
}

/// Diagonal controlled-Rz on `k` qubits: phase from the target bit when the
/// control bit is set.
pub fn crz(k: usize, control: usize, target: usize, t: f64) -> Matrix {
    let mut m = identity(1 << k);
    for (x, row) in m.iter_mut().enumerate() {
        if (x >> control) & 1 == 1 {
            let sign = if (x >> target) & 1 == 1 { 1.0 } else { -1.0 };
            row[x] = Complex64::from_polar(1.0, sign * t / 2.0);
        }
    }
    m
}

fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Word state of a parameterised word on `k` qubits.
pub fn word_state(k: usize, depth: usize, theta: &[f64]) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << k];
    v[0] = c(1.0, 0.0);
    if k == 1 {
        return apply(&matmul(&rz(theta[1]), &rx(theta[0])), &v);
    }
    let hs = (1..k).fold(hadamard(), |acc, _| kron(&hadamard(), &acc));
    let mut slot = 0;
    for _ in 0..depth {
        v = apply(&hs, &v);
        for j in 0..k - 1 {
            v = apply(&crz(k, j, j + 1, theta[slot]), &v);
            slot += 1;
        }
    }
    v
}

/// `2^{-q_b/2} sum_x |x>^{legs}` with each leg a `q_b`-bit group.
pub fn ghz_state(legs: usize, q_b: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << (legs * q_b)];
    let norm = (f64::from(1u32 << q_b)).sqrt().recip();
    for x in 0..1usize << q_b {
        let idx = (0..legs).fold(0, |acc, l| acc | (x << (l * q_b)));
        v[idx] = c(norm, 0.0);
    }
    v
}

/// Scalar of a sentence diagram: the product of all word states contracted
/// with `2^{-q_b/2} sum_x <x x|` for every cup, by summing over every basis
/// state of the whole register.
pub fn diagram_amplitude(
    d: &SentenceDiagram,
    q_n: usize,
    depth: usize,
    registry: &ParamRegistry,
    theta: &[f64],
) -> Complex64 {
    let ty = d.sentence_type();
    let width = |f: &Factor| if f.base == BasicType::N { q_n } else { 0 };
    let mut offsets = Vec::new();
    let mut total = 0;
    for f in ty.factors() {
        offsets.push(total);
        total += width(f);
    }
    let mut state = vec![c(1.0, 0.0)];
    let mut placed = 0;
    for (pos, w) in d.words.iter().enumerate() {
        let k: usize = w.wtype.factors().iter().map(width).sum();
        let psi = if d.kronecker_words.contains(&pos) {
            let legs = w.wtype.factors().iter().filter(|f| width(f) > 0).count();
            ghz_state(legs, q_n)
        } else {
            let slots = registry.slots(&w.word).expect("registered word");
            word_state(k, depth, &theta[slots])
        };
        let mut next = vec![c(0.0, 0.0); state.len() * psi.len()];
        for (a, sa) in state.iter().enumerate() {
            for (b, pb) in psi.iter().enumerate() {
                next[a | (b << placed)] = sa * pb;
            }
        }
        state = next;
        placed += k;
    }
    assert_eq!(placed, total);
    let mut amp = c(0.0, 0.0);
    let mut scale = 1.0;
    for &(i, _) in &d.cups.pairs {
        scale *= (f64::from(1u32 << width(&ty.factors()[i]))).sqrt().recip();
    }
    for (x, s) in state.iter().enumerate() {
        let ok = d.cups.pairs.iter().all(|&(i, j)| {
            let wdt = width(&ty.factors()[i]);
            let mask = (1usize << wdt) - 1;
            (x >> offsets[i]) & mask == (x >> offsets[j]) & mask
        });
        if ok {
            amp += s;
        }
    }
    amp * scale
}
