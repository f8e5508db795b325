mod common;

use proptest::prelude::*;
use qnlp_core::cfg::{generate, leaves, to_diagram, Grammar, Vocab};
use qnlp_core::circuit::{compile, Gate, HyperParams, ParamRegistry, SentenceCircuit};
use qnlp_core::corpora::BuiltinCorpus;
use qnlp_core::diagram::{from_sentence, validate};
use qnlp_core::pregroup::{reduce, BasicType, Factor, PregroupType};
use qnlp_core::simulator::{predicted_label, predicted_label_shots, run, run_from, StateVector};

fn factor() -> impl Strategy<Value = Factor> {
    (
        prop_oneof![Just(BasicType::N), Just(BasicType::S)],
        -2i64..=2,
    )
        .prop_map(|(base, order)| Factor { base, order })
}

/// Mostly word types, with the odd stray factor.
fn type_string() -> impl Strategy<Value = Vec<Factor>> {
    let word = prop_oneof![
        4 => Just(PregroupType::noun()),
        2 => Just(PregroupType::intransitive_verb()),
        2 => Just(PregroupType::transitive_verb()),
        1 => Just(PregroupType::relative_pronoun()),
        1 => factor().prop_map(|f| PregroupType::new(vec![f])),
    ];
    prop::collection::vec(word, 1..6).prop_filter_map("at most 10 factors", |ws| {
        let fs: Vec<Factor> = ws.iter().flat_map(|w| w.factors().to_vec()).collect();
        (fs.len() <= 10).then_some(fs)
    })
}

fn gate(qubits: usize) -> impl Strategy<Value = Gate> {
    let q = 0..qubits;
    let pair = (0..qubits, 1..qubits).prop_map(move |(a, off)| (a, (a + off) % qubits));
    prop_oneof![
        q.clone().prop_map(|qubit| Gate::H { qubit }),
        q.clone().prop_map(|qubit| Gate::X { qubit }),
        q.clone().prop_map(|qubit| Gate::S { qubit }),
        q.clone().prop_map(|qubit| Gate::Sdg { qubit }),
        (q.clone(), 0..4usize).prop_map(|(qubit, slot)| Gate::Rx { qubit, slot }),
        (q, 0..4usize).prop_map(|(qubit, slot)| Gate::Rz { qubit, slot }),
        (pair.clone(), 0..4usize).prop_map(|((control, target), slot)| Gate::Crz {
            control,
            target,
            slot
        }),
        pair.prop_map(|(control, target)| Gate::Cnot { control, target }),
    ]
}

proptest! {
    #[test]
    fn interval_parser_matches_exhaustive_matching(fs in type_string()) {
        let ty = PregroupType::new(fs.clone());
        let all = common::all_reductions(&fs);
        match reduce(&ty) {
            None => prop_assert!(all.is_empty(), "missed reduction of {ty}"),
            Some(p) => {
                prop_assert!(p.check(&ty).is_ok());
                prop_assert_eq!(p.open.len(), 1);
                let mut pairs = p.pairs.clone();
                pairs.sort_unstable();
                let found = all.iter().any(|(q, o)| {
                    let mut q = q.clone();
                    q.sort_unstable();
                    q == pairs && *o == p.open[0]
                });
                prop_assert!(found, "pattern of {} not among the exhaustive matchings", ty);
            }
        }
    }

    #[test]
    fn gate_sequences_preserve_norm(
        gates in prop::collection::vec(gate(5), 0..40),
        theta in prop::collection::vec(-7.0f64..7.0, 4),
    ) {
        let c = SentenceCircuit::from_gates(5, gates);
        let s = run(&c, &theta).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn generated_sentences_translate_to_valid_diagrams(seed in any::<u64>(), depth in 1usize..4) {
        let dict = BuiltinCorpus::K30.dictionary();
        let g = Grammar::from_vocab(&Vocab::from_dictionary(&dict)).unwrap();
        let tree = generate(&g, seed, depth).unwrap();
        let d = to_diagram(&tree, &dict).unwrap();
        validate(&d).unwrap();
        prop_assert!(reduce(&d.sentence_type()).is_some());
        prop_assert_eq!(leaves(&tree).len(), d.words.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn compiled_circuits_are_unitary(
        idx in 0usize..16,
        theta in prop::collection::vec(0.0f64..std::f64::consts::TAU, 12),
    ) {
        let corpus = BuiltinCorpus::K16;
        let dict = corpus.dictionary();
        let item = &corpus.load().items[idx];
        let h = HyperParams::new(1, 0, 3).unwrap();
        let c = compile(&from_sentence(&item.words, &dict).unwrap(), &h, &mut ParamRegistry::new()).unwrap();
        prop_assume!(c.qubit_count <= 8);
        let dim = 1usize << c.qubit_count;
        let cols: Vec<Vec<_>> = (0..dim)
            .map(|j| run_from(&c, &theta, StateVector::basis(c.qubit_count, j)).unwrap().into_amplitudes())
            .collect();
        let mut worst: f64 = 0.0;
        for a in 0..dim {
            for b in a..dim {
                let dot: num_complex::Complex64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x.conj() * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        prop_assert!(worst < 1e-10, "max deviation {worst}");
    }
}

fn romeo_loves_juliet(theta_seed: u64) -> (SentenceCircuit, Vec<f64>, f64) {
    use rand::{Rng, SeedableRng};
    let dict = BuiltinCorpus::K16.dictionary();
    let h = HyperParams::new(1, 0, 2).unwrap();
    let mut reg = ParamRegistry::new();
    let c = compile(
        &from_sentence(&["Romeo", "loves", "Juliet"], &dict).unwrap(),
        &h,
        &mut reg,
    )
    .unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(theta_seed);
    let theta: Vec<f64> = (0..reg.total_slots())
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    let exact = predicted_label(&c, &theta).unwrap().value;
    (c, theta, exact)
}

#[test]
fn shot_estimator_is_unbiased() {
    let (c, theta, exact) = romeo_loves_juliet(4);
    let shots = 1 << 10;
    let seeds = 200;
    let mean = (0..seeds)
        .map(|s| predicted_label_shots(&c, &theta, shots, s).unwrap().value)
        .sum::<f64>()
        / seeds as f64;
    let stderr = (exact * (1.0 - exact) / shots as f64).sqrt();
    assert!(
        (mean - exact).abs() <= 3.0 * stderr / (seeds as f64).sqrt(),
        "mean {mean} exact {exact}"
    );
}

#[test]
fn shot_rmse_shrinks_with_more_shots() {
    let (c, theta, exact) = romeo_loves_juliet(9);
    let rmse = |shots: usize| {
        let sq: f64 = (0..50)
            .map(|s| {
                (predicted_label_shots(&c, &theta, shots, 1000 + s)
                    .unwrap()
                    .value
                    - exact)
                    .powi(2)
            })
            .sum();
        (sq / 50.0).sqrt()
    };
    let r: Vec<f64> = [1 << 10, 1 << 14, 1 << 18].into_iter().map(rmse).collect();
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
}

#[test]
fn labels_stay_in_unit_interval() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for corpus in BuiltinCorpus::ALL {
        let dict = corpus.dictionary();
        let h = HyperParams::new(1, 0, 2).unwrap();
        let mut reg = ParamRegistry::new();
        let circuits: Vec<_> = corpus
            .load()
            .items
            .iter()
            .map(|it| compile(&from_sentence(&it.words, &dict).unwrap(), &h, &mut reg).unwrap())
            .collect();
        for _ in 0..100 {
            let theta: Vec<f64> = (0..reg.total_slots())
                .map(|_| rng.gen_range(-7.0..7.0))
                .collect();
            let c = &circuits[rng.gen_range(0..circuits.len())];
            let s = run(c, &theta).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-10);
            let l = predicted_label(c, &theta).unwrap().value;
            assert!((0.0..=1.0).contains(&l));
        }
    }
}
