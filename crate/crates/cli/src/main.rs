use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qnlp_core::cfg::{generate_corpus, Grammar, Vocab};
use qnlp_core::circuit::{cnot_count, compile, HyperParams, ParamRegistry};
use qnlp_core::corpora::{read_corpus, BuiltinCorpus, LabeledCorpus};
use qnlp_core::diagram::from_sentence;
use qnlp_core::pregroup::{reduce, sentence_type, Dictionary};
use qnlp_core::simulator::{hadamard_test, hadamard_test_shots, predicted_label, Part};
use qnlp_core::train::{
    summary_json, trace_csv, CostKind, EvalMode, Experiment, LabelScale, OptimizerConfig,
    TrainConfig,
};

const BUNDLED: &[(&str, &str)] = &[
    (
        "k30_qn1_d2_spsa",
        include_str!("../configs/k30_qn1_d2_spsa.conf"),
    ),
    (
        "k30_qn1_d2_shots",
        include_str!("../configs/k30_qn1_d2_shots.conf"),
    ),
    ("k16_qn1_d3", include_str!("../configs/k16_qn1_d3.conf")),
];

#[derive(Parser)]
#[command(
    name = "qnlp",
    version,
    about = "Pregroup parsing, sentence circuits and variational question answering"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type a sentence and show its reduction.
    Parse {
        #[arg(required = true)]
        sentence: Vec<String>,
        #[command(flatten)]
        lexicon: Lexicon,
    },
    /// Compile a sentence to a circuit and write it as JSON.
    Compile {
        #[arg(required = true)]
        sentence: Vec<String>,
        #[command(flatten)]
        lexicon: Lexicon,
        #[command(flatten)]
        hyper: HyperArgs,
        /// Circuit JSON destination; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write OpenQASM 2 instead of JSON.
        #[arg(long)]
        qasm: bool,
    },
    /// Generate distinct grammatical sentences as unlabeled JSON lines.
    Gen {
        #[command(flatten)]
        lexicon: Lexicon,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum number of nested relative clauses.
        #[arg(long, default_value_t = 2)]
        max_depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train on a corpus and write `trace.csv` and `summary.json`.
    Train(Box<TrainArgs>),
    /// Estimate the sentence amplitude with the Hadamard test.
    Hadamard {
        #[arg(required = true)]
        sentence: Vec<String>,
        #[command(flatten)]
        lexicon: Lexicon,
        #[command(flatten)]
        hyper: HyperArgs,
        /// JSON array of parameters, or a training summary with `theta_star`.
        #[arg(long)]
        theta: PathBuf,
        /// Sample the ancilla this many times instead of reading it exactly.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Lexicon {
    /// Built-in corpus (K30, K6, K16) or a JSON-lines corpus file.
    #[arg(long)]
    corpus: Option<String>,
    /// Dictionary file: a `.json` word-to-type map or `word: type` lines.
    #[arg(long)]
    dict: Option<PathBuf>,
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long, default_value_t = 1)]
    qn: usize,
    #[arg(long, default_value_t = 0)]
    qs: usize,
    #[arg(long, default_value_t = 1)]
    depth: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Bundled config name or path to a `key = value` file.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    dict: Option<String>,
    #[arg(long)]
    qn: Option<String>,
    #[arg(long)]
    qs: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// spsa, nelder_mead or basinhopping.
    #[arg(long)]
    optimizer: Option<String>,
    /// squared or bce.
    #[arg(long)]
    cost: Option<String>,
    /// exact, statevector or shots.
    #[arg(long)]
    evaluator: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated seeds; one run each.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    hops: Option<String>,
    /// diagram or postselected.
    #[arg(long)]
    label_scale: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl TrainArgs {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("corpus", &self.corpus),
            ("dict", &self.dict),
            ("qn", &self.qn),
            ("qs", &self.qs),
            ("depth", &self.depth),
            ("optimizer", &self.optimizer),
            ("cost", &self.cost),
            ("evaluator", &self.evaluator),
            ("shots", &self.shots),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("split", &self.split),
            ("iterations", &self.iterations),
            ("hops", &self.hops),
            ("label_scale", &self.label_scale),
            ("out", &self.out),
        ]
    }
}

const CONFIG_KEYS: &[&str] = &[
    "corpus",
    "dict",
    "qn",
    "qs",
    "depth",
    "optimizer",
    "cost",
    "evaluator",
    "shots",
    "seed",
    "seeds",
    "split",
    "iterations",
    "a",
    "c",
    "hops",
    "temperature",
    "step_size",
    "label_scale",
    "out",
];

/// Domain failure: reported, exit code 1.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let domain = e.downcast_ref::<Rejected>().is_some()
                || matches!(
                    e.downcast_ref::<qnlp_core::Error>(),
                    Some(qnlp_core::Error::Ungrammatical(_))
                );
            ExitCode::from(if domain { 1 } else { 2 })
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Parse { sentence, lexicon } => cmd_parse(&words(&sentence), &lexicon.dictionary()?),
        Cmd::Compile {
            sentence,
            lexicon,
            hyper,
            out,
            qasm,
        } => cmd_compile(
            &words(&sentence),
            &lexicon.dictionary()?,
            &hyper.build()?,
            out.as_deref(),
            qasm,
        ),
        Cmd::Gen {
            lexicon,
            count,
            seed,
            max_depth,
            out,
        } => cmd_gen(
            &lexicon.dictionary()?,
            count,
            seed,
            max_depth,
            out.as_deref(),
        ),
        Cmd::Train(args) => cmd_train(&args),
        Cmd::Hadamard {
            sentence,
            lexicon,
            hyper,
            theta,
            shots,
            seed,
        } => cmd_hadamard(&words(&sentence), &lexicon, &hyper, &theta, shots, seed),
    }
}

fn words(args: &[String]) -> Vec<String> {
    args.iter()
        .flat_map(|a| a.split_whitespace())
        .map(str::to_string)
        .collect()
}

fn all_builtin_words() -> Dictionary {
    let mut dict = Dictionary::new();
    for corpus in BuiltinCorpus::ALL {
        for (w, t) in corpus.dictionary().iter() {
            dict.insert(w, t.clone());
        }
    }
    dict
}

fn resolve_dictionary(corpus: Option<&str>, dict: Option<&Path>) -> Result<Dictionary> {
    if let Some(path) = dict {
        return Dictionary::read(path)
            .with_context(|| format!("reading dictionary {}", path.display()));
    }
    match corpus.map(str::parse::<BuiltinCorpus>) {
        Some(Ok(b)) => Ok(b.dictionary()),
        _ => Ok(all_builtin_words()),
    }
}

fn resolve_corpus(name: &str) -> Result<LabeledCorpus> {
    match name.parse::<BuiltinCorpus>() {
        Ok(b) => Ok(b.load()),
        Err(_) => read_corpus(Path::new(name)).with_context(|| format!("reading corpus {name}")),
    }
}

impl Lexicon {
    fn dictionary(&self) -> Result<Dictionary> {
        resolve_dictionary(self.corpus.as_deref(), self.dict.as_deref())
    }
}

impl HyperArgs {
    fn build(&self) -> Result<HyperParams> {
        Ok(HyperParams::new(self.qn, self.qs, self.depth)?)
    }
}

fn cmd_parse(words: &[String], dict: &Dictionary) -> Result<()> {
    for w in words {
        println!("{w}: {}", dict.lookup(w)?);
    }
    let ty = sentence_type(words, dict)?;
    println!("type: {ty}");
    let Some(pattern) = reduce(&ty) else {
        println!("verdict: not grammatical");
        return Err(Rejected(format!("`{}` does not reduce to s", words.join(" "))).into());
    };
    let mut gone = vec![false; ty.len()];
    for (k, round) in pattern.rounds().iter().enumerate() {
        for &(i, j) in round {
            gone[i] = true;
            gone[j] = true;
        }
        let rest: Vec<String> = ty
            .factors()
            .iter()
            .zip(&gone)
            .filter(|(_, g)| !**g)
            .map(|(f, _)| f.to_string())
            .collect();
        let cups: Vec<String> = round.iter().map(|(i, j)| format!("({i},{j})")).collect();
        println!(
            "step {}: contract {} -> {}",
            k + 1,
            cups.join(" "),
            rest.join(" ")
        );
    }
    let cups: Vec<String> = pattern
        .pairs
        .iter()
        .map(|(i, j)| format!("({i},{j})"))
        .collect();
    println!("cups: {}", cups.join(" "));
    println!("open: {:?}", pattern.open);
    println!("verdict: grammatical ({} cups)", pattern.pairs.len());
    Ok(())
}

fn cmd_compile(
    words: &[String],
    dict: &Dictionary,
    hyper: &HyperParams,
    out: Option<&Path>,
    qasm: bool,
) -> Result<()> {
    let diagram = from_sentence(words, dict)?;
    let mut reg = ParamRegistry::new();
    let c = compile(&diagram, hyper, &mut reg)?;
    let text = if qasm {
        c.to_qasm(None)
    } else {
        serde_json::to_string_pretty(&c.to_json())? + "\n"
    };
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("qubits: {}", c.qubit_count);
            println!("slots: {}", reg.total_slots());
            println!("cnots: {}", cnot_count(&c));
            println!("wrote {}", path.display());
        }
        None => {
            eprintln!("qubits: {}", c.qubit_count);
            eprintln!("slots: {}", reg.total_slots());
            eprintln!("cnots: {}", cnot_count(&c));
            print!("{text}");
        }
    }
    Ok(())
}

fn cmd_gen(
    dict: &Dictionary,
    count: usize,
    seed: u64,
    max_depth: usize,
    out: Option<&Path>,
) -> Result<()> {
    let grammar = Grammar::from_vocab(&Vocab::from_dictionary(dict))?;
    let sentences = generate_corpus(&grammar, count, seed, max_depth)?;
    match out {
        Some(path) => {
            qnlp_core::corpora::write_unlabeled(path, &sentences)?;
            println!("wrote {} sentences to {}", sentences.len(), path.display());
        }
        None => {
            for s in &sentences {
                println!("{}", json!({ "sentence": s.join(" "), "label": null }));
            }
        }
    }
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment.
fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected `key = value`", n + 1))?;
        let key = k.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key `{key}`", n + 1);
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn load_config(spec: &str) -> Result<BTreeMap<String, String>> {
    if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == spec) {
        return parse_config(text);
    }
    let text = std::fs::read_to_string(spec).with_context(|| {
        let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        format!(
            "`{spec}` is neither a bundled config ({}) nor a readable file",
            names.join(", ")
        )
    })?;
    parse_config(&text)
}

struct TrainPlan {
    corpus_name: String,
    corpus: LabeledCorpus,
    dict: Dictionary,
    config: TrainConfig,
    seeds: Vec<u64>,
    out: PathBuf,
}

fn parsed<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| anyhow!("config key `{key}`: {e}"))
        })
        .transpose()
}

fn plan(map: &BTreeMap<String, String>) -> Result<TrainPlan> {
    let corpus_name = map.get("corpus").cloned().unwrap_or_else(|| "K30".into());
    let corpus = resolve_corpus(&corpus_name)?;
    let dict = resolve_dictionary(Some(&corpus_name), map.get("dict").map(Path::new))?;

    let hyper = HyperParams::new(
        parsed(map, "qn")?.unwrap_or(1),
        parsed(map, "qs")?.unwrap_or(0),
        parsed(map, "depth")?.unwrap_or(1),
    )?;
    let mut optimizer =
        OptimizerConfig::by_name(map.get("optimizer").map_or("spsa", String::as_str))?;
    match &mut optimizer {
        OptimizerConfig::Spsa(c) => {
            c.iterations = parsed(map, "iterations")?.unwrap_or(c.iterations);
            c.a = parsed(map, "a")?.unwrap_or(c.a);
            c.c = parsed(map, "c")?.unwrap_or(c.c);
        }
        OptimizerConfig::NelderMead(c) => {
            c.max_iter = parsed(map, "iterations")?.unwrap_or(c.max_iter);
        }
        OptimizerConfig::Basinhopping(c) => {
            c.hops = parsed(map, "hops")?.unwrap_or(c.hops);
            c.temperature = parsed(map, "temperature")?.unwrap_or(c.temperature);
            c.step_size = parsed(map, "step_size")?.unwrap_or(c.step_size);
            c.inner.max_iter = parsed(map, "iterations")?.unwrap_or(c.inner.max_iter);
        }
    }
    let shots: Option<usize> = parsed(map, "shots")?;
    let evaluator = match (map.get("evaluator").map(String::as_str), shots) {
        (None | Some("shots"), Some(n)) => EvalMode::Shots(n),
        (Some("shots"), None) => bail!("evaluator `shots` needs `shots = <count>`"),
        (None | Some("exact"), None) => EvalMode::Exact,
        (Some("statevector"), None) => EvalMode::Statevector,
        (Some(other), None) => bail!("unknown evaluator `{other}`"),
        (Some(other), Some(_)) => bail!("`shots` conflicts with evaluator `{other}`"),
    };
    if evaluator == EvalMode::Shots(0) {
        bail!("shots must be positive");
    }
    let seed = parsed(map, "seed")?.unwrap_or(0);
    let seeds = match map.get("seeds") {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| anyhow!("config key `seeds`: {e}"))
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![seed],
    };
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    let config = TrainConfig {
        optimizer,
        cost: parsed::<CostKind>(map, "cost")?.unwrap_or(CostKind::Squared),
        hyper,
        split_p: parsed(map, "split")?.unwrap_or(0.5),
        evaluator,
        label_scale: parsed::<LabelScale>(map, "label_scale")?.unwrap_or_default(),
        seed: seeds[0],
    };
    Ok(TrainPlan {
        corpus_name,
        corpus,
        dict,
        config,
        seeds,
        out: PathBuf::from(map.get("out").map_or("out", String::as_str)),
    })
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut map = match &args.config {
        Some(spec) => load_config(spec)?,
        None => BTreeMap::new(),
    };
    for (key, value) in args.overrides() {
        if let Some(v) = value {
            map.insert(key.to_string(), v.clone());
        }
    }
    if args.seed.is_some() && args.seeds.is_none() {
        map.remove("seeds");
    }
    let plan = plan(&map)?;
    let experiment = Experiment::prepare(&plan.corpus, &plan.dict, &plan.config)?;
    println!(
        "corpus {}: {} train, {} test, {} parameters",
        plan.corpus_name,
        experiment.train.len(),
        experiment.test.len(),
        experiment.param_count()
    );
    for &seed in &plan.seeds {
        let config = TrainConfig {
            seed,
            ..plan.config
        };
        let dir = if plan.seeds.len() == 1 {
            plan.out.clone()
        } else {
            plan.out.join(format!("seed-{seed}"))
        };
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let start = Instant::now();
        let record = experiment.run(&config)?;
        let wall = start.elapsed().as_secs_f64();
        std::fs::write(dir.join("trace.csv"), trace_csv(&record))?;
        let summary = summary_json(&plan.corpus_name, &config, &record, wall);
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&summary)? + "\n",
        )?;
        println!(
            "seed {seed}: e_train {} e_test {} final_cost {:.6} -> {}",
            record.e_train,
            record.e_test,
            record.final_cost,
            dir.display()
        );
    }
    Ok(())
}

type Trained = Option<(ParamRegistry, HyperParams)>;

/// Parameters and the registry they index. A training summary brings its
/// corpus and configuration, so the registry is rebuilt exactly as in
/// training; a bare array indexes the sentence's own words.
fn load_theta(path: &Path) -> Result<(Vec<f64>, Trained)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading θ file {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let numbers = |v: &Value| -> Result<Vec<f64>> {
        v.as_array()
            .ok_or_else(|| anyhow!("expected an array of numbers"))?
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| anyhow!("non-numeric parameter {x}"))
            })
            .collect()
    };
    match &value {
        Value::Array(_) => Ok((numbers(&value)?, None)),
        Value::Object(obj) => {
            let theta = numbers(
                obj.get("theta_star")
                    .ok_or_else(|| anyhow!("θ file has no `theta_star`"))?,
            )?;
            let (Some(config), Some(corpus)) =
                (obj.get("config"), obj.get("corpus").and_then(Value::as_str))
            else {
                return Ok((theta, None));
            };
            let config: TrainConfig = serde_json::from_value(config.clone())?;
            let exp = Experiment::prepare(
                &resolve_corpus(corpus)?,
                &resolve_dictionary(Some(corpus), None)?,
                &config,
            )?;
            Ok((theta, Some((exp.registry, config.hyper))))
        }
        _ => bail!("θ file must hold an array or an object with `theta_star`"),
    }
}

fn cmd_hadamard(
    words: &[String],
    lexicon: &Lexicon,
    hyper: &HyperArgs,
    theta_path: &Path,
    shots: Option<usize>,
    seed: u64,
) -> Result<()> {
    let dict = lexicon.dictionary()?;
    let (theta, trained) = load_theta(theta_path)?;
    let diagram = from_sentence(words, &dict)?;
    let (mut reg, hyper) = match trained {
        Some((reg, h)) => (reg, h),
        None => (ParamRegistry::new(), hyper.build()?),
    };
    let before = reg.total_slots();
    let c = compile(&diagram, &hyper, &mut reg)?;
    if reg.total_slots() != theta.len() || (before > 0 && reg.total_slots() != before) {
        bail!(
            "θ has {} entries but the sentence needs {} parameter slots",
            theta.len(),
            reg.total_slots()
        );
    }
    let label = predicted_label(&c, &theta)?.value;
    let (re, im) = match shots {
        None => (
            hadamard_test(&c, &theta, Part::Real)?,
            hadamard_test(&c, &theta, Part::Imaginary)?,
        ),
        Some(n) => {
            let re = hadamard_test_shots(&c, &theta, Part::Real, n, seed)?;
            let im = hadamard_test_shots(&c, &theta, Part::Imaginary, n, seed.wrapping_add(1))?;
            println!(
                "stderr: Re {:.6} Im {:.6} ({n} shots each)",
                re.stderr.unwrap_or(f64::NAN),
                im.stderr.unwrap_or(f64::NAN)
            );
            (re.value, im.value)
        }
    };
    let sq = re * re + im * im;
    println!("Re: {re:.12}");
    println!("Im: {im:.12}");
    println!("Re^2+Im^2: {sq:.12}");
    println!("postselected label: {label:.12}");
    println!("difference: {:.3e}", (sq - label).abs());
    Ok(())
}
