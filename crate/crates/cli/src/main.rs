//! `abtree` command line: kernel analysis, samplers, exact laws and the
//! combinatorial checks, each emitting one JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use abtree::analysis::FLOAT_CHECK_TOL;
use abtree::kernel::fnv1a;
use abtree::oracle::{chi_square_test, ExactReport};
use abtree::sampling::{verify_tree_chain_stationarity, BatchReport};
use abtree::scalar::{over_common_denominator, parse_rational};
use abtree::{
    cycle_decomposition, enumerate_heaps_of_cycles, exact_fet_distribution,
    forward_weight_distribution, free_hole, golf_config_for_tree, golf_heap_decode,
    golf_heap_encode, heap_decode, heap_encode, is_golf_sequence, matrix_tree_check,
    parse_kernel, parse_kernel_as, principal_minor_det, reversed_kernel, sample_batch,
    stationary_distribution, stationary_joint_distribution, stochastic_golf, theorem_distribution,
    tree_weight, trivial_signed_sum, wilson_sample, AldousBroder, AnyKernel, HeapCollection,
    KernelFile, MarkovKernel, Path, RandomSource, Rational, RootedTree, Scalar, StartMode,
    StepTable,
};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "abtree", version, about = "Random spanning trees of Markov kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary distribution of the kernel.
    Stationary(Common),
    /// Time-reversed kernel, written as a kernel file.
    Reverse(Common),
    /// Product weights of one rooted tree under M and its reversal.
    TreeWeight {
        #[command(flatten)]
        common: Common,
        /// Tree in canonical form, e.g. `root=1;2->1,3->1`.
        #[arg(long)]
        tree: String,
    },
    /// Matrix-tree identities at one root, or at every root.
    MttCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        root: Option<String>,
    },
    /// First-entrance trees from the Aldous-Broder walk.
    SampleAb(SampleArgs),
    /// Wilson's algorithm driven by the reversed kernel.
    SampleWilson(SampleArgs),
    /// Exact law of the first-entrance tree.
    ExactDist {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long, value_enum, default_value_t = Method::ClosedForm)]
        method: Method,
    },
    /// Distance between an exact law and a sample batch.
    Compare {
        #[arg(long)]
        expected: PathBuf,
        #[arg(long)]
        observed: PathBuf,
        /// Largest accepted total variation distance.
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Heap encoding of a path, or cycle decomposition of a heap collection.
    HeapDecompose {
        #[command(flatten)]
        common: Common,
        /// Comma- or space-separated vertex labels.
        #[arg(long, conflicts_with = "heap", required_unless_present = "heap")]
        path: Option<String>,
        /// JSON file mapping each label to its heap (list of target labels).
        #[arg(long)]
        heap: Option<PathBuf>,
    },
    /// Stochastic golf for the configuration of a tree, with the reversed kernel.
    GolfSim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tree: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Truncated heap-of-cycles sums against 1/det and signed trivial sums.
    InversionCheck {
        #[command(flatten)]
        common: Common,
        /// Vertex to avoid; every vertex when omitted.
        #[arg(long)]
        root: Option<String>,
        #[arg(long, default_value_t = 40)]
        max_edges: usize,
        /// Also require the truncated sum to be within this distance of 1/det.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Exact balance of the last-exit tree chain.
    TreeChainCheck(Common),
    /// First-entrance tree of covering walks against the last-exit tree of
    /// their reversals.
    DualityCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// Kernel file: {"labels": [...], "rows": [["0","1/3",...], ...]}.
    #[arg(long)]
    kernel: PathBuf,
    /// Rational arithmetic (decimal entries are read exactly).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Floating point arithmetic.
    #[arg(long)]
    float: bool,
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Args)]
struct StartArgs {
    #[arg(long)]
    root: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::FixedRoot)]
    mode: ModeArg,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    start: StartArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (all cores by default); counts do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FixedRoot,
    Stationary,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    /// Closed form: reversed tree weight over the principal minor.
    ClosedForm,
    /// Dynamic program over the covering walk (at most 5 vertices).
    Dp,
    /// Forward tree weights, normalized; not the sampled law in general.
    Forward,
}

/// A report plus, for checks, the verdict.
struct Outcome {
    report: Value,
    pass: Option<bool>,
}

impl Outcome {
    fn report(report: Value) -> Self {
        Outcome { report, pass: None }
    }

    fn check(report: Value, pass: bool) -> Self {
        Outcome { report, pass: Some(pass) }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Numeric {
    Auto,
    Exact,
    Float,
}

struct Loaded {
    kernel: AnyKernel,
    hash: String,
}

fn load(common: &Common, default: Numeric) -> Result<Loaded> {
    let text = fs::read_to_string(&common.kernel)
        .with_context(|| format!("reading {}", common.kernel.display()))?;
    let file: KernelFile = serde_json::from_str(&text)
        .map_err(|e| anyhow!("malformed kernel file {}: {e}", common.kernel.display()))?;
    let canonical = serde_json::to_string(&file)?;
    let hash = format!("{:016x}", fnv1a(canonical.as_bytes()));
    let numeric = match (common.exact, common.float) {
        (true, _) => Numeric::Exact,
        (_, true) => Numeric::Float,
        _ => default,
    };
    let kernel = match numeric {
        Numeric::Auto => parse_kernel(&text)?,
        Numeric::Exact => AnyKernel::Exact(parse_kernel_as::<Rational>(&text)?),
        Numeric::Float => AnyKernel::Float(parse_kernel_as::<f64>(&text)?),
    };
    Ok(Loaded { kernel, hash })
}

/// Runs a generic body on whichever numeric mode the kernel was loaded in.
macro_rules! with_kernel {
    ($loaded:expr, |$k:ident| $body:expr) => {
        match &$loaded.kernel {
            AnyKernel::Exact($k) => $body,
            AnyKernel::Float($k) => $body,
        }
    };
}

fn vertex<S: Scalar>(k: &MarkovKernel<S>, label: &str) -> Result<usize> {
    Ok(k.index_of(label)?)
}

fn start_mode<S: Scalar>(k: &MarkovKernel<S>, start: &StartArgs) -> Result<StartMode> {
    match (start.mode, &start.root) {
        (ModeArg::FixedRoot, Some(r)) => Ok(StartMode::FixedRoot(vertex(k, r)?)),
        (ModeArg::FixedRoot, None) => bail!("--root is required in fixed-root mode"),
        (ModeArg::Stationary, None) => Ok(StartMode::Stationary),
        (ModeArg::Stationary, Some(_)) => bail!("--root cannot be combined with --mode stationary"),
    }
}

fn labels_of<S: Scalar>(k: &MarkovKernel<S>, vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| k.label(v).to_string()).collect()
}

fn stationary<S: Scalar>(k: &MarkovKernel<S>, hash: &str) -> Result<Outcome> {
    let rho = stationary_distribution(k)?;
    let text: Vec<String> = rho.probs().iter().map(|p| p.to_string()).collect();
    // Exact values share one denominator so the entries read side by side.
    let text = if S::EXACT {
        let exact: Option<Vec<Rational>> = text.iter().map(|p| parse_rational(p)).collect();
        exact.map_or(text, |v| over_common_denominator(&v))
    } else {
        text
    };
    Ok(Outcome::report(json!({
        "kernel_hash": hash,
        "mode": S::MODE,
        "labels": k.labels(),
        "rho": text,
    })))
}

fn reverse<S: Scalar>(k: &MarkovKernel<S>) -> Result<Outcome> {
    Ok(Outcome::report(serde_json::to_value(reversed_kernel(k)?.to_file())?))
}

fn tree_weights<S: Scalar>(k: &MarkovKernel<S>, hash: &str, tree: &str) -> Result<Outcome> {
    let t = RootedTree::parse_canonical(tree, k.labels())?;
    if !t.is_spanning() {
        bail!("tree {tree:?} does not span the kernel's vertices");
    }
    let mrev = reversed_kernel(k)?;
    Ok(Outcome::report(json!({
        "kernel_hash": hash,
        "mode": S::MODE,
        "tree": t.to_canonical(k.labels()),
        "weight_m": tree_weight(&t, k)?.to_string(),
        "weight_mrev": tree_weight(&t, &mrev)?.to_string(),
    })))
}

fn mtt_check<S: Scalar>(k: &MarkovKernel<S>, hash: &str, root: Option<&str>) -> Result<Outcome> {
    let roots = match root {
        Some(r) => vec![vertex(k, r)?],
        None => (0..k.n()).collect(),
    };
    let mut checks = Vec::new();
    for r in roots {
        checks.push(matrix_tree_check(k, r)?.0);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(Outcome::check(
        json!({ "kernel_hash": hash, "mode": S::MODE, "checks": checks, "pass": pass }),
        pass,
    ))
}

fn sample<S: Scalar>(k: &MarkovKernel<S>, hash: &str, args: &SampleArgs, wilson: bool) -> Result<Outcome> {
    let mode = start_mode(k, &args.start)?;
    let batch = if wilson {
        let rho: Vec<f64> = stationary_distribution(k)?.to_f64();
        let table = StepTable::new(&reversed_kernel(k)?);
        sample_batch(args.samples, args.seed, args.workers, |rng| {
            let root = match mode {
                StartMode::FixedRoot(r) => r,
                StartMode::Stationary => draw(&rho, rng),
            };
            wilson_sample(&table, root, rng)
        })?
    } else {
        let ab = AldousBroder::new(k)?;
        sample_batch(args.samples, args.seed, args.workers, |rng| ab.sample(mode, rng))?
    };
    let sampler = if wilson { "wilson" } else { "aldous-broder" };
    Ok(Outcome::report(serde_json::to_value(batch.to_report(
        k.labels(),
        hash,
        mode.name(),
        sampler,
    ))?))
}

fn draw<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn exact_dist<S: Scalar>(k: &MarkovKernel<S>, hash: &str, start: &StartArgs, method: Method) -> Result<Outcome> {
    let dist = match (start_mode(k, start)?, method) {
        (StartMode::FixedRoot(r), Method::ClosedForm) => theorem_distribution(k, r)?,
        (StartMode::FixedRoot(r), Method::Dp) => exact_fet_distribution(k, r)?,
        (StartMode::FixedRoot(r), Method::Forward) => forward_weight_distribution(k, r)?,
        (StartMode::Stationary, Method::ClosedForm) => stationary_joint_distribution(k)?,
        (StartMode::Stationary, _) => bail!("stationary mode supports only --method closed-form"),
    };
    Ok(Outcome::report(serde_json::to_value(dist.to_report(k.labels(), hash))?))
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &PathBuf) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("malformed report {}: {e}", path.display()))
}

fn compare(expected: &PathBuf, observed: &PathBuf, threshold: f64) -> Result<Outcome> {
    let exact: ExactReport = read_json(expected)?;
    let batch: BatchReport = read_json(observed)?;
    if exact.kernel_hash != batch.kernel_hash {
        bail!(
            "kernel hashes differ: expected law {}, batch {}",
            exact.kernel_hash,
            batch.kernel_hash
        );
    }
    if batch.samples == 0 {
        bail!("the batch is empty");
    }
    let mut probs = BTreeMap::new();
    for t in &exact.trees {
        let p = parse_rational(&t.prob)
            .map(|q| q.to_f64())
            .ok_or_else(|| anyhow!("bad probability {:?} for {}", t.prob, t.tree))?;
        probs.insert(t.tree.clone(), p);
    }
    let n = batch.samples as f64;
    let mut tv = 0.0;
    let mut exp = Vec::new();
    let mut obs = Vec::new();
    for (tree, &p) in &probs {
        let c = batch.tree_counts.get(tree).copied().unwrap_or(0);
        tv += (p - c as f64 / n).abs();
        exp.push(p);
        obs.push(c);
    }
    let outside: u64 = batch
        .tree_counts
        .iter()
        .filter(|(t, _)| !probs.contains_key(*t))
        .map(|(_, c)| c)
        .sum();
    tv = 0.5 * (tv + outside as f64 / n);
    let pass = tv < threshold;
    Ok(Outcome::check(
        json!({
            "kernel_hash": batch.kernel_hash,
            "seed": batch.seed,
            "samples": batch.samples,
            "sampler": batch.sampler,
            "tv_distance": tv,
            "threshold": threshold,
            "outside_support": outside,
            "chi_square": chi_square_test(&exp, &obs, outside),
            "pass": pass,
        }),
        pass,
    ))
}

fn heap_decompose<S: Scalar>(
    k: &MarkovKernel<S>,
    hash: &str,
    path: Option<&str>,
    heap: Option<&PathBuf>,
) -> Result<Outcome> {
    let labels = k.labels();
    let (h, hint) = match (path, heap) {
        (Some(p), _) => {
            let p = Path::from_labels(p, k)?;
            (heap_encode(&p, k.n())?, Some(p.first()))
        }
        (None, Some(file)) => {
            let map: BTreeMap<String, Vec<String>> = read_json(file)?;
            (HeapCollection::from_labeled(&map, k)?, None)
        }
        (None, None) => bail!("one of --path or --heap is required"),
    };
    let passport = h.passport();
    let balanced = passport.is_balanced();
    let decoded = heap_decode(&h, hint).ok();
    let cycles = if balanced {
        Some(
            cycle_decomposition(&h)?
                .iter()
                .map(|c| labels_of(k, c.vertices()))
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    if decoded.is_none() && cycles.is_none() {
        bail!("heap collection is neither a path image nor balanced");
    }
    let mrev = reversed_kernel(k)?;
    Ok(Outcome::report(json!({
        "kernel_hash": hash,
        "mode": S::MODE,
        "heaps": h.to_labeled(labels),
        "out_degree": labels_of_counts(labels, &passport.out),
        "in_degree": labels_of_counts(labels, &passport.inn),
        "balanced": balanced,
        "path": decoded.map(|p| labels_of(k, p.vertices())),
        "cycles": cycles,
        "weight_m": h.weight(k)?.to_string(),
        "weight_mrev": h.weight(&mrev)?.to_string(),
    })))
}

fn labels_of_counts(labels: &[String], counts: &[usize]) -> BTreeMap<String, usize> {
    labels.iter().cloned().zip(counts.iter().copied()).collect()
}

fn golf_sim<S: Scalar>(k: &MarkovKernel<S>, hash: &str, tree: &str, samples: u64, seed: u64) -> Result<Outcome> {
    let t = RootedTree::parse_canonical(tree, k.labels())?;
    let config = golf_config_for_tree(&t)?;
    let table = StepTable::new(&reversed_kernel(k)?);
    let mut free = vec![0u64; k.n()];
    let mut violations = 0u64;
    let mut example = None;
    for i in 0..samples {
        let mut rng = RandomSource::new(seed, i).rng();
        let seq = stochastic_golf(&table, &config, &mut rng)?;
        free[free_hole(&seq, &config)?] += 1;
        let h = golf_heap_encode(&seq, k.n())?;
        if !is_golf_sequence(&seq, &config) || golf_heap_decode(&h, &config)? != seq {
            violations += 1;
        }
        if example.is_none() {
            example = Some(seq.to_report(&config, k.labels()));
        }
    }
    let free_counts: BTreeMap<String, u64> = config
        .holes()
        .iter()
        .map(|&f| (k.label(f).to_string(), free[f]))
        .collect();
    let pass = violations == 0 && free_counts.values().sum::<u64>() == samples;
    Ok(Outcome::check(
        json!({
            "kernel_hash": hash,
            "seed": seed,
            "samples": samples,
            "tree": t.to_canonical(k.labels()),
            "holes": labels_of(k, &config.holes().iter().copied().collect::<Vec<_>>()),
            "starts": labels_of(k, config.starts()),
            "free_counts": free_counts,
            "violations": violations,
            "example": example,
            "pass": pass,
        }),
        pass,
    ))
}

fn inversion_check<S: Scalar>(
    k: &MarkovKernel<S>,
    hash: &str,
    root: Option<&str>,
    max_edges: usize,
    tolerance: Option<f64>,
) -> Result<Outcome> {
    let mrev = reversed_kernel(k)?;
    let vertices = match root {
        Some(r) => vec![vertex(k, r)?],
        None => (0..k.n()).collect(),
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for f in vertices {
        // The minors of M and Mrev agree, so either kernel's heaps of cycles
        // give the same limit.
        let minor = principal_minor_det(k, f);
        let inverse = S::one() / minor.clone();
        let partial = enumerate_heaps_of_cycles(&mrev, f, max_edges)?;
        let signed = trivial_signed_sum(k, f)?;
        let gap = (inverse.to_f64() - partial.to_f64()).abs();
        let below = partial.to_f64() <= inverse.to_f64() * (1.0 + FLOAT_CHECK_TOL);
        let signed_ok = signed.close_to(&minor, FLOAT_CHECK_TOL);
        let ok = below && signed_ok && tolerance.map_or(true, |t| gap <= t);
        pass &= ok;
        rows.push(json!({
            "f": k.label(f),
            "minor": minor.to_string(),
            "inverse": inverse.to_string(),
            "truncated_sum": partial.to_string(),
            "gap": gap,
            "signed_trivial_sum": signed.to_string(),
            "pass": ok,
        }));
    }
    Ok(Outcome::check(
        json!({
            "kernel_hash": hash,
            "mode": S::MODE,
            "max_edges": max_edges,
            "tolerance": tolerance,
            "checks": rows,
            "pass": pass,
        }),
        pass,
    ))
}

fn tree_chain_check<S: Scalar>(k: &MarkovKernel<S>, hash: &str) -> Result<Outcome> {
    let report = verify_tree_chain_stationarity(k)?;
    let pass = report.pass;
    let mut value = serde_json::to_value(report)?;
    value["kernel_hash"] = json!(hash);
    value["mode"] = json!(S::MODE);
    Ok(Outcome::check(value, pass))
}

fn duality_check<S: Scalar>(k: &MarkovKernel<S>, hash: &str, samples: u64, seed: u64) -> Result<Outcome> {
    let ab = AldousBroder::new(k)?;
    let n = k.n();
    let mut violations = 0u64;
    let mut first_violation = None;
    for i in 0..samples {
        let mut rng = RandomSource::new(seed, i).rng();
        let p = ab.covering_walk(StartMode::Stationary, &mut rng)?;
        if p.first_entrance_tree(n, true)? != p.reversed().last_exit_tree(n)? {
            violations += 1;
            first_violation.get_or_insert_with(|| labels_of(k, p.vertices()));
        }
    }
    let pass = violations == 0;
    Ok(Outcome::check(
        json!({
            "kernel_hash": hash,
            "seed": seed,
            "samples": samples,
            "violations": violations,
            "first_violation": first_violation,
            "pass": pass,
        }),
        pass,
    ))
}

fn run(command: Command) -> Result<(Outcome, String)> {
    use Command::*;
    Ok(match command {
        Stationary(c) => {
            let l = load(&c, Numeric::Auto)?;
            (with_kernel!(l, |k| stationary(k, &l.hash))?, c.output)
        }
        Reverse(c) => {
            let l = load(&c, Numeric::Auto)?;
            (with_kernel!(l, |k| reverse(k))?, c.output)
        }
        TreeWeight { common, tree } => {
            let l = load(&common, Numeric::Auto)?;
            (with_kernel!(l, |k| tree_weights(k, &l.hash, &tree))?, common.output)
        }
        MttCheck { common, root } => {
            let l = load(&common, Numeric::Auto)?;
            (with_kernel!(l, |k| mtt_check(k, &l.hash, root.as_deref()))?, common.output)
        }
        SampleAb(a) => {
            let l = load(&a.common, Numeric::Float)?;
            (with_kernel!(l, |k| sample(k, &l.hash, &a, false))?, a.common.output)
        }
        SampleWilson(a) => {
            let l = load(&a.common, Numeric::Float)?;
            (with_kernel!(l, |k| sample(k, &l.hash, &a, true))?, a.common.output)
        }
        ExactDist { common, start, method } => {
            let l = load(&common, Numeric::Auto)?;
            (with_kernel!(l, |k| exact_dist(k, &l.hash, &start, method))?, common.output)
        }
        Compare { expected, observed, threshold, output } => {
            (compare(&expected, &observed, threshold)?, output)
        }
        HeapDecompose { common, path, heap } => {
            let l = load(&common, Numeric::Auto)?;
            let out = with_kernel!(l, |k| heap_decompose(k, &l.hash, path.as_deref(), heap.as_ref()))?;
            (out, common.output)
        }
        GolfSim { common, tree, samples, seed } => {
            let l = load(&common, Numeric::Float)?;
            (with_kernel!(l, |k| golf_sim(k, &l.hash, &tree, samples, seed))?, common.output)
        }
        InversionCheck { common, root, max_edges, tolerance } => {
            let l = load(&common, Numeric::Auto)?;
            let out = with_kernel!(l, |k| inversion_check(k, &l.hash, root.as_deref(), max_edges, tolerance))?;
            (out, common.output)
        }
        TreeChainCheck(c) => {
            let l = load(&c, Numeric::Auto)?;
            (with_kernel!(l, |k| tree_chain_check(k, &l.hash))?, c.output)
        }
        DualityCheck { common, samples, seed } => {
            let l = load(&common, Numeric::Float)?;
            (with_kernel!(l, |k| duality_check(k, &l.hash, samples, seed))?, common.output)
        }
    })
}

fn emit(report: &Value, output: &str) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    text.push('\n');
    if output == "-" {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()
    } else {
        fs::write(output, text)
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<io::Error>()) {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (outcome, output) = match run(cli.command) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = emit(&outcome.report, &output) {
        eprintln!("error: writing {output}: {e}");
        return ExitCode::from(3);
    }
    match outcome.pass {
        Some(false) => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    }
}
