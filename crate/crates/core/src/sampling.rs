//! Monte Carlo samplers: generalized Aldous-Broder (first-entrance tree of a
//! walk stopped at its cover time), Wilson's loop-erased walk, and the
//! tree-valued last-exit chain.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, trial)`, so
//! batch counts do not depend on how trials are spread over threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Distribution, MAX_ENUMERATION_N};
use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, VertexId};
use crate::path::Path;
use crate::scalar::Scalar;
use crate::tree::RootedTree;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        RandomSource { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Cumulative-sum lookup for drawing from a finite distribution.
#[derive(Debug, Clone)]
struct Categorical {
    outcomes: Vec<VertexId>,
    cumulative: Vec<f64>,
}

impl Categorical {
    fn new(weights: impl IntoIterator<Item = (VertexId, f64)>) -> Self {
        let mut outcomes = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (v, w) in weights {
            if w > 0.0 {
                acc += w;
                outcomes.push(v);
                cumulative.push(acc);
            }
        }
        Categorical {
            outcomes,
            cumulative,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        let total = *self.cumulative.last().expect("nonempty row");
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.outcomes[i.min(self.outcomes.len() - 1)]
    }
}

/// Float transition table of a kernel, used by every sampler.
#[derive(Debug, Clone)]
pub struct StepTable {
    rows: Vec<Categorical>,
    budget: u64,
}

impl StepTable {
    pub fn new<S: Scalar>(k: &MarkovKernel<S>) -> Self {
        let rows = (0..k.n())
            .map(|a| Categorical::new(k.neighbors(a).iter().map(|&b| (b, k.get(a, b).to_f64()))))
            .collect();
        StepTable {
            rows,
            budget: DEFAULT_STEP_BUDGET,
        }
    }

    /// Overrides the per-walk step budget.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, from: VertexId, rng: &mut R) -> VertexId {
        self.rows[from].sample(rng)
    }
}

/// Runs the chain from `start` until every vertex has been visited; the
/// returned path ends at the vertex visited last for the first time.
pub fn walk_until_cover<R: Rng + ?Sized>(
    table: &StepTable,
    start: VertexId,
    rng: &mut R,
) -> Result<Path> {
    let n = table.n();
    if start >= n {
        return Err(Error::VertexOutOfRange(start));
    }
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut remaining = n - 1;
    let mut walk = vec![start];
    let mut cur = start;
    let mut steps = 0u64;
    while remaining > 0 {
        if steps == table.budget {
            return Err(Error::StepBudget(table.budget));
        }
        cur = table.step(cur, rng);
        steps += 1;
        walk.push(cur);
        if !visited[cur] {
            visited[cur] = true;
            remaining -= 1;
        }
    }
    Ok(Path::from_vec_unchecked(walk))
}

/// Where the Aldous-Broder walk starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    FixedRoot(VertexId),
    /// Start drawn from the exact stationary distribution.
    Stationary,
}

impl StartMode {
    pub fn name(&self) -> &'static str {
        match self {
            StartMode::FixedRoot(_) => "fixed-root",
            StartMode::Stationary => "stationary",
        }
    }
}

/// First-entrance-tree sampler for a kernel `M`.
#[derive(Debug, Clone)]
pub struct AldousBroder {
    table: StepTable,
    start: Categorical,
}

impl AldousBroder {
    /// Precomputes the step table and the stationary start law (in the
    /// kernel's own numeric mode, then converted to floats).
    pub fn new<S: Scalar>(m: &MarkovKernel<S>) -> Result<Self> {
        let rho = analysis::stationary_distribution(m)?;
        Ok(Self::with_stationary(m, &rho))
    }

    pub fn with_stationary<S: Scalar>(m: &MarkovKernel<S>, rho: &Distribution<S>) -> Self {
        AldousBroder {
            table: StepTable::new(m),
            start: Categorical::new(rho.to_f64().into_iter().enumerate()),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.table = self.table.with_budget(budget);
        self
    }

    /// Covering walk from the chosen start.
    pub fn covering_walk<R: Rng + ?Sized>(&self, mode: StartMode, rng: &mut R) -> Result<Path> {
        let start = match mode {
            StartMode::FixedRoot(r) => r,
            StartMode::Stationary => self.start.sample(rng),
        };
        walk_until_cover(&self.table, start, rng)
    }

    /// First-entrance tree of a covering walk.
    pub fn sample<R: Rng + ?Sized>(&self, mode: StartMode, rng: &mut R) -> Result<RootedTree> {
        let walk = self.covering_walk(mode, rng)?;
        walk.first_entrance_tree(self.table.n(), true)
    }

    /// Last-exit tree of the same covering walk (rooted at the last newly
    /// visited vertex).
    pub fn sample_last_exit<R: Rng + ?Sized>(
        &self,
        mode: StartMode,
        rng: &mut R,
    ) -> Result<RootedTree> {
        let walk = self.covering_walk(mode, rng)?;
        walk.last_exit_tree(self.table.n())
    }
}

/// Wilson's algorithm with kernel `K` (pass the step table of `K`): loop-erased
/// walks from each vertex in index order until they hit the growing tree.
/// The result has law proportional to `prod K[u][parent(u)]`.
pub fn wilson_sample<R: Rng + ?Sized>(
    table: &StepTable,
    root: VertexId,
    rng: &mut R,
) -> Result<RootedTree> {
    let n = table.n();
    if root >= n {
        return Err(Error::VertexOutOfRange(root));
    }
    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    let mut next: Vec<Option<VertexId>> = vec![None; n];
    let mut steps = 0u64;
    for i in 0..n {
        let mut u = i;
        while !in_tree[u] {
            if steps == table.budget {
                return Err(Error::StepBudget(table.budget));
            }
            let v = table.step(u, rng);
            steps += 1;
            // A self-loop leaves the walker in place; the exit is overwritten
            // by the next step out of u.
            next[u] = Some(v);
            u = v;
        }
        let mut u = i;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u].expect("walked vertices have an exit");
        }
    }
    let parent = (0..n)
        .map(|v| if v == root { None } else { next[v] })
        .collect();
    Ok(RootedTree::from_parts_unchecked(root, parent))
}

/// Edge surgery of the last-exit chain: the root moves to `next`, gaining
/// the edge `(root, next)` and losing `next`'s outgoing edge. A self-loop
/// step leaves the tree unchanged.
pub fn tree_chain_move(state: &RootedTree, next: VertexId) -> RootedTree {
    let mut t = state.clone();
    let r = t.root();
    t.set_parent(r, Some(next));
    t.set_parent(next, None);
    t.set_root(next);
    t
}

/// One step of the tree-valued chain driven by `mrev_table`.
pub fn tree_chain_step<R: Rng + ?Sized>(
    state: &RootedTree,
    mrev_table: &StepTable,
    rng: &mut R,
) -> RootedTree {
    let next = mrev_table.step(state.root(), rng);
    tree_chain_move(state, next)
}

/// Exact balance check for the tree chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeChainReport {
    pub rooted_trees: usize,
    pub rows_sum_to_one: bool,
    pub balance_holds: bool,
    pub pass: bool,
}

/// Largest vertex count for [`verify_tree_chain_stationarity`].
pub const MAX_TREE_CHAIN_N: usize = 6;

/// Builds the transition kernel `Q` of the last-exit chain driven by the
/// reversal `Mrev` over all rooted spanning trees, and checks that
/// `P(t, r) ∝ prod Mrev_e` satisfies `P Q = P`.
pub fn verify_tree_chain_stationarity<S: Scalar>(m: &MarkovKernel<S>) -> Result<TreeChainReport> {
    let mrev = analysis::reversed_kernel(m)?;
    verify_tree_chain_balance(&mrev, &mrev)
}

/// Balance of the chain driven by `driver` against the candidate weights
/// `P(t, r) = prod weights_e` (unnormalized; balance is linear).
pub fn verify_tree_chain_balance<S: Scalar>(
    driver: &MarkovKernel<S>,
    weights: &MarkovKernel<S>,
) -> Result<TreeChainReport> {
    let n = driver.n();
    if n > MAX_TREE_CHAIN_N.min(MAX_ENUMERATION_N) {
        return Err(Error::TooLarge {
            n,
            max: MAX_TREE_CHAIN_N,
        });
    }
    let mut states = Vec::new();
    for r in 0..n {
        states.extend(analysis::enumerate_rooted_spanning_trees(driver, r)?);
    }
    let index: BTreeMap<&RootedTree, usize> =
        states.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let p = states
        .iter()
        .map(|t| analysis::tree_weight(t, weights))
        .collect::<Result<Vec<S>>>()?;

    let mut flow = vec![S::zero(); states.len()];
    let mut rows_ok = true;
    for (i, t) in states.iter().enumerate() {
        let r = t.root();
        let mut row_sum = S::zero();
        for &next in driver.neighbors(r) {
            let q = driver.get(r, next).clone();
            let succ = tree_chain_move(t, next);
            let j = *index
                .get(&succ)
                .ok_or_else(|| Error::InvalidTree("chain left the tree space".into()))?;
            flow[j] = flow[j].clone() + p[i].clone() * q.clone();
            row_sum = row_sum + q;
        }
        rows_ok &= row_sum.close_to(&S::one(), analysis::FLOAT_CHECK_TOL);
    }
    let balance = flow
        .iter()
        .zip(&p)
        .all(|(f, w)| f.close_to(w, analysis::FLOAT_CHECK_TOL));
    Ok(TreeChainReport {
        rooted_trees: states.len(),
        rows_sum_to_one: rows_ok,
        balance_holds: balance,
        pass: rows_ok && balance,
    })
}

/// Counts of sampled trees.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleBatch {
    pub counts: BTreeMap<RootedTree, u64>,
    pub total: u64,
    pub seed: u64,
}

impl SampleBatch {
    pub fn frequency(&self, t: &RootedTree) -> f64 {
        self.counts.get(t).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Counts of the tree roots.
    pub fn root_counts(&self, n: usize) -> Vec<u64> {
        let mut out = vec![0; n];
        for (t, c) in &self.counts {
            out[t.root()] += c;
        }
        out
    }

    fn merge(mut self, other: SampleBatch) -> SampleBatch {
        for (t, c) in other.counts {
            *self.counts.entry(t).or_insert(0) += c;
        }
        self.total += other.total;
        self
    }

    pub fn to_report(
        &self,
        labels: &[String],
        kernel_hash: &str,
        mode: &str,
        sampler: &str,
    ) -> BatchReport {
        BatchReport {
            kernel_hash: kernel_hash.to_string(),
            sampler: sampler.to_string(),
            mode: mode.to_string(),
            samples: self.total,
            seed: self.seed,
            tree_counts: self
                .counts
                .iter()
                .map(|(t, c)| (t.to_canonical(labels), *c))
                .collect(),
        }
    }

    pub fn from_report(report: &BatchReport, labels: &[String]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (k, c) in &report.tree_counts {
            counts.insert(RootedTree::parse_canonical(k, labels)?, *c);
        }
        let total = counts.values().sum();
        if total != report.samples {
            return Err(Error::Syntax(format!(
                "tree counts sum to {total}, report says {}",
                report.samples
            )));
        }
        Ok(SampleBatch {
            counts,
            total,
            seed: report.seed,
        })
    }
}

/// Serialized batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchReport {
    pub kernel_hash: String,
    pub sampler: String,
    pub mode: String,
    pub samples: u64,
    pub seed: u64,
    pub tree_counts: BTreeMap<String, u64>,
}

/// Runs `samples` independent trials; trial `i` uses stream `(seed, i)`.
/// `workers = None` uses the global rayon pool.
pub fn sample_batch<F>(samples: u64, seed: u64, workers: Option<usize>, trial: F) -> Result<SampleBatch>
where
    F: Fn(&mut ChaCha8Rng) -> Result<RootedTree> + Sync,
{
    let run = || {
        (0..samples)
            .into_par_iter()
            .try_fold(
                || SampleBatch {
                    seed,
                    ..Default::default()
                },
                |mut acc, i| {
                    let mut rng = RandomSource::new(seed, i).rng();
                    let t = trial(&mut rng)?;
                    *acc.counts.entry(t).or_insert(0) += 1;
                    acc.total += 1;
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || SampleBatch {
                    seed,
                    ..Default::default()
                },
                |a, b| Ok(a.merge(b)),
            )
    };
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Syntax(e.to_string()))?
            .install(run),
        None => run(),
    }
}
