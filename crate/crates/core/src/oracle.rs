//! Exact tree laws and the comparison of samples against them.
//!
//! [`exact_fet_distribution`] follows the walk itself: it only uses exit
//! laws of the chain confined to the visited set, never the reversed kernel
//! or determinants, so it checks the closed form in
//! [`theorem_distribution`] independently.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analysis::{self, TreeEnsemble};
use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, VertexId};
use crate::linalg;
use crate::sampling::SampleBatch;
use crate::scalar::Scalar;
use crate::tree::RootedTree;

/// Largest vertex count for the first-entrance dynamic program.
pub const MAX_DP_N: usize = 5;
/// Largest vertex count for the joint (tree, root) law.
pub const MAX_JOINT_N: usize = 6;

/// Probability of each rooted tree. `root` is `None` for laws over all
/// roots.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution<S> {
    pub root: Option<VertexId>,
    pub probs: BTreeMap<RootedTree, S>,
    pub normalizer: S,
}

impl<S: Scalar> ExactDistribution<S> {
    pub fn get(&self, t: &RootedTree) -> S {
        self.probs.get(t).cloned().unwrap_or_else(S::zero)
    }

    pub fn total(&self) -> S {
        self.probs.values().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Mass of each root.
    pub fn root_marginal(&self, n: usize) -> Vec<S> {
        let mut out = vec![S::zero(); n];
        for (t, p) in &self.probs {
            out[t.root()] = out[t.root()].clone() + p.clone();
        }
        out
    }

    pub fn to_f64(&self) -> BTreeMap<RootedTree, f64> {
        self.probs.iter().map(|(t, p)| (t.clone(), p.to_f64())).collect()
    }

    pub fn to_report(&self, labels: &[String], kernel_hash: &str) -> ExactReport {
        ExactReport {
            kernel_hash: kernel_hash.to_string(),
            mode: S::MODE.to_string(),
            root: self
                .root
                .map_or_else(|| "stationary".to_string(), |r| labels[r].clone()),
            trees: self
                .probs
                .iter()
                .map(|(t, p)| TreeProbability {
                    tree: t.to_canonical(labels),
                    parents: t.parents_by_label(labels),
                    prob: p.to_string(),
                })
                .collect(),
            normalizer: self.normalizer.to_string(),
        }
    }
}

/// Serialized exact law.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactReport {
    pub kernel_hash: String,
    pub mode: String,
    pub root: String,
    pub trees: Vec<TreeProbability>,
    pub normalizer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeProbability {
    pub tree: String,
    pub parents: BTreeMap<String, String>,
    pub prob: String,
}

/// Law of the first-entrance tree of the walk started at `r` and stopped
/// at its cover time, by dynamic programming over (visited set, current
/// vertex, partial tree).
pub fn exact_fet_distribution<S: Scalar>(
    m: &MarkovKernel<S>,
    r: VertexId,
) -> Result<ExactDistribution<S>> {
    let n = m.n();
    if n > MAX_DP_N {
        return Err(Error::TooLarge { n, max: MAX_DP_N });
    }
    if r >= n {
        return Err(Error::VertexOutOfRange(r));
    }
    let full: u32 = (1 << n) - 1;
    // Green's function of the chain killed on leaving the visited set.
    let mut green: HashMap<u32, (Vec<VertexId>, Vec<Vec<S>>)> = HashMap::new();
    let mut layer: BTreeMap<(u32, VertexId, Vec<Option<VertexId>>), S> = BTreeMap::new();
    layer.insert((1 << r, r, vec![None; n]), S::one());

    for _ in 1..n {
        let mut next_layer = BTreeMap::new();
        for ((mask, u, parent), mass) in layer {
            let (members, g) = match green.get(&mask) {
                Some(x) => x,
                None => {
                    let members: Vec<VertexId> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                    let k = members.len();
                    let a = (0..k)
                        .map(|i| {
                            (0..k)
                                .map(|j| {
                                    let id = if i == j { S::one() } else { S::zero() };
                                    id - m.get(members[i], members[j]).clone()
                                })
                                .collect()
                        })
                        .collect();
                    let g = linalg::inverse(a).ok_or(Error::Singular)?;
                    green.entry(mask).or_insert((members, g))
                }
            };
            let ui = members.iter().position(|&x| x == u).expect("current vertex is visited");
            for (j, &exit_from) in members.iter().enumerate() {
                let occupation = &g[ui][j];
                if occupation.is_zero() {
                    continue;
                }
                for &v in m.neighbors(exit_from) {
                    if mask >> v & 1 == 1 {
                        continue;
                    }
                    let p = mass.clone() * occupation.clone() * m.get(exit_from, v).clone();
                    let mut grown = parent.clone();
                    grown[v] = Some(exit_from);
                    let key = (mask | 1 << v, v, grown);
                    let acc = next_layer.remove(&key).unwrap_or_else(S::zero);
                    next_layer.insert(key, acc + p);
                }
            }
        }
        layer = next_layer;
    }

    let mut probs: BTreeMap<RootedTree, S> = BTreeMap::new();
    for ((mask, _, parent), mass) in layer {
        debug_assert_eq!(mask, full);
        let t = RootedTree::new(r, parent)?;
        let acc = probs.remove(&t).unwrap_or_else(S::zero);
        probs.insert(t, acc + mass);
    }
    Ok(ExactDistribution {
        root: Some(r),
        probs,
        normalizer: S::one(),
    })
}

/// `P(t) = prod Mrev_e / det(I - Mrev^{(r)})` over the spanning trees
/// rooted at `r`.
pub fn theorem_distribution<S: Scalar>(
    m: &MarkovKernel<S>,
    r: VertexId,
) -> Result<ExactDistribution<S>> {
    let mrev = analysis::reversed_kernel(m)?;
    let ensemble = TreeEnsemble::enumerate(m, r, &mrev)?;
    let det = analysis::principal_minor_det(&mrev, r);
    Ok(normalize(Some(r), ensemble, det))
}

/// `P(t) ∝ prod M_e` at root `r`, the law of the reversible case applied
/// to the kernel itself.
pub fn forward_weight_distribution<S: Scalar>(
    m: &MarkovKernel<S>,
    r: VertexId,
) -> Result<ExactDistribution<S>> {
    let ensemble = TreeEnsemble::enumerate(m, r, m)?;
    let total = ensemble.total.clone();
    Ok(normalize(Some(r), ensemble, total))
}

fn normalize<S: Scalar>(
    root: Option<VertexId>,
    ensemble: TreeEnsemble<S>,
    normalizer: S,
) -> ExactDistribution<S> {
    let probs = ensemble
        .trees
        .into_iter()
        .zip(ensemble.weights)
        .map(|(t, w)| (t, w / normalizer.clone()))
        .collect();
    ExactDistribution {
        root,
        probs,
        normalizer,
    }
}

/// Joint law of (tree, root) for the walk started from stationarity:
/// `P(t, r) = prod Mrev_e / sum_x det(I - M^{(x)})`.
pub fn stationary_joint_distribution<S: Scalar>(m: &MarkovKernel<S>) -> Result<ExactDistribution<S>> {
    let n = m.n();
    if n > MAX_JOINT_N {
        return Err(Error::TooLarge { n, max: MAX_JOINT_N });
    }
    let mrev = analysis::reversed_kernel(m)?;
    let normalizer = (0..n)
        .map(|x| analysis::principal_minor_det(m, x))
        .fold(S::zero(), |a, b| a + b);
    let mut probs = BTreeMap::new();
    for r in 0..n {
        let ensemble = TreeEnsemble::enumerate(m, r, &mrev)?;
        for (t, w) in ensemble.trees.into_iter().zip(ensemble.weights) {
            probs.insert(t, w / normalizer.clone());
        }
    }
    Ok(ExactDistribution {
        root: None,
        probs,
        normalizer,
    })
}

/// Pearson statistic over merged cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub tree: String,
    pub expected: f64,
    pub observed: f64,
    pub count: Option<u64>,
}

/// Distance between an exact law and a sample (or a second exact law).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub tv_distance: f64,
    pub max_abs_diff: String,
    pub samples: Option<u64>,
    /// Sampled trees the exact law gives probability zero.
    pub outside_support: u64,
    pub chi_square: Option<ChiSquareTest>,
    pub rows: Vec<ComparisonRow>,
}

/// Pearson test with cells sorted by expected count and merged until each
/// expects at least 5; a short remainder joins the last bin. Observations
/// outside the support force `p = 0`.
pub fn chi_square_test(expected: &[f64], observed: &[u64], outside_support: u64) -> Option<ChiSquareTest> {
    let total: u64 = observed.iter().sum::<u64>() + outside_support;
    let mut cells: Vec<(f64, u64)> = expected
        .iter()
        .map(|p| p * total as f64)
        .zip(observed.iter().copied())
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut bins: Vec<(f64, u64)> = Vec::new();
    let mut cur = (0.0, 0u64);
    for (e, o) in cells {
        cur.0 += e;
        cur.1 += o;
        if cur.0 >= 5.0 {
            bins.push(cur);
            cur = (0.0, 0);
        }
    }
    if cur.0 > 0.0 || cur.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += cur.0;
                last.1 += cur.1;
            }
            None => bins.push(cur),
        }
    }
    if bins.len() < 2 {
        return None;
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(e, o)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = bins.len() - 1;
    let p_value = if outside_support > 0 {
        0.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive degrees of freedom")
            .sf(statistic)
    };
    Some(ChiSquareTest {
        statistic,
        dof,
        p_value,
    })
}

/// Compares a sample batch against an exact law.
pub fn compare_batch<S: Scalar>(
    expected: &ExactDistribution<S>,
    batch: &SampleBatch,
    labels: &[String],
) -> Result<ComparisonReport> {
    if batch.total == 0 {
        return Err(Error::Compare("the batch is empty".into()));
    }
    let n = batch.total as f64;
    let mut rows = Vec::new();
    let mut exp = Vec::new();
    let mut obs = Vec::new();
    for (t, p) in &expected.probs {
        let c = batch.counts.get(t).copied().unwrap_or(0);
        exp.push(p.to_f64());
        obs.push(c);
        rows.push(ComparisonRow {
            tree: t.to_canonical(labels),
            expected: p.to_f64(),
            observed: c as f64 / n,
            count: Some(c),
        });
    }
    let mut outside = 0;
    for (t, &c) in &batch.counts {
        if !expected.probs.contains_key(t) {
            outside += c;
            rows.push(ComparisonRow {
                tree: t.to_canonical(labels),
                expected: 0.0,
                observed: c as f64 / n,
                count: Some(c),
            });
        }
    }
    rows.sort_by(|a, b| a.tree.cmp(&b.tree));
    let diffs = rows.iter().map(|r| (r.expected - r.observed).abs());
    let tv = 0.5 * diffs.clone().sum::<f64>();
    let max = diffs.fold(0.0, f64::max);
    Ok(ComparisonReport {
        tv_distance: tv,
        max_abs_diff: max.to_string(),
        samples: Some(batch.total),
        outside_support: outside,
        chi_square: chi_square_test(&exp, &obs, outside),
        rows,
    })
}

/// `max |p - q|` over the union of both supports, in the scalar's own
/// arithmetic.
pub fn max_abs_diff<S: Scalar>(a: &ExactDistribution<S>, b: &ExactDistribution<S>) -> S {
    union_keys(a, b)
        .map(|t| (a.get(t) - b.get(t)).abs_value())
        .fold(S::zero(), |x, y| if y > x { y } else { x })
}

/// Total variation distance in the scalar's own arithmetic.
pub fn tv_distance<S: Scalar>(a: &ExactDistribution<S>, b: &ExactDistribution<S>) -> S {
    let sum = union_keys(a, b)
        .map(|t| (a.get(t) - b.get(t)).abs_value())
        .fold(S::zero(), |x, y| x + y);
    sum / S::from_u64(2)
}

fn union_keys<'a, S>(
    a: &'a ExactDistribution<S>,
    b: &'a ExactDistribution<S>,
) -> impl Iterator<Item = &'a RootedTree> + Clone {
    let mut keys: Vec<&RootedTree> = a.probs.keys().chain(b.probs.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
}

/// Compares two exact laws.
pub fn compare_exact<S: Scalar>(
    expected: &ExactDistribution<S>,
    other: &ExactDistribution<S>,
    labels: &[String],
) -> ComparisonReport {
    let rows = union_keys(expected, other)
        .map(|t| ComparisonRow {
            tree: t.to_canonical(labels),
            expected: expected.get(t).to_f64(),
            observed: other.get(t).to_f64(),
            count: None,
        })
        .collect();
    ComparisonReport {
        tv_distance: tv_distance(expected, other).to_f64(),
        max_abs_diff: max_abs_diff(expected, other).to_string(),
        samples: None,
        outside_support: 0,
        chi_square: None,
        rows,
    }
}

/// Total variation distance between two batches' empirical laws.
pub fn tv_between_batches(a: &SampleBatch, b: &SampleBatch) -> Result<f64> {
    if a.total == 0 || b.total == 0 {
        return Err(Error::Compare("a batch is empty".into()));
    }
    let mut keys: Vec<&RootedTree> = a.counts.keys().chain(b.counts.keys()).collect();
    keys.sort();
    keys.dedup();
    Ok(0.5
        * keys
            .into_iter()
            .map(|t| (a.frequency(t) - b.frequency(t)).abs())
            .sum::<f64>())
}

/// TV distance between two batches after projecting each rooted tree onto its
/// undirected edge set.
pub fn tv_between_batches_unrooted(a: &SampleBatch, b: &SampleBatch) -> Result<f64> {
    if a.total == 0 || b.total == 0 {
        return Err(Error::Compare("a batch is empty".into()));
    }
    let project = |batch: &SampleBatch| {
        let mut m: BTreeMap<Vec<(VertexId, VertexId)>, u64> = BTreeMap::new();
        for (t, c) in &batch.counts {
            *m.entry(t.undirected_edges()).or_insert(0) += c;
        }
        m
    };
    let (pa, pb) = (project(a), project(b));
    let (na, nb) = (a.total as f64, b.total as f64);
    let mut sum = 0.0;
    for (k, &ca) in &pa {
        sum += (ca as f64 / na - pb.get(k).copied().unwrap_or(0) as f64 / nb).abs();
    }
    for (k, &cb) in &pb {
        if !pa.contains_key(k) {
            sum += cb as f64 / nb;
        }
    }
    Ok(0.5 * sum)
}

/// TV distance between empirical and exact laws, as a plain number.
pub fn tv_to_exact<S: Scalar>(expected: &ExactDistribution<S>, batch: &SampleBatch) -> Result<f64> {
    if batch.total == 0 {
        return Err(Error::Compare("the batch is empty".into()));
    }
    let mut sum = 0.0;
    for (t, p) in &expected.probs {
        sum += (p.to_f64() - batch.frequency(t)).abs();
    }
    for (t, &c) in &batch.counts {
        if !expected.probs.contains_key(t) {
            sum += c as f64 / batch.total as f64;
        }
    }
    Ok(sum / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{random_rational_kernel, RandomKernelOptions};
    use crate::sampling::RandomSource;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn three_state() -> MarkovKernel<Rational> {
        MarkovKernel::from_rows(vec![
            vec![q(0, 1), q(1, 3), q(2, 3)],
            vec![q(1, 5), q(0, 1), q(4, 5)],
            vec![q(1, 7), q(6, 7), q(0, 1)],
        ])
        .unwrap()
    }

    fn k3_trees() -> [RootedTree; 3] {
        [
            RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap(),
            RootedTree::from_edges(3, 0, &[(1, 0), (2, 1)]).unwrap(),
            RootedTree::from_edges(3, 0, &[(1, 2), (2, 0)]).unwrap(),
        ]
    }

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn dp_on_two_vertices() {
        let m = MarkovKernel::from_rows(vec![vec![q(1, 2), q(1, 2)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let d = exact_fet_distribution(&m, 0).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.total(), q(1, 1));
    }

    #[test]
    fn dp_matches_closed_form_on_k3() {
        let m = three_state();
        let d = exact_fet_distribution(&m, 0).unwrap();
        let [a, b, c] = k3_trees();
        assert_eq!(d.get(&a), q(11, 133));
        assert_eq!(d.get(&b), q(38, 133));
        assert_eq!(d.get(&c), q(84, 133));
        for r in 0..3 {
            let dp = exact_fet_distribution(&m, r).unwrap();
            let th = theorem_distribution(&m, r).unwrap();
            assert_eq!(max_abs_diff(&dp, &th), q(0, 1));
            assert_eq!(dp.total(), q(1, 1));
            assert_eq!(th.total(), q(1, 1));
        }
    }

    #[test]
    fn theorem_values_on_k3() {
        let th = theorem_distribution(&three_state(), 0).unwrap();
        assert_eq!(th.normalizer, q(11, 35));
        let probs: Vec<_> = k3_trees().iter().map(|t| th.get(t)).collect();
        assert_eq!(probs, vec![q(121, 1463), q(418, 1463), q(924, 1463)]);
    }

    #[test]
    fn forward_weights_differ_on_k3() {
        let m = three_state();
        let fw = forward_weight_distribution(&m, 0).unwrap();
        let probs: Vec<_> = k3_trees().iter().map(|t| fw.get(t)).collect();
        assert_eq!(probs, vec![q(1, 11), q(6, 11), q(4, 11)]);
        let th = theorem_distribution(&m, 0).unwrap();
        let report = compare_exact(&th, &fw, &labels(3));
        assert!((report.tv_distance - 0.2680).abs() < 0.0005);
    }

    #[test]
    fn reversible_kernels_agree_with_forward_weights() {
        let cyc = MarkovKernel::from_rows(vec![
            vec![q(0, 1), q(1, 2), q(1, 2)],
            vec![q(1, 2), q(0, 1), q(1, 2)],
            vec![q(1, 2), q(1, 2), q(0, 1)],
        ])
        .unwrap();
        for r in 0..3 {
            let dp = exact_fet_distribution(&cyc, r).unwrap();
            assert_eq!(max_abs_diff(&dp, &forward_weight_distribution(&cyc, r).unwrap()), q(0, 1));
            assert_eq!(max_abs_diff(&dp, &theorem_distribution(&cyc, r).unwrap()), q(0, 1));
        }
    }

    #[test]
    fn tree_support_gives_a_point_mass() {
        let path3 = MarkovKernel::from_rows(vec![
            vec![q(1, 2), q(1, 2), q(0, 1)],
            vec![q(1, 3), q(1, 3), q(1, 3)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
        ])
        .unwrap();
        let th = theorem_distribution(&path3, 2).unwrap();
        assert_eq!(th.len(), 1);
        assert_eq!(th.total(), q(1, 1));
        assert_eq!(exact_fet_distribution(&path3, 2).unwrap().probs, th.probs);
    }

    #[test]
    fn oracle_agrees_on_random_kernels() {
        let mut rng = RandomSource::new(53, 0).rng();
        for i in 0..20 {
            let n = 2 + i % 3;
            let m = random_rational_kernel(n, &mut rng, RandomKernelOptions::default());
            for r in 0..n {
                let dp = exact_fet_distribution(&m, r).unwrap();
                let th = theorem_distribution(&m, r).unwrap();
                assert_eq!(max_abs_diff(&dp, &th), q(0, 1), "kernel {i}, root {r}");
            }
        }
    }

    #[test]
    fn joint_law() {
        let m = three_state();
        let joint = stationary_joint_distribution(&m).unwrap();
        assert_eq!(joint.len(), 9);
        assert_eq!(joint.total(), q(1, 1));
        assert_eq!(joint.root_marginal(3), vec![q(33, 226), q(95, 226), q(98, 226)]);
        let rho = analysis::stationary_distribution(&m).unwrap();
        for r in 0..3 {
            let th = theorem_distribution(&m, r).unwrap();
            for (t, p) in &th.probs {
                assert_eq!(joint.get(t), rho.get(r).clone() * p.clone());
            }
        }
        let two = MarkovKernel::from_rows(vec![vec![q(1, 3), q(2, 3)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let joint = stationary_joint_distribution(&two).unwrap();
        let rho = analysis::stationary_distribution(&two).unwrap();
        assert_eq!(joint.root_marginal(2), rho.probs().to_vec());
    }

    #[test]
    fn guards() {
        let mut rng = RandomSource::new(0, 0).rng();
        let m = random_rational_kernel(6, &mut rng, RandomKernelOptions::default());
        assert_eq!(
            exact_fet_distribution(&m, 0),
            Err(Error::TooLarge { n: 6, max: MAX_DP_N })
        );
        let m = random_rational_kernel(7, &mut rng, RandomKernelOptions::default());
        assert!(stationary_joint_distribution(&m).is_err());
    }

    #[test]
    fn comparison_of_a_law_with_itself() {
        let th = theorem_distribution(&three_state(), 0).unwrap();
        let r = compare_exact(&th, &th, &labels(3));
        assert_eq!(r.tv_distance, 0.0);
        assert_eq!(r.max_abs_diff, "0");
    }

    #[test]
    fn batch_comparison() {
        let th = theorem_distribution(&three_state(), 0).unwrap();
        let [a, b, c] = k3_trees();
        let mut batch = SampleBatch {
            counts: [(a, 110), (b, 380), (c, 510)].into_iter().collect(),
            total: 1000,
            seed: 0,
        };
        let r = compare_batch(&th, &batch, &labels(3)).unwrap();
        assert!(r.tv_distance > 0.1 && r.tv_distance < 0.15);
        let chi = r.chi_square.unwrap();
        assert_eq!(chi.dof, 2);
        assert!(chi.p_value < 1e-6);
        assert_eq!(tv_to_exact(&th, &batch).unwrap(), r.tv_distance);

        let stray = RootedTree::from_edges(3, 1, &[(0, 1), (2, 1)]).unwrap();
        batch.counts.insert(stray, 10);
        batch.total += 10;
        let r = compare_batch(&th, &batch, &labels(3)).unwrap();
        assert_eq!(r.outside_support, 10);
        assert_eq!(r.chi_square.unwrap().p_value, 0.0);

        let empty = SampleBatch::default();
        assert!(compare_batch(&th, &empty, &labels(3)).is_err());
    }

    #[test]
    fn chi_square_merges_small_cells() {
        // Expected counts 1, 2, 3, 94: the three small cells merge into one bin.
        let test = chi_square_test(&[0.01, 0.02, 0.03, 0.94], &[1, 2, 3, 94], 0).unwrap();
        assert_eq!(test.dof, 1);
        assert!(test.statistic.abs() < 1e-12);
        assert!((test.p_value - 1.0).abs() < 1e-12);
        assert!(chi_square_test(&[1.0], &[100], 0).is_none());
    }

    #[test]
    fn tv_between_identical_batches_is_zero() {
        let [a, b, _] = k3_trees();
        let x = SampleBatch {
            counts: [(a.clone(), 3), (b.clone(), 1)].into_iter().collect(),
            total: 4,
            seed: 0,
        };
        assert_eq!(tv_between_batches(&x, &x).unwrap(), 0.0);
        let y = SampleBatch {
            counts: [(a, 1), (b, 3)].into_iter().collect(),
            total: 4,
            seed: 1,
        };
        assert!((tv_between_batches(&x, &y).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unrooted_tv_ignores_root_and_orientation() {
        let a = RootedTree::from_edges(3, 0, &[(1, 0), (2, 1)]).unwrap();
        let b = RootedTree::from_edges(3, 2, &[(0, 1), (1, 2)]).unwrap();
        let c = RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap();
        let batch = |t: &RootedTree| SampleBatch {
            counts: BTreeMap::from([(t.clone(), 4)]),
            total: 4,
            seed: 0,
        };
        assert_eq!(tv_between_batches(&batch(&a), &batch(&b)).unwrap(), 1.0);
        assert_eq!(tv_between_batches_unrooted(&batch(&a), &batch(&b)).unwrap(), 0.0);
        assert_eq!(tv_between_batches_unrooted(&batch(&a), &batch(&c)).unwrap(), 1.0);
    }
}
