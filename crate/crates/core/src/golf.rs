//! Golf sequences: balls started in turn from `S_1, S_2, ...` walk until
//! they drop into a hole nobody has filled yet. Their heap encoding, the
//! split of a truncated path heap into golf trajectories plus a heap of
//! cycles, and the truncated first-entrance probability built on it.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Distribution};
use crate::error::{Error, Result};
use crate::heaps::{family_weight, HeapCollection, PassportFamily};
use crate::kernel::{MarkovKernel, VertexId};
use crate::path::Path;
use crate::sampling::StepTable;
use crate::scalar::Scalar;
use crate::tree::RootedTree;

/// Holes and the ordered starting vertices of the balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GolfConfig {
    n: usize,
    holes: BTreeSet<VertexId>,
    starts: Vec<VertexId>,
}

impl GolfConfig {
    /// Starts must avoid the holes, and there may not be more balls than
    /// holes.
    pub fn new(n: usize, holes: impl IntoIterator<Item = VertexId>, starts: Vec<VertexId>) -> Result<Self> {
        let holes: BTreeSet<VertexId> = holes.into_iter().collect();
        if let Some(&v) = holes.iter().chain(&starts).find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange(v));
        }
        if let Some(s) = starts.iter().find(|s| holes.contains(s)) {
            return Err(Error::GolfConfig(format!("start {s} is a hole")));
        }
        if starts.len() > holes.len() {
            return Err(Error::GolfConfig(format!(
                "{} balls but only {} holes",
                starts.len(),
                holes.len()
            )));
        }
        Ok(GolfConfig { n, holes, starts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn holes(&self) -> &BTreeSet<VertexId> {
        &self.holes
    }

    pub fn starts(&self) -> &[VertexId] {
        &self.starts
    }

    pub fn balls(&self) -> usize {
        self.starts.len()
    }

    /// `Nb_u`: how many balls start at `u`.
    pub fn start_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for &s in &self.starts {
            c[s] += 1;
        }
        c
    }

    /// Collections with passport `out = n_u + Nb_u`,
    /// `in = n_u + [u is a hole other than f]`, free of edges at `f`.
    pub fn family(&self, f: VertexId) -> Result<PassportFamily> {
        if !self.holes.contains(&f) {
            return Err(Error::GolfConfig(format!("{f} is not a hole")));
        }
        if self.holes.len() != self.balls() + 1 {
            return Err(Error::GolfConfig(format!(
                "{} holes for {} balls, exactly one hole must stay free",
                self.holes.len(),
                self.balls()
            )));
        }
        Ok(PassportFamily {
            out_base: self.start_counts(),
            in_base: (0..self.n)
                .map(|u| usize::from(u != f && self.holes.contains(&u)))
                .collect(),
            excluded: Some(f),
        })
    }
}

/// Holes are the leaves of `t`; each internal vertex `u`, in index order,
/// starts `deg(u) - 1` balls.
pub fn golf_config_for_tree(t: &RootedTree) -> Result<GolfConfig> {
    if !t.is_spanning() || t.n() < 2 {
        return Err(Error::InvalidTree(
            "golf configuration needs a spanning tree on at least two vertices".into(),
        ));
    }
    let deg = t.child_counts();
    let starts = (0..t.n())
        .flat_map(|u| std::iter::repeat(u).take(deg[u].saturating_sub(1)))
        .collect();
    let config = GolfConfig::new(t.n(), t.leaves(), starts)?;
    debug_assert_eq!(config.balls() + 1, config.holes.len());
    Ok(config)
}

/// Trajectories of the balls, in play order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GolfSequence {
    pub paths: Vec<Path>,
}

impl GolfSequence {
    /// Holes captured by each ball.
    pub fn finals(&self) -> Vec<VertexId> {
        self.paths.iter().map(Path::last).collect()
    }

    pub fn to_report(&self, config: &GolfConfig, labels: &[String]) -> GolfReport {
        let l = |v: &VertexId| labels[*v].clone();
        GolfReport {
            holes: config.holes.iter().map(l).collect(),
            starts: config.starts.iter().map(l).collect(),
            paths: self
                .paths
                .iter()
                .map(|p| p.vertices().iter().map(l).collect())
                .collect(),
            free: free_hole(self, config).ok().map(|f| labels[f].clone()),
        }
    }
}

/// Serialized golf sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GolfReport {
    pub holes: Vec<String>,
    pub starts: Vec<String>,
    pub paths: Vec<Vec<String>>,
    pub free: Option<String>,
}

/// Ball `i` starts at `S_i` and stops exactly when it first reaches a hole
/// not captured by an earlier ball; captured holes are ordinary vertices
/// afterwards.
pub fn is_golf_sequence(seq: &GolfSequence, config: &GolfConfig) -> bool {
    if seq.paths.len() != config.balls() {
        return false;
    }
    let mut free = config.holes.clone();
    for (path, &s) in seq.paths.iter().zip(&config.starts) {
        let v = path.vertices();
        if v[0] != s || v.len() < 2 || v.iter().any(|&x| x >= config.n) {
            return false;
        }
        if v[..v.len() - 1].iter().any(|x| free.contains(x)) {
            return false;
        }
        if !free.remove(&path.last()) {
            return false;
        }
    }
    true
}

/// Plays the balls in order with the chain given by `mrev_table` (the step
/// table of the reversed kernel).
pub fn stochastic_golf<R: Rng + ?Sized>(
    mrev_table: &StepTable,
    config: &GolfConfig,
    rng: &mut R,
) -> Result<GolfSequence> {
    let mut free = vec![false; config.n];
    for &h in &config.holes {
        free[h] = true;
    }
    let mut paths = Vec::with_capacity(config.balls());
    let mut steps = 0u64;
    for &s in &config.starts {
        let mut walk = vec![s];
        let mut cur = s;
        while !free[cur] {
            if steps == mrev_table.budget() {
                return Err(Error::StepBudget(mrev_table.budget()));
            }
            cur = mrev_table.step(cur, rng);
            steps += 1;
            walk.push(cur);
        }
        free[cur] = false;
        paths.push(Path::new(walk)?);
    }
    Ok(GolfSequence { paths })
}

/// The one hole left empty when there is one hole more than balls.
pub fn free_hole(seq: &GolfSequence, config: &GolfConfig) -> Result<VertexId> {
    if config.holes.len() != config.balls() + 1 {
        return Err(Error::GolfConfig(format!(
            "{} holes for {} balls, expected exactly one spare hole",
            config.holes.len(),
            config.balls()
        )));
    }
    let finals: BTreeSet<VertexId> = seq.finals().into_iter().collect();
    let mut left = config.holes.iter().filter(|h| !finals.contains(h));
    match (left.next(), left.next()) {
        (Some(&f), None) => Ok(f),
        _ => Err(Error::GolfConfig("sequence is not valid for its configuration".into())),
    }
}

/// Each step `w_i -> w_{i+1}` of each ball, in play order, stores the edge
/// `(w_i, w_{i+1})` on top of `H_{w_i}`. The weight under `K` is the
/// product of the balls' path probabilities under `K`.
pub fn golf_heap_encode(seq: &GolfSequence, n: usize) -> Result<HeapCollection> {
    let mut h = HeapCollection::empty(n);
    for p in &seq.paths {
        if let Some(&v) = p.vertices().iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange(v));
        }
        for w in p.vertices().windows(2) {
            h.push(w[0], w[1]);
        }
    }
    Ok(h)
}

/// Replays the balls against `h`, consuming bottom edges, and returns the
/// trajectories together with what is left of each heap.
fn replay(h: &HeapCollection, config: &GolfConfig) -> Result<(GolfSequence, HeapCollection)> {
    if h.n() != config.n {
        return Err(Error::VertexOutOfRange(h.n().max(config.n) - 1));
    }
    let mut next = vec![0usize; config.n];
    let mut free = vec![false; config.n];
    for &x in &config.holes {
        free[x] = true;
    }
    let mut paths = Vec::with_capacity(config.balls());
    for (ball, &s) in config.starts.iter().enumerate() {
        let mut walk = vec![s];
        let mut cur = s;
        while !free[cur] {
            let heap = h.heap(cur);
            let Some(&v) = heap.get(next[cur]) else {
                return Err(Error::NotAPathImage(format!(
                    "ball {} is stuck at vertex {cur}",
                    ball + 1
                )));
            };
            next[cur] += 1;
            walk.push(v);
            cur = v;
        }
        free[cur] = false;
        paths.push(Path::new(walk)?);
    }
    let rest = HeapCollection::from_heaps(
        (0..config.n).map(|u| h.heap(u)[next[u]..].to_vec()).collect(),
    )?;
    Ok((GolfSequence { paths }, rest))
}

/// Inverse of [`golf_heap_encode`] for a fixed configuration.
pub fn golf_heap_decode(h: &HeapCollection, config: &GolfConfig) -> Result<GolfSequence> {
    let (seq, rest) = replay(h, config)?;
    if let Some(u) = (0..rest.n()).find(|&u| !rest.heap(u).is_empty()) {
        return Err(Error::NotAPathImage(format!(
            "{} edges of vertex {u} are left over",
            rest.heap(u).len()
        )));
    }
    Ok(seq)
}

/// Split of a collection into golf trajectories and a heap of cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiWitness {
    pub golf: GolfSequence,
    pub golf_part: HeapCollection,
    pub cycle_part: HeapCollection,
}

impl XiWitness {
    /// `golf_part ⊕ cycle_part`.
    pub fn recompose(&self) -> HeapCollection {
        self.golf_part.concat(&self.cycle_part)
    }
}

/// Follows the ball out of `S_1`, then `S_2`, ... through the bottom edges
/// of `h`; the edges not used by any ball form a heap of cycles avoiding
/// `f`. `h` must lie in [`GolfConfig::family`] for `f`.
pub fn decompose_truncated_heap(
    h: &HeapCollection,
    config: &GolfConfig,
    f: VertexId,
) -> Result<XiWitness> {
    let family = config.family(f)?;
    if let Some(why) = family.mismatch(&h.passport()) {
        return Err(Error::PassportMismatch(why));
    }
    let (golf, cycle_part) = replay(h, config)?;
    if free_hole(&golf, config)? != f {
        return Err(Error::PassportMismatch(format!("hole {f} was captured")));
    }
    cycle_part.check_balanced()?;
    let golf_part = golf_heap_encode(&golf, config.n)?;
    Ok(XiWitness {
        golf,
        golf_part,
        cycle_part,
    })
}

/// First-entrance probability of `t` from its root, summing the truncated
/// heap family of every free leaf over collections with at most
/// `max_edges` edges:
/// `prod Mrev_e * sum_f rho_f Weight(family(t, f)) / rho_root`.
/// Nondecreasing in `max_edges`.
pub fn truncated_fet_probability<S: Scalar>(
    m: &MarkovKernel<S>,
    t: &RootedTree,
    max_edges: usize,
) -> Result<S> {
    let rho = analysis::stationary_distribution(m)?;
    let mrev = analysis::reversed_kernel_with(m, &rho)?;
    truncated_fet_probability_with(&mrev, &rho, t, max_edges)
}

pub fn truncated_fet_probability_with<S: Scalar>(
    mrev: &MarkovKernel<S>,
    rho: &Distribution<S>,
    t: &RootedTree,
    max_edges: usize,
) -> Result<S> {
    if t.n() != mrev.n() || !t.is_spanning() {
        return Err(Error::InvalidTree("tree must span the kernel's vertices".into()));
    }
    if t.n() == 1 {
        return Ok(S::one());
    }
    let mut sum = S::zero();
    for f in t.leaves() {
        let w = family_weight(mrev, &PassportFamily::xi(t, f)?, max_edges)?;
        sum = sum + rho.get(f).clone() * w;
    }
    Ok(analysis::tree_weight(t, mrev)? * sum / rho.get(t.root()).clone())
}
