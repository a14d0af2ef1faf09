//! Collections of heaps: one ordered edge list per vertex. Paths encode into
//! collections (last step first popped), balanced collections are heaps of
//! cycles, and signed sums over disjoint cycle families invert them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, VertexId};
use crate::path::Path;
use crate::scalar::Scalar;
use crate::tree::RootedTree;

/// Largest vertex count for the exhaustive cycle and heap enumerations.
pub const MAX_HEAP_ENUMERATION_N: usize = 6;
/// Largest total edge count for heap-of-cycles enumeration.
pub const MAX_HEAP_EDGES: usize = 64;
/// Largest vertex count for [`trivial_signed_sum`].
pub const MAX_TRIVIAL_N: usize = 8;

/// `H_u` is the ordered list of targets of the edges stored under `u`;
/// index 0 is the first (bottom) edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeapCollection {
    heaps: Vec<Vec<VertexId>>,
}

/// Out- and in-degree counts of a collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passport {
    pub out: Vec<usize>,
    pub inn: Vec<usize>,
}

impl Passport {
    /// First vertex where out and in differ.
    pub fn first_imbalance(&self) -> Option<VertexId> {
        (0..self.out.len()).find(|&u| self.out[u] != self.inn[u])
    }

    pub fn is_balanced(&self) -> bool {
        self.first_imbalance().is_none()
    }

    pub fn add(&self, other: &Passport) -> Passport {
        Passport {
            out: self.out.iter().zip(&other.out).map(|(a, b)| a + b).collect(),
            inn: self.inn.iter().zip(&other.inn).map(|(a, b)| a + b).collect(),
        }
    }
}

impl HeapCollection {
    pub fn empty(n: usize) -> Self {
        HeapCollection {
            heaps: vec![Vec::new(); n],
        }
    }

    /// Builds a collection from explicit target lists.
    pub fn from_heaps(heaps: Vec<Vec<VertexId>>) -> Result<Self> {
        let n = heaps.len();
        if let Some(&v) = heaps.iter().flatten().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange(v));
        }
        Ok(HeapCollection { heaps })
    }

    pub fn n(&self) -> usize {
        self.heaps.len()
    }

    pub fn heap(&self, u: VertexId) -> &[VertexId] {
        &self.heaps[u]
    }

    pub fn heaps(&self) -> &[Vec<VertexId>] {
        &self.heaps
    }

    /// Appends the edge `(u, target)` on top of `H_u`.
    pub fn push(&mut self, u: VertexId, target: VertexId) {
        self.heaps[u].push(target);
    }

    pub fn edge_count(&self) -> usize {
        self.heaps.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.heaps.iter().all(Vec::is_empty)
    }

    /// Edges `(u, target)` grouped by source, in heap order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.heaps
            .iter()
            .enumerate()
            .flat_map(|(u, h)| h.iter().map(move |&v| (u, v)))
    }

    pub fn passport(&self) -> Passport {
        let n = self.n();
        let mut inn = vec![0; n];
        for (_, v) in self.edges() {
            inn[v] += 1;
        }
        Passport {
            out: self.heaps.iter().map(Vec::len).collect(),
            inn,
        }
    }

    pub fn check_balanced(&self) -> Result<()> {
        let p = self.passport();
        match p.first_imbalance() {
            Some(vertex) => Err(Error::Unbalanced {
                vertex,
                out: p.out[vertex],
                inn: p.inn[vertex],
            }),
            None => Ok(()),
        }
    }

    /// `prod K[u][target]` over all stored edges.
    pub fn weight<S: Scalar>(&self, k: &MarkovKernel<S>) -> Result<S> {
        if self.n() != k.n() {
            return Err(Error::VertexOutOfRange(self.n().max(k.n()) - 1));
        }
        let mut acc = S::one();
        for (u, v) in self.edges() {
            let x = k.get(u, v);
            if x.is_zero() {
                return Err(Error::Unsupported { from: u, to: v });
            }
            acc = acc * x.clone();
        }
        Ok(acc)
    }

    /// Per-vertex concatenation `self ⊕ other` (other's edges on top).
    pub fn concat(&self, other: &HeapCollection) -> HeapCollection {
        let heaps = self
            .heaps
            .iter()
            .zip(&other.heaps)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        HeapCollection { heaps }
    }

    /// Removes `prefix` from the bottom of every heap.
    pub fn prefix_remove(&self, prefix: &HeapCollection) -> Result<HeapCollection> {
        let mut heaps = Vec::with_capacity(self.n());
        for (vertex, (h, p)) in self.heaps.iter().zip(&prefix.heaps).enumerate() {
            if !h.starts_with(p) {
                return Err(Error::NotAPrefix { vertex });
            }
            heaps.push(h[p.len()..].to_vec());
        }
        Ok(HeapCollection { heaps })
    }

    /// Label-keyed form used in JSON output.
    pub fn to_labeled(&self, labels: &[String]) -> BTreeMap<String, Vec<String>> {
        self.heaps
            .iter()
            .enumerate()
            .map(|(u, h)| {
                (
                    labels[u].clone(),
                    h.iter().map(|&v| labels[v].clone()).collect(),
                )
            })
            .collect()
    }

    /// Inverse of [`HeapCollection::to_labeled`]; missing labels mean empty
    /// heaps and every edge must lie in the kernel support.
    pub fn from_labeled<S: Scalar>(
        map: &BTreeMap<String, Vec<String>>,
        k: &MarkovKernel<S>,
    ) -> Result<Self> {
        let mut h = HeapCollection::empty(k.n());
        for (label, targets) in map {
            let u = k.index_of(label)?;
            for t in targets {
                let v = k.index_of(t)?;
                if !k.in_support(u, v) {
                    return Err(Error::Unsupported { from: u, to: v });
                }
                h.push(u, v);
            }
        }
        Ok(h)
    }
}

/// Heap of a path: every step `w_j -> w_{j+1}` stores the edge
/// `(w_{j+1}, w_j)` on top of `H_{w_{j+1}}`.
pub fn heap_encode(path: &Path, n: usize) -> Result<HeapCollection> {
    if let Some(&v) = path.vertices().iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange(v));
    }
    let mut h = HeapCollection::empty(n);
    for w in path.vertices().windows(2) {
        h.push(w[1], w[0]);
    }
    Ok(h)
}

/// Recovers the path from its heap by walking back from the endpoint and
/// popping the top edge of each heap. `start_hint` fixes the endpoint of a
/// balanced collection (a closed path or a single vertex).
pub fn heap_decode(h: &HeapCollection, start_hint: Option<VertexId>) -> Result<Path> {
    let n = h.n();
    let p = h.passport();
    let mut end = None;
    let mut begin = None;
    for u in 0..n {
        match p.out[u] as i64 - p.inn[u] as i64 {
            0 => {}
            1 if end.is_none() => end = Some(u),
            -1 if begin.is_none() => begin = Some(u),
            _ => {
                return Err(Error::NotAPathImage(format!(
                    "vertex {u} has out {} and in {}",
                    p.out[u], p.inn[u]
                )))
            }
        }
    }
    let end = match (end, begin) {
        (Some(e), Some(_)) => e,
        (None, None) => match start_hint {
            Some(s) if s < n => s,
            Some(s) => return Err(Error::VertexOutOfRange(s)),
            None => {
                return Err(Error::NotAPathImage(
                    "balanced collection needs a start vertex".into(),
                ))
            }
        },
        _ => {
            return Err(Error::NotAPathImage(
                "unmatched endpoint imbalance".into(),
            ))
        }
    };
    let mut remaining: Vec<usize> = p.out.clone();
    let mut rev = vec![end];
    let mut cur = end;
    while remaining[cur] > 0 {
        remaining[cur] -= 1;
        cur = h.heaps[cur][remaining[cur]];
        rev.push(cur);
    }
    if let Some(u) = (0..n).find(|&u| remaining[u] > 0) {
        return Err(Error::NotAPathImage(format!(
            "{} edges of vertex {u} are unreachable",
            remaining[u]
        )));
    }
    rev.reverse();
    Path::new(rev)
}

/// One-edge heap `[(u, parent(u))]` for every non-root vertex.
pub fn tree_heap(t: &RootedTree) -> HeapCollection {
    let mut h = HeapCollection::empty(t.n());
    for (u, p) in t.edges() {
        h.push(u, p);
    }
    h
}

/// Simple oriented cycle `c_0 -> c_1 -> ... -> c_0`, stored rotated so the
/// smallest vertex comes first. Cycles order by length, then vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    vertices: Vec<VertexId>,
}

impl Cycle {
    pub fn new(mut vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidTree("empty cycle".into()));
        }
        let mut sorted = vertices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTree(format!(
                "cycle {vertices:?} repeats a vertex"
            )));
        }
        let min_pos = (0..vertices.len())
            .min_by_key(|&i| vertices[i])
            .expect("nonempty");
        vertices.rotate_left(min_pos);
        Ok(Cycle { vertices })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn intersects(&self, other: &Cycle) -> bool {
        self.vertices.iter().any(|&v| other.contains(v))
    }

    /// Edges `(c_i, c_{i+1})`, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let m = self.vertices.len();
        (0..m).map(move |i| (self.vertices[i], self.vertices[(i + 1) % m]))
    }

    pub fn weight<S: Scalar>(&self, k: &MarkovKernel<S>) -> Result<S> {
        let mut acc = S::one();
        for (u, v) in self.edges() {
            let x = k.get(u, v);
            if x.is_zero() {
                return Err(Error::Unsupported { from: u, to: v });
            }
            acc = acc * x.clone();
        }
        Ok(acc)
    }

    /// Appends the cycle's edges on top of `h`.
    pub fn push_onto(&self, h: &mut HeapCollection) {
        for (u, v) in self.edges() {
            h.push(u, v);
        }
    }
}

impl Ord for Cycle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

impl PartialOrd for Cycle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Follows first edges from `start` until a vertex repeats and removes the
/// cycle found.
pub fn pop_cycle(h: &HeapCollection, start: VertexId) -> Result<(Cycle, HeapCollection)> {
    if start >= h.n() {
        return Err(Error::VertexOutOfRange(start));
    }
    h.check_balanced()?;
    if h.heaps[start].is_empty() {
        return Err(Error::EmptyHeap(start));
    }
    let mut seen_at = vec![None; h.n()];
    let mut trail = Vec::new();
    let mut cur = start;
    while seen_at[cur].is_none() {
        seen_at[cur] = Some(trail.len());
        trail.push(cur);
        // Balance guarantees a vertex entered by an edge has one to leave by.
        cur = h.heaps[cur][0];
    }
    let cycle = Cycle::new(trail[seen_at[cur].expect("repeated")..].to_vec())?;
    let mut rest = h.clone();
    for &v in cycle.vertices() {
        rest.heaps[v].remove(0);
    }
    Ok((cycle, rest))
}

/// Repeated [`pop_cycle`] from the smallest vertex with a nonempty heap.
pub fn cycle_decomposition(h: &HeapCollection) -> Result<Vec<Cycle>> {
    h.check_balanced()?;
    let mut rest = h.clone();
    let mut out = Vec::new();
    while let Some(u) = (0..rest.n()).find(|&u| !rest.heaps[u].is_empty()) {
        let (c, r) = pop_cycle(&rest, u)?;
        out.push(c);
        rest = r;
    }
    Ok(out)
}

/// Cycles sitting on top of a heap of cycles: following last edges from each
/// of their vertices closes the cycle, so they can be removed without
/// disturbing any other edge. Returned in cycle order; they are disjoint.
pub fn top_cycles(h: &HeapCollection) -> Vec<Cycle> {
    let n = h.n();
    let mut out = Vec::new();
    let mut done = vec![false; n];
    for u in 0..n {
        if done[u] || h.heaps[u].is_empty() {
            continue;
        }
        let mut trail = vec![u];
        let mut cur = u;
        loop {
            let Some(&next) = h.heaps[cur].last() else { break };
            if next == u {
                for &v in &trail {
                    done[v] = true;
                }
                out.push(Cycle::new(trail).expect("trail has distinct vertices"));
                break;
            }
            if trail.contains(&next) || h.heaps[next].is_empty() {
                break;
            }
            trail.push(next);
            cur = next;
        }
    }
    out.sort();
    out
}

fn remove_top_cycle(h: &HeapCollection, c: &Cycle) -> HeapCollection {
    let mut rest = h.clone();
    for (u, v) in c.edges() {
        let top = rest.heaps[u].pop();
        debug_assert_eq!(top, Some(v));
    }
    rest
}

/// Checks that `s` is a family of pairwise disjoint cycles avoiding `f`.
pub fn check_trivial(s: &[Cycle], f: Option<VertexId>) -> Result<()> {
    for (i, a) in s.iter().enumerate() {
        if f.is_some_and(|f| a.contains(f)) || s[i + 1..].iter().any(|b| a.intersects(b)) {
            return Err(Error::NotTrivial);
        }
    }
    Ok(())
}

/// Sign-reversing involution on pairs (heap of cycles, trivial heap). Among
/// the top cycles of `h` that miss every cycle of `s`, together with the
/// cycles of `s`, the greatest one switches sides: out of `s` it is pushed
/// on top of `h`, off the top of `h` it joins `s`. The returned `s'` is
/// sorted.
pub fn pair_involution(h: &HeapCollection, s: &[Cycle]) -> Result<(HeapCollection, Vec<Cycle>)> {
    h.check_balanced()?;
    check_trivial(s, None)?;
    if h.is_empty() && s.is_empty() {
        return Err(Error::EmptyPair);
    }
    let from_h = top_cycles(h)
        .into_iter()
        .filter(|c| !s.iter().any(|d| d.intersects(c)))
        .max();
    let from_s = s.iter().max().cloned();
    let mut s_out: Vec<Cycle> = s.to_vec();
    let take_from_h = match (&from_h, &from_s) {
        (Some(c), Some(d)) => c > d,
        (Some(_), None) => true,
        _ => false,
    };
    let h_out = if take_from_h {
        let c = from_h.expect("checked");
        let rest = remove_top_cycle(h, &c);
        s_out.push(c);
        rest
    } else {
        // A nonempty balanced heap always has a top cycle, so s is nonempty here.
        let d = from_s.expect("nonempty pair");
        let mut grown = h.clone();
        d.push_onto(&mut grown);
        s_out.retain(|x| *x != d);
        grown
    };
    s_out.sort();
    Ok((h_out, s_out))
}

/// `(-1)^{|s|} Weight(h) prod Weight(c)`.
pub fn signed_pair_weight<S: Scalar>(
    h: &HeapCollection,
    s: &[Cycle],
    k: &MarkovKernel<S>,
) -> Result<S> {
    let mut w = h.weight(k)?;
    for c in s {
        w = w * c.weight(k)?;
    }
    Ok(if s.len() % 2 == 1 { -w } else { w })
}

/// All simple cycles of the support of `k` (self-loops included) that avoid
/// `avoid`, in cycle order.
pub fn simple_cycles<S: Scalar>(k: &MarkovKernel<S>, avoid: Option<VertexId>) -> Result<Vec<Cycle>> {
    let n = k.n();
    if n > MAX_TRIVIAL_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_TRIVIAL_N,
        });
    }
    let mut out = Vec::new();
    let blocked = |v: VertexId| Some(v) == avoid;
    for v in (0..n).filter(|&v| !blocked(v)) {
        let mut trail = vec![v];
        extend_cycles(k, v, &mut trail, &blocked, &mut |t| {
            out.push(Cycle::new(t.to_vec()).expect("simple"))
        });
    }
    out.sort();
    Ok(out)
}

/// Simple cycles with minimum `trail[0]` that extend `trail` through
/// vertices larger than the minimum.
fn extend_cycles<S: Scalar>(
    k: &MarkovKernel<S>,
    min: VertexId,
    trail: &mut Vec<VertexId>,
    blocked: &dyn Fn(VertexId) -> bool,
    emit: &mut dyn FnMut(&[VertexId]),
) {
    let cur = *trail.last().expect("nonempty trail");
    for &next in k.neighbors(cur) {
        if next == min {
            emit(trail);
        } else if next > min && !blocked(next) && !trail.contains(&next) {
            trail.push(next);
            extend_cycles(k, min, trail, blocked, emit);
            trail.pop();
        }
    }
}

/// `sum_C (-1)^{|C|} prod_{c in C} Weight(c)` over all families `C` of
/// pairwise disjoint cycles avoiding `f`. Equals `det(I - K^{(f)})`.
pub fn trivial_signed_sum<S: Scalar>(k: &MarkovKernel<S>, f: VertexId) -> Result<S> {
    let n = k.n();
    if f >= n {
        return Err(Error::VertexOutOfRange(f));
    }
    let cycles = simple_cycles(k, Some(f))?;
    let weights = cycles
        .iter()
        .map(|c| c.weight(k))
        .collect::<Result<Vec<S>>>()?;
    // Group cycles by their minimum vertex.
    let mut by_min: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, c) in cycles.iter().enumerate() {
        by_min[c.vertices()[0]].push(i);
    }
    let mut used = vec![false; n];
    used[f] = true;
    Ok(signed_families(0, &cycles, &weights, &by_min, &mut used))
}

fn signed_families<S: Scalar>(
    v: VertexId,
    cycles: &[Cycle],
    weights: &[S],
    by_min: &[Vec<usize>],
    used: &mut Vec<bool>,
) -> S {
    let n = used.len();
    let Some(v) = (v..n).find(|&u| !used[u]) else {
        return S::one();
    };
    // v left uncovered.
    used[v] = true;
    let mut total = signed_families(v + 1, cycles, weights, by_min, used);
    used[v] = false;
    // v is the minimum of a cycle in the family.
    for &i in &by_min[v] {
        let c = &cycles[i];
        if c.vertices().iter().any(|&u| used[u]) {
            continue;
        }
        for &u in c.vertices() {
            used[u] = true;
        }
        let rest = signed_families(v + 1, cycles, weights, by_min, used);
        total = total - weights[i].clone() * rest;
        for &u in c.vertices() {
            used[u] = false;
        }
    }
    total
}

/// Collections whose passport is `out_u = n_u + out_base[u]`,
/// `in_u = n_u + in_base[u]` for some `n_u >= 0`, with no edge touching
/// `excluded`. Heaps of cycles are the case of zero bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassportFamily {
    pub out_base: Vec<usize>,
    pub in_base: Vec<usize>,
    pub excluded: Option<VertexId>,
}

impl PassportFamily {
    pub fn heaps_of_cycles(n: usize, excluded: Option<VertexId>) -> Self {
        PassportFamily {
            out_base: vec![0; n],
            in_base: vec![0; n],
            excluded,
        }
    }

    /// Truncated heaps of covering paths with first-entrance tree `t` whose
    /// last new vertex is the leaf `f`: `out_base = deg - 1` on internal
    /// vertices and `in_base = 1` on the other leaves.
    pub fn xi(t: &RootedTree, f: VertexId) -> Result<Self> {
        let n = t.n();
        if f >= n {
            return Err(Error::VertexOutOfRange(f));
        }
        if !t.is_spanning() {
            return Err(Error::InvalidTree("tree must span every vertex".into()));
        }
        let deg = t.child_counts();
        if deg[f] > 0 {
            return Err(Error::NotALeaf(f));
        }
        Ok(PassportFamily {
            out_base: deg.iter().map(|&d| d.saturating_sub(1)).collect(),
            in_base: (0..n).map(|u| usize::from(deg[u] == 0 && u != f)).collect(),
            excluded: Some(f),
        })
    }

    pub fn n(&self) -> usize {
        self.out_base.len()
    }

    /// Why `p` is outside the family, if it is.
    pub fn mismatch(&self, p: &Passport) -> Option<String> {
        for u in 0..self.n() {
            let (o, i) = (p.out[u], p.inn[u]);
            if Some(u) == self.excluded && (o > 0 || i > 0) {
                return Some(format!("vertex {u} must carry no edges (out {o}, in {i})"));
            }
            if o < self.out_base[u] || i < self.in_base[u] {
                return Some(format!(
                    "vertex {u} needs out >= {} and in >= {} (out {o}, in {i})",
                    self.out_base[u], self.in_base[u]
                ));
            }
            if o - self.out_base[u] != i - self.in_base[u] {
                return Some(format!(
                    "vertex {u} has out {o}, in {i}; expected out - in = {}",
                    self.out_base[u] as i64 - self.in_base[u] as i64
                ));
            }
        }
        None
    }

    pub fn contains(&self, p: &Passport) -> bool {
        self.mismatch(p).is_none()
    }
}

/// Whether `h` lies in the passport family of truncated heaps for tree `t`
/// and free leaf `f`.
pub fn xi_membership(h: &HeapCollection, t: &RootedTree, f: VertexId) -> Result<bool> {
    Ok(PassportFamily::xi(t, f)?.contains(&h.passport()))
}

/// Calls `visit(edges, counts)` for every edge-count matrix over the support
/// of `k` whose collections lie in `family` and have at most `max_edges`
/// edges. Edges are ordered by (source, target).
fn visit_count_matrices<S: Scalar>(
    k: &MarkovKernel<S>,
    family: &PassportFamily,
    max_edges: usize,
    visit: &mut dyn FnMut(&[(VertexId, VertexId)], &[usize]),
) -> Result<()> {
    let n = k.n();
    if n > MAX_HEAP_ENUMERATION_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_HEAP_ENUMERATION_N,
        });
    }
    if max_edges > MAX_HEAP_EDGES {
        return Err(Error::EdgeBudget(max_edges));
    }
    if family.n() != n {
        return Err(Error::VertexOutOfRange(family.n().max(n) - 1));
    }
    let allowed = |v: VertexId| Some(v) != family.excluded;
    let edges: Vec<(VertexId, VertexId)> = (0..n)
        .filter(|&u| allowed(u))
        .flat_map(|u| k.neighbors(u).iter().map(move |&v| (u, v)))
        .filter(|&(_, v)| allowed(v))
        .collect();
    // Vertices whose counts are final once edge i is assigned.
    let mut closes: Vec<Vec<VertexId>> = vec![Vec::new(); edges.len()];
    for w in 0..n {
        match edges.iter().rposition(|&(u, v)| u == w || v == w) {
            Some(i) => closes[i].push(w),
            None if family.out_base[w] > 0 || family.in_base[w] > 0 => return Ok(()),
            None => {}
        }
    }
    let base_gap: Vec<i64> = (0..n)
        .map(|u| family.out_base[u] as i64 - family.in_base[u] as i64)
        .collect();
    let min_edges: usize = family.out_base.iter().sum();
    if min_edges > max_edges {
        return Ok(());
    }

    struct Walk<'a> {
        edges: &'a [(VertexId, VertexId)],
        closes: &'a [Vec<VertexId>],
        family: &'a PassportFamily,
        base_gap: &'a [i64],
        counts: Vec<usize>,
        out: Vec<usize>,
        inn: Vec<usize>,
    }

    fn go(
        w: &mut Walk<'_>,
        i: usize,
        budget: usize,
        visit: &mut dyn FnMut(&[(VertexId, VertexId)], &[usize]),
    ) {
        if i == w.edges.len() {
            visit(w.edges, &w.counts);
            return;
        }
        let (u, v) = w.edges[i];
        for c in 0..=budget {
            w.counts[i] = c;
            w.out[u] += c;
            w.inn[v] += c;
            let ok = w.closes[i].iter().all(|&x| {
                w.out[x] >= w.family.out_base[x]
                    && w.out[x] as i64 - w.inn[x] as i64 == w.base_gap[x]
            });
            if ok {
                go(w, i + 1, budget - c, visit);
            }
            w.out[u] -= c;
            w.inn[v] -= c;
        }
        w.counts[i] = 0;
    }

    let mut walk = Walk {
        edges: &edges,
        closes: &closes,
        family,
        base_gap: &base_gap,
        counts: vec![0; edges.len()],
        out: vec![0; n],
        inn: vec![0; n],
    };
    go(&mut walk, 0, max_edges, visit);
    Ok(())
}

/// `C(a, b)`; exact for every `a <= 64`.
fn binomial(a: usize, b: usize) -> u64 {
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for j in 0..b {
        acc = acc * (a - j) as u128 / (j + 1) as u128;
    }
    acc as u64
}

/// Total `K`-weight of the members of `family` with at most `max_edges`
/// edges. Every ordering of every heap counts, so each edge-count matrix
/// contributes a product of multinomials times `prod K^c`.
pub fn family_weight<S: Scalar>(
    k: &MarkovKernel<S>,
    family: &PassportFamily,
    max_edges: usize,
) -> Result<S> {
    let mut total = S::zero();
    visit_count_matrices(k, family, max_edges, &mut |edges, counts| {
        let mut w = S::one();
        let mut filled = vec![0usize; k.n()];
        for (&(u, v), &c) in edges.iter().zip(counts) {
            if c == 0 {
                continue;
            }
            filled[u] += c;
            w = w * S::from_u64(binomial(filled[u], c));
            let x = k.get(u, v);
            for _ in 0..c {
                w = w * x.clone();
            }
        }
        total = total.clone() + w;
    })?;
    Ok(total)
}

/// Partial sum of `Weight(H)` over heaps of cycles avoiding `f` with at most
/// `max_edges` edges. Nondecreasing in `max_edges`, with limit
/// `1 / det(I - K^{(f)})`.
pub fn enumerate_heaps_of_cycles<S: Scalar>(
    k: &MarkovKernel<S>,
    f: VertexId,
    max_edges: usize,
) -> Result<S> {
    if f >= k.n() {
        return Err(Error::VertexOutOfRange(f));
    }
    family_weight(k, &PassportFamily::heaps_of_cycles(k.n(), Some(f)), max_edges)
}

/// Every member of `family` with at most `max_edges` edges, explicitly.
/// Only for small brute-force checks.
pub fn family_members<S: Scalar>(
    k: &MarkovKernel<S>,
    family: &PassportFamily,
    max_edges: usize,
) -> Result<Vec<HeapCollection>> {
    let n = k.n();
    let mut out = Vec::new();
    visit_count_matrices(k, family, max_edges, &mut |edges, counts| {
        let mut per_vertex: Vec<Vec<(VertexId, usize)>> = vec![Vec::new(); n];
        for (&(u, v), &c) in edges.iter().zip(counts) {
            if c > 0 {
                per_vertex[u].push((v, c));
            }
        }
        let arrangements: Vec<Vec<Vec<VertexId>>> =
            per_vertex.iter().map(|m| arrangements(m)).collect();
        let mut choice = vec![0usize; n];
        loop {
            out.push(HeapCollection {
                heaps: (0..n).map(|u| arrangements[u][choice[u]].clone()).collect(),
            });
            let Some(u) = (0..n).find(|&u| choice[u] + 1 < arrangements[u].len()) else {
                break;
            };
            choice[u] += 1;
            for c in choice.iter_mut().take(u) {
                *c = 0;
            }
        }
    })?;
    out.sort();
    Ok(out)
}

/// Distinct orderings of a multiset given as (item, multiplicity) pairs.
fn arrangements(multiset: &[(VertexId, usize)]) -> Vec<Vec<VertexId>> {
    fn go(left: &mut [(VertexId, usize)], cur: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        if left.iter().all(|&(_, c)| c == 0) {
            out.push(cur.clone());
            return;
        }
        for i in 0..left.len() {
            if left[i].1 == 0 {
                continue;
            }
            left[i].1 -= 1;
            cur.push(left[i].0);
            go(left, cur, out);
            cur.pop();
            left[i].1 += 1;
        }
    }
    let mut left = multiset.to_vec();
    let mut out = Vec::new();
    go(&mut left, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{principal_minor_det, reversed_kernel};
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

    fn h(heaps: &[&[usize]]) -> HeapCollection {
        HeapCollection::from_heaps(heaps.iter().map(|x| x.to_vec()).collect()).unwrap()
    }

    const SEVEN_VERTEX_WALK: [usize; 19] = [0, 3, 0, 1, 0, 1, 0, 3, 0, 3, 4, 5, 4, 6, 4, 3, 4, 5, 2];

    fn seven_vertex_heap() -> HeapCollection {
        heap_encode(&Path::new(SEVEN_VERTEX_WALK.to_vec()).unwrap(), 7).unwrap()
    }

    fn seven_vertex_tree() -> RootedTree {
        RootedTree::from_edges(7, 0, &[(3, 0), (1, 0), (4, 3), (5, 4), (6, 4), (2, 5)]).unwrap()
    }

    fn seven_vertex_truncated() -> HeapCollection {
        h(&[&[3, 1, 1, 3], &[0], &[], &[0, 0, 4], &[5, 6, 3], &[4], &[]])
    }

    #[test]
    fn encode_reference_walk() {
        let heap = seven_vertex_heap();
        assert_eq!(heap.heap(3), &[0, 0, 0, 4]);
        assert_eq!(
            heap,
            h(&[&[3, 1, 1, 3], &[0, 0], &[5], &[0, 0, 0, 4], &[3, 5, 6, 3], &[4, 4], &[4]])
        );
    }

    #[test]
    fn encode_small_paths() {
        assert!(heap_encode(&Path::single(0), 2).unwrap().is_empty());
        let heap = heap_encode(&Path::new(vec![0, 1, 0]).unwrap(), 2).unwrap();
        assert_eq!(heap, h(&[&[1], &[0]]));
        assert_eq!(
            heap.passport(),
            Passport {
                out: vec![1, 1],
                inn: vec![1, 1]
            }
        );
    }

    #[test]
    fn decode_cases() {
        let walk = Path::new(SEVEN_VERTEX_WALK.to_vec()).unwrap();
        assert_eq!(heap_decode(&seven_vertex_heap(), None).unwrap(), walk);
        assert_eq!(
            heap_decode(&HeapCollection::empty(3), Some(2)).unwrap(),
            Path::single(2)
        );
        assert!(heap_decode(&HeapCollection::empty(3), None).is_err());
        assert_eq!(
            heap_decode(&h(&[&[1], &[]]), None).unwrap(),
            Path::new(vec![1, 0]).unwrap()
        );
        // A stray 2-cycle between vertices the path never reaches.
        let stray = h(&[&[1], &[], &[3], &[2]]);
        assert!(matches!(
            heap_decode(&stray, None),
            Err(Error::NotAPathImage(_))
        ));
        let closed = heap_encode(&Path::new(vec![0, 1, 0]).unwrap(), 2).unwrap();
        assert_eq!(
            heap_decode(&closed, Some(0)).unwrap(),
            Path::new(vec![0, 1, 0]).unwrap()
        );
        assert!(heap_decode(&h(&[&[1, 1], &[]]), None).is_err());
    }

    #[test]
    fn weight_matches_reversed_path_weight() {
        let m = three_state();
        let mrev = reversed_kernel(&m).unwrap();
        let p = Path::new(vec![0, 1, 2, 0, 2]).unwrap();
        let heap = heap_encode(&p, 3).unwrap();
        assert_eq!(
            heap.weight(&mrev).unwrap(),
            p.weight(&mrev, crate::path::WeightConvention::Reversed).unwrap()
        );
    }

    #[test]
    fn concat_and_prefix_removal() {
        let a = h(&[&[1], &[0, 2], &[]]);
        let b = h(&[&[2], &[], &[1]]);
        let e = HeapCollection::empty(3);
        assert_eq!(a.concat(&e), a);
        assert!(a.prefix_remove(&a).unwrap().is_empty());
        let ab = a.concat(&b);
        assert_eq!(ab.prefix_remove(&a).unwrap(), b);
        assert_eq!(ab.passport(), a.passport().add(&b.passport()));
        assert_eq!(
            a.prefix_remove(&h(&[&[2], &[], &[]])),
            Err(Error::NotAPrefix { vertex: 0 })
        );
    }

    #[test]
    fn tree_heaps() {
        assert!(tree_heap(&RootedTree::singleton(1, 0)).is_empty());
        let star = RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap();
        let th = tree_heap(&star);
        assert_eq!(th, h(&[&[], &[0], &[0]]));
        assert_eq!(th.passport().inn, vec![2, 0, 0]);
        assert_eq!(th.passport().out, vec![0, 1, 1]);
        // The tree heap sits at the bottom of the reference walk's heap.
        assert_eq!(
            seven_vertex_heap().prefix_remove(&tree_heap(&seven_vertex_tree())).unwrap(),
            seven_vertex_truncated()
        );
    }

    #[test]
    fn pop_cycle_cases() {
        let two = heap_encode(&Path::new(vec![0, 1, 0]).unwrap(), 2).unwrap();
        let (c, rest) = pop_cycle(&two, 0).unwrap();
        assert_eq!(c.vertices(), &[0, 1]);
        assert!(rest.is_empty());

        let stacked = h(&[&[1, 1], &[0, 0]]);
        let (c, rest) = pop_cycle(&stacked, 1).unwrap();
        assert_eq!(c.vertices(), &[0, 1]);
        assert_eq!(rest, h(&[&[1], &[0]]));

        assert!(matches!(
            pop_cycle(&h(&[&[1], &[]]), 0),
            Err(Error::Unbalanced { .. })
        ));
        assert_eq!(pop_cycle(&stacked, 0).map(|x| x.0.len()), Ok(2));
        assert_eq!(
            pop_cycle(&h(&[&[], &[1]]), 0),
            Err(Error::EmptyHeap(0))
        );
    }

    #[test]
    fn reference_residual_decomposes_into_two_cycles() {
        // Truncated heap minus the two golf trajectories.
        let red = h(&[&[1, 3], &[0], &[], &[0, 4], &[3], &[], &[]]);
        let cycles = cycle_decomposition(&red).unwrap();
        assert_eq!(cycles.len(), 3);
        assert!(cycles.iter().all(|c| c.len() == 2));
        let mut v: Vec<_> = cycles.iter().map(|c| c.vertices().to_vec()).collect();
        v.sort();
        assert_eq!(v, vec![vec![0, 1], vec![0, 3], vec![3, 4]]);
        assert!(cycle_decomposition(&HeapCollection::empty(4)).unwrap().is_empty());
        assert!(cycle_decomposition(&seven_vertex_truncated()).is_err());
    }

    #[test]
    fn cycle_canonical_form_and_order() {
        let c = Cycle::new(vec![3, 1, 2]).unwrap();
        assert_eq!(c.vertices(), &[1, 2, 3]);
        assert_eq!(Cycle::new(vec![2, 3, 1]).unwrap(), c);
        assert_ne!(Cycle::new(vec![1, 3, 2]).unwrap(), c);
        assert!(Cycle::new(vec![1, 2, 1]).is_err());
        assert!(Cycle::new(vec![5]).unwrap() < Cycle::new(vec![0, 1]).unwrap());
        assert!(Cycle::new(vec![0, 2]).unwrap() < Cycle::new(vec![1, 2]).unwrap());
    }

    #[test]
    fn xi_membership_cases() {
        let t = seven_vertex_tree();
        assert!(xi_membership(&seven_vertex_truncated(), &t, 2).unwrap());
        assert!(!xi_membership(&seven_vertex_truncated(), &t, 6).unwrap());
        assert_eq!(xi_membership(&seven_vertex_truncated(), &t, 4), Err(Error::NotALeaf(4)));

        let star = RootedTree::from_edges(4, 0, &[(1, 0), (2, 0), (3, 0)]).unwrap();
        assert!(!xi_membership(&HeapCollection::empty(4), &star, 1).unwrap());
        let k3_star = RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap();
        assert!(xi_membership(&h(&[&[2], &[], &[]]), &k3_star, 1).unwrap());
        // Any edge at f disqualifies.
        assert!(!xi_membership(&h(&[&[2, 1], &[0], &[]]), &k3_star, 1).unwrap());
    }

    #[test]
    fn trivial_sums_on_k3() {
        let m = three_state();
        let mrev = reversed_kernel(&m).unwrap();
        assert_eq!(trivial_signed_sum(&mrev, 0).unwrap(), q(11, 35));
        assert_eq!(trivial_signed_sum(&m, 0).unwrap(), q(11, 35));
        for f in 0..3 {
            assert_eq!(trivial_signed_sum(&m, f).unwrap(), principal_minor_det(&m, f));
            assert_eq!(
                trivial_signed_sum(&mrev, f).unwrap(),
                principal_minor_det(&mrev, f)
            );
        }
    }

    #[test]
    fn trivial_sum_without_cycles_is_one() {
        let path3 = MarkovKernel::from_rows(vec![
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(1, 2), q(0, 1), q(1, 2)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
        ])
        .unwrap();
        assert_eq!(trivial_signed_sum(&path3, 1).unwrap(), q(1, 1));
    }

    #[test]
    fn trivial_sum_with_self_loops() {
        let k = MarkovKernel::from_rows(vec![
            vec![q(1, 2), q(1, 4), q(1, 4)],
            vec![q(1, 3), q(1, 3), q(1, 3)],
            vec![q(1, 5), q(2, 5), q(2, 5)],
        ])
        .unwrap();
        for f in 0..3 {
            assert_eq!(trivial_signed_sum(&k, f).unwrap(), principal_minor_det(&k, f));
        }
        assert_eq!(simple_cycles(&k, None).unwrap().len(), 3 + 3 + 2);
    }

    #[test]
    fn heaps_of_cycles_on_k3() {
        let m = three_state();
        let mrev = reversed_kernel(&m).unwrap();
        assert_eq!(enumerate_heaps_of_cycles(&mrev, 0, 0).unwrap(), q(1, 1));
        let ratio = q(24, 35);
        for max_edges in 0..=12 {
            let mut expected = q(0, 1);
            let mut term = q(1, 1);
            for _ in 0..=max_edges / 2 {
                expected = expected + term.clone();
                term = term * ratio.clone();
            }
            assert_eq!(
                enumerate_heaps_of_cycles(&mrev, 0, max_edges).unwrap(),
                expected
            );
        }
        let big = enumerate_heaps_of_cycles(&mrev, 0, 64).unwrap().to_f64();
        assert!((big - 35.0 / 11.0).abs() < 1e-4);
        assert_eq!(
            enumerate_heaps_of_cycles(&mrev, 0, 65),
            Err(Error::EdgeBudget(65))
        );
    }

    #[test]
    fn heap_sums_count_orderings() {
        // Two 2-cycles through vertex 1 give the ordering factor 2 at H_1.
        let k = MarkovKernel::from_rows(vec![
            vec![q(0, 1), q(1, 1), q(0, 1), q(0, 1)],
            vec![q(1, 3), q(0, 1), q(1, 3), q(1, 3)],
            vec![q(0, 1), q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1), q(0, 1)],
        ])
        .unwrap();
        let family = PassportFamily::heaps_of_cycles(4, Some(3));
        let members = family_members(&k, &family, 4).unwrap();
        // empty, (0 1), (1 2), (0 1)^2, (1 2)^2, and 2 orderings of (0 1)(1 2)
        assert_eq!(members.len(), 7);
        let direct = members
            .iter()
            .map(|m| m.weight(&k).unwrap())
            .fold(q(0, 1), |a, b| a + b);
        assert_eq!(family_weight(&k, &family, 4).unwrap(), direct);
        assert!(members.iter().all(|m| m.check_balanced().is_ok()));
    }

    #[test]
    fn xi_weight_on_k3() {
        let m = three_state();
        let mrev = reversed_kernel(&m).unwrap();
        let t = RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap();
        let fam = PassportFamily::xi(&t, 1).unwrap();
        let w = family_weight(&mrev, &fam, 63).unwrap().to_f64();
        assert!((w - 98.0 / 209.0).abs() < 1e-9);
    }

    #[test]
    fn involution_on_single_cycle() {
        let c = Cycle::new(vec![0, 1]).unwrap();
        let mut heap = HeapCollection::empty(2);
        c.push_onto(&mut heap);
        let (h2, s2) = pair_involution(&heap, &[]).unwrap();
        assert!(h2.is_empty());
        assert_eq!(s2, vec![c.clone()]);
        let (h3, s3) = pair_involution(&h2, &s2).unwrap();
        assert_eq!((h3, s3), (heap, vec![]));
        assert_eq!(
            pair_involution(&HeapCollection::empty(2), &[]),
            Err(Error::EmptyPair)
        );
    }

    #[test]
    fn top_cycles_follow_last_edges() {
        // (0 1) below (1 2): only (1 2) is on top.
        let heap = h(&[&[1], &[0, 2], &[1]]);
        assert_eq!(top_cycles(&heap), vec![Cycle::new(vec![1, 2]).unwrap()]);
        let loops = h(&[&[0], &[1]]);
        assert_eq!(top_cycles(&loops).len(), 2);
    }
}
