//! Rooted trees with edges directed toward the root.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernel::VertexId;

/// A rooted tree on a subset of `0..n`. `parent[v]` is `None` for the root
/// and for vertices outside the tree.
///
/// Trees order by `(root, parent array)`, which is also their canonical key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedTree {
    root: VertexId,
    parent: Vec<Option<VertexId>>,
}

impl RootedTree {
    /// Validates that every vertex with a parent reaches `root`.
    pub fn new(root: VertexId, parent: Vec<Option<VertexId>>) -> Result<Self> {
        let n = parent.len();
        if root >= n {
            return Err(Error::VertexOutOfRange(root));
        }
        if parent[root].is_some() {
            return Err(Error::InvalidTree("root has a parent".into()));
        }
        for (v, p) in parent.iter().enumerate() {
            let Some(p) = *p else { continue };
            if p >= n {
                return Err(Error::VertexOutOfRange(p));
            }
            if p != root && parent[p].is_none() {
                return Err(Error::InvalidTree(format!(
                    "parent {p} of {v} is not in the tree"
                )));
            }
        }
        let tree = RootedTree { root, parent };
        for v in 0..n {
            if tree.parent[v].is_some() && tree.depth(v).is_none() {
                return Err(Error::InvalidTree(format!("cycle through vertex {v}")));
            }
        }
        Ok(tree)
    }

    /// Tree reduced to its root.
    pub fn singleton(n: usize, root: VertexId) -> Self {
        RootedTree {
            root,
            parent: vec![None; n],
        }
    }

    /// Builds a tree from `(child, parent)` edges.
    pub fn from_edges(n: usize, root: VertexId, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut parent = vec![None; n];
        for &(c, p) in edges {
            if c >= n {
                return Err(Error::VertexOutOfRange(c));
            }
            if parent[c].replace(p).is_some() {
                return Err(Error::InvalidTree(format!("vertex {c} has two parents")));
            }
        }
        Self::new(root, parent)
    }

    pub(crate) fn from_parts_unchecked(root: VertexId, parent: Vec<Option<VertexId>>) -> Self {
        RootedTree { root, parent }
    }

    /// Size of the vertex universe (not of the tree).
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<VertexId>] {
        &self.parent
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v == self.root || self.parent[v].is_some()
    }

    pub fn vertex_count(&self) -> usize {
        (0..self.n()).filter(|&v| self.contains(v)).count()
    }

    pub fn edge_count(&self) -> usize {
        self.parent.iter().flatten().count()
    }

    pub fn is_spanning(&self) -> bool {
        self.edge_count() + 1 == self.n()
    }

    /// Edges `(child, parent)` in increasing child order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v, p)))
    }

    /// Edge set with orientation and root forgotten, each pair as `(min, max)`, sorted.
    pub fn undirected_edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut e: Vec<_> = self.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
        e.sort_unstable();
        e
    }

    /// Number of children of each vertex.
    pub fn child_counts(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for (_, p) in self.edges() {
            deg[p] += 1;
        }
        deg
    }

    /// Tree vertices without children, increasing.
    pub fn leaves(&self) -> Vec<VertexId> {
        let deg = self.child_counts();
        (0..self.n())
            .filter(|&v| self.contains(v) && deg[v] == 0)
            .collect()
    }

    /// Tree vertices with at least one child, increasing.
    pub fn internal(&self) -> Vec<VertexId> {
        let deg = self.child_counts();
        (0..self.n())
            .filter(|&v| self.contains(v) && deg[v] > 0)
            .collect()
    }

    fn depth(&self, v: VertexId) -> Option<usize> {
        let mut cur = v;
        let mut d = 0;
        while cur != self.root {
            cur = self.parent[cur]?;
            d += 1;
            if d > self.n() {
                return None;
            }
        }
        Some(d)
    }

    pub(crate) fn set_parent(&mut self, v: VertexId, p: Option<VertexId>) {
        self.parent[v] = p;
    }

    pub(crate) fn set_root(&mut self, r: VertexId) {
        self.root = r;
    }

    /// Canonical text form, e.g. `root=1;2->1,3->1`.
    pub fn to_canonical(&self, labels: &[String]) -> String {
        let edges: Vec<String> = self
            .edges()
            .map(|(c, p)| format!("{}->{}", labels[c], labels[p]))
            .collect();
        format!("root={};{}", labels[self.root], edges.join(","))
    }

    /// Inverse of [`RootedTree::to_canonical`].
    pub fn parse_canonical(s: &str, labels: &[String]) -> Result<Self> {
        let index = |l: &str| {
            labels
                .iter()
                .position(|x| x == l.trim())
                .ok_or_else(|| Error::UnknownLabel(l.trim().to_string()))
        };
        let rest = s
            .trim()
            .strip_prefix("root=")
            .ok_or_else(|| Error::Syntax(format!("tree {s:?} lacks a root= prefix")))?;
        let (root, edges) = rest.split_once(';').unwrap_or((rest, ""));
        let root = index(root)?;
        let mut list = Vec::new();
        for e in edges.split(',').filter(|e| !e.trim().is_empty()) {
            let (c, p) = e
                .split_once("->")
                .ok_or_else(|| Error::Syntax(format!("bad tree edge {e:?}")))?;
            list.push((index(c)?, index(p)?));
        }
        Self::from_edges(labels.len(), root, &list)
    }

    /// Parent map keyed by label, for JSON reports.
    pub fn parents_by_label(&self, labels: &[String]) -> BTreeMap<String, String> {
        self.edges()
            .map(|(c, p)| (labels[c].clone(), labels[p].clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn star_tree_structure() {
        let t = RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap();
        assert!(t.is_spanning());
        assert_eq!(t.edge_count(), 2);
        assert_eq!(t.leaves(), vec![1, 2]);
        assert_eq!(t.internal(), vec![0]);
        assert_eq!(t.child_counts(), vec![2, 0, 0]);
    }

    #[test]
    fn rejects_cycles_and_double_parents() {
        assert!(RootedTree::from_edges(3, 0, &[(1, 2), (2, 1)]).is_err());
        assert!(RootedTree::from_edges(3, 0, &[(1, 0), (1, 2)]).is_err());
        assert!(RootedTree::from_edges(3, 0, &[(0, 1)]).is_err());
        assert!(RootedTree::from_edges(3, 0, &[(1, 2)]).is_err());
    }

    #[test]
    fn partial_tree_on_visited_set() {
        let t = RootedTree::from_edges(4, 2, &[(0, 2)]).unwrap();
        assert!(!t.is_spanning());
        assert!(t.contains(0) && t.contains(2) && !t.contains(1));
        assert_eq!(t.vertex_count(), 2);
        assert_eq!(t.leaves(), vec![0]);
    }

    #[test]
    fn canonical_round_trip() {
        let l = labels(3);
        let t = RootedTree::from_edges(3, 0, &[(1, 0), (2, 1)]).unwrap();
        let s = t.to_canonical(&l);
        assert_eq!(s, "root=1;2->1,3->2");
        assert_eq!(RootedTree::parse_canonical(&s, &l).unwrap(), t);
        let single = RootedTree::singleton(1, 0);
        assert_eq!(single.to_canonical(&labels(1)), "root=1;");
        assert_eq!(
            RootedTree::parse_canonical("root=1;", &labels(1)).unwrap(),
            single
        );
    }

    #[test]
    fn canonical_order_is_lexicographic_in_parents() {
        let a = RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap();
        let b = RootedTree::from_edges(3, 0, &[(1, 0), (2, 1)]).unwrap();
        let c = RootedTree::from_edges(3, 0, &[(1, 2), (2, 0)]).unwrap();
        assert!(a < b && b < c);
    }
}
