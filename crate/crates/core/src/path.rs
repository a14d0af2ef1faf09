//! Vertex paths, cover times and the two tree-extraction procedures.

use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, VertexId};
use crate::scalar::Scalar;
use crate::tree::RootedTree;

/// Nonempty vertex sequence `w_0 .. w_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    vertices: Vec<VertexId>,
}

/// Which direction a path's steps are weighted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightConvention {
    /// `prod K[w_i][w_{i+1}]`, the probability of the walk under `K`.
    Forward,
    /// `prod K[w_{i+1}][w_i]`, the weight of the time-reversed walk.
    Reversed,
}

impl Path {
    pub fn new(vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyPath);
        }
        Ok(Path { vertices })
    }

    /// Builds a path and checks every step lies in the kernel support.
    pub fn in_kernel<S: Scalar>(vertices: Vec<VertexId>, kernel: &MarkovKernel<S>) -> Result<Self> {
        let path = Path::new(vertices)?;
        path.check_vertices(kernel.n())?;
        for w in path.vertices.windows(2) {
            if !kernel.in_support(w[0], w[1]) {
                return Err(Error::Unsupported {
                    from: w[0],
                    to: w[1],
                });
            }
        }
        Ok(path)
    }

    /// Parses whitespace- or comma-separated labels.
    pub fn from_labels<S: Scalar>(text: &str, kernel: &MarkovKernel<S>) -> Result<Self> {
        let vertices = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|l| kernel.index_of(l))
            .collect::<Result<Vec<_>>>()?;
        Path::in_kernel(vertices, kernel)
    }

    pub(crate) fn from_vec_unchecked(vertices: Vec<VertexId>) -> Self {
        debug_assert!(!vertices.is_empty());
        Path { vertices }
    }

    pub fn single(v: VertexId) -> Self {
        Path { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Number of steps `m`.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().expect("paths are nonempty")
    }

    pub fn reversed(&self) -> Path {
        let mut v = self.vertices.clone();
        v.reverse();
        Path { vertices: v }
    }

    /// Concatenation `self ⊕ other`, sharing the junction vertex.
    pub fn concat(&self, other: &Path) -> Result<Path> {
        if self.last() != other.first() {
            return Err(Error::Syntax(format!(
                "cannot join a path ending at {} to one starting at {}",
                self.last(),
                other.first()
            )));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        Ok(Path { vertices: v })
    }

    pub fn prefix(&self, steps: usize) -> Path {
        Path {
            vertices: self.vertices[..=steps].to_vec(),
        }
    }

    fn check_vertices(&self, n: usize) -> Result<()> {
        match self.vertices.iter().find(|&&v| v >= n) {
            Some(&v) => Err(Error::VertexOutOfRange(v)),
            None => Ok(()),
        }
    }

    /// Times at which a new vertex is first seen: `tau_1 = 0, tau_2, ...`.
    pub fn cover_times(&self) -> Vec<usize> {
        let mut seen = std::collections::HashSet::new();
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| seen.insert(**v))
            .map(|(i, _)| i)
            .collect()
    }

    /// Prefix ending exactly at the time all `n` vertices have been visited.
    pub fn cover_prefix(&self, n: usize) -> Result<Path> {
        self.check_vertices(n)?;
        let taus = self.cover_times();
        if taus.len() < n {
            return Err(Error::NotCovering {
                visited: taus.len(),
                n,
            });
        }
        Ok(self.prefix(taus[n - 1]))
    }

    /// First-entrance tree on the visited set: rooted at `w_0`, each newly
    /// visited vertex points back to the vertex it was entered from. With
    /// `strict`, a path that does not cover all `n` vertices is an error.
    pub fn first_entrance_tree(&self, n: usize, strict: bool) -> Result<RootedTree> {
        self.check_vertices(n)?;
        let root = self.first();
        let mut parent = vec![None; n];
        let mut visited = vec![false; n];
        visited[root] = true;
        let mut count = 1;
        for w in self.vertices.windows(2) {
            if !visited[w[1]] {
                visited[w[1]] = true;
                parent[w[1]] = Some(w[0]);
                count += 1;
            }
        }
        if strict && count < n {
            return Err(Error::NotCovering { visited: count, n });
        }
        Ok(RootedTree::from_parts_unchecked(root, parent))
    }

    /// Last-exit tree, rooted at the final vertex: start from the tree
    /// reduced to `z_0`; at each step add the edge `(z_k, z_{k+1})` then
    /// delete the outgoing edge of `z_{k+1}`.
    pub fn last_exit_tree(&self, n: usize) -> Result<RootedTree> {
        self.check_vertices(n)?;
        let mut tree = RootedTree::singleton(n, self.first());
        for w in self.vertices.windows(2) {
            tree.set_parent(w[0], Some(w[1]));
            tree.set_parent(w[1], None);
            tree.set_root(w[1]);
        }
        Ok(tree)
    }

    /// Product of step weights under `kernel` in the given direction.
    pub fn weight<S: Scalar>(
        &self,
        kernel: &MarkovKernel<S>,
        convention: WeightConvention,
    ) -> Result<S> {
        self.check_vertices(kernel.n())?;
        let mut acc = S::one();
        for w in self.vertices.windows(2) {
            let (a, b) = match convention {
                WeightConvention::Forward => (w[0], w[1]),
                WeightConvention::Reversed => (w[1], w[0]),
            };
            let x = kernel.get(a, b);
            if x.is_zero() {
                return Err(Error::Unsupported { from: a, to: b });
            }
            acc = acc * x.clone();
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn p(v: &[usize]) -> Path {
        Path::new(v.to_vec()).unwrap()
    }

    fn three_state() -> MarkovKernel<Rational> {
        let q = Rational::from_ratio;
        MarkovKernel::from_rows(vec![
            vec![q(0, 1), q(1, 3), q(2, 3)],
            vec![q(1, 5), q(0, 1), q(4, 5)],
            vec![q(1, 7), q(6, 7), q(0, 1)],
        ])
        .unwrap()
    }

    // v0..v6 as indices 0..6.
    const SEVEN_VERTEX_WALK: [usize; 19] = [0, 3, 0, 1, 0, 1, 0, 3, 0, 3, 4, 5, 4, 6, 4, 3, 4, 5, 2];

    #[test]
    fn empty_path_is_rejected() {
        assert_eq!(Path::new(vec![]), Err(Error::EmptyPath));
    }

    #[test]
    fn fet_of_single_step() {
        let t = p(&[0, 1]).first_entrance_tree(2, true).unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(t.parent(1), Some(0));
    }

    #[test]
    fn fet_of_reference_walk() {
        let t = p(&SEVEN_VERTEX_WALK).first_entrance_tree(7, true).unwrap();
        let expected =
            RootedTree::from_edges(7, 0, &[(3, 0), (1, 0), (4, 3), (5, 4), (6, 4), (2, 5)])
                .unwrap();
        assert_eq!(t, expected);
    }

    #[test]
    fn fet_and_let_hand_traces() {
        let w = p(&[0, 1, 0, 2]);
        let fet = w.first_entrance_tree(3, true).unwrap();
        assert_eq!(fet, RootedTree::from_edges(3, 0, &[(1, 0), (2, 0)]).unwrap());
        let let_tree = w.last_exit_tree(3).unwrap();
        assert_eq!(
            let_tree,
            RootedTree::from_edges(3, 2, &[(1, 0), (0, 2)]).unwrap()
        );
        let one = p(&[0, 1]).last_exit_tree(2).unwrap();
        assert_eq!(one, RootedTree::from_edges(2, 1, &[(0, 1)]).unwrap());
    }

    #[test]
    fn strict_fet_requires_cover() {
        assert_eq!(
            p(&[0, 1]).first_entrance_tree(3, true),
            Err(Error::NotCovering { visited: 2, n: 3 })
        );
        let t = p(&[0, 1]).first_entrance_tree(3, false).unwrap();
        assert_eq!(t.vertex_count(), 2);
    }

    #[test]
    fn cover_prefix_cases() {
        assert_eq!(p(&[0, 1, 0, 2, 1]).cover_prefix(3).unwrap(), p(&[0, 1, 0, 2]));
        assert!(matches!(
            p(&[0, 1]).cover_prefix(3),
            Err(Error::NotCovering { .. })
        ));
        assert_eq!(p(&SEVEN_VERTEX_WALK).cover_prefix(7).unwrap(), p(&SEVEN_VERTEX_WALK));
    }

    #[test]
    fn path_weights() {
        let m = three_state();
        let q = Rational::from_ratio;
        assert_eq!(p(&[0]).weight(&m, WeightConvention::Forward).unwrap(), q(1, 1));
        assert_eq!(
            p(&[0, 1, 2]).weight(&m, WeightConvention::Forward).unwrap(),
            q(4, 15)
        );
        assert_eq!(
            p(&[0, 1, 2]).weight(&m, WeightConvention::Reversed).unwrap(),
            q(1, 5) * q(6, 7)
        );
        assert_eq!(
            p(&[0, 0]).weight(&m, WeightConvention::Forward),
            Err(Error::Unsupported { from: 0, to: 0 })
        );
    }

    #[test]
    fn labels_and_support() {
        let m = three_state();
        let w = Path::from_labels("1 2, 3", &m).unwrap();
        assert_eq!(w.vertices(), &[0, 1, 2]);
        assert!(Path::from_labels("1 1", &m).is_err());
        assert!(Path::from_labels("1 9", &m).is_err());
    }

    #[test]
    fn concat_requires_matching_junction() {
        assert_eq!(p(&[0, 1]).concat(&p(&[1, 2])).unwrap(), p(&[0, 1, 2]));
        assert!(p(&[0, 1]).concat(&p(&[2])).is_err());
    }
}
