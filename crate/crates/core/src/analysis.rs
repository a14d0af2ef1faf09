//! Stationary distribution, time reversal, principal minors and the
//! spanning-tree enumeration used to check the matrix-tree identities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, VertexId};
use crate::linalg;
use crate::scalar::Scalar;
use crate::tree::RootedTree;

/// Tolerance used by float-mode identity checks.
pub const FLOAT_CHECK_TOL: f64 = 1e-10;

/// Largest vertex count accepted by the exhaustive tree enumeration.
pub const MAX_ENUMERATION_N: usize = 8;

/// Probability vector indexed by vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    probs: Vec<S>,
}

impl<S: Scalar> Distribution<S> {
    pub fn new(probs: Vec<S>) -> Self {
        Distribution { probs }
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn get(&self, v: VertexId) -> &S {
        &self.probs[v]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(Scalar::to_f64).collect()
    }

    /// Scales a positive vector to sum to one.
    pub fn normalized(weights: Vec<S>) -> Self {
        let total = weights.iter().cloned().fold(S::zero(), |a, b| a + b);
        Distribution {
            probs: weights.into_iter().map(|w| w / total.clone()).collect(),
        }
    }
}

/// Unique invariant distribution, from the linear system `rho Q = (0,..,0,1)`
/// where `Q` is `Id - M` with its last column replaced by ones.
pub fn stationary_distribution<S: Scalar>(m: &MarkovKernel<S>) -> Result<Distribution<S>> {
    let n = m.n();
    // Transposed system: Q^T rho^T = e_n.
    let mut qt = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { S::one() } else { S::zero() };
            let q_ij = if j + 1 == n {
                S::one()
            } else {
                id - m.get(i, j).clone()
            };
            qt[j][i] = q_ij;
        }
    }
    let mut rhs = vec![S::zero(); n];
    rhs[n - 1] = S::one();
    let rho = linalg::solve(qt, rhs).ok_or(Error::Singular)?;
    Ok(Distribution::new(rho))
}

/// Normalized vector of principal minors `det(Id - M^(w))`, which is
/// proportional to the stationary distribution.
pub fn stationary_from_minors<S: Scalar>(m: &MarkovKernel<S>) -> Distribution<S> {
    if m.n() == 1 {
        return Distribution::new(vec![S::one()]);
    }
    Distribution::normalized((0..m.n()).map(|w| principal_minor_det(m, w)).collect())
}

/// Time reversal `Mrev[x][y] = rho_y M[y][x] / rho_x`.
pub fn reversed_kernel<S: Scalar>(m: &MarkovKernel<S>) -> Result<MarkovKernel<S>> {
    let rho = stationary_distribution(m)?;
    reversed_kernel_with(m, &rho)
}

/// Time reversal with a precomputed stationary distribution.
pub fn reversed_kernel_with<S: Scalar>(
    m: &MarkovKernel<S>,
    rho: &Distribution<S>,
) -> Result<MarkovKernel<S>> {
    let n = m.n();
    let entries = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| {
                    if m.get(y, x).is_zero() {
                        S::zero()
                    } else {
                        rho.get(y).clone() * m.get(y, x).clone() / rho.get(x).clone()
                    }
                })
                .collect()
        })
        .collect();
    m.with_entries(entries)
}

/// Detailed balance `rho_a M[a][b] = rho_b M[b][a]` for all pairs.
pub fn is_reversible<S: Scalar>(m: &MarkovKernel<S>) -> Result<bool> {
    let rho = stationary_distribution(m)?;
    let n = m.n();
    for a in 0..n {
        for b in a + 1..n {
            let fwd = rho.get(a).clone() * m.get(a, b).clone();
            let bwd = rho.get(b).clone() * m.get(b, a).clone();
            if !fwd.close_to(&bwd, FLOAT_CHECK_TOL) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `det(Id - M^(r))`, where `M^(r)` drops row and column `r`.
pub fn principal_minor_det<S: Scalar>(m: &MarkovKernel<S>, r: VertexId) -> S {
    let n = m.n();
    let keep: Vec<usize> = (0..n).filter(|&v| v != r).collect();
    let a = keep
        .iter()
        .map(|&i| {
            keep.iter()
                .map(|&j| {
                    let id = if i == j { S::one() } else { S::zero() };
                    id - m.get(i, j).clone()
                })
                .collect()
        })
        .collect();
    S::det(a)
}

/// `prod_{u != root} K[u][parent(u)]`.
pub fn tree_weight<S: Scalar>(t: &RootedTree, k: &MarkovKernel<S>) -> Result<S> {
    let mut acc = S::one();
    for (u, p) in t.edges() {
        let x = k.get(u, p);
        if x.is_zero() {
            return Err(Error::Unsupported { from: u, to: p });
        }
        acc = acc * x.clone();
    }
    Ok(acc)
}

/// All spanning trees rooted at `r` whose edges lie in the support of `m`,
/// in canonical (parent array) order.
pub fn enumerate_rooted_spanning_trees<S: Scalar>(
    m: &MarkovKernel<S>,
    r: VertexId,
) -> Result<Vec<RootedTree>> {
    let n = m.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    if r >= n {
        return Err(Error::VertexOutOfRange(r));
    }
    let order: Vec<VertexId> = (0..n).filter(|&v| v != r).collect();
    let mut parent = vec![None; n];
    let mut out = Vec::new();
    fill_parents(m, r, &order, 0, &mut parent, &mut out);
    Ok(out)
}

fn fill_parents<S: Scalar>(
    m: &MarkovKernel<S>,
    root: VertexId,
    order: &[VertexId],
    idx: usize,
    parent: &mut Vec<Option<VertexId>>,
    out: &mut Vec<RootedTree>,
) {
    if idx == order.len() {
        out.push(RootedTree::from_parts_unchecked(root, parent.clone()));
        return;
    }
    let v = order[idx];
    for &p in m.neighbors(v) {
        if p == v {
            continue;
        }
        // Reject p if following assigned parents from p returns to v.
        let mut cur = p;
        let mut closes_cycle = false;
        while let Some(next) = parent[cur] {
            if next == v {
                closes_cycle = true;
                break;
            }
            cur = next;
        }
        if closes_cycle {
            continue;
        }
        parent[v] = Some(p);
        fill_parents(m, root, order, idx + 1, parent, out);
        parent[v] = None;
    }
}

/// Weighted set of all spanning trees with a given root.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble<S> {
    pub root: VertexId,
    pub trees: Vec<RootedTree>,
    pub weights: Vec<S>,
    pub total: S,
}

impl<S: Scalar> TreeEnsemble<S> {
    /// Enumerates trees on the support of `support` and weights them with
    /// `weights` (typically the same kernel or its reversal).
    pub fn enumerate(
        support: &MarkovKernel<S>,
        root: VertexId,
        weights: &MarkovKernel<S>,
    ) -> Result<Self> {
        let trees = enumerate_rooted_spanning_trees(support, root)?;
        let weights_vec = trees
            .iter()
            .map(|t| tree_weight(t, weights))
            .collect::<Result<Vec<S>>>()?;
        let total = weights_vec.iter().cloned().fold(S::zero(), |a, b| a + b);
        Ok(TreeEnsemble {
            root,
            trees,
            weights: weights_vec,
            total,
        })
    }
}

/// Matrix-tree identities at one root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixTreeReport {
    pub root: String,
    pub det_m: String,
    pub det_mrev: String,
    pub tree_sum_m: String,
    pub tree_sum_mrev: String,
    pub pass: bool,
}

/// Checks `det(Id - M^(r)) = sum_t prod M_e = sum_t prod Mrev_e =
/// det(Id - Mrev^(r))` by enumeration.
pub fn matrix_tree_check<S: Scalar>(
    m: &MarkovKernel<S>,
    r: VertexId,
) -> Result<(MatrixTreeReport, [S; 4])> {
    let mrev = reversed_kernel(m)?;
    let det_m = principal_minor_det(m, r);
    let det_mrev = principal_minor_det(&mrev, r);
    let sum_m = TreeEnsemble::enumerate(m, r, m)?.total;
    let sum_mrev = TreeEnsemble::enumerate(m, r, &mrev)?.total;
    let tol = FLOAT_CHECK_TOL;
    let pass = det_m.close_to(&sum_m, tol)
        && sum_m.close_to(&sum_mrev, tol)
        && sum_mrev.close_to(&det_mrev, tol);
    let report = MatrixTreeReport {
        root: m.label(r).to_string(),
        det_m: det_m.to_string(),
        det_mrev: det_mrev.to_string(),
        tree_sum_m: sum_m.to_string(),
        tree_sum_mrev: sum_mrev.to_string(),
        pass,
    };
    Ok((report, [det_m, det_mrev, sum_m, sum_mrev]))
}
