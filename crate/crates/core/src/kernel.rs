//! Markov kernels on a labelled vertex set, the JSON kernel file format and a
//! random rational kernel generator.

use std::collections::HashSet;
use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{is_decimal_literal, Rational, Scalar};

/// Vertices are indices `0..n`; labels live on the kernel.
pub type VertexId = usize;

/// Row-stochastic matrix with symmetric, connected support.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel<S> {
    labels: Vec<String>,
    entries: Vec<Vec<S>>,
    neighbors: Vec<Vec<VertexId>>,
}

/// On-disk kernel: `{"labels": [...], "rows": [["0","1/3",...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFile {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A kernel loaded in whichever mode its file called for.
#[derive(Debug, Clone)]
pub enum AnyKernel {
    Exact(MarkovKernel<Rational>),
    Float(MarkovKernel<f64>),
}

impl AnyKernel {
    pub fn n(&self) -> usize {
        match self {
            AnyKernel::Exact(k) => k.n(),
            AnyKernel::Float(k) => k.n(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyKernel::Exact(_))
    }

    /// Float view of the kernel (exact kernels are converted entry-wise).
    pub fn to_float(&self) -> MarkovKernel<f64> {
        match self {
            AnyKernel::Exact(k) => k.to_float(),
            AnyKernel::Float(k) => k.clone(),
        }
    }
}

/// Parses kernel file content. Files whose entries are all fractions or
/// integers load exactly; any decimal literal switches the kernel to float
/// mode.
pub fn parse_kernel(text: &str) -> Result<AnyKernel> {
    let file = parse_kernel_file(text)?;
    let decimal = file.rows.iter().flatten().any(|e| is_decimal_literal(e));
    if decimal {
        MarkovKernel::from_file(&file).map(AnyKernel::Float)
    } else {
        MarkovKernel::from_file(&file).map(AnyKernel::Exact)
    }
}

/// Parses kernel file content forcing the numeric mode.
pub fn parse_kernel_as<S: Scalar>(text: &str) -> Result<MarkovKernel<S>> {
    MarkovKernel::from_file(&parse_kernel_file(text)?)
}

fn parse_kernel_file(text: &str) -> Result<KernelFile> {
    serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))
}

impl<S: Scalar> MarkovKernel<S> {
    /// Validates and builds a kernel.
    pub fn new(labels: Vec<String>, entries: Vec<Vec<S>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if labels.len() != n {
            return Err(Error::Syntax(format!(
                "{} labels for {} rows",
                labels.len(),
                n
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        for (row, r) in entries.iter().enumerate() {
            if r.len() != n {
                return Err(Error::RowLength {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
            for (col, x) in r.iter().enumerate() {
                if *x < S::zero() {
                    return Err(Error::NegativeEntry { row, col });
                }
            }
            let sum = r.iter().cloned().fold(S::zero(), |a, b| a + b);
            if !sum.close_to(&S::one(), 1e-12) {
                return Err(Error::RowSum {
                    row,
                    label: labels[row].clone(),
                    sum: sum.to_string(),
                });
            }
        }
        for a in 0..n {
            for b in 0..n {
                if entries[a][b].is_zero() && entries[b][a].is_positive() {
                    return Err(Error::AsymmetricSupport {
                        row: a,
                        col: b,
                        row_label: labels[a].clone(),
                        col_label: labels[b].clone(),
                    });
                }
            }
        }
        let neighbors: Vec<Vec<VertexId>> = entries
            .iter()
            .map(|r| (0..n).filter(|&b| r[b].is_positive()).collect())
            .collect();

        let mut reached = vec![false; n];
        reached[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &v in &neighbors[u] {
                if !reached[v] {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if let Some(col) = reached.iter().position(|r| !r) {
            return Err(Error::Disconnected {
                col,
                label: labels[col].clone(),
            });
        }

        Ok(MarkovKernel {
            labels,
            entries,
            neighbors,
        })
    }

    /// Builds a kernel with labels `"1"..="n"`.
    pub fn from_rows(entries: Vec<Vec<S>>) -> Result<Self> {
        let labels = (1..=entries.len()).map(|i| i.to_string()).collect();
        Self::new(labels, entries)
    }

    pub fn from_file(file: &KernelFile) -> Result<Self> {
        let mut entries = Vec::with_capacity(file.rows.len());
        for (row, r) in file.rows.iter().enumerate() {
            let mut parsed = Vec::with_capacity(r.len());
            for (col, text) in r.iter().enumerate() {
                let x = S::parse_entry(text).ok_or_else(|| Error::BadEntry {
                    row,
                    col,
                    text: text.clone(),
                })?;
                parsed.push(x);
            }
            entries.push(parsed);
        }
        Self::new(file.labels.clone(), entries)
    }

    pub fn to_file(&self) -> KernelFile {
        KernelFile {
            labels: self.labels.clone(),
            rows: self
                .entries
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn index_of(&self, label: &str) -> Result<VertexId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    #[inline]
    pub fn get(&self, a: VertexId, b: VertexId) -> &S {
        &self.entries[a][b]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.entries
    }

    /// Support neighbours of `a` (including `a` itself on a self-loop), in
    /// increasing index order.
    pub fn neighbors(&self, a: VertexId) -> &[VertexId] {
        &self.neighbors[a]
    }

    pub fn in_support(&self, a: VertexId, b: VertexId) -> bool {
        self.entries[a][b].is_positive()
    }

    /// Same labels, entries replaced; the result is re-validated.
    pub fn with_entries(&self, entries: Vec<Vec<S>>) -> Result<Self> {
        Self::new(self.labels.clone(), entries)
    }

    pub fn to_float(&self) -> MarkovKernel<f64> {
        MarkovKernel {
            labels: self.labels.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64).collect())
                .collect(),
            neighbors: self.neighbors.clone(),
        }
    }

    /// 64-bit FNV-1a of the canonical (compact JSON) serialization.
    pub fn content_hash(&self) -> u64 {
        let canonical =
            serde_json::to_string(&self.to_file()).expect("kernel file always serializes");
        fnv1a(canonical.as_bytes())
    }

    pub fn content_hash_hex(&self) -> String {
        format!("{:016x}", self.content_hash())
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// Options for [`random_rational_kernel`].
#[derive(Debug, Clone, Copy)]
pub struct RandomKernelOptions {
    /// Probability of each non-tree pair being an edge.
    pub edge_prob: f64,
    /// Probability of a self-loop at each vertex.
    pub loop_prob: f64,
    /// Edge weights are drawn uniformly from `1..=max_weight`.
    pub max_weight: u32,
}

impl Default for RandomKernelOptions {
    fn default() -> Self {
        RandomKernelOptions {
            edge_prob: 0.5,
            loop_prob: 0.2,
            max_weight: 9,
        }
    }
}

/// Random exact kernel: a random connected symmetric support (random
/// recursive tree plus extra edges), small positive integer weights per
/// ordered pair, rows normalized exactly. Weights are drawn independently in
/// each direction so the result is generally not reversible.
pub fn random_rational_kernel<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    opts: RandomKernelOptions,
) -> MarkovKernel<Rational> {
    assert!(n >= 1);
    let mut adj = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        adj[u][v] = true;
        adj[v][u] = true;
    }
    for a in 0..n {
        for b in a + 1..n {
            if !adj[a][b] && rng.gen_bool(opts.edge_prob) {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        if n == 1 || rng.gen_bool(opts.loop_prob) {
            adj[a][a] = true;
        }
    }
    let entries = adj
        .iter()
        .map(|row| {
            let w: Vec<i64> = row
                .iter()
                .map(|&e| {
                    if e {
                        rng.gen_range(1..=opts.max_weight) as i64
                    } else {
                        0
                    }
                })
                .collect();
            let total: i64 = w.iter().sum();
            w.iter().map(|&x| Rational::from_ratio(x, total)).collect()
        })
        .collect();
    MarkovKernel::from_rows(entries).expect("generated kernel is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const THREE_STATE: &str = r#"{"labels": ["1","2","3"],
        "rows": [["0","1/3","2/3"],["1/5","0","4/5"],["1/7","6/7","0"]]}"#;

    #[test]
    fn loads_three_vertex_kernel_exactly() {
        let k = parse_kernel(THREE_STATE).unwrap();
        let AnyKernel::Exact(k) = k else {
            panic!("expected exact mode")
        };
        assert_eq!(k.n(), 3);
        assert_eq!(*k.get(1, 2), Rational::from_ratio(4, 5));
        assert_eq!(k.neighbors(0), &[1, 2]);
        assert_eq!(k.index_of("3").unwrap(), 2);
    }

    #[test]
    fn two_cycle_is_valid() {
        let k = parse_kernel(r#"{"labels":["a","b"],"rows":[["0","1"],["1","0"]]}"#).unwrap();
        assert!(k.is_exact());
        assert_eq!(k.n(), 2);
    }

    #[test]
    fn asymmetric_support_is_rejected() {
        let err =
            parse_kernel(r#"{"labels":["1","2"],"rows":[["0","1"],["0","1"]]}"#).unwrap_err();
        assert_eq!(
            err,
            Error::AsymmetricSupport {
                row: 1,
                col: 0,
                row_label: "2".into(),
                col_label: "1".into()
            }
        );
    }

    #[test]
    fn row_sum_and_connectivity_errors() {
        let err = parse_kernel(r#"{"labels":["1","2"],"rows":[["0","1/2"],["1","0"]]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::RowSum { row: 0, .. }));

        let err = parse_kernel(
            r#"{"labels":["1","2","3"],"rows":[["1","0","0"],["0","0","1"],["0","1","0"]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Disconnected { col: 1, .. }));

        let err = parse_kernel(r#"{"labels":["1"],"rows":[["x"]]}"#).unwrap_err();
        assert!(matches!(err, Error::BadEntry { row: 0, col: 0, .. }));

        assert!(matches!(parse_kernel("{"), Err(Error::Syntax(_))));
    }

    #[test]
    fn decimals_load_in_float_mode() {
        let k = parse_kernel(r#"{"labels":["a","b"],"rows":[["0.5","0.5"],["0.25","0.75"]]}"#)
            .unwrap();
        assert!(!k.is_exact());
        let exact: MarkovKernel<Rational> =
            parse_kernel_as(r#"{"labels":["a","b"],"rows":[["0.5","0.5"],["0.25","0.75"]]}"#)
                .unwrap();
        assert_eq!(*exact.get(1, 0), Rational::from_ratio(1, 4));
    }

    #[test]
    fn hash_is_canonical() {
        let a = parse_kernel_as::<Rational>(THREE_STATE).unwrap();
        let b = parse_kernel_as::<Rational>(
            r#"{"labels": ["1","2","3"],
            "rows": [["0","2/6","2/3"],["1/5","0","8/10"],["1/7","6/7","0/3"]]}"#,
        )
        .unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn random_kernels_are_valid_rational_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=7 {
            let k = random_rational_kernel(n, &mut rng, RandomKernelOptions::default());
            assert_eq!(k.n(), n);
            for row in k.rows() {
                assert_eq!(row.iter().cloned().sum::<Rational>(), Rational::from_ratio(1, 1));
            }
        }
    }
}
