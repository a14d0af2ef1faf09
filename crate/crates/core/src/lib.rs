//! Rooted spanning trees of Markov kernels: the generalized Aldous-Broder
//! sampler for irreducible, not necessarily reversible, kernels, together
//! with exact oracles (time reversal, matrix-tree determinants, first-entrance
//! dynamic programming) and the heap-of-cycles and golf-sequence encodings
//! used to verify the sampled law combinatorially.

pub mod analysis;
pub mod error;
pub mod golf;
pub mod heaps;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod path;
pub mod sampling;
pub mod scalar;
pub mod tree;

pub use analysis::{
    enumerate_rooted_spanning_trees, is_reversible, matrix_tree_check, principal_minor_det,
    reversed_kernel, stationary_distribution, tree_weight, Distribution, TreeEnsemble,
};
pub use error::{Error, Result};
pub use kernel::{parse_kernel, parse_kernel_as, AnyKernel, KernelFile, MarkovKernel, VertexId};
pub use path::{Path, WeightConvention};
pub use scalar::{Rational, Scalar};
pub use tree::RootedTree;
pub use sampling::{
    sample_batch, walk_until_cover, wilson_sample, AldousBroder, RandomSource, SampleBatch,
    StartMode, StepTable,
};
pub use heaps::{
    cycle_decomposition, enumerate_heaps_of_cycles, heap_decode, heap_encode, pair_involution,
    pop_cycle, tree_heap, trivial_signed_sum, xi_membership, Cycle, HeapCollection, Passport,
    PassportFamily,
};
pub use golf::{
    decompose_truncated_heap, free_hole, golf_config_for_tree, golf_heap_decode, golf_heap_encode,
    is_golf_sequence, stochastic_golf, truncated_fet_probability, GolfConfig, GolfSequence,
    XiWitness,
};
pub use oracle::{
    compare_batch, compare_exact, exact_fet_distribution, forward_weight_distribution,
    stationary_joint_distribution, theorem_distribution, ComparisonReport, ExactDistribution,
};
