#![allow(dead_code)]

use abtree::heaps::simple_cycles;
use abtree::kernel::{random_rational_kernel, RandomKernelOptions};
use abtree::{Cycle, HeapCollection, MarkovKernel, Path, Rational, Scalar, StepTable};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

pub fn three_state() -> MarkovKernel<Rational> {
    MarkovKernel::from_rows(vec![
        vec![q(0, 1), q(1, 3), q(2, 3)],
        vec![q(1, 5), q(0, 1), q(4, 5)],
        vec![q(1, 7), q(6, 7), q(0, 1)],
    ])
    .unwrap()
}

pub fn random_kernel<R: Rng>(n: usize, rng: &mut R) -> MarkovKernel<Rational> {
    random_rational_kernel(n, rng, RandomKernelOptions::default())
}

/// Walk of exactly `steps` steps from `start`.
pub fn random_walk<R: Rng>(table: &StepTable, start: usize, steps: usize, rng: &mut R) -> Path {
    let mut v = vec![start];
    let mut cur = start;
    for _ in 0..steps {
        cur = table.step(cur, rng);
        v.push(cur);
    }
    Path::new(v).unwrap()
}

/// Balanced collection avoiding `f`: `k` random cycles stacked, then every
/// heap shuffled.
pub fn random_heap_of_cycles<R: Rng>(
    m: &MarkovKernel<Rational>,
    f: Option<usize>,
    k: usize,
    rng: &mut R,
) -> HeapCollection {
    let cycles = simple_cycles(m, f).unwrap();
    let mut h = HeapCollection::empty(m.n());
    if cycles.is_empty() {
        return h;
    }
    for _ in 0..k {
        cycles.choose(rng).unwrap().push_onto(&mut h);
    }
    let mut heaps: Vec<Vec<usize>> = h.heaps().to_vec();
    if rng.gen_bool(0.5) {
        for heap in &mut heaps {
            heap.shuffle(rng);
        }
    }
    HeapCollection::from_heaps(heaps).unwrap()
}

/// Random family of pairwise disjoint cycles avoiding `f`.
pub fn random_trivial<R: Rng>(m: &MarkovKernel<Rational>, f: Option<usize>, rng: &mut R) -> Vec<Cycle> {
    let mut cycles = simple_cycles(m, f).unwrap();
    cycles.shuffle(rng);
    let mut out: Vec<Cycle> = Vec::new();
    for c in cycles {
        if rng.gen_bool(0.5) && !out.iter().any(|d| d.intersects(&c)) {
            out.push(c);
        }
    }
    out.sort();
    out
}
