#![allow(dead_code)]

pub mod oracle;

use oracle::Pts;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xordisc::PointSet;

pub fn pts(d: &PointSet) -> Pts {
    Pts { d: d.dim(), w: d.precision(), rows: d.rows().map(|r| r.to_vec()).collect() }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random subset of `Q^d(2^w)` with `n` points drawn independently (repeats allowed).
pub fn random_set(r: &mut impl Rng, d: usize, n: usize, w: u32) -> PointSet {
    PointSet::random(d, n, w, r).unwrap()
}
