//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xordisc::pointset::generate_bitrev_net;
use xordisc::PointSet;

/// `n` uniform points in `d` dimensions at 32-bit precision, fixed by `seed`.
pub fn random_set(d: usize, n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::random(d, n, 32, &mut rng).expect("fixture parameters are valid")
}

/// The `2^s`-point bit-reversal net.
pub fn bitrev(s: u32) -> PointSet {
    generate_bitrev_net(s).expect("fixture parameters are valid")
}
