//! Fixtures shared by the benchmarks in `benches/`.

use oneloop::rational::int;
use oneloop::KinematicPoint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn bubble_e1() -> KinematicPoint {
    KinematicPoint::from_invariants(
        2,
        vec![vec![int(1), int(-1)], vec![int(-1), int(1)]],
        vec![int(1), int(1)],
    )
    .expect("valid point")
}

/// Seeded Euclidean point with `n` legs in dimension `d`.
pub fn euclidean_point(n: usize, d: usize, seed: u64) -> KinematicPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    oneloop::selftest::random_euclidean_point(&mut rng, n, d)
}
