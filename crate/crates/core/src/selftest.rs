//! Oracle suites shared by the `selftest` command and the test harness.

use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coaction;
use crate::graphs::{self, CutQuotientGraph, EdgeSet};
use crate::integrator::{self, IntegralSpec, Method};
use crate::kinematics::{self, GramIndex, KinematicPoint};
use crate::linalg::Matrix;
use crate::motive::{self, Variant};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestOptions {
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    /// Replace the residue sign by a broken convention, to check that the
    /// anticommutation suite notices.
    pub mutate_residue_sign: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            n_min: 2,
            n_max: 8,
            seed: 2024,
            mutate_residue_sign: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    pub millis: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }
}

fn suite(name: &'static str, body: impl FnOnce(&mut Tally)) -> SuiteResult {
    let start = Instant::now();
    let mut t = Tally::default();
    body(&mut t);
    SuiteResult {
        name,
        passed: t.failures.is_empty(),
        checks: t.checks,
        failures: t.failures,
        millis: start.elapsed().as_millis(),
    }
}

pub fn run(opts: &SelftestOptions) -> SelftestReport {
    let clip = |lo: usize, hi: usize| opts.n_min.max(lo)..=opts.n_max.min(hi);
    let suites = vec![
        suite("gram_coordinates", |t| gram_coordinates(t, clip(1, 6), opts.seed)),
        suite("residue_anticommutation", |t| {
            residue_anticommutation(t, clip(1, 6), opts.mutate_residue_sign)
        }),
        suite("rank_identities", |t| rank_identities(t, clip(1, 10))),
        suite("spectral_sequence", |t| spectral_sequence(t, clip(1, 7))),
        suite("coassociativity", |t| coassociativity(t, clip(2, 8))),
        suite("character_paths", |t| character_paths(t, clip(2, 6), opts.seed)),
        suite("lorentzian_gram_sign", |t| lorentzian_sign(t, clip(1, 6), opts.seed)),
        suite("integrator_identities", integrator_identities),
    ];
    SelftestReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

/// `<(K, K+, K-), (K', K'+, K'-)> = 2 K.K' - (K+ K'- + K- K'+)`.
pub fn embedding_inner(a: &[Rational], b: &[Rational]) -> Rational {
    let d = a.len() - 2;
    let mut acc = Rational::zero();
    for i in 0..d {
        acc += &a[i] * &b[i] * int(2);
    }
    acc - (&a[d] * &b[d + 1] + &a[d + 1] * &b[d])
}

/// `u_i = (p_{1,i}, -(p_{1,i}^2 + m_i^2), -1)` and `u_inf = (0, -1, 0)`.
pub fn embedding_vectors(p: &[Vec<Rational>], m2: &[Rational]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let d = p[0].len();
    let mut partial = vec![Rational::zero(); d];
    let mut us = vec![];
    for (pi, mi) in p.iter().zip(m2) {
        for (a, x) in partial.iter_mut().zip(pi) {
            *a += x;
        }
        let sq = partial.iter().fold(Rational::zero(), |acc, x| acc + x * x);
        let mut u = partial.clone();
        u.push(-(sq + mi));
        u.push(int(-1));
        us.push(u);
    }
    let mut inf = vec![Rational::zero(); d];
    inf.push(int(-1));
    inf.push(int(0));
    (us, inf)
}

/// Gram matrix of explicit embedding vectors on `idx`.
pub fn explicit_gram(p: &[Vec<Rational>], m2: &[Rational], idx: &[GramIndex]) -> Matrix {
    let (us, inf) = embedding_vectors(p, m2);
    let vec_of = |g: &GramIndex| match g {
        GramIndex::Edge(e) => &us[e - 1],
        GramIndex::Infinity => &inf,
    };
    Matrix::from_fn(idx.len(), idx.len(), |a, b| {
        embedding_inner(vec_of(&idx[a]), vec_of(&idx[b]))
    })
}

fn random_rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    let den = rng.random_range(1..=3i64);
    ratio(rng.random_range(-bound * den..=bound * den), den)
}

/// `n` rational momenta in `Q^d` with entries in `[-bound, bound]`,
/// summing to zero, and positive rational masses.
pub fn random_momenta<R: Rng>(rng: &mut R, n: usize, d: usize, bound: i64) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let b = ratio(bound, 1);
    loop {
        let mut p: Vec<Vec<Rational>> = (0..n.saturating_sub(1))
            .map(|_| (0..d).map(|_| random_rational(rng, bound)).collect())
            .collect();
        let last: Vec<Rational> = (0..d)
            .map(|a| -p.iter().fold(Rational::zero(), |acc, v| acc + &v[a]))
            .collect();
        if last.iter().all(|x| x.abs() <= b) {
            p.push(last);
            let m2 = (0..n)
                .map(|_| ratio(rng.random_range(1..=20), rng.random_range(1..=4)))
                .collect();
            return (p, m2);
        }
    }
}

/// A seeded Euclidean, generic point with `n` legs in dimension `d`.
pub fn random_euclidean_point<R: Rng>(rng: &mut R, n: usize, d: usize) -> KinematicPoint {
    loop {
        let (p, m2) = random_momenta(rng, n, d, 5);
        let k = KinematicPoint::from_momenta(d, &p, m2).expect("conserved momenta");
        if kinematics::is_euclidean(&k, d).map(|r| r.is_euclidean).unwrap_or(false) {
            return k;
        }
    }
}

/// Edge entries of the Gram matrix must agree exactly; entries against
/// `u_inf` agree up to the overall sign of `u_inf`, which does not affect
/// any determinant.
pub fn gram_matches_coordinates(k: &KinematicPoint, p: &[Vec<Rational>], m2: &[Rational], idx: &[GramIndex]) -> bool {
    let from_invariants = match k.gram_matrix(idx) {
        Ok(g) => g,
        Err(_) => return false,
    };
    let explicit = explicit_gram(p, m2, idx);
    for a in 0..idx.len() {
        for b in 0..idx.len() {
            let lhs = from_invariants.matrix.get(a, b);
            let rhs = explicit.get(a, b);
            let inf_row = (idx[a] == GramIndex::Infinity) != (idx[b] == GramIndex::Infinity);
            let ok = if inf_row { *lhs == -rhs.clone() } else { lhs == rhs };
            if !ok {
                return false;
            }
        }
    }
    from_invariants.det == explicit.determinant()
}

fn all_gram_subsets(n: usize) -> Vec<Vec<GramIndex>> {
    kinematics::gram_subsets(n, n + 1)
        .into_iter()
        .map(|(e, inf)| {
            if inf {
                GramIndex::with_infinity(e)
            } else {
                GramIndex::edges(e)
            }
        })
        .collect()
}

fn gram_coordinates(t: &mut Tally, ns: std::ops::RangeInclusive<usize>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in ns {
        for round in 0..10 {
            let d = 1 + round % 4;
            let (p, m2) = random_momenta(&mut rng, n, d, 5);
            let k = KinematicPoint::from_momenta(d, &p, m2.clone()).expect("conserved");
            for idx in all_gram_subsets(n) {
                t.check(gram_matches_coordinates(&k, &p, &m2, &idx), || {
                    format!("n={n} d={d} subset {idx:?}")
                });
            }
        }
    }
}

fn mutated_sign(order: &[usize]) -> i8 {
    // parity of adjacent descents: wrong for non-adjacent transpositions
    let descents = order.windows(2).filter(|w| w[0] > w[1]).count();
    if descents % 2 == 0 {
        1
    } else {
        -1
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = vec![];
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn residue_anticommutation(t: &mut Tally, ns: std::ops::RangeInclusive<usize>, mutate: bool) {
    let sign = |o: &[usize]| {
        if mutate {
            mutated_sign(o)
        } else {
            graphs::residue_sign(o).expect("distinct edges")
        }
    };
    for n in ns {
        let gon = CutQuotientGraph::n_gon(n).expect("n >= 1");
        for cuts in EdgeSet::full(n).subsets().filter(|s| s.len() <= 4) {
            for order in permutations(&cuts.to_vec()) {
                for i in 0..order.len() {
                    for j in i + 1..order.len() {
                        let mut swapped = order.clone();
                        swapped.swap(i, j);
                        t.check(sign(&order) == -sign(&swapped), || {
                            format!("orders {order:?} and {swapped:?} do not anticommute")
                        });
                    }
                }
            }
        }
        for a in 1..=n {
            for b in 1..=n {
                if a == b {
                    continue;
                }
                let one = gon.pinch(a).and_then(|g| g.cut(b));
                let other = gon.cut(b).and_then(|g| g.pinch(a));
                t.check(one == other, || format!("n={n}: pinch {a} and cut {b} do not commute"));
                let pp = gon.pinch(a).and_then(|g| g.pinch(b));
                let qq = gon.pinch(b).and_then(|g| g.pinch(a));
                t.check(pp == qq, || format!("n={n}: pinches {a}, {b} do not commute"));
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        0
    } else {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}

fn rank_identities(t: &mut Tally, ns: std::ops::RangeInclusive<usize>) {
    for n in ns {
        let gon = CutQuotientGraph::n_gon(n).expect("n >= 1");
        let rank = |v| motive::weight_pieces(&gon, v, None).expect("structure").rank;
        let (red, full, quo) = (rank(Variant::Reduced), rank(Variant::Full), rank(Variant::Quotient));
        t.check(red == 1 << (n - 1), || format!("n={n}: reduced rank {red}"));
        t.check(full == (1 << n) - 1, || format!("n={n}: full rank {full}"));
        t.check(full == red + quo, || format!("n={n}: {full} != {red} + {quo}"));
        let basis = motive::de_rham_basis(&gon, Variant::Full, Some(1)).map(|b| b.len());
        t.check(basis == Ok(full), || {
            format!("n={n}: de Rham basis {basis:?} vs rank {full}")
        });
        for v in Variant::ALL {
            let m = motive::weight_pieces(&gon, v, None).expect("structure");
            t.check(m.ranks_by_weight() == motive::minus_part_gr_ranks(n, v), || {
                format!("n={n} {v}: weight multiplicities disagree with closed form")
            });
        }
        if n >= 2 {
            let (top_full, bottom_full, top_rank_full) = motive::weight_bounds(&gon, Variant::Full);
            let (top_red, bottom_red, top_rank_red) = motive::weight_bounds(&gon, Variant::Reduced);
            t.check(top_full == 2 * ((n + 1) / 2), || {
                format!("n={n}: full top weight {top_full}")
            });
            t.check(top_red == 2 * (n / 2), || {
                format!("n={n}: reduced top weight {top_red}")
            });
            t.check(bottom_full == 1 && bottom_red == 1, || format!("n={n}: bottom ranks"));
            let top_rank = if n % 2 == 0 { top_rank_red } else { top_rank_full };
            t.check(top_rank == 1, || format!("n={n}: top weight rank {top_rank}"));
        }
    }
}

fn spectral_sequence(t: &mut Tally, ns: std::ops::RangeInclusive<usize>) {
    for n in ns {
        for d in [2, 4, 6, 8] {
            let ranks = motive::plus_part_cohomology_ranks(n, d);
            for (k, &r) in ranks.iter().enumerate() {
                t.check(r == binomial(n - 1, k), || format!("n={n} d={d}: H^{k} has rank {r}"));
            }
        }
    }
}

fn coassociativity(t: &mut Tally, ns: std::ops::RangeInclusive<usize>) {
    for n in ns {
        match coaction::check_coassociativity(n) {
            Ok(r) => t.check(r.holds, || format!("n={n}: {}", r.counterexample.unwrap_or_default())),
            Err(e) => t.check(false, || format!("n={n}: {e}")),
        }
        if n % 2 == 0 {
            let c = coaction::coaction(n).expect("n >= 2");
            t.check(c.len() == 1 << (n - 1), || format!("n={n}: {} coaction terms", c.len()));
        } else {
            let base = coaction::coaction_with_j(n, 1).expect("n >= 2");
            for j in 2..=n {
                t.check(coaction::coaction_with_j(n, j).as_ref() == Ok(&base), || {
                    format!("n={n}: j={j} changes the coaction")
                });
            }
        }
    }
}

fn character_paths(t: &mut Tally, ns: std::ops::RangeInclusive<usize>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for n in ns {
        for _ in 0..3 {
            let d = motive::relevant_dimension(n);
            let k = random_euclidean_point(&mut rng, n, d.min(4));
            for idx in all_gram_subsets(n)
                .into_iter()
                .filter(|i| i.len() % 2 == 0 && i.len() <= 6)
            {
                let a = motive::square_class(&k, &idx);
                let b = motive::square_class_via_discriminant(&k, &idx);
                t.check(a == b, || format!("n={n} subset {idx:?}: {a:?} vs {b:?}"));
            }
        }
    }
}

fn lorentzian_sign(t: &mut Tally, ns: std::ops::RangeInclusive<usize>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x10e);
    for n in ns {
        for d in [2, 4] {
            let k = random_euclidean_point(&mut rng, n, d);
            for idx in all_gram_subsets(n).into_iter().filter(|i| i.len() <= d + 1) {
                let g = k.gram_det(&idx).expect("valid subset");
                t.check(g.is_negative(), || format!("n={n} d={d} subset {idx:?}: G = {g}"));
            }
        }
    }
}

fn integrator_identities(t: &mut Tally) {
    let tadpole = |m2: Rational| KinematicPoint::from_invariants(1, vec![vec![int(0)]], vec![m2]).expect("tadpole");
    let one = CutQuotientGraph::n_gon(1).expect("tadpole");
    for (d, m2) in [(2, ratio(1, 1)), (2, ratio(4, 1)), (4, ratio(25, 4))] {
        let expect = integrator::single_propagator_value(d, crate::rational::to_f64(&m2));
        let spec = IntegralSpec::new(one, d, vec![d as u32], tadpole(m2.clone())).with_tol(1e-6);
        match integrator::integrate(&spec) {
            Ok(r) => t.check((r.value - expect).abs() <= 1e-5 * expect, || {
                format!("d={d} m2={m2}: {} vs {expect}", r.value)
            }),
            Err(e) => t.check(false, || format!("d={d}: {e}")),
        }
    }
    let e1 = KinematicPoint::from_invariants(
        2,
        vec![vec![int(1), int(-1)], vec![int(-1), int(1)]],
        vec![int(1), int(1)],
    )
    .expect("bubble point");
    let bubble = IntegralSpec::new(CutQuotientGraph::n_gon(2).expect("bubble"), 2, vec![1, 1], e1);
    match integrator::check_homogeneity(&bubble.clone().with_tol(1e-8), &int(4)) {
        Ok(r) => t.check(r.rel_error <= 1e-5, || format!("homogeneity: {r:?}")),
        Err(e) => t.check(false, || format!("homogeneity: {e}")),
    }
    let quad = integrator::integrate(&bubble.clone().with_tol(1e-8));
    let qmc = integrator::integrate(&bubble.with_method(Method::QuasiMonteCarlo).with_tol(1e-6).with_seed(1));
    match (quad, qmc) {
        (Ok(a), Ok(b)) => t.check((a.value - b.value).abs() <= 1e-4 * a.value, || {
            format!("backends: {} vs {}", a.value, b.value)
        }),
        _ => t.check(false, || "backend evaluation failed".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let r = run(&SelftestOptions {
            n_max: 5,
            ..Default::default()
        });
        for s in &r.suites {
            assert!(s.passed, "{}: {:?}", s.name, s.failures);
        }
        assert!(r.passed);
    }

    #[test]
    fn mutation_is_detected() {
        let r = run(&SelftestOptions {
            n_max: 4,
            mutate_residue_sign: true,
            ..Default::default()
        });
        assert!(!r.passed);
        let failed: Vec<_> = r.suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
        assert_eq!(failed, vec!["residue_anticommutation"]);
    }

    #[test]
    fn coordinates_for_a_known_point() {
        let p = vec![vec![int(1), int(0)], vec![int(1), int(1)], vec![int(-2), int(-1)]];
        let m2 = vec![int(1), int(1), int(1)];
        let k = KinematicPoint::from_momenta(2, &p, m2.clone()).unwrap();
        let idx = vec![GramIndex::Edge(1), GramIndex::Edge(3), GramIndex::Infinity];
        assert!(gram_matches_coordinates(&k, &p, &m2, &idx));
        let (_, inf) = embedding_vectors(&p, &m2);
        assert_eq!(embedding_inner(&inf, &inf), int(0));
    }
}
