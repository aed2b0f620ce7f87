//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oneloop::coaction;
use oneloop::integrator::{self, IntegralSpec, Method};
use oneloop::kinematics::{self, GramIndex, KinematicPoint};
use oneloop::motive::{self, Variant};
use oneloop::rational::{int, ratio, to_f64, Rational};
use oneloop::selftest::{gram_matches_coordinates, random_euclidean_point, random_momenta};
use oneloop::{CutQuotientGraph, EdgeSet};

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        0
    } else {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}

fn gon(n: usize) -> CutQuotientGraph {
    CutQuotientGraph::n_gon(n).unwrap()
}

fn bubble_e1() -> KinematicPoint {
    KinematicPoint::from_invariants(
        2,
        vec![vec![int(1), int(-1)], vec![int(-1), int(1)]],
        vec![int(1), int(1)],
    )
    .unwrap()
}

fn equilateral() -> KinematicPoint {
    let s = vec![
        vec![int(2), int(-1), int(-1)],
        vec![int(-1), int(2), int(-1)],
        vec![int(-1), int(-1), int(2)],
    ];
    KinematicPoint::from_invariants(3, s, vec![int(1); 3]).unwrap()
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

fn box_decomposition() -> Verdict {
    let start = Instant::now();
    let m = motive::weight_pieces(&gon(4), Variant::Reduced, None).map_err(|e| e.to_string())?;
    let mut by_size = BTreeMap::new();
    for p in &m.pieces {
        *by_size.entry(p.gamma.len()).or_insert(0) += p.mult;
    }
    let expect = BTreeMap::from([(0, 1), (2, 6), (4, 1)]);
    ensure(by_size == expect, || format!("pieces by |gamma|: {by_size:?}"))?;
    ensure(m.rank == 8, || format!("rank {}", m.rank))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{by_size:?}, rank 8"))
}

fn rank_identities() -> Verdict {
    let start = Instant::now();
    for n in 2..=8 {
        let rank = |v| motive::weight_pieces(&gon(n), v, None).unwrap().rank;
        let (red, full, quo) = (rank(Variant::Reduced), rank(Variant::Full), rank(Variant::Quotient));
        ensure(red == 1 << (n - 1), || format!("n={n}: reduced rank {red}"))?;
        ensure(full == (1 << n) - 1, || format!("n={n}: full rank {full}"))?;
        ensure(full == red + quo, || format!("n={n}: {full} != {red} + {quo}"))?;
        let basis = motive::de_rham_basis(&gon(n), Variant::Full, Some(1)).map_err(|e| e.to_string())?;
        ensure(basis.len() == full, || format!("n={n}: {} basis elements", basis.len()))?;
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok("n = 2..8".into())
}

fn weight_bounds() -> Verdict {
    for n in 2..=8 {
        let (top_full, bottom_full, rank_full) = motive::weight_bounds(&gon(n), Variant::Full);
        let (top_red, bottom_red, rank_red) = motive::weight_bounds(&gon(n), Variant::Reduced);
        ensure(top_full == 2 * ((n + 1) / 2), || {
            format!("n={n}: full top weight {top_full}")
        })?;
        ensure(top_red == 2 * (n / 2), || {
            format!("n={n}: reduced top weight {top_red}")
        })?;
        ensure(bottom_full == 1 && bottom_red == 1, || {
            format!("n={n}: bottom ranks {bottom_full}, {bottom_red}")
        })?;
        // top weight is pure for the reduced motive at even n, for the full one at odd n
        let top_rank = if n % 2 == 0 { rank_red } else { rank_full };
        ensure(top_rank == 1, || format!("n={n}: top-weight rank {top_rank}"))?;
    }
    Ok("n = 2..8".into())
}

fn spectral_sequence() -> Verdict {
    let start = Instant::now();
    let mut checks = 0;
    for n in 1..=7 {
        for d in [2, 4, 6, 8] {
            let ranks = motive::plus_part_cohomology_ranks(n, d);
            for k in 0..=d {
                let r = ranks.get(k).copied().unwrap_or(0);
                ensure(r == binomial(n - 1, k), || format!("n={n} d={d}: rank H^{k} = {r}"))?;
                checks += 1;
            }
        }
    }
    for n in 1..=8 {
        for v in Variant::ALL {
            let pieces = motive::weight_pieces(&gon(n), v, None).unwrap().ranks_by_weight();
            let closed = motive::minus_part_gr_ranks(n, v);
            ensure(pieces == closed, || format!("n={n} {v}: {pieces:?} vs {closed:?}"))?;
            checks += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{checks} rank checks"))
}

fn gram_coordinates() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut subsets = 0;
    for c in 0..100 {
        let n = 1 + c % 6;
        let d = 1 + (c / 6) % 4;
        let (p, m2) = random_momenta(&mut rng, n, d, 5);
        let k = KinematicPoint::from_momenta(d, &p, m2.clone()).map_err(|e| e.to_string())?;
        for idx in all_gram_subsets(n) {
            ensure(gram_matches_coordinates(&k, &p, &m2, &idx), || {
                format!("configuration {c} (n={n}, d={d}), subset {idx:?}")
            })?;
            subsets += 1;
        }
    }
    Ok(format!("100 configurations, {subsets} subsets"))
}

fn euclidean_sign_law() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for c in 0..50 {
        let n = 2 + c % 5;
        let d = if c % 2 == 0 { 2 } else { 4 };
        let k = random_euclidean_point(&mut rng, n, d);
        for e in EdgeSet::full(n).subsets().filter(|s| (1..=d).contains(&s.len())) {
            let g = k.gram_det_of(e, false).map_err(|e| e.to_string())?;
            let signed: Rational = if e.len() % 2 == 0 { g.clone() } else { -g.clone() };
            ensure(signed.is_positive(), || {
                format!("point {c} (n={n}, d={d}), I={e}: (-1)^|I| G_I = {signed}")
            })?;
        }
    }
    Ok("50 points".into())
}

fn coaction_structure() -> Verdict {
    for n in [2, 4, 6] {
        let e = coaction::coaction(n).map_err(|e| e.to_string())?;
        ensure(e.len() == 1 << (n - 1), || format!("n={n}: {} terms", e.len()))?;
        let odd = e.terms.iter().find(|(_, [_, right])| right.gamma().len() % 2 == 1);
        ensure(odd.is_none(), || format!("n={n}: odd right factor {odd:?}"))?;
    }
    for n in [3, 5] {
        let base = coaction::coaction_with_j(n, 1).map_err(|e| e.to_string())?;
        for j in 2..=n {
            let other = coaction::coaction_with_j(n, j).map_err(|e| e.to_string())?;
            ensure(other == base, || format!("n={n}: j={j} differs"))?;
        }
    }
    Ok("2, 8, 32 terms; j-independent at n = 3, 5".into())
}

fn coassociativity() -> Verdict {
    let start = Instant::now();
    for n in 2..=6 {
        let r = coaction::check_coassociativity(n).map_err(|e| e.to_string())?;
        ensure(r.holds, || {
            format!("n={n}: {}", r.counterexample.clone().unwrap_or_default())
        })?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("n = 2..6 in {:?}", start.elapsed()))
}

fn single_propagator() -> Verdict {
    let mut lines = vec![];
    let mut failures = vec![];
    for d in [2usize, 4] {
        for m2 in [ratio(1, 1), ratio(4, 1), ratio(25, 4)] {
            let start = Instant::now();
            let k = KinematicPoint::from_invariants(1, vec![vec![int(0)]], vec![m2.clone()]).unwrap();
            let spec = IntegralSpec::new(gon(1), d, vec![d as u32], k).with_tol(1e-7);
            let r = integrator::integrate(&spec).map_err(|e| e.to_string())?;
            let expect = to_f64(&m2).powf(-(d as f64) / 2.0);
            let err = rel(r.value, expect);
            let elapsed = start.elapsed();
            let line = format!(
                "d={d} m2={m2}: {:.9} vs {expect:.9} (rel {err:.1e}, {elapsed:.1?})",
                r.value
            );
            if err > 1e-6 || elapsed > Duration::from_secs(10) {
                failures.push(line.clone());
            }
            lines.push(line);
        }
    }
    if failures.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn homogeneity() -> Verdict {
    let spec = IntegralSpec::new(gon(2), 2, vec![1, 1], bubble_e1()).with_tol(1e-9);
    let r = integrator::check_homogeneity(&spec, &int(4)).map_err(|e| e.to_string())?;
    ensure(r.rel_error <= 1e-5, || format!("{r:?}"))?;
    Ok(format!("rel error {:.1e}", r.rel_error))
}

fn backend_agreement() -> Verdict {
    let mut notes = vec![];
    for (name, k, nu) in [
        ("bubble", bubble_e1(), vec![1, 1]),
        ("triangle", equilateral(), vec![1, 1, 1]),
    ] {
        let spec = IntegralSpec::new(gon(k.n()), 2, nu, k);
        let quad = integrator::integrate(&spec.clone().with_tol(1e-8)).map_err(|e| e.to_string())?;
        let mc_spec = spec.with_method(Method::QuasiMonteCarlo).with_tol(1e-6).with_seed(17);
        let mc = integrator::integrate(&mc_spec).map_err(|e| e.to_string())?;
        let again = integrator::integrate(&mc_spec).map_err(|e| e.to_string())?;
        ensure(quad.converged && mc.converged, || format!("{name}: not converged"))?;
        let err = rel(mc.value, quad.value);
        ensure(err <= 1e-4, || format!("{name}: {} vs {}", quad.value, mc.value))?;
        ensure(mc == again, || format!("{name}: QMC not deterministic"))?;
        notes.push(format!("{name} rel {err:.1e}"));
    }
    Ok(notes.join(", "))
}

fn quotient_consistency() -> Verdict {
    let mut worst: f64 = 0.0;
    for e in 1..=3 {
        let r = integrator::check_quotient_consistency(
            &equilateral(),
            EdgeSet::single(e),
            2,
            &[1, 1],
            Method::AdaptiveQuadrature,
            1e-8,
        )
        .map_err(|err| err.to_string())?;
        ensure(r.rel_error <= 1e-4, || format!("pinch {e}: {r:?}"))?;
        worst = worst.max(r.rel_error);
    }
    Ok(format!("pinch 1, 2, 3; worst rel {worst:.1e}"))
}

fn character_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checks = 0;
    for c in 0..20 {
        let n = 2 + c % 5;
        let k = random_euclidean_point(&mut rng, n, 4);
        for e in EdgeSet::full(n)
            .subsets()
            .filter(|s| !s.is_empty() && s.len() % 2 == 0 && s.len() <= 6)
        {
            let idx = GramIndex::edges(e);
            let a = motive::square_class(&k, &idx).map_err(|err| err.to_string())?;
            let b = motive::square_class_via_discriminant(&k, &idx).map_err(|err| err.to_string())?;
            ensure(a == b, || format!("point {c}, I={e}: {a} vs {b}"))?;
            checks += 1;
        }
    }
    Ok(format!("20 points, {checks} subsets"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("box decomposition", box_decomposition),
        ("rank identities", rank_identities),
        ("weight bounds", weight_bounds),
        ("spectral sequence oracle", spectral_sequence),
        ("gram coordinate oracle", gram_coordinates),
        ("euclidean sign law", euclidean_sign_law),
        ("coaction structure", coaction_structure),
        ("coassociativity", coassociativity),
        ("single propagator identity", single_propagator),
        ("homogeneity", homogeneity),
        ("backend agreement", backend_agreement),
        ("quotient consistency", quotient_consistency),
        ("maximal-cut characters", character_consistency),
    ];
    let mut failed = vec![];
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = run();
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {:>2} {name}: {detail}", i + 1);
        if verdict.is_err() {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
