//! Globally adaptive Genz–Malik cubature (embedded degree 7/5 rule) on a
//! box in `R^d`, `1 <= d <= 6`.
//!
//! Regions with the largest error estimate are bisected along the axis with
//! the largest fourth divided difference. Subdivision decisions depend only
//! on region data, and batches of children are evaluated in parallel and
//! collected in a fixed order, so results are reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

pub const MAX_DIM: usize = 6;

const LAMBDA2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const LAMBDA4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const LAMBDA5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)

/// Regions split per refinement step.
const BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubatureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for CubatureOptions {
    fn default() -> Self {
        CubatureOptions {
            rel_tol: 1e-7,
            abs_tol: 0.0,
            max_evals: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubatureResult {
    pub value: f64,
    pub error: f64,
    pub n_evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
struct Region {
    center: Vec<f64>,
    half: Vec<f64>,
    value: f64,
    error: f64,
    split: usize,
}

struct Queued {
    error: f64,
    seq: u64,
    region: Region,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // largest error first, older region first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Weights {
    w: [f64; 5],
    e: [f64; 4],
}

fn weights(d: usize) -> Weights {
    let df = d as f64;
    Weights {
        w: [
            (12824.0 - 9120.0 * df + 400.0 * df * df) / 19683.0,
            980.0 / 6561.0,
            (1820.0 - 400.0 * df) / 19683.0,
            200.0 / 19683.0,
            6859.0 / 19683.0 / (1u64 << d) as f64,
        ],
        e: [
            (729.0 - 950.0 * df + 50.0 * df * df) / 729.0,
            245.0 / 486.0,
            (265.0 - 100.0 * df) / 1458.0,
            25.0 / 729.0,
        ],
    }
}

/// Evaluations per region for dimension `d`.
pub fn rule_points(d: usize) -> usize {
    1 + 4 * d + 2 * d * (d - 1) + (1 << d)
}

fn apply_rule<F: Fn(&[f64]) -> f64>(f: &F, center: Vec<f64>, half: Vec<f64>) -> Region {
    let d = center.len();
    let wt = weights(d);
    let volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let mut x = center.clone();
    let f0 = f(&x);
    let mut sum2 = 0.0;
    let mut sum3 = 0.0;
    let mut split = 0;
    let mut best_diff = f64::NEG_INFINITY;
    let ratio = (LAMBDA2 * LAMBDA2) / (LAMBDA4 * LAMBDA4);
    for i in 0..d {
        x[i] = center[i] - LAMBDA2 * half[i];
        let a = f(&x);
        x[i] = center[i] + LAMBDA2 * half[i];
        let b = f(&x);
        x[i] = center[i] - LAMBDA4 * half[i];
        let c = f(&x);
        x[i] = center[i] + LAMBDA4 * half[i];
        let e = f(&x);
        x[i] = center[i];
        sum2 += a + b;
        sum3 += c + e;
        let diff = ((a + b - 2.0 * f0) - ratio * (c + e - 2.0 * f0)).abs();
        if diff > best_diff {
            best_diff = diff;
            split = i;
        }
    }
    let mut sum4 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                x[i] = center[i] + si * LAMBDA4 * half[i];
                x[j] = center[j] + sj * LAMBDA4 * half[j];
                sum4 += f(&x);
            }
            x[i] = center[i];
            x[j] = center[j];
        }
    }
    let mut sum5 = 0.0;
    for mask in 0..(1u32 << d) {
        for (i, xi) in x.iter_mut().enumerate() {
            let s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            *xi = center[i] + s * LAMBDA5 * half[i];
        }
        sum5 += f(&x);
    }
    let r7 = volume * (wt.w[0] * f0 + wt.w[1] * sum2 + wt.w[2] * sum3 + wt.w[3] * sum4 + wt.w[4] * sum5);
    let r5 = volume * (wt.e[0] * f0 + wt.e[1] * sum2 + wt.e[2] * sum3 + wt.e[3] * sum4);
    Region {
        center,
        half,
        value: r7,
        error: (r7 - r5).abs(),
        split,
    }
}

fn bisect(r: &Region) -> [(Vec<f64>, Vec<f64>); 2] {
    let i = r.split;
    let mut half = r.half.clone();
    half[i] *= 0.5;
    let mut lo = r.center.clone();
    let mut hi = r.center.clone();
    lo[i] -= half[i];
    hi[i] += half[i];
    [(lo, half.clone()), (hi, half)]
}

/// Integrates `f` over `prod [lower_i, upper_i]`. The box is first cut in
/// half along every axis.
pub fn integrate_box<F>(f: &F, lower: &[f64], upper: &[f64], opts: &CubatureOptions) -> CubatureResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = lower.len();
    assert!((1..=MAX_DIM).contains(&d) && upper.len() == d, "dimension 1..=6");
    let per_region = rule_points(d);
    let mut seeds = vec![];
    for mask in 0..(1u32 << d) {
        let mut c = vec![0.0; d];
        let mut h = vec![0.0; d];
        for i in 0..d {
            h[i] = (upper[i] - lower[i]) / 4.0;
            c[i] = lower[i] + h[i] * if mask >> i & 1 == 1 { 3.0 } else { 1.0 };
        }
        seeds.push((c, h));
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut n_evals = 0;
    let mut push = |heap: &mut BinaryHeap<Queued>, regions: Vec<Region>| {
        for region in regions {
            heap.push(Queued {
                error: region.error,
                seq,
                region,
            });
            seq += 1;
        }
    };
    let first: Vec<Region> = seeds.into_par_iter().map(|(c, h)| apply_rule(f, c, h)).collect();
    n_evals += first.len() * per_region;
    push(&mut heap, first);

    let totals = |heap: &BinaryHeap<Queued>| {
        let mut v = 0.0;
        let mut e = 0.0;
        for q in heap.iter() {
            v += q.region.value;
            e += q.region.error;
        }
        (v, e)
    };
    let (mut value, mut error) = totals(&heap);
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            // confirm against a fresh summation
            (value, error) = totals(&heap);
            if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
                return CubatureResult {
                    value,
                    error,
                    n_evals,
                    converged: true,
                };
            }
        }
        if n_evals + 2 * BATCH * per_region > opts.max_evals {
            let (value, error) = totals(&heap);
            return CubatureResult {
                value,
                error,
                n_evals,
                converged: false,
            };
        }
        let parents: Vec<Region> = (0..BATCH).filter_map(|_| heap.pop().map(|q| q.region)).collect();
        for p in &parents {
            value -= p.value;
            error -= p.error;
        }
        let children: Vec<Region> = parents
            .par_iter()
            .flat_map_iter(|p| bisect(p).into_iter())
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(c, h)| apply_rule(f, c, h))
            .collect();
        n_evals += children.len() * per_region;
        for c in &children {
            value += c.value;
            error += c.error;
        }
        push(&mut heap, children);
    }
}
