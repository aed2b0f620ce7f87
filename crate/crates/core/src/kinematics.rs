//! Exact kinematic invariants of the n-gon and their embedding-space Gram data.
//!
//! A kinematic point is the symmetric matrix `s_ij = p_i . p_j` (rows summing
//! to zero) together with the mass squares `m_i^2`. On the quadric
//! compactification each propagator becomes a linear form `<u_i, .>` and the
//! boundary at infinity is `<u_inf, .>`; all Gram data below are built from
//! the coordinate expressions
//!
//! ```text
//! <u_i, u_i>   = -2 m_i^2
//! <u_i, u_j>   = -(m_i^2 + m_j^2 + p_{i+1,j}^2)      (i < j)
//! <u_inf, u_i> = 1,   <u_inf, u_inf> = 0
//! ```
//!
//! Everything upstream of [`realize_momenta`] is exact.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::graphs::{EdgeSet, GraphError};
use crate::linalg::{self, Inertia, Matrix};
use crate::rational::{self, Rational, RationalString};

/// Practical bound for the subset enumerations used by genericity checks.
pub const GENERICITY_ENVELOPE: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("n must be at least 1")]
    NonPositive,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invariant matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("row {row} of the invariant matrix sums to {sum}, expected 0")]
    RowSumNonzero { row: usize, sum: String },
    #[error("momenta do not sum to zero")]
    MomentumNotConserved,
    #[error("index {0} out of range")]
    IndexOutOfRange(String),
    #[error("repeated index {0} in Gram subset")]
    RepeatedIndex(String),
    #[error("dimension d = {0} must be a positive even integer")]
    InvalidDimension(usize),
    #[error("cannot pinch every edge")]
    AllEdgesPinched,
    #[error("kinematics are not Euclidean in dimension {0}")]
    NotEuclidean(usize),
    #[error("realisation residual {residual:e} exceeds tolerance {tol:e}")]
    ToleranceUnachievable { residual: f64, tol: f64 },
    #[error("bad kinematics file: {0}")]
    Format(String),
}

impl From<GraphError> for KinematicsError {
    fn from(e: GraphError) -> Self {
        KinematicsError::IndexOutOfRange(e.to_string())
    }
}

/// An index of the embedding-space vectors: a propagator `u_e` or `u_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GramIndex {
    Edge(usize),
    Infinity,
}

impl GramIndex {
    pub fn edges(edges: EdgeSet) -> Vec<GramIndex> {
        edges.iter().map(GramIndex::Edge).collect()
    }

    pub fn with_infinity(edges: EdgeSet) -> Vec<GramIndex> {
        let mut v = Self::edges(edges);
        v.push(GramIndex::Infinity);
        v
    }
}

impl std::fmt::Display for GramIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GramIndex::Edge(e) => write!(f, "{e}"),
            GramIndex::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for GramIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GramIndex::Edge(e) => s.serialize_u64(*e as u64),
            GramIndex::Infinity => s.serialize_str("inf"),
        }
    }
}

/// Kinematic invariants `(s_ij, m_i^2)` of an n-gon configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KinematicPoint {
    s: Matrix,
    m2: Vec<Rational>,
}

impl KinematicPoint {
    pub fn from_invariants(n: usize, s: Vec<Vec<Rational>>, m2: Vec<Rational>) -> Result<Self, KinematicsError> {
        if n == 0 {
            return Err(KinematicsError::NonPositive);
        }
        if s.len() != n || s.iter().any(|r| r.len() != n) {
            return Err(KinematicsError::DimensionMismatch(format!("s must be {n}x{n}")));
        }
        if m2.len() != n {
            return Err(KinematicsError::DimensionMismatch(format!(
                "m2 has length {}, expected {n}",
                m2.len()
            )));
        }
        let s = Matrix::from_rows(s).expect("shape checked");
        for i in 0..n {
            for j in 0..i {
                if s.get(i, j) != s.get(j, i) {
                    return Err(KinematicsError::NotSymmetric { i: j + 1, j: i + 1 });
                }
            }
        }
        for i in 0..n {
            let sum = s.row(i).iter().fold(Rational::zero(), |a, b| a + b);
            if !sum.is_zero() {
                return Err(KinematicsError::RowSumNonzero {
                    row: i + 1,
                    sum: rational::format(&sum),
                });
            }
        }
        Ok(KinematicPoint { s, m2 })
    }

    /// Invariants of explicit momenta under the Euclidean dot product.
    pub fn from_momenta(d: usize, p: &[Vec<Rational>], m2: Vec<Rational>) -> Result<Self, KinematicsError> {
        if p.is_empty() {
            return Err(KinematicsError::NonPositive);
        }
        if let Some(v) = p.iter().find(|v| v.len() != d) {
            return Err(KinematicsError::DimensionMismatch(format!(
                "momentum of length {} in dimension {d}",
                v.len()
            )));
        }
        for a in 0..d {
            let total = p.iter().fold(Rational::zero(), |acc, v| acc + &v[a]);
            if !total.is_zero() {
                return Err(KinematicsError::MomentumNotConserved);
            }
        }
        let n = p.len();
        let dot = |x: &[Rational], y: &[Rational]| x.iter().zip(y).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
        let s = (0..n).map(|i| (0..n).map(|j| dot(&p[i], &p[j])).collect()).collect();
        Self::from_invariants(n, s, m2)
    }

    pub fn n(&self) -> usize {
        self.m2.len()
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    /// `s_ij` for 1-based edge labels.
    pub fn s_ij(&self, i: usize, j: usize) -> &Rational {
        self.s.get(i - 1, j - 1)
    }

    pub fn m2(&self) -> &[Rational] {
        &self.m2
    }

    /// Mass square of 1-based edge `i`.
    pub fn mass_sq(&self, i: usize) -> &Rational {
        &self.m2[i - 1]
    }

    /// `(lambda s, lambda m^2)`.
    pub fn scaled(&self, lambda: &Rational) -> Self {
        KinematicPoint {
            s: self.s.scaled(lambda),
            m2: self.m2.iter().map(|m| m * lambda).collect(),
        }
    }

    pub fn with_masses(&self, m2: Vec<Rational>) -> Result<Self, KinematicsError> {
        Self::from_invariants(self.n(), self.s.to_rows(), m2)
    }

    fn check_edge(&self, e: usize) -> Result<(), KinematicsError> {
        if e == 0 || e > self.n() {
            Err(KinematicsError::IndexOutOfRange(format!(
                "edge {e} not in 1..={}",
                self.n()
            )))
        } else {
            Ok(())
        }
    }

    /// `p_{a,b}^2 = sum_{a <= k,l <= b} s_kl` for `1 <= a <= b <= n`.
    pub fn range_momentum_sq(&self, a: usize, b: usize) -> Result<Rational, KinematicsError> {
        self.check_edge(a)?;
        self.check_edge(b)?;
        if a > b {
            return Err(KinematicsError::IndexOutOfRange(format!("empty range {a}..{b}")));
        }
        Ok(self.block_sum(a - 1..b, a - 1..b))
    }

    fn block_sum(
        &self,
        rows: impl Iterator<Item = usize> + Clone,
        cols: impl Iterator<Item = usize> + Clone,
    ) -> Rational {
        let mut acc = Rational::zero();
        for i in rows {
            for j in cols.clone() {
                acc += self.s.get(i, j);
            }
        }
        acc
    }

    /// `<u_a, u_b>` from the coordinate formulas.
    pub fn inner(&self, a: GramIndex, b: GramIndex) -> Rational {
        match (a, b) {
            (GramIndex::Infinity, GramIndex::Infinity) => Rational::zero(),
            (GramIndex::Infinity, GramIndex::Edge(_)) | (GramIndex::Edge(_), GramIndex::Infinity) => Rational::one(),
            (GramIndex::Edge(i), GramIndex::Edge(j)) if i == j => -Rational::from_integer(2.into()) * self.mass_sq(i),
            (GramIndex::Edge(i), GramIndex::Edge(j)) => {
                let (i, j) = if i < j { (i, j) } else { (j, i) };
                let p2 = self.range_momentum_sq(i + 1, j).expect("i < j are valid edges");
                -(self.mass_sq(i) + self.mass_sq(j) + p2)
            }
        }
    }

    fn check_subset(&self, idx: &[GramIndex]) -> Result<(), KinematicsError> {
        for (k, a) in idx.iter().enumerate() {
            if let GramIndex::Edge(e) = a {
                self.check_edge(*e)?;
            }
            if idx[..k].contains(a) {
                return Err(KinematicsError::RepeatedIndex(a.to_string()));
            }
        }
        Ok(())
    }

    pub fn gram_matrix(&self, idx: &[GramIndex]) -> Result<GramData, KinematicsError> {
        self.check_subset(idx)?;
        let matrix = Matrix::from_fn(idx.len(), idx.len(), |a, b| self.inner(idx[a], idx[b]));
        let det = matrix.determinant();
        Ok(GramData {
            subset: idx.to_vec(),
            matrix,
            det,
        })
    }

    pub fn gram_det(&self, idx: &[GramIndex]) -> Result<Rational, KinematicsError> {
        self.gram_matrix(idx).map(|g| g.det)
    }

    /// Gram determinant of `{u_e : e in edges}` plus `u_inf` when asked.
    pub fn gram_det_of(&self, edges: EdgeSet, infinity: bool) -> Result<Rational, KinematicsError> {
        let idx = if infinity {
            GramIndex::with_infinity(edges)
        } else {
            GramIndex::edges(edges)
        };
        self.gram_det(&idx)
    }
}

/// Gram matrix `<u_i, u_j>` on an ordered index subset and its determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramData {
    pub subset: Vec<GramIndex>,
    pub matrix: Matrix,
    pub det: Rational,
}

fn check_dim(d: usize) -> Result<(), KinematicsError> {
    if d == 0 || d % 2 == 1 {
        Err(KinematicsError::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// Every admissible Gram subset `I` of `{1..n, inf}`, `1 <= |I| <= max_size`,
/// `I != {inf}`, in a deterministic order (size, then edges, then inf last).
pub fn gram_subsets(n: usize, max_size: usize) -> Vec<(EdgeSet, bool)> {
    let mut out = vec![];
    for size in 1..=max_size.min(n + 1) {
        for edges in EdgeSet::full(n).subsets() {
            if edges.len() == size {
                out.push((edges, false));
            }
            if edges.len() + 1 == size && !edges.is_empty() {
                out.push((edges, true));
            }
        }
    }
    out.sort_by_key(|(e, inf)| (e.len() + *inf as usize, *inf, e.to_vec()));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramFailure {
    pub subset: Vec<GramIndex>,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    rational::serde_str::serialize(q, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityReport {
    pub is_generic: bool,
    pub d: usize,
    pub failures: Vec<GramFailure>,
    pub rank: usize,
    pub rank_ok: bool,
}

/// Genericity in dimension `d`: every `G_I` with `|I| <= d + 1`, `I != {inf}`
/// is nonzero, and `rank(s) <= d`.
pub fn is_generic(k: &KinematicPoint, d: usize) -> Result<GenericityReport, KinematicsError> {
    check_dim(d)?;
    let mut failures = vec![];
    for (edges, inf) in gram_subsets(k.n(), d + 1) {
        let det = k.gram_det_of(edges, inf)?;
        if det.is_zero() {
            let subset = if inf {
                GramIndex::with_infinity(edges)
            } else {
                GramIndex::edges(edges)
            };
            failures.push(GramFailure { subset, value: det });
        }
    }
    let rank = k.s().rank();
    let rank_ok = rank <= d;
    Ok(GenericityReport {
        is_generic: failures.is_empty() && rank_ok,
        d,
        failures,
        rank,
        rank_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EuclideanReport {
    pub is_euclidean: bool,
    pub s_psd: bool,
    pub masses_positive: bool,
    pub genericity: GenericityReport,
}

/// Euclidean decision: `s` positive semidefinite of rank at most `d`, all
/// masses positive, and generic in dimension `d`.
pub fn is_euclidean(k: &KinematicPoint, d: usize) -> Result<EuclideanReport, KinematicsError> {
    let genericity = is_generic(k, d)?;
    let s_psd = linalg::psd_factor(k.s()).is_ok();
    let masses_positive = k.m2().iter().all(Signed::is_positive);
    Ok(EuclideanReport {
        is_euclidean: s_psd && masses_positive && genericity.is_generic,
        s_psd,
        masses_positive,
        genericity,
    })
}

/// Inertia of a symmetric rational matrix.
pub fn signature(m: &Matrix) -> Inertia {
    linalg::inertia(m)
}

/// Concrete Euclidean momenta realising a kinematic point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizedMomenta {
    pub d: usize,
    pub vectors: Vec<Vec<f64>>,
    pub residual: f64,
}

impl RealizedMomenta {
    /// Partial sums `p_{1,i} = p_1 + ... + p_i`.
    pub fn partial_sums(&self) -> Vec<Vec<f64>> {
        let mut acc = vec![0.0; self.d];
        self.vectors
            .iter()
            .map(|v| {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                acc.clone()
            })
            .collect()
    }
}

/// Builds `p_i in R^d` with `p_i . p_j = s_ij` from the exact factorisation
/// `s = sum_t d_t l_t l_t^T`; only the square roots of the pivots are taken in
/// floating point.
pub fn realize_momenta(k: &KinematicPoint, d: usize, tol: f64) -> Result<RealizedMomenta, KinematicsError> {
    if !is_euclidean(k, d)?.is_euclidean {
        return Err(KinematicsError::NotEuclidean(d));
    }
    let f = linalg::psd_factor(k.s()).map_err(|_| KinematicsError::NotEuclidean(d))?;
    let n = k.n();
    let mut vectors = vec![vec![0.0; d]; n];
    for (t, (diag, col)) in f.diag.iter().zip(&f.columns).enumerate() {
        let root = rational::to_f64(diag).sqrt();
        for i in 0..n {
            vectors[i][t] = root * rational::to_f64(&col[i]);
        }
    }
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            residual = residual.max((dot - rational::to_f64(k.s().get(i, j))).abs());
        }
    }
    for a in 0..d {
        let total: f64 = vectors.iter().map(|v| v[a]).sum();
        residual = residual.max(total.abs());
    }
    if residual > tol {
        return Err(KinematicsError::ToleranceUnachievable { residual, tol });
    }
    Ok(RealizedMomenta { d, vectors, residual })
}

/// Kinematics of the quotient obtained by pinching `pinched`: external legs
/// meeting at a merged vertex are summed.
///
/// With surviving edges `j_1 < ... < j_k`, the new external momentum `a` is
/// the cyclic range sum `p_{j_{a-1}+1} + ... + p_{j_a}` with `j_0 = j_k`.
pub fn merge_kinematics(k: &KinematicPoint, pinched: EdgeSet) -> Result<KinematicPoint, KinematicsError> {
    let n = k.n();
    if let Some(e) = pinched.iter().find(|&e| e > n) {
        return Err(KinematicsError::IndexOutOfRange(format!("edge {e}")));
    }
    let survivors = (EdgeSet::full(n) - pinched).to_vec();
    if survivors.is_empty() {
        return Err(KinematicsError::AllEdgesPinched);
    }
    let kk = survivors.len();
    // 0-based momentum indices in the range ending at each survivor.
    let ranges: Vec<Vec<usize>> = (0..kk)
        .map(|a| {
            let end = survivors[a];
            let prev = survivors[(a + kk - 1) % kk];
            let mut idx = vec![];
            let mut v = prev % n + 1;
            loop {
                idx.push(v - 1);
                if v == end {
                    break;
                }
                v = v % n + 1;
            }
            idx
        })
        .collect();
    let s = (0..kk)
        .map(|a| {
            (0..kk)
                .map(|b| k.block_sum(ranges[a].iter().copied(), ranges[b].iter().copied()))
                .collect()
        })
        .collect();
    let m2 = survivors.iter().map(|&e| k.mass_sq(e).clone()).collect();
    KinematicPoint::from_invariants(kk, s, m2)
}

/// On-disk form: `{"n": int, "s": [["a/b", ...]], "m2": ["a/b", ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicsJson {
    pub n: usize,
    pub s: Vec<Vec<RationalString>>,
    pub m2: Vec<RationalString>,
}

impl From<&KinematicPoint> for KinematicsJson {
    fn from(k: &KinematicPoint) -> Self {
        KinematicsJson {
            n: k.n(),
            s: k.s()
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(RationalString).collect())
                .collect(),
            m2: k.m2().iter().cloned().map(RationalString).collect(),
        }
    }
}

impl TryFrom<KinematicsJson> for KinematicPoint {
    type Error = KinematicsError;

    fn try_from(j: KinematicsJson) -> Result<Self, KinematicsError> {
        KinematicPoint::from_invariants(
            j.n,
            j.s.into_iter().map(|r| r.into_iter().map(|q| q.0).collect()).collect(),
            j.m2.into_iter().map(|q| q.0).collect(),
        )
    }
}

impl KinematicPoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&KinematicsJson::from(self)).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self, KinematicsError> {
        let j: KinematicsJson = serde_json::from_str(text).map_err(|e| KinematicsError::Format(e.to_string()))?;
        j.try_into()
    }
}
