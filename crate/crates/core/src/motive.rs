//! Weight-graded structure of the reduced, full and quotient motives of a cut
//! quotient graph.
//!
//! Every graded piece is a Tate twist `Q(-w/2)` tensored with a quadratic
//! character. The character of a piece indexed by the Gram subset `I` is the
//! square class of `(-1)^{|I|/2} G_I`. For a graph with uncut edges `E` and
//! cut set `C` (`r = |C|`) the pieces are
//!
//! ```text
//! reduced,  r even:  gamma in E even,          weight r + |gamma|,      I = C u gamma
//! quotient, r = 0:   gamma in E odd, >= 3,     weight |gamma| + 1,      I = gamma u {inf}
//!                    plus Ker(sum) at weight 2 with multiplicity |E| - 1
//! quotient, r odd:   gamma in E even,          weight r + 1 + |gamma|,  I = C u gamma u {inf}
//! full = reduced + quotient
//! ```
//!
//! and the remaining parity cases vanish.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::graphs::{CutQuotientGraph, EdgeSet};
use crate::kinematics::{self, GramFailure, GramIndex, KinematicPoint, KinematicsError};
use crate::linalg::Matrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MotiveError {
    #[error("kinematics are not generic in dimension {d}: {} vanishing Gram determinants", failures.len())]
    NotGeneric { d: usize, failures: Vec<GramFailure> },
    #[error("Gram determinant vanishes on {0}")]
    GramVanishes(String),
    #[error("square class needs an even, nonempty index set (got {0} indices)")]
    OddSubset(usize),
    #[error("base index {0} is not an uncut edge of the graph")]
    BadBaseIndex(usize),
    #[error("graph has {graph} edges but kinematics have {kinematics}")]
    SizeMismatch { graph: usize, kinematics: usize },
    #[error("dimension d = {0} must be a non-negative even integer")]
    InvalidDimension(usize),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Class of a nonzero rational in `Q^* / (Q^*)^2`, stored as its signed
/// squarefree representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass(BigInt);

impl SquareClass {
    pub fn of(q: &Rational) -> Option<Self> {
        rational::squarefree_class(q).map(SquareClass)
    }

    pub fn trivial() -> Self {
        SquareClass(BigInt::one())
    }

    pub fn representative(&self) -> &BigInt {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for SquareClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

fn gram_indices(edges: EdgeSet, infinity: bool) -> Vec<GramIndex> {
    if infinity {
        GramIndex::with_infinity(edges)
    } else {
        GramIndex::edges(edges)
    }
}

fn describe(idx: &[GramIndex]) -> String {
    let parts: Vec<String> = idx.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Square class of `(-1)^{|I|/2} G_I`.
pub fn square_class(k: &KinematicPoint, idx: &[GramIndex]) -> Result<SquareClass, MotiveError> {
    if idx.is_empty() || idx.len() % 2 == 1 {
        return Err(MotiveError::OddSubset(idx.len()));
    }
    let det = k.gram_det(idx)?;
    let signed = if (idx.len() / 2) % 2 == 1 { -det } else { det };
    SquareClass::of(&signed).ok_or_else(|| MotiveError::GramVanishes(describe(idx)))
}

/// The same character read off the discriminant of `t^2 + (-1)^{m+1} G_I`,
/// `|I| = 2m`: the splitting algebra is `Q(sqrt(disc))`.
pub fn square_class_via_discriminant(k: &KinematicPoint, idx: &[GramIndex]) -> Result<SquareClass, MotiveError> {
    if idx.is_empty() || idx.len() % 2 == 1 {
        return Err(MotiveError::OddSubset(idx.len()));
    }
    let m = idx.len() / 2;
    let g = k.gram_matrix(idx)?.det;
    let sign = if (m + 1) % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    };
    // t^2 + 0 t + c
    let (a, b, c) = (Rational::one(), Rational::zero(), sign * g);
    let disc = &b * &b - Rational::from_integer(4.into()) * a * c;
    SquareClass::of(&disc).ok_or_else(|| MotiveError::GramVanishes(describe(idx)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Reduced,
    Full,
    Quotient,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Reduced, Variant::Full, Variant::Quotient];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Reduced => "reduced",
            Variant::Full => "full",
            Variant::Quotient => "quotient",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reduced" => Ok(Variant::Reduced),
            "full" => Ok(Variant::Full),
            "quotient" => Ok(Variant::Quotient),
            other => Err(format!(
                "unknown variant {other:?} (expected reduced, full or quotient)"
            )),
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Character {
    Class(SquareClass),
    /// Kernel of the sum map: a sum of `Q(-1)`s with no square class.
    Kernel,
    /// Structure-only mode, no kinematics supplied.
    Unknown,
}

impl Serialize for Character {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Character::Class(c) => c.serialize(s),
            Character::Kernel => s.serialize_str("kernel"),
            Character::Unknown => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightPiece {
    pub gamma: EdgeSet,
    pub infty: bool,
    pub weight: usize,
    pub twist: i64,
    pub character: Character,
    pub mult: usize,
}

impl WeightPiece {
    /// The Gram subset carrying this piece's character (`None` for the
    /// kernel piece).
    pub fn gram_subset(&self, graph: &CutQuotientGraph) -> Option<Vec<GramIndex>> {
        if self.character == Character::Kernel {
            return None;
        }
        Some(gram_indices(graph.cuts() | self.gamma, self.infty))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MotiveDescription {
    pub graph: CutQuotientGraph,
    pub variant: Variant,
    pub pieces: Vec<WeightPiece>,
    pub rank: usize,
}

impl MotiveDescription {
    fn new(graph: CutQuotientGraph, variant: Variant, pieces: Vec<WeightPiece>) -> Self {
        let rank = pieces.iter().map(|p| p.mult).sum();
        MotiveDescription {
            graph,
            variant,
            pieces,
            rank,
        }
    }

    /// Total multiplicity per weight.
    pub fn ranks_by_weight(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for p in &self.pieces {
            *out.entry(p.weight).or_insert(0) += p.mult;
        }
        out
    }
}

/// Dimension in which the whole weight filtration of `G` is visible:
/// the smallest even `d >= 2` with `d + 1 >= n + 1`.
pub fn relevant_dimension(n: usize) -> usize {
    (n.div_ceil(2) * 2).max(2)
}

fn piece(gamma: EdgeSet, infty: bool, weight: usize, mult: usize) -> WeightPiece {
    WeightPiece {
        gamma,
        infty,
        weight,
        twist: -(weight as i64) / 2,
        character: Character::Unknown,
        mult,
    }
}

fn reduced_pieces(g: &CutQuotientGraph) -> Vec<WeightPiece> {
    let r = g.cuts().len();
    if r % 2 == 1 {
        return vec![];
    }
    let mut out: Vec<WeightPiece> = g
        .uncut_edges()
        .subsets()
        .filter(|s| s.len() % 2 == 0)
        .map(|s| piece(s, false, r + s.len(), 1))
        .collect();
    sort_pieces(&mut out);
    out
}

fn quotient_pieces(g: &CutQuotientGraph) -> Vec<WeightPiece> {
    let r = g.cuts().len();
    let e = g.uncut_edges();
    let mut out = vec![];
    if r == 0 {
        if e.len() >= 2 {
            out.push(WeightPiece {
                character: Character::Kernel,
                ..piece(EdgeSet::EMPTY, false, 2, e.len() - 1)
            });
        }
        out.extend(
            e.subsets()
                .filter(|s| s.len() % 2 == 1 && s.len() >= 3)
                .map(|s| piece(s, true, s.len() + 1, 1)),
        );
    } else if r % 2 == 1 {
        out.extend(
            e.subsets()
                .filter(|s| s.len() % 2 == 0)
                .map(|s| piece(s, true, r + 1 + s.len(), 1)),
        );
    }
    sort_pieces(&mut out);
    out
}

fn sort_pieces(p: &mut [WeightPiece]) {
    p.sort_by_key(|x| {
        (
            x.weight,
            x.character != Character::Kernel,
            x.gamma.len(),
            x.gamma.to_vec(),
        )
    });
}

fn structure(g: &CutQuotientGraph, variant: Variant) -> Vec<WeightPiece> {
    match variant {
        Variant::Reduced => reduced_pieces(g),
        Variant::Quotient => quotient_pieces(g),
        Variant::Full => {
            let mut p = reduced_pieces(g);
            p.extend(quotient_pieces(g));
            sort_pieces(&mut p);
            p
        }
    }
}

/// Weight-graded description of `G`. Characters are attached when
/// kinematics are supplied, after checking genericity in
/// [`relevant_dimension`].
pub fn weight_pieces(
    g: &CutQuotientGraph,
    variant: Variant,
    k: Option<&KinematicPoint>,
) -> Result<MotiveDescription, MotiveError> {
    match k {
        None => Ok(MotiveDescription::new(*g, variant, structure(g, variant))),
        Some(k) => weight_pieces_in_dim(g, variant, k, relevant_dimension(g.n())),
    }
}

/// As [`weight_pieces`] with characters, requiring genericity in dimension `d`.
/// Pieces whose Gram subsets exceed the range covered by genericity in `d`
/// are still described, and fail with `GramVanishes` if degenerate.
pub fn weight_pieces_in_dim(
    g: &CutQuotientGraph,
    variant: Variant,
    k: &KinematicPoint,
    d: usize,
) -> Result<MotiveDescription, MotiveError> {
    if k.n() != g.n() {
        return Err(MotiveError::SizeMismatch {
            graph: g.n(),
            kinematics: k.n(),
        });
    }
    let report = kinematics::is_generic(k, d)?;
    if !report.is_generic {
        return Err(MotiveError::NotGeneric {
            d,
            failures: report.failures,
        });
    }
    let mut pieces = structure(g, variant);
    for p in &mut pieces {
        if let Some(idx) = p.gram_subset(g) {
            p.character = if idx.is_empty() {
                Character::Class(SquareClass::trivial())
            } else {
                Character::Class(square_class(k, &idx)?)
            };
        }
    }
    Ok(MotiveDescription::new(*g, variant, pieces))
}

/// `(top weight, rank at the bottom weight, rank at the top weight)`.
pub fn weight_bounds(g: &CutQuotientGraph, variant: Variant) -> (usize, usize, usize) {
    let by_weight = MotiveDescription::new(*g, variant, structure(g, variant)).ranks_by_weight();
    match (by_weight.first_key_value(), by_weight.last_key_value()) {
        (Some((_, &bottom)), Some((&top, &top_rank))) => (top, bottom, top_rank),
        _ => (0, 0, 0),
    }
}

/// `W_d M`: pieces of weight at most `d`.
pub fn truncate(m: &MotiveDescription, d: usize) -> Result<MotiveDescription, MotiveError> {
    if d % 2 == 1 {
        return Err(MotiveError::InvalidDimension(d));
    }
    let pieces = m.pieces.iter().filter(|p| p.weight <= d).cloned().collect();
    Ok(MotiveDescription::new(m.graph, m.variant, pieces))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeRhamBasisElement {
    Omega(EdgeSet),
    OmegaPair(usize, usize),
}

impl Serialize for DeRhamBasisElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DeRhamBasisElement", 2)?;
        match self {
            DeRhamBasisElement::Omega(g) => {
                st.serialize_field("kind", "omega")?;
                st.serialize_field("gamma", g)?;
            }
            DeRhamBasisElement::OmegaPair(i, j) => {
                st.serialize_field("kind", "omega_pair")?;
                st.serialize_field("pair", &[i, j])?;
            }
        }
        st.end()
    }
}

/// Canonical de Rham basis. The `omega_pair(i, j)` classes, `j != i`, span
/// the weight-2 kernel part and need a base edge `i`.
pub fn de_rham_basis(
    g: &CutQuotientGraph,
    variant: Variant,
    base: Option<usize>,
) -> Result<Vec<DeRhamBasisElement>, MotiveError> {
    let e = g.uncut_edges();
    let needs_pairs = variant != Variant::Reduced && g.cuts().is_empty() && e.len() >= 2;
    let mut out: Vec<DeRhamBasisElement> = structure(g, variant)
        .into_iter()
        .filter(|p| p.character != Character::Kernel)
        .map(|p| DeRhamBasisElement::Omega(p.gamma))
        .collect();
    out.sort_by_key(|b| match b {
        DeRhamBasisElement::Omega(s) => (s.len(), s.to_vec()),
        DeRhamBasisElement::OmegaPair(..) => unreachable!(),
    });
    if needs_pairs {
        let i = base.ok_or(MotiveError::BadBaseIndex(0))?;
        if !e.contains(i) {
            return Err(MotiveError::BadBaseIndex(i));
        }
        out.extend(e.without(i).iter().map(|j| DeRhamBasisElement::OmegaPair(i, j)));
    } else if let Some(i) = base {
        if variant != Variant::Reduced && !e.contains(i) {
            return Err(MotiveError::BadBaseIndex(i));
        }
    }
    Ok(out)
}

/// Ranks of `H^k`, `k = 0..=d`, of the "+" part of the complement of `n`
/// generic hyperplanes, from the weight-split `E_1` page.
///
/// In half-weight `w <= d` the page is the complex `C_p = Q^{C(n,p)}`,
/// `p = 0..=w`, with the alternating incidence differential of subset
/// inclusion; its class at column `p` lands in `H^{2w-p}`.
pub fn plus_part_cohomology_ranks(n: usize, d: usize) -> Vec<usize> {
    let mut ranks = vec![0; d + 1];
    let subsets_by_size: Vec<Vec<EdgeSet>> = {
        let mut v = vec![vec![]; n + 1];
        for s in EdgeSet::full(n).subsets() {
            v[s.len()].push(s);
        }
        v
    };
    // boundary[p]: C_p -> C_{p-1}, p >= 1
    let boundary_rank: Vec<usize> = (0..=n.min(d) + 1)
        .map(|p| {
            if p == 0 || p > n {
                return 0;
            }
            let rows = &subsets_by_size[p - 1];
            let cols = &subsets_by_size[p];
            Matrix::from_fn(rows.len(), cols.len(), |a, b| {
                let (face, cell) = (rows[a], cols[b]);
                if !face.is_subset(cell) {
                    return Rational::zero();
                }
                let dropped = (cell - face).max().expect("one element");
                let pos = cell.iter().take_while(|&x| x < dropped).count();
                if pos % 2 == 0 {
                    Rational::one()
                } else {
                    -Rational::one()
                }
            })
            .rank()
        })
        .collect();
    for w in 0..=d {
        for p in 0..=w.min(n) {
            let dim = subsets_by_size[p].len();
            let out_rank = boundary_rank[p];
            let in_rank = if p < w {
                boundary_rank.get(p + 1).copied().unwrap_or(0)
            } else {
                0
            };
            let h = dim - out_rank - in_rank;
            let k = 2 * w - p;
            if h > 0 && k <= d {
                ranks[k] += h;
            }
        }
    }
    ranks
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed-form ranks of `gr^W` of the "-" part, keyed by weight.
pub fn minus_part_gr_ranks(n: usize, variant: Variant) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    let mut add = |w: usize, r: usize| {
        if r > 0 {
            *out.entry(w).or_insert(0) += r;
        }
    };
    if variant != Variant::Quotient {
        for m in 0..=n / 2 {
            add(2 * m, binomial(n, 2 * m));
        }
    }
    if variant != Variant::Reduced {
        add(2, n.saturating_sub(1));
        for m in 2..=n.div_ceil(2) {
            add(2 * m, binomial(n, 2 * m - 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;
    use GramIndex::{Edge, Infinity};

    fn kp(s: &[&[i64]], m2: &[i64]) -> KinematicPoint {
        KinematicPoint::from_invariants(
            m2.len(),
            s.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(),
            m2.iter().map(|&v| int(v)).collect(),
        )
        .unwrap()
    }

    fn e1() -> KinematicPoint {
        kp(&[&[1, -1], &[-1, 1]], &[1, 1])
    }

    fn g(text: &str) -> CutQuotientGraph {
        text.parse().unwrap()
    }

    fn class(v: i64) -> SquareClass {
        SquareClass(BigInt::from(v))
    }

    #[test]
    fn square_class_examples() {
        assert_eq!(square_class(&e1(), &[Edge(1), Edge(2)]).unwrap(), class(5));
        let heavy = kp(&[&[1, -1], &[-1, 1]], &[2, 1]);
        assert_eq!(square_class(&heavy, &[Edge(1), Edge(2)]).unwrap(), class(2));
        assert_eq!(square_class(&e1(), &[Edge(1)]), Err(MotiveError::OddSubset(1)));
        assert_eq!(square_class(&e1(), &[]), Err(MotiveError::OddSubset(0)));
        let zero = kp(&[&[0, 0], &[0, 0]], &[1, 1]);
        assert!(matches!(
            square_class(&zero, &[Edge(1), Edge(2)]),
            Err(MotiveError::GramVanishes(_))
        ));
        // {1, inf}: G = -1, class of 1
        assert!(square_class(&e1(), &[Edge(1), Infinity]).unwrap().is_trivial());
    }

    #[test]
    fn perfect_square_is_trivial() {
        // G_12 = 4 m1 m2 - (m1 + m2 + s)^2 = 16 - 25
        let k = kp(&[&[0, 0], &[0, 0]], &[1, 4]);
        assert_eq!(k.gram_det(&[Edge(1), Edge(2)]).unwrap(), int(-9));
        assert_eq!(square_class(&k, &[Edge(1), Edge(2)]).unwrap(), SquareClass::trivial());
    }

    #[test]
    fn box_decomposition() {
        let m = weight_pieces(&g("n=4"), Variant::Reduced, None).unwrap();
        assert_eq!(m.rank, 8);
        let counts: Vec<(usize, usize)> = m.ranks_by_weight().into_iter().collect();
        assert_eq!(counts, vec![(0, 1), (2, 6), (4, 1)]);
        assert!(m.pieces.iter().all(|p| p.weight == p.gamma.len()));
        assert!(m.pieces.iter().all(|p| p.twist == -(p.weight as i64) / 2));
    }

    #[test]
    fn tadpoles() {
        let plain = weight_pieces(&g("n=1"), Variant::Full, None).unwrap();
        assert_eq!(plain.rank, 1);
        assert_eq!((plain.pieces[0].weight, plain.pieces[0].twist), (0, 0));
        let cut = weight_pieces(&g("n=1;cut=1"), Variant::Full, None).unwrap();
        assert_eq!(cut.rank, 1);
        assert_eq!((cut.pieces[0].weight, cut.pieces[0].twist), (2, -1));
        assert_eq!(weight_pieces(&g("n=1;cut=1"), Variant::Reduced, None).unwrap().rank, 0);
        let k = kp(&[&[0]], &[3]);
        let cut = weight_pieces(&g("n=1;cut=1"), Variant::Full, Some(&k)).unwrap();
        assert_eq!(cut.pieces[0].character, Character::Class(SquareClass::trivial()));
        let plain = weight_pieces(&g("n=1"), Variant::Full, Some(&k)).unwrap();
        assert_eq!(plain.pieces[0].character, Character::Class(SquareClass::trivial()));
    }

    #[test]
    fn point_graph_is_trivial_motive() {
        let p = CutQuotientGraph::point(3).unwrap();
        for v in Variant::ALL {
            let m = weight_pieces(&p, v, None).unwrap();
            let expect = if v == Variant::Quotient { 0 } else { 1 };
            assert_eq!(m.rank, expect, "{v}");
        }
    }

    #[test]
    fn characters_with_kinematics() {
        let m = weight_pieces(&g("n=2"), Variant::Reduced, Some(&e1())).unwrap();
        assert_eq!(m.pieces[0].character, Character::Class(SquareClass::trivial()));
        assert_eq!(m.pieces[1].character, Character::Class(class(5)));
        let q = weight_pieces(&g("n=2"), Variant::Quotient, Some(&e1())).unwrap();
        assert_eq!(q.pieces.len(), 1);
        assert_eq!(q.pieces[0].character, Character::Kernel);
        assert_eq!(q.pieces[0].mult, 1);
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["pieces"][1]["character"], 5);
        assert_eq!(json["variant"], "reduced");
        let bare = serde_json::to_value(weight_pieces(&g("n=2"), Variant::Full, None).unwrap()).unwrap();
        assert!(bare["pieces"][0]["character"].is_null());
        assert!(bare["pieces"]
            .as_array()
            .unwrap()
            .iter()
            .any(|p| p["character"] == "kernel"));
    }

    #[test]
    fn non_generic_is_rejected() {
        let zero = kp(&[&[0, 0], &[0, 0]], &[1, 1]);
        assert!(matches!(
            weight_pieces(&g("n=2"), Variant::Reduced, Some(&zero)),
            Err(MotiveError::NotGeneric { .. })
        ));
        assert!(matches!(
            weight_pieces(&g("n=3"), Variant::Reduced, Some(&e1())),
            Err(MotiveError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn bounds_and_truncation() {
        assert_eq!(weight_bounds(&g("n=4"), Variant::Reduced), (4, 1, 1));
        assert_eq!(weight_bounds(&g("n=3"), Variant::Full).0, 4);
        assert_eq!(weight_bounds(&g("n=2"), Variant::Full).0, 2);
        let m = weight_pieces(&g("n=4"), Variant::Reduced, None).unwrap();
        assert_eq!(truncate(&m, 2).unwrap().rank, 7);
        assert_eq!(truncate(&m, 4).unwrap(), m);
        assert_eq!(truncate(&m, 0).unwrap().rank, 1);
        assert_eq!(truncate(&m, 3), Err(MotiveError::InvalidDimension(3)));
    }

    #[test]
    fn de_rham_bases() {
        let b = de_rham_basis(&g("n=2"), Variant::Reduced, None).unwrap();
        assert_eq!(
            b,
            vec![
                DeRhamBasisElement::Omega(EdgeSet::EMPTY),
                DeRhamBasisElement::Omega(EdgeSet::full(2))
            ]
        );
        let b = de_rham_basis(&g("n=4"), Variant::Full, Some(1)).unwrap();
        assert_eq!(b.len(), 15);
        let pairs = b
            .iter()
            .filter(|x| matches!(x, DeRhamBasisElement::OmegaPair(..)))
            .count();
        assert_eq!(pairs, 3);
        assert_eq!(de_rham_basis(&g("n=1"), Variant::Reduced, None).unwrap().len(), 1);
        assert_eq!(
            de_rham_basis(&g("n=4"), Variant::Full, Some(5)),
            Err(MotiveError::BadBaseIndex(5))
        );
        assert_eq!(
            de_rham_basis(&g("n=4;pinch=2"), Variant::Full, Some(2)),
            Err(MotiveError::BadBaseIndex(2))
        );
    }

    #[test]
    fn spectral_oracle_examples() {
        assert_eq!(plus_part_cohomology_ranks(3, 4), vec![1, 2, 1, 0, 0]);
        assert_eq!(plus_part_cohomology_ranks(1, 4), vec![1, 0, 0, 0, 0]);
        assert_eq!(plus_part_cohomology_ranks(5, 4), vec![1, 4, 6, 4, 1]);
    }

    #[test]
    fn minus_part_examples() {
        let r = minus_part_gr_ranks(4, Variant::Reduced);
        assert_eq!(r.into_iter().collect::<Vec<_>>(), vec![(0, 1), (2, 6), (4, 1)]);
        assert_eq!(
            minus_part_gr_ranks(2, Variant::Quotient)
                .into_iter()
                .collect::<Vec<_>>(),
            vec![(2, 1)]
        );
        assert_eq!(
            minus_part_gr_ranks(3, Variant::Quotient)
                .into_iter()
                .collect::<Vec<_>>(),
            vec![(2, 2), (4, 1)]
        );
    }

    #[test]
    fn rank_identities_and_oracles() {
        for n in 1..=8 {
            let gon = CutQuotientGraph::n_gon(n).unwrap();
            let rank = |v| weight_pieces(&gon, v, None).unwrap().rank;
            assert_eq!(rank(Variant::Reduced), 1 << (n - 1));
            assert_eq!(rank(Variant::Full), (1 << n) - 1);
            assert_eq!(rank(Variant::Full), rank(Variant::Reduced) + rank(Variant::Quotient));
            assert_eq!(
                de_rham_basis(&gon, Variant::Full, Some(1)).unwrap().len(),
                rank(Variant::Full)
            );
            assert_eq!(
                de_rham_basis(&gon, Variant::Quotient, Some(1)).unwrap().len(),
                rank(Variant::Quotient)
            );
            for v in Variant::ALL {
                let m = weight_pieces(&gon, v, None).unwrap();
                assert_eq!(m.ranks_by_weight(), minus_part_gr_ranks(n, v), "n={n} {v}");
                let (top, bottom, top_rank) = weight_bounds(&gon, v);
                // the tadpole's full motive is Q(0)
                if v == Variant::Full && n >= 2 {
                    assert_eq!(top, 2 * ((n + 1) / 2));
                }
                if v == Variant::Reduced {
                    assert_eq!(top, 2 * (n / 2));
                    if n % 2 == 0 {
                        assert_eq!(top_rank, 1);
                    }
                }
                if v != Variant::Quotient {
                    assert_eq!(bottom, 1);
                }
                if v == Variant::Full && n % 2 == 1 && n >= 2 {
                    assert_eq!(top_rank, 1);
                }
            }
        }
        for n in 1..=7 {
            for d in [2, 4, 6] {
                let r = plus_part_cohomology_ranks(n, d);
                for (k, &rk) in r.iter().enumerate() {
                    assert_eq!(rk, binomial(n - 1, k), "n={n} d={d} k={k}");
                }
            }
        }
    }

    #[test]
    fn cut_graph_pieces_use_cut_set() {
        let k = kp(&[&[2, -1, -1], &[-1, 2, -1], &[-1, -1, 2]], &[1, 2, 3]);
        let m = weight_pieces(&g("n=3;cut=1,2"), Variant::Reduced, Some(&k)).unwrap();
        assert_eq!(m.rank, 1);
        assert_eq!(m.pieces[0].weight, 2);
        assert_eq!(
            m.pieces[0].character,
            Character::Class(square_class(&k, &[Edge(1), Edge(2)]).unwrap())
        );
        let q = weight_pieces(&g("n=3;cut=1"), Variant::Quotient, Some(&k)).unwrap();
        assert_eq!(q.rank, 2);
        assert_eq!(
            q.pieces[1].character,
            Character::Class(square_class(&k, &[Edge(1), Edge(2), Edge(3), Infinity]).unwrap())
        );
    }

    fn arb_point(n: usize) -> impl Strategy<Value = KinematicPoint> {
        // s = A^T A for n vectors summing to zero in Z^2
        (
            proptest::collection::vec((-4i64..=4, -4i64..=4), n - 1),
            proptest::collection::vec(1i64..=9, n),
        )
            .prop_map(move |(vs, m2)| {
                let mut p: Vec<Vec<Rational>> = vs.iter().map(|&(a, b)| vec![int(a), int(b)]).collect();
                let sx: i64 = vs.iter().map(|v| v.0).sum();
                let sy: i64 = vs.iter().map(|v| v.1).sum();
                p.push(vec![int(-sx), int(-sy)]);
                KinematicPoint::from_momenta(2, &p, m2.into_iter().map(int).collect()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn two_character_paths_agree(k in arb_point(4)) {
            for edges in EdgeSet::full(4).subsets() {
                for inf in [false, true] {
                    let idx = gram_indices(edges, inf);
                    if idx.is_empty() || idx.len() % 2 == 1 {
                        continue;
                    }
                    prop_assert_eq!(square_class(&k, &idx), square_class_via_discriminant(&k, &idx));
                }
            }
        }

        #[test]
        fn class_invariant_under_square_rescaling(k in arb_point(4), a in 1i64..7, b in 1i64..7) {
            let lambda = rational::ratio(a * a, b * b);
            let scaled = k.scaled(&lambda);
            for edges in EdgeSet::full(4).subsets().filter(|s| s.len() % 2 == 0 && !s.is_empty()) {
                let idx = GramIndex::edges(edges);
                prop_assert_eq!(square_class(&k, &idx).ok(), square_class(&scaled, &idx).ok());
            }
        }
    }
}
