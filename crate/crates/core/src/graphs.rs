//! Cut quotient graphs of the one-loop n-gon.
//!
//! A graph is always stored relative to its parent n-gon: a set of pinched
//! (contracted) edges and a disjoint set of cut edges. Edge labels are
//! 1-based, `1..=n`, as in the usual n-gon notation where edge `e_i` joins
//! the vertices receiving `p_i` and `p_{i+1}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported parent size.
pub const MAX_EDGES: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("an n-gon needs n >= 1")]
    NonPositive,
    #[error("n = {0} exceeds the supported maximum of {MAX_EDGES} edges")]
    TooLarge(usize),
    #[error("edge {edge} is not an edge of the graph")]
    EdgeNotPresent { edge: usize },
    #[error("edge {edge} is cut and cannot be pinched")]
    EdgeIsCut { edge: usize },
    #[error("edge {edge} is already cut")]
    AlreadyCut { edge: usize },
    #[error("edge {edge} appears twice")]
    DuplicateEdge { edge: usize },
    #[error("pinched and cut edge sets overlap")]
    PinchedCutOverlap,
    #[error("the point graph has no k-gon reduction")]
    PointGraph,
    #[error("bad graph notation {0:?}")]
    Notation(String),
}

/// Subset of the edge labels `1..=MAX_EDGES`, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet(u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    /// All edges `1..=n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_EDGES);
        EdgeSet(if n == 0 { 0 } else { u64::MAX >> (64 - n) })
    }

    pub fn from_bits(bits: u64) -> Self {
        EdgeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn single(e: usize) -> Self {
        debug_assert!((1..=MAX_EDGES).contains(&e));
        EdgeSet(1 << (e - 1))
    }

    pub fn contains(self, e: usize) -> bool {
        (1..=MAX_EDGES).contains(&e) && self.0 & (1 << (e - 1)) != 0
    }

    pub fn with(self, e: usize) -> Self {
        self | EdgeSet::single(e)
    }

    pub fn without(self, e: usize) -> Self {
        EdgeSet(self.0 & !EdgeSet::single(e).0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: EdgeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros() as usize)
    }

    /// Edge labels in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let e = bits.trailing_zeros() as usize + 1;
                bits &= bits - 1;
                e
            })
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, in increasing order of their bit masks.
    pub fn subsets(self) -> impl Iterator<Item = EdgeSet> {
        let mask = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let out = cur?;
            cur = if out == mask {
                None
            } else {
                Some((out.wrapping_sub(mask)) & mask)
            };
            Some(EdgeSet(out))
        })
    }

    pub fn try_from_edges(edges: &[usize], n: usize) -> Result<Self, GraphError> {
        let mut s = EdgeSet::EMPTY;
        for &e in edges {
            if e == 0 || e > n {
                return Err(GraphError::EdgeNotPresent { edge: e });
            }
            if s.contains(e) {
                return Err(GraphError::DuplicateEdge { edge: e });
            }
            s = s.with(e);
        }
        Ok(s)
    }
}

impl std::ops::BitOr for EdgeSet {
    type Output = EdgeSet;
    fn bitor(self, rhs: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 | rhs.0)
    }
}

impl std::ops::BitAnd for EdgeSet {
    type Output = EdgeSet;
    fn bitand(self, rhs: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & rhs.0)
    }
}

impl std::ops::Sub for EdgeSet {
    type Output = EdgeSet;
    fn sub(self, rhs: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & !rhs.0)
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for EdgeSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for EdgeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        EdgeSet::try_from_edges(&v, MAX_EDGES).map_err(serde::de::Error::custom)
    }
}

/// A quotient of the n-gon with a disjoint set of cut edges.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutQuotientGraph {
    n: usize,
    pinched: EdgeSet,
    cuts: EdgeSet,
}

impl CutQuotientGraph {
    /// The uncut, unpinched n-gon.
    pub fn n_gon(n: usize) -> Result<Self, GraphError> {
        Self::new(n, EdgeSet::EMPTY, EdgeSet::EMPTY)
    }

    pub fn new(n: usize, pinched: EdgeSet, cuts: EdgeSet) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NonPositive);
        }
        if n > MAX_EDGES {
            return Err(GraphError::TooLarge(n));
        }
        let all = EdgeSet::full(n);
        if let Some(e) = (pinched | cuts).iter().find(|&e| !all.contains(e)) {
            return Err(GraphError::EdgeNotPresent { edge: e });
        }
        if !(pinched & cuts).is_empty() {
            return Err(GraphError::PinchedCutOverlap);
        }
        Ok(CutQuotientGraph { n, pinched, cuts })
    }

    /// The quotient `Gamma_n / gamma^c`: every edge outside `kept` is pinched.
    pub fn quotient_keeping(n: usize, kept: EdgeSet) -> Result<Self, GraphError> {
        Self::new(n, EdgeSet::full(n) - kept, EdgeSet::EMPTY)
    }

    /// The fully contracted graph.
    pub fn point(n: usize) -> Result<Self, GraphError> {
        Self::new(n, EdgeSet::full(n), EdgeSet::EMPTY)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pinched(&self) -> EdgeSet {
        self.pinched
    }

    pub fn cuts(&self) -> EdgeSet {
        self.cuts
    }

    /// Surviving (unpinched) edges.
    pub fn edges(&self) -> EdgeSet {
        EdgeSet::full(self.n) - self.pinched
    }

    pub fn uncut_edges(&self) -> EdgeSet {
        self.edges() - self.cuts
    }

    pub fn is_point(&self) -> bool {
        self.edges().is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.edges().len()
    }

    pub fn with_cuts(&self, cuts: EdgeSet) -> Result<Self, GraphError> {
        if let Some(e) = cuts.iter().find(|&e| !self.edges().contains(e)) {
            return Err(GraphError::EdgeNotPresent { edge: e });
        }
        Ok(CutQuotientGraph { cuts, ..*self })
    }

    pub fn without_cuts(&self) -> Self {
        CutQuotientGraph {
            cuts: EdgeSet::EMPTY,
            ..*self
        }
    }

    pub fn pinch(&self, e: usize) -> Result<Self, GraphError> {
        if self.cuts.contains(e) {
            return Err(GraphError::EdgeIsCut { edge: e });
        }
        if !self.edges().contains(e) {
            return Err(GraphError::EdgeNotPresent { edge: e });
        }
        Ok(CutQuotientGraph {
            pinched: self.pinched.with(e),
            ..*self
        })
    }

    pub fn cut(&self, e: usize) -> Result<Self, GraphError> {
        if !self.edges().contains(e) {
            return Err(GraphError::EdgeNotPresent { edge: e });
        }
        if self.cuts.contains(e) {
            return Err(GraphError::AlreadyCut { edge: e });
        }
        Ok(CutQuotientGraph {
            cuts: self.cuts.with(e),
            ..*self
        })
    }

    /// Identifies the quotient with a k-gon after merging external legs.
    pub fn reduce_to_k_gon(&self) -> Result<KGonReduction, GraphError> {
        if self.is_point() {
            return Err(GraphError::PointGraph);
        }
        let edge_map: Vec<(usize, usize)> = self.edges().iter().enumerate().map(|(a, e)| (e, a + 1)).collect();
        let cuts = self.cuts.iter().fold(EdgeSet::EMPTY, |acc, c| {
            let new = edge_map.iter().find(|(old, _)| *old == c).map(|p| p.1);
            acc.with(new.expect("cuts are edges"))
        });
        Ok(KGonReduction {
            k: edge_map.len(),
            edge_map,
            cuts,
        })
    }

    pub fn to_notation(&self) -> String {
        self.to_string()
    }
}

/// Result of `reduce_to_k_gon`: old edge label to new label `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGonReduction {
    pub k: usize,
    pub edge_map: Vec<(usize, usize)>,
    pub cuts: EdgeSet,
}

impl KGonReduction {
    pub fn map(&self, old: usize) -> Option<usize> {
        self.edge_map.iter().find(|p| p.0 == old).map(|p| p.1)
    }

    pub fn graph(&self) -> CutQuotientGraph {
        CutQuotientGraph::new(self.k, EdgeSet::EMPTY, self.cuts).expect("valid reduction")
    }
}

impl fmt::Debug for CutQuotientGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph({self})")
    }
}

/// `n=4;pinch=2;cut=1,3`, with empty lists omitted.
impl fmt::Display for CutQuotientGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        let list = |s: EdgeSet| s.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        if !self.pinched.is_empty() {
            write!(f, ";pinch={}", list(self.pinched))?;
        }
        if !self.cuts.is_empty() {
            write!(f, ";cut={}", list(self.cuts))?;
        }
        Ok(())
    }
}

impl FromStr for CutQuotientGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, GraphError> {
        let bad = || GraphError::Notation(s.to_string());
        let mut n = None;
        let mut pinch = vec![];
        let mut cut = vec![];
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let list = || -> Result<Vec<usize>, GraphError> {
                value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| v.parse::<usize>().map_err(|_| bad()))
                    .collect()
            };
            match key.trim() {
                "n" if n.is_none() => n = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
                "pinch" => pinch = list()?,
                "cut" => cut = list()?,
                _ => return Err(bad()),
            }
        }
        let n = n.ok_or_else(bad)?;
        if n == 0 {
            return Err(GraphError::NonPositive);
        }
        if n > MAX_EDGES {
            return Err(GraphError::TooLarge(n));
        }
        let pinched = EdgeSet::try_from_edges(&pinch, n)?;
        let cuts = EdgeSet::try_from_edges(&cut, n)?;
        CutQuotientGraph::new(n, pinched, cuts)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    #[serde(default)]
    pinch: Vec<usize>,
    #[serde(default)]
    cut: Vec<usize>,
}

impl Serialize for CutQuotientGraph {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GraphJson {
            n: self.n,
            pinch: self.pinched.to_vec(),
            cut: self.cuts.to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CutQuotientGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let g = GraphJson::deserialize(d)?;
        let mk = || -> Result<Self, GraphError> {
            if g.n == 0 {
                return Err(GraphError::NonPositive);
            }
            if g.n > MAX_EDGES {
                return Err(GraphError::TooLarge(g.n));
            }
            CutQuotientGraph::new(
                g.n,
                EdgeSet::try_from_edges(&g.pinch, g.n)?,
                EdgeSet::try_from_edges(&g.cut, g.n)?,
            )
        };
        mk().map_err(serde::de::Error::custom)
    }
}

/// Iterated residues along a sequence of distinct edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedCuts(Vec<usize>);

impl OrderedCuts {
    pub fn new(graph: &CutQuotientGraph, order: Vec<usize>) -> Result<Self, GraphError> {
        if let Some(&e) = order.iter().find(|&&e| !graph.edges().contains(e)) {
            return Err(GraphError::EdgeNotPresent { edge: e });
        }
        residue_sign(&order)?;
        Ok(OrderedCuts(order))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn sign(&self) -> i8 {
        residue_sign(&self.0).expect("validated on construction")
    }
}

/// Sign relating the residue taken in the given order to the canonical
/// ascending order: the sign of the sorting permutation.
pub fn residue_sign(order: &[usize]) -> Result<i8, GraphError> {
    let mut seen = std::collections::BTreeSet::new();
    for &e in order {
        if !seen.insert(e) {
            return Err(GraphError::DuplicateEdge { edge: e });
        }
    }
    let inversions = (0..order.len())
        .flat_map(|i| (i + 1..order.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| order[i] > order[j])
        .count();
    Ok(if inversions % 2 == 0 { 1 } else { -1 })
}
