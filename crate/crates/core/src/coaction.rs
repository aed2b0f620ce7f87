//! Symbolic motivic coaction and de Rham coproduct on n-gon periods.
//!
//! ```text
//! rho  I^m(G)       = sum_{gamma in E}        I^m(G / gamma^c)        (x) I^dr(G, gamma)
//! Delta I^dr(G, g)  = sum_{g in gamma' in E}  I^dr(G / gamma'^c, g)   (x) I^dr(G, gamma')
//! ```
//!
//! De Rham symbols are reduced with two relations, per graph with `k`
//! surviving edges: `I^dr(G, gamma) = 0` when `k` is even and `|gamma|` odd,
//! and `sum_e I^dr(G, {e}) = 0`, used to eliminate the highest single edge.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::graphs::{CutQuotientGraph, EdgeSet, GraphError};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoactionError {
    #[error("coaction needs n >= 2, got {0}")]
    TooSmall(usize),
    #[error("n = {0} is outside the supported range 2..=8")]
    OutOfRange(usize),
    #[error("edge subset {gamma} is not contained in 1..={n}")]
    BadSubset { n: usize, gamma: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A motivic or de Rham period symbol. `Idr` carries its graph with the cut
/// set equal to `gamma`; `Im` graphs are uncut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PeriodSymbol {
    Unit,
    Im(CutQuotientGraph),
    Idr(CutQuotientGraph),
}

impl PeriodSymbol {
    pub fn im(graph: CutQuotientGraph) -> Self {
        if graph.is_point() {
            PeriodSymbol::Unit
        } else {
            PeriodSymbol::Im(graph.without_cuts())
        }
    }

    /// `I^dr(Gamma_n, gamma)`.
    pub fn idr(n: usize, gamma: EdgeSet) -> Result<Self, CoactionError> {
        Ok(PeriodSymbol::Idr(CutQuotientGraph::new(n, EdgeSet::EMPTY, gamma)?))
    }

    pub fn gamma(&self) -> EdgeSet {
        match self {
            PeriodSymbol::Idr(g) => g.cuts(),
            _ => EdgeSet::EMPTY,
        }
    }

    /// Linear combination equal to this symbol modulo the relations.
    fn reduce(&self) -> Vec<(Rational, PeriodSymbol)> {
        let g = match self {
            PeriodSymbol::Unit => return vec![(Rational::one(), PeriodSymbol::Unit)],
            PeriodSymbol::Im(g) if g.is_point() => return vec![(Rational::one(), PeriodSymbol::Unit)],
            PeriodSymbol::Im(_) => return vec![(Rational::one(), *self)],
            PeriodSymbol::Idr(g) => g,
        };
        if g.is_point() {
            return vec![(Rational::one(), PeriodSymbol::Unit)];
        }
        let k = g.num_edges();
        let gamma = g.cuts();
        if k % 2 == 0 && gamma.len() % 2 == 1 {
            return vec![];
        }
        if gamma.len() == 1 && gamma.max() == g.edges().max() {
            let base = g.without_cuts();
            return (g.edges() - gamma)
                .iter()
                .map(|e| {
                    let other = base.with_cuts(EdgeSet::single(e)).expect("surviving edge");
                    (-Rational::one(), PeriodSymbol::Idr(other))
                })
                .collect();
        }
        vec![(Rational::one(), *self)]
    }
}

fn graph_label(g: &CutQuotientGraph) -> String {
    if g.pinched().is_empty() {
        format!("Γ_{}", g.n())
    } else {
        format!("Γ_{}/{}^c", g.n(), g.edges())
    }
}

impl fmt::Display for PeriodSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodSymbol::Unit => f.write_str("1"),
            PeriodSymbol::Im(g) => write!(f, "I^m({})", graph_label(g)),
            PeriodSymbol::Idr(g) => {
                write!(f, "I^dr({},{})", graph_label(&g.without_cuts()), g.cuts())
            }
        }
    }
}

impl Serialize for PeriodSymbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PeriodSymbol::Unit => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("type", "unit")?;
                m.end()
            }
            PeriodSymbol::Im(g) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("type", "Im")?;
                m.serialize_entry("graph", g)?;
                m.end()
            }
            PeriodSymbol::Idr(g) => {
                let pinched = !g.pinched().is_empty();
                let mut m = s.serialize_map(Some(3 + pinched as usize))?;
                m.serialize_entry("type", "Idr")?;
                m.serialize_entry("n", &g.n())?;
                if pinched {
                    m.serialize_entry("pinch", &g.pinched())?;
                }
                m.serialize_entry("gamma", &g.cuts())?;
                m.end()
            }
        }
    }
}

/// A rational linear combination of `N`-fold tensors of period symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor<const N: usize> {
    pub terms: Vec<(Rational, [PeriodSymbol; N])>,
}

pub type CoactionExpression = Tensor<2>;

fn sort_key<const N: usize>(t: &[PeriodSymbol; N]) -> Vec<(usize, Vec<usize>, PeriodSymbol)> {
    t.iter()
        .rev()
        .map(|s| (s.gamma().len(), s.gamma().to_vec(), *s))
        .collect()
}

impl<const N: usize> Tensor<N> {
    pub fn zero() -> Self {
        Tensor { terms: vec![] }
    }

    pub fn from_terms(terms: Vec<(Rational, [PeriodSymbol; N])>) -> Self {
        Tensor { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Applies the relations slot by slot, merges like terms and sorts.
    pub fn normal_form(&self) -> Self {
        let mut acc: BTreeMap<[PeriodSymbol; N], Rational> = BTreeMap::new();
        for (c, factors) in &self.terms {
            let mut partial: Vec<(Rational, Vec<PeriodSymbol>)> = vec![(c.clone(), vec![])];
            for f in factors {
                let expansion = f.reduce();
                partial = partial
                    .into_iter()
                    .flat_map(|(pc, pf)| {
                        expansion.iter().map(move |(ec, es)| {
                            let mut v = pf.clone();
                            v.push(*es);
                            (&pc * ec, v)
                        })
                    })
                    .collect();
            }
            for (pc, pf) in partial {
                let key: [PeriodSymbol; N] = pf.try_into().expect("N factors");
                *acc.entry(key).or_insert_with(Rational::zero) += pc;
            }
        }
        let mut terms: Vec<_> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c, k))
            .collect();
        terms.sort_by_cached_key(|(_, k)| sort_key(k));
        Tensor { terms }
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (c, f)) in self.terms.iter().enumerate() {
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, false) => {}
                (0, true) => out.push_str("- "),
                (_, false) => out.push_str(" + "),
                (_, true) => out.push_str(" - "),
            }
            if !mag.is_one() {
                out.push_str(&rational::format(&mag));
                out.push(' ');
            }
            let parts: Vec<String> = f.iter().map(ToString::to_string).collect();
            out.push_str(&parts.join(" ⊗ "));
        }
        out
    }
}

struct TermRef<'a>(&'a Rational, &'a [PeriodSymbol; 2]);

impl Serialize for TermRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Term", 3)?;
        st.serialize_field("coeff", &rational::format(self.0))?;
        st.serialize_field("left", &self.1[0])?;
        st.serialize_field("right", &self.1[1])?;
        st.end()
    }
}

impl Serialize for Tensor<2> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermRef> = self.terms.iter().map(|(c, f)| TermRef(c, f)).collect();
        let mut st = s.serialize_struct("CoactionExpression", 1)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

/// Sub-quotient `G / gamma^c` keeping the edges in `kept` and the cuts of `G`.
fn keep(g: &CutQuotientGraph, kept: EdgeSet) -> CutQuotientGraph {
    CutQuotientGraph::new(g.n(), g.pinched() | (g.edges() - kept), g.cuts()).expect("kept edges contain the cuts")
}

/// Unreduced `rho` of `I^m(G)`, formal tadpoles included.
pub fn rho_raw(symbol: &PeriodSymbol) -> Tensor<2> {
    match symbol {
        PeriodSymbol::Unit => Tensor::from_terms(vec![(Rational::one(), [PeriodSymbol::Unit, PeriodSymbol::Unit])]),
        PeriodSymbol::Im(g) => Tensor::from_terms(
            g.edges()
                .subsets()
                .map(|gamma| {
                    let left = PeriodSymbol::im(keep(g, gamma));
                    let right = PeriodSymbol::Idr(g.with_cuts(gamma).expect("subset of edges"));
                    (Rational::one(), [left, right])
                })
                .collect(),
        ),
        PeriodSymbol::Idr(_) => panic!("rho is defined on motivic symbols"),
    }
}

/// Unreduced `Delta` of a de Rham symbol.
pub fn delta_raw(symbol: &PeriodSymbol) -> Tensor<2> {
    match symbol {
        PeriodSymbol::Unit => Tensor::from_terms(vec![(Rational::one(), [PeriodSymbol::Unit, PeriodSymbol::Unit])]),
        PeriodSymbol::Idr(g) => {
            let gamma = g.cuts();
            let base = g.without_cuts();
            Tensor::from_terms(
                (g.edges() - gamma)
                    .subsets()
                    .map(|extra| {
                        let bigger = gamma | extra;
                        let left = PeriodSymbol::Idr(keep(g, bigger));
                        let right = PeriodSymbol::Idr(base.with_cuts(bigger).expect("edges"));
                        (Rational::one(), [left, right])
                    })
                    .collect(),
            )
        }
        PeriodSymbol::Im(_) => panic!("Delta is defined on de Rham symbols"),
    }
}

/// Normalized coaction of `I^m(Gamma_n)` with the canonical `j = 1`.
pub fn coaction(n: usize) -> Result<CoactionExpression, CoactionError> {
    coaction_with_j(n, 1)
}

/// Normalized coaction, writing the single-edge block for odd `n` as
/// `sum_i (I^m(Gamma/e_i^c) - I^m(Gamma/e_j^c)) (x) I^dr(Gamma, e_i)`.
pub fn coaction_with_j(n: usize, j: usize) -> Result<CoactionExpression, CoactionError> {
    if n < 2 {
        return Err(CoactionError::TooSmall(n));
    }
    let gon = CutQuotientGraph::n_gon(n)?;
    if j == 0 || j > n {
        return Err(CoactionError::BadSubset {
            n,
            gamma: EdgeSet::single(j).to_string(),
        });
    }
    let tadpole = |e: usize| PeriodSymbol::im(keep(&gon, EdgeSet::single(e)));
    let mut terms = vec![];
    for gamma in EdgeSet::full(n).subsets() {
        if n % 2 == 0 && gamma.len() % 2 == 1 {
            continue;
        }
        let right = PeriodSymbol::idr(n, gamma)?;
        if gamma.len() == 1 {
            let i = gamma.max().expect("single edge");
            terms.push((Rational::one(), [tadpole(i), right]));
            terms.push((-Rational::one(), [tadpole(j), right]));
        } else {
            terms.push((Rational::one(), [PeriodSymbol::im(keep(&gon, gamma)), right]));
        }
    }
    Ok(Tensor::from_terms(terms).normal_form())
}

fn check_subset(n: usize, gamma: EdgeSet) -> Result<(), CoactionError> {
    if !gamma.is_subset(EdgeSet::full(n)) || n == 0 {
        return Err(CoactionError::BadSubset {
            n,
            gamma: gamma.to_string(),
        });
    }
    Ok(())
}

/// `Delta I^dr(Gamma_n, gamma)` before any relation is applied.
pub fn coproduct_raw(n: usize, gamma: EdgeSet) -> Result<CoactionExpression, CoactionError> {
    check_subset(n, gamma)?;
    Ok(delta_raw(&PeriodSymbol::idr(n, gamma)?))
}

pub fn coproduct(n: usize, gamma: EdgeSet) -> Result<CoactionExpression, CoactionError> {
    Ok(coproduct_raw(n, gamma)?.normal_form())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoassociativityReport {
    pub n: usize,
    pub holds: bool,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    /// First triple tensor whose coefficients differ, rendered.
    pub counterexample: Option<String>,
}

/// Compares `(id (x) Delta) rho` with `(rho (x) id) rho` on `I^m(Gamma_n)`,
/// both expanded from the normalized coaction and normalized slot-wise.
pub fn check_coassociativity(n: usize) -> Result<CoassociativityReport, CoactionError> {
    if !(2..=8).contains(&n) {
        return Err(CoactionError::OutOfRange(n));
    }
    let rho = coaction(n)?;
    let mut lhs = vec![];
    let mut rhs = vec![];
    for (c, [left, right]) in &rho.terms {
        for (c2, [a, b]) in &delta_raw(right).terms {
            lhs.push((c * c2, [*left, *a, *b]));
        }
        for (c2, [a, b]) in &rho_raw(left).terms {
            rhs.push((c * c2, [*a, *b, *right]));
        }
    }
    let lhs = Tensor::from_terms(lhs).normal_form();
    let rhs = Tensor::from_terms(rhs).normal_form();
    let counterexample = if lhs == rhs {
        None
    } else {
        let l: BTreeMap<_, _> = lhs.terms.iter().map(|(c, k)| (*k, c.clone())).collect();
        let r: BTreeMap<_, _> = rhs.terms.iter().map(|(c, k)| (*k, c.clone())).collect();
        l.keys().chain(r.keys()).find(|k| l.get(*k) != r.get(*k)).map(|k| {
            let show = |m: &BTreeMap<_, Rational>| m.get(k).map(rational::format).unwrap_or_else(|| "0".into());
            let parts: Vec<String> = k.iter().map(ToString::to_string).collect();
            format!("{}: lhs {} rhs {}", parts.join(" ⊗ "), show(&l), show(&r))
        })
    };
    Ok(CoassociativityReport {
        n,
        holds: counterexample.is_none(),
        lhs_terms: lhs.len(),
        rhs_terms: rhs.len(),
        counterexample,
    })
}
