//! Exact dense linear algebra over the rationals.
//!
//! Everything here is exact: determinants use Bareiss fraction-free
//! elimination on denominator-cleared rows, and symmetric matrices are
//! diagonalised by pivoted `LDL^T` congruence so that inertia (Sylvester's law)
//! and positive semidefiniteness are decided without floating point.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn scaled(&self, factor: &Rational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// Principal submatrix on the given (ordered) indices.
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), idx.len(), |a, b| self.get(idx[a], idx[b]).clone())
    }

    /// Rows scaled to integers; returns the integer rows and the product of
    /// the scaling factors.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut scale = BigInt::one();
        let rows = (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                scale *= &l;
                row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
            })
            .collect();
        (rows, scale)
    }

    /// Determinant by Bareiss elimination. The empty matrix has determinant 1.
    pub fn determinant(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rational::one();
        }
        let (mut a, scale) = self.integer_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return Rational::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        Rational::new(sign * &a[n - 1][n - 1], scale)
    }

    /// Rank by fraction-free row reduction.
    pub fn rank(&self) -> usize {
        let (mut a, _) = self.integer_rows();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for r in rank + 1..rows {
                if a[r][c].is_zero() {
                    continue;
                }
                let (pr, rr) = (a[rank][c].clone(), a[r][c].clone());
                for j in c..cols {
                    let v = &a[r][j] * &pr - &a[rank][j] * &rr;
                    a[r][j] = v;
                }
                let g = a[r].iter().fold(BigInt::zero(), |g, x| g.gcd(x));
                if !g.is_zero() && !g.is_one() {
                    for x in a[r].iter_mut() {
                        *x = &*x / &g;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Inertia {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

/// Chooses the remaining diagonal entry of largest magnitude, smallest index
/// first on ties.
fn pick_pivot(w: &Matrix, remaining: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for &i in remaining {
        let v = w.get(i, i);
        if v.is_zero() {
            continue;
        }
        match best {
            Some(b) if w.get(b, b).abs() >= v.abs() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Schur-complement step on pivot `p`; returns the elimination column.
fn eliminate(w: &mut Matrix, p: usize, remaining: &[usize]) -> Vec<(usize, Rational)> {
    let d = w.get(p, p).clone();
    let col: Vec<(usize, Rational)> = remaining
        .iter()
        .filter(|&&i| i != p)
        .map(|&i| (i, w.get(i, p) / &d))
        .collect();
    for &(i, ref li) in &col {
        for &(j, ref lj) in &col {
            let v = w.get(i, j) - li * &d * lj;
            w.set(i, j, v);
        }
    }
    col
}

/// Inertia of a symmetric matrix via pivoted symmetric elimination.
///
/// When every remaining diagonal entry vanishes but an off-diagonal entry
/// `a_ij` does not, index `i` is replaced by `e_i + e_j`, a congruence that
/// makes the new diagonal entry `2 a_ij` nonzero.
pub fn inertia(m: &Matrix) -> Inertia {
    assert!(m.is_symmetric(), "inertia of a non-symmetric matrix");
    let n = m.rows();
    let mut w = m.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut out = Inertia {
        pos: 0,
        neg: 0,
        zero: 0,
    };
    while !remaining.is_empty() {
        let p = match pick_pivot(&w, &remaining) {
            Some(p) => p,
            None => {
                let pair = remaining.iter().find_map(|&i| {
                    remaining
                        .iter()
                        .find(|&&j| j != i && !w.get(i, j).is_zero())
                        .map(|&j| (i, j))
                });
                let Some((i, j)) = pair else {
                    out.zero += remaining.len();
                    break;
                };
                let diag = w.get(i, i) + w.get(j, j) + w.get(i, j) * Rational::from_integer(2.into());
                let row: Vec<(usize, Rational)> = remaining
                    .iter()
                    .filter(|&&k| k != i)
                    .map(|&k| (k, w.get(i, k) + w.get(j, k)))
                    .collect();
                for (k, v) in row {
                    w.set(i, k, v.clone());
                    w.set(k, i, v);
                }
                w.set(i, i, diag);
                i
            }
        };
        if w.get(p, p).is_positive() {
            out.pos += 1;
        } else {
            out.neg += 1;
        }
        eliminate(&mut w, p, &remaining);
        remaining.retain(|&i| i != p);
    }
    out
}

/// `A = sum_t d_t l_t l_t^T` for a positive semidefinite `A`, with `d_t > 0`
/// and each `l_t` stored in the original index order (`l_t[pivot_t] = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFactor {
    pub pivots: Vec<usize>,
    pub diag: Vec<Rational>,
    pub columns: Vec<Vec<Rational>>,
}

impl PsdFactor {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Why a symmetric matrix failed the semidefiniteness test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotPsd {
    NegativePivot { index: usize },
    ZeroPivotNonzeroRow { index: usize },
}

/// Pivoted `LDL^T` restricted to diagonal pivots; succeeds iff the matrix is
/// positive semidefinite.
pub fn psd_factor(m: &Matrix) -> Result<PsdFactor, NotPsd> {
    assert!(m.is_symmetric(), "psd test of a non-symmetric matrix");
    let n = m.rows();
    let mut w = m.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut f = PsdFactor {
        pivots: vec![],
        diag: vec![],
        columns: vec![],
    };
    loop {
        if let Some(&i) = remaining.iter().find(|&&i| w.get(i, i).is_negative()) {
            return Err(NotPsd::NegativePivot { index: i });
        }
        let Some(p) = pick_pivot(&w, &remaining) else {
            for &i in &remaining {
                if remaining.iter().any(|&j| !w.get(i, j).is_zero()) {
                    return Err(NotPsd::ZeroPivotNonzeroRow { index: i });
                }
            }
            return Ok(f);
        };
        let d = w.get(p, p).clone();
        let col = eliminate(&mut w, p, &remaining);
        let mut l = vec![Rational::zero(); n];
        l[p] = Rational::one();
        for (i, v) in col {
            l[i] = v;
        }
        f.pivots.push(p);
        f.diag.push(d);
        f.columns.push(l);
        remaining.retain(|&i| i != p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    /// Leibniz expansion, used as an independent determinant.
    fn leibniz(m: &Matrix) -> Rational {
        fn perms(n: usize) -> Vec<(Vec<usize>, i32)> {
            if n == 0 {
                return vec![(vec![], 1)];
            }
            let mut out = vec![];
            for (p, s) in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    let sign = if (p.len() - pos) % 2 == 0 { s } else { -s };
                    out.push((q, sign));
                }
            }
            out
        }
        let n = m.rows();
        perms(n)
            .into_iter()
            .map(|(p, s)| {
                let prod = (0..n).fold(Rational::one(), |acc, i| acc * m.get(i, p[i]));
                if s > 0 {
                    prod
                } else {
                    -prod
                }
            })
            .fold(Rational::zero(), |a, b| a + b)
    }

    #[test]
    fn small_determinants() {
        assert_eq!(mat(&[&[-2, -3], &[-3, -2]]).determinant(), int(-5));
        assert_eq!(mat(&[&[-2, -3, 1], &[-3, -2, 1], &[1, 1, 0]]).determinant(), int(-2));
        assert_eq!(mat(&[&[0, 1], &[1, 0]]).determinant(), int(-1));
        assert_eq!(mat(&[&[1, 2], &[2, 4]]).determinant(), int(0));
        assert_eq!(Matrix::zeros(0, 0).determinant(), int(1));
        let q = Matrix::from_rows(vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(1, 3), ratio(1, 4)]]).unwrap();
        assert_eq!(q.determinant(), ratio(1, 72));
    }

    #[test]
    fn inertia_examples() {
        let i = inertia(&mat(&[&[-2, -3], &[-3, -2]]));
        assert_eq!((i.pos, i.neg, i.zero), (1, 1, 0));
        let i = inertia(&mat(&[&[-2]]));
        assert_eq!((i.pos, i.neg, i.zero), (0, 1, 0));
        let i = inertia(&Matrix::zeros(2, 2));
        assert_eq!((i.pos, i.neg, i.zero), (0, 0, 2));
        let i = inertia(&mat(&[&[0, 1], &[1, 0]]));
        assert_eq!((i.pos, i.neg, i.zero), (1, 1, 0));
        let i = inertia(&mat(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]]));
        assert_eq!((i.pos, i.neg, i.zero), (1, 1, 1));
    }

    #[test]
    fn psd_detection() {
        assert!(psd_factor(&mat(&[&[1, -1], &[-1, 1]])).is_ok());
        assert_eq!(psd_factor(&mat(&[&[1, -1], &[-1, 1]])).unwrap().rank(), 1);
        assert!(psd_factor(&mat(&[&[-1, 1], &[1, -1]])).is_err());
        assert!(matches!(
            psd_factor(&mat(&[&[0, 1], &[1, 0]])),
            Err(NotPsd::ZeroPivotNonzeroRow { .. })
        ));
        assert!(psd_factor(&mat(&[&[-2, -3], &[-3, -2]])).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(mat(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(mat(&[&[2, -1, -1], &[-1, 2, -1], &[-1, -1, 2]]).rank(), 2);
        assert_eq!(Matrix::zeros(3, 4).rank(), 0);
        assert_eq!(mat(&[&[1, 0, 1], &[0, 1, 1]]).rank(), 2);
    }

    fn small_sym(n: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-4i64..=4, n * n).prop_map(move |v| {
            Matrix::from_fn(n, n, |i, j| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                int(v[a * n + b])
            })
        })
    }

    proptest! {
        #[test]
        fn bareiss_matches_leibniz(m in (1usize..=5).prop_flat_map(small_sym)) {
            prop_assert_eq!(m.determinant(), leibniz(&m));
        }

        #[test]
        fn inertia_consistent_with_det_and_rank(m in (1usize..=5).prop_flat_map(small_sym)) {
            let i = inertia(&m);
            prop_assert_eq!(i.pos + i.neg + i.zero, m.rows());
            prop_assert_eq!(i.pos + i.neg, m.rank());
            let det = m.determinant();
            if i.zero > 0 {
                prop_assert!(det.is_zero());
            } else {
                prop_assert_eq!(det.is_negative(), i.neg % 2 == 1);
            }
        }

        #[test]
        fn psd_factor_reconstructs(v in proptest::collection::vec(-3i64..=3, 6), k in 1usize..=3) {
            // Gram matrix of k random vectors in Z^2 or Z^3 is PSD.
            let dim = 2;
            let vecs: Vec<Vec<i64>> = (0..k.min(3)).map(|a| v[a*dim..a*dim+dim].to_vec()).collect();
            let n = vecs.len();
            let g = Matrix::from_fn(n, n, |i, j| int(vecs[i].iter().zip(&vecs[j]).map(|(x, y)| x * y).sum()));
            let f = psd_factor(&g).unwrap();
            prop_assert_eq!(f.rank(), g.rank());
            let rebuilt = Matrix::from_fn(n, n, |i, j| {
                f.diag.iter().zip(&f.columns).map(|(d, l)| d * &l[i] * &l[j]).fold(Rational::zero(), |a, b| a + b)
            });
            prop_assert_eq!(rebuilt, g);
        }
    }
}
