//! Exact linear algebra over Q and Z.
//!
//! Row-style Hermite normal form (`H = U*A`, positive pivots, entries above a
//! pivot reduced into `[0, pivot)`), Smith normal form (`S = U*A*V`), and a
//! linear Diophantine solver built on the latter. These answer every lattice
//! membership question in the crate.

mod normal_forms;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use normal_forms::{hnf, snf, HnfResult, SnfResult};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ZMatrix = Matrix<BigInt>;
pub type QMatrix = Matrix<BigRational>;

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Panics on ragged input; `cols` is needed when `rows` is empty.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix { rows: rows.len(), cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }
}

impl ZMatrix {
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
            cols,
        )
    }

    pub fn mul(&self, other: &ZMatrix) -> ZMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// Row `dst += k * row src`.
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(dst, j) + k * self.get(src, j);
            self.set(dst, j, v);
        }
    }

    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, dst) + k * self.get(i, src);
            self.set(i, dst, v);
        }
    }

    pub(crate) fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !m.get(i, k).is_zero()) else {
                return BigInt::zero();
            };
            if p != k {
                m.swap_rows(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(k, k) * m.get(i, j) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.get(k, k).clone();
        }
        sign * m.get(n - 1, n - 1)
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().abs().is_one()
    }

    pub fn to_rational(&self) -> QMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
    }
}

impl QMatrix {
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        ZMatrix::from_i64(rows).to_rational()
    }

    /// Each row multiplied by the lcm of its denominators.
    fn clear_denominators(&self) -> ZMatrix {
        let mut out = ZMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let l = self.row(i).iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            for j in 0..self.cols {
                let q = self.get(i, j);
                out.set(i, j, q.numer() * (&l / q.denom()));
            }
        }
        out
    }

    /// Reduced row echelon form over Q and its pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in c..m.cols {
                        let v = m.get(i, j) - &f * m.get(r, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }
}

/// Rank over Q by fraction-free (Bareiss) elimination.
pub fn rank_rational(a: &QMatrix) -> usize {
    let mut m = a.clear_denominators();
    let (rows, cols) = (m.rows, m.cols);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m.get(i, c).is_zero()) else {
            continue;
        };
        m.swap_rows(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (m.get(r, c) * m.get(i, j) - m.get(i, c) * m.get(r, j)) / &prev;
                m.set(i, j, v);
            }
            m.set(i, c, BigInt::zero());
        }
        prev = m.get(r, c).clone();
        r += 1;
    }
    r
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiophantineSolution {
    /// `certificate` is the Smith row where solvability fails.
    NoSolution { certificate: usize },
    Solvable { particular: Vec<BigInt>, kernel_basis: Vec<Vec<BigInt>> },
}

impl DiophantineSolution {
    pub fn particular(&self) -> Option<&[BigInt]> {
        match self {
            DiophantineSolution::Solvable { particular, .. } => Some(particular),
            DiophantineSolution::NoSolution { .. } => None,
        }
    }

    pub fn is_solvable(&self) -> bool {
        matches!(self, DiophantineSolution::Solvable { .. })
    }
}

/// Integer solutions of `A x = b`.
pub fn solve_diophantine(a: &ZMatrix, b: &[BigInt]) -> DiophantineSolution {
    assert_eq!(a.rows(), b.len(), "right-hand side length must match row count");
    let SnfResult { s, u, v } = snf(a);
    let c = u.mul_vec(b);
    let r = (0..s.rows().min(s.cols()))
        .take_while(|&i| !s.get(i, i).is_zero())
        .count();
    let mut y = vec![BigInt::zero(); a.cols()];
    for i in 0..s.rows() {
        if i < r {
            let (q, rem) = c[i].div_rem(s.get(i, i));
            if !rem.is_zero() {
                return DiophantineSolution::NoSolution { certificate: i };
            }
            y[i] = q;
        } else if !c[i].is_zero() {
            return DiophantineSolution::NoSolution { certificate: i };
        }
    }
    let particular = v.mul_vec(&y);
    let kernel_basis = (r..a.cols()).map(|j| v.column(j)).collect();
    DiophantineSolution::Solvable { particular, kernel_basis }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    // rank by enumerating minors: the largest k with a nonzero k x k minor
    fn rank_by_minors(a: &ZMatrix) -> usize {
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            (0..n)
                .flat_map(|last| {
                    subsets(last, k - 1).into_iter().map(move |mut s| {
                        s.push(last);
                        s
                    })
                })
                .collect()
        }
        for k in (1..=a.rows().min(a.cols())).rev() {
            for rs in subsets(a.rows(), k) {
                for cs in subsets(a.cols(), k) {
                    let m = ZMatrix::from_rows(
                        rs.iter()
                            .map(|&i| cs.iter().map(|&j| a.get(i, j).clone()).collect())
                            .collect(),
                        k,
                    );
                    if !m.determinant().is_zero() {
                        return k;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_rational(&QMatrix::identity(3)), 3);
        assert_eq!(rank_rational(&QMatrix::zeros(2, 3)), 0);
        let a = ZMatrix::from_i64(&[&[1, 2], &[2, 4], &[3, 6]]);
        assert_eq!(rank_by_minors(&a), 1);
        assert_eq!(rank_rational(&a.to_rational()), 1);
    }

    #[test]
    fn rank_with_fractions_and_skipped_columns() {
        let half = BigRational::new(1.into(), 2.into());
        let a = QMatrix::from_rows(
            vec![
                vec![BigRational::zero(), half.clone(), BigRational::one()],
                vec![BigRational::zero(), BigRational::one(), BigRational::from_integer(2.into())],
                vec![BigRational::zero(), BigRational::zero(), half],
            ],
            3,
        );
        assert_eq!(rank_rational(&a), 2);
    }

    #[test]
    fn determinant_small() {
        assert_eq!(ZMatrix::from_i64(&[&[2, 4], &[1, 3]]).determinant(), BigInt::from(2));
        assert_eq!(
            ZMatrix::from_i64(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]).determinant(),
            BigInt::from(-1)
        );
        assert!(ZMatrix::from_i64(&[&[1, 2], &[2, 4]]).determinant().is_zero());
    }

    #[test]
    fn diophantine_examples() {
        let a = ZMatrix::from_i64(&[&[2, 4]]);
        match solve_diophantine(&a, &z(&[6])) {
            DiophantineSolution::Solvable { particular, kernel_basis } => {
                assert_eq!(a.mul_vec(&particular), z(&[6]));
                assert_eq!(kernel_basis.len(), 1);
                let k = &kernel_basis[0];
                assert!(k == &z(&[2, -1]) || k == &z(&[-2, 1]), "kernel {k:?}");
            }
            other => panic!("expected a solution, got {other:?}"),
        }
        assert_eq!(
            solve_diophantine(&ZMatrix::from_i64(&[&[2]]), &z(&[1])),
            DiophantineSolution::NoSolution { certificate: 0 }
        );
    }

    #[test]
    fn diophantine_inconsistent_rows() {
        let a = ZMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert!(!solve_diophantine(&a, &z(&[1, 3])).is_solvable());
        assert!(solve_diophantine(&a, &z(&[1, 2])).is_solvable());
    }
}
