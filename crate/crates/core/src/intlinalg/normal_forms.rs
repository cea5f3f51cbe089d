use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::ZMatrix;

/// `h = u * a` with `u` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnfResult {
    pub h: ZMatrix,
    pub u: ZMatrix,
}

impl HnfResult {
    /// Nonzero rows of `h`, which form a basis of the row lattice.
    pub fn basis(&self) -> Vec<Vec<BigInt>> {
        (0..self.h.rows())
            .map(|i| self.h.row(i).to_vec())
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect()
    }
}

/// `s = u * a * v` with `u`, `v` unimodular and `s` diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub s: ZMatrix,
    pub u: ZMatrix,
    pub v: ZMatrix,
}

impl SnfResult {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s.get(i, i).clone())
            .collect()
    }
}

fn min_abs_in_column(m: &ZMatrix, col: usize, from: usize) -> Option<usize> {
    (from..m.rows())
        .filter(|&i| !m.get(i, col).is_zero())
        .min_by(|&a, &b| m.get(a, col).abs().cmp(&m.get(b, col).abs()))
}

/// Row-style Hermite normal form.
pub fn hnf(a: &ZMatrix) -> HnfResult {
    let (rows, cols) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut u = ZMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        while let Some(p) = min_abs_in_column(&h, c, r) {
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut clean = true;
            for i in r + 1..rows {
                if h.get(i, c).is_zero() {
                    continue;
                }
                let q = -(h.get(i, c) / h.get(r, c));
                h.add_row_multiple(i, r, &q);
                u.add_row_multiple(i, r, &q);
                clean &= h.get(i, c).is_zero();
            }
            if clean {
                break;
            }
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = -h.get(i, c).div_floor(h.get(r, c));
            h.add_row_multiple(i, r, &q);
            u.add_row_multiple(i, r, &q);
        }
        r += 1;
    }
    HnfResult { h, u }
}

/// Smith normal form with divisibility chain `d1 | d2 | ...`.
pub fn snf(a: &ZMatrix) -> SnfResult {
    let (rows, cols) = (a.rows(), a.cols());
    let mut s = a.clone();
    let mut u = ZMatrix::identity(rows);
    let mut v = ZMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        let best = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !s.get(i, j).is_zero())
            .min_by(|&(a, b), &(c, d)| s.get(a, b).abs().cmp(&s.get(c, d).abs()));
        let Some((pi, pj)) = best else { break };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if s.get(i, t).is_zero() {
                    continue;
                }
                let q = -(s.get(i, t) / s.get(t, t));
                s.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= s.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                if s.get(t, j).is_zero() {
                    continue;
                }
                let q = -(s.get(t, j) / s.get(t, t));
                s.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= s.get(t, j).is_zero();
            }
            if !clean {
                // bring the smallest remainder into the pivot and retry
                let in_col = (t + 1..rows)
                    .filter(|&i| !s.get(i, t).is_zero())
                    .min_by_key(|&i| s.get(i, t).abs());
                let in_row = (t + 1..cols)
                    .filter(|&j| !s.get(t, j).is_zero())
                    .min_by_key(|&j| s.get(t, j).abs());
                match (in_col, in_row) {
                    (Some(i), Some(j)) if s.get(i, t).abs() > s.get(t, j).abs() => {
                        s.swap_cols(t, j);
                        v.swap_cols(t, j);
                    }
                    (Some(i), _) => {
                        s.swap_rows(t, i);
                        u.swap_rows(t, i);
                    }
                    (None, Some(j)) => {
                        s.swap_cols(t, j);
                        v.swap_cols(t, j);
                    }
                    (None, None) => unreachable!("unclean pivot with no remainder"),
                }
                continue;
            }
            let bad = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !s.get(i, j).is_multiple_of(s.get(t, t)))
            });
            match bad {
                Some(i) => {
                    let one = BigInt::from(1);
                    s.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfResult { s, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    // HNF predicates checked directly, independent of the reduction loop
    fn is_row_hnf(h: &ZMatrix) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero_row = false;
        for i in 0..h.rows() {
            let p = (0..h.cols()).find(|&j| !h.get(i, j).is_zero());
            match p {
                None => seen_zero_row = true,
                Some(p) => {
                    if seen_zero_row || last_pivot.is_some_and(|lp| p <= lp) {
                        return false;
                    }
                    let piv = h.get(i, p);
                    if !piv.is_positive() {
                        return false;
                    }
                    for k in 0..i {
                        let e = h.get(k, p);
                        if e.is_negative() || e >= piv {
                            return false;
                        }
                    }
                    last_pivot = Some(p);
                }
            }
        }
        true
    }

    #[test]
    fn hnf_examples() {
        let id = ZMatrix::identity(3);
        let r = hnf(&id);
        assert_eq!(r.h, id);
        assert_eq!(r.u, id);

        let a = ZMatrix::from_i64(&[&[2, 4], &[1, 3]]);
        let r = hnf(&a);
        assert_eq!(r.h, ZMatrix::from_i64(&[&[1, 1], &[0, 2]]));
        assert_eq!(r.u.mul(&a), r.h);
        assert!(r.u.is_unimodular());
        assert!(is_row_hnf(&r.h));

        let z = ZMatrix::from_i64(&[&[0, 0]]);
        assert_eq!(hnf(&z).h, z);
    }

    #[test]
    fn snf_examples() {
        let a = ZMatrix::from_i64(&[&[6, 0], &[0, 10]]);
        let r = snf(&a);
        assert_eq!(r.s, ZMatrix::from_i64(&[&[2, 0], &[0, 30]]));
        assert_eq!(r.u.mul(&a).mul(&r.v), r.s);
        assert!(r.u.is_unimodular() && r.v.is_unimodular());

        let id = ZMatrix::identity(2);
        assert_eq!(snf(&id).s, id);
        let z = ZMatrix::zeros(2, 3);
        assert!(snf(&z).s.is_zero());
    }

    #[test]
    fn snf_rectangular() {
        let a = ZMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let r = snf(&a);
        assert_eq!(r.diagonal(), vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        assert_eq!(r.u.mul(&a).mul(&r.v), r.s);
    }
}
