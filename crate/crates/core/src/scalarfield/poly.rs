//! Sparse multivariate polynomials over the rationals.
//!
//! Terms are keyed by [`Monomial`] and kept in graded lexicographic order, so
//! the leading term is always the last entry of the map. Variables are plain
//! indices; names live in the symbol table.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exponent vector with trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(index: usize) -> Self {
        Self::var_pow(index, 1)
    }

    pub fn var_pow(index: usize, exp: u32) -> Self {
        let mut v = vec![0; index + 1];
        v[index] = exp;
        Monomial::from_exponents(v)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exp(&self, index: usize) -> u32 {
        self.0.get(index).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let v = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Monomial::from_exponents(v)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if other.0.len() > self.0.len() {
            return None;
        }
        let mut v = self.0.clone();
        for (i, e) in other.0.iter().enumerate() {
            v[i] = v[i].checked_sub(*e)?;
        }
        Some(Monomial::from_exponents(v))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().min(other.0.len());
        Monomial::from_exponents((0..n).map(|i| self.0[i].min(other.0[i])).collect())
    }

    fn without_var(&self, index: usize) -> Monomial {
        let mut v = self.0.clone();
        if index < v.len() {
            v[index] = 0;
        }
        Monomial::from_exponents(v)
    }
}

impl Ord for Monomial {
    // graded lexicographic, earlier variables heavier
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for i in 0..n {
                match self.exp(i).cmp(&other.exp(i)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(index: usize) -> Self {
        Poly::term(BigRational::one(), Monomial::var(index))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(it: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// One past the largest variable index used.
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|m| m.0.len()).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut r = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                r.add_term(ma.mul(mb), ca * cb);
            }
        }
        r
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul_term(&self, c: &BigRational, mono: &Monomial) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.mul(mono), x * c))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Scaled so the leading coefficient is 1. Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let m = rm.div(dm)?;
            let c = rc / dc;
            rem = rem.sub(&d.mul_term(&c, &m));
            q.add_term(m, c);
        }
        Some(q)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    /// Coefficients as a polynomial in `var`: entry `k` multiplies `var^k`.
    pub fn coefficients_in(&self, var: usize) -> Vec<Poly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            out[m.exp(var) as usize].add_term(m.without_var(var), c.clone());
        }
        out
    }

    fn leading_coefficient_in(&self, var: usize) -> Poly {
        let deg = self.degree_in(var);
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.exp(var) == deg)
                .map(|(m, c)| (m.without_var(var), c.clone())),
        )
    }

    fn lowest_var(&self) -> Option<usize> {
        self.terms
            .keys()
            .filter_map(|m| m.0.iter().position(|&e| e > 0))
            .min()
    }

    fn content_in(&self, var: usize) -> Poly {
        self.coefficients_in(var)
            .into_iter()
            .filter(|c| !c.is_zero())
            .fold(Poly::zero(), |g, c| g.gcd(&c))
    }

    /// Monic greatest common divisor. `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        if self.num_terms() == 1 || other.num_terms() == 1 {
            return monomial_gcd(self, other);
        }
        let var = match (self.lowest_var(), other.lowest_var()) {
            (Some(a), Some(b)) => a.min(b),
            _ => return Poly::one(),
        };
        let (da, db) = (self.degree_in(var), other.degree_in(var));
        if da == 0 {
            return self.gcd(&other.content_in(var));
        }
        if db == 0 {
            return self.content_in(var).gcd(other);
        }
        let ca = self.content_in(var);
        let cb = other.content_in(var);
        let c = ca.gcd(&cb);
        let pa = self.div_exact(&ca).expect("content divides");
        let pb = other.div_exact(&cb).expect("content divides");
        let g = primitive_gcd(pa, pb, var);
        c.mul(&g).monic()
    }

    pub fn lcm(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(other);
        self.mul(other)
            .div_exact(&g)
            .expect("gcd divides product")
            .monic()
    }

    /// Least common multiple of all coefficient denominators.
    pub fn coefficient_denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn eval_f64(&self, values: &[f64]) -> Option<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= values.get(i)?.powi(e as i32);
                }
            }
            acc += t;
        }
        Some(acc)
    }

    /// Write with variable names supplied by `name`.
    pub fn fmt_with(
        &self,
        f: &mut dyn fmt::Write,
        name: &dyn Fn(usize) -> String,
    ) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{}", fmt_rational(&abs))?;
                continue;
            }
            if !abs.is_one() {
                write!(f, "{}*", fmt_rational(&abs))?;
            }
            let mut first = true;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                f.write_str(&name(i))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }

    /// True when the polynomial is a single variable raised to a power.
    pub fn is_pure_power(&self) -> bool {
        match self.terms.iter().next() {
            Some((m, c)) if self.terms.len() == 1 && c.is_one() => {
                m.0.iter().filter(|&&e| e > 0).count() == 1
            }
            _ => false,
        }
    }
}

fn monomial_gcd(a: &Poly, b: &Poly) -> Poly {
    let g = a
        .terms
        .keys()
        .chain(b.terms.keys())
        .fold(None::<Monomial>, |acc, m| match acc {
            None => Some(m.clone()),
            Some(g) => Some(g.gcd(m)),
        })
        .unwrap_or_default();
    Poly::term(BigRational::one(), g)
}

fn pseudo_remainder(a: &Poly, b: &Poly, var: usize) -> Poly {
    let n = b.degree_in(var);
    let lb = b.leading_coefficient_in(var);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(var) >= n {
        let k = r.degree_in(var);
        let lr = r.leading_coefficient_in(var);
        let shift = Poly::term(BigRational::one(), Monomial::var_pow(var, k - n));
        r = r.mul(&lb).sub(&lr.mul(&shift).mul(b));
    }
    r
}

fn primitive_part(p: &Poly, var: usize) -> Poly {
    let c = p.content_in(var);
    p.div_exact(&c).expect("content divides").monic()
}

// gcd of two polynomials primitive with respect to `var`
fn primitive_gcd(a: Poly, b: Poly, var: usize) -> Poly {
    let (mut a, mut b) = if a.degree_in(var) >= b.degree_in(var) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        let r = pseudo_remainder(&a, &b, var);
        if r.is_zero() {
            return b.monic();
        }
        if r.degree_in(var) == 0 {
            return Poly::one();
        }
        a = b;
        b = primitive_part(&r, var);
    }
}

pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale down huge operands before dividing
            let bits = q.numer().bits().max(q.denom().bits());
            let shift = bits.saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn x() -> Poly {
        Poly::var(0)
    }
    fn y() -> Poly {
        Poly::var(1)
    }

    #[test]
    fn grlex_order() {
        let x2 = Monomial::var_pow(0, 2);
        let xy = Monomial::var(0).mul(&Monomial::var(1));
        let y2 = Monomial::var_pow(1, 2);
        let x = Monomial::var(0);
        assert!(x2 > xy && xy > y2 && y2 > x && x > Monomial::one());
    }

    #[test]
    fn exact_division() {
        let a = x().mul(&x()).sub(&Poly::one());
        let b = x().sub(&Poly::one());
        assert_eq!(a.div_exact(&b), Some(x().add(&Poly::one())));
        assert_eq!(x().div_exact(&y()), None);
    }

    #[test]
    fn gcd_univariate() {
        let a = x().mul(&x()).sub(&Poly::one());
        let b = x().mul(&x()).add(&x().scale(&q(2))).add(&Poly::one());
        assert_eq!(a.gcd(&b), x().add(&Poly::one()));
    }

    #[test]
    fn gcd_bivariate() {
        // (x + y)(x - 2y) and (x + y)(y + 3)
        let f = x().add(&y());
        let a = f.mul(&x().sub(&y().scale(&q(2))));
        let b = f.mul(&y().add(&Poly::from_int(3)));
        assert_eq!(a.gcd(&b), f.monic());
        let c = x().mul(&y()).add(&Poly::one());
        assert_eq!(c.gcd(&f), Poly::one());
    }

    #[test]
    fn gcd_with_content() {
        // y*(x+1) and y^2*(x-1)
        let a = y().mul(&x().add(&Poly::one()));
        let b = y().mul(&y()).mul(&x().sub(&Poly::one()));
        assert_eq!(a.gcd(&b), y());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let p = x().add(&y()).add(&Poly::one());
        assert_eq!(p.pow(3), p.mul(&p).mul(&p));
        assert_eq!(p.pow(0), Poly::one());
    }
}
