//! Exact arithmetic in the rational function field Q(s1, ..., sk).
//!
//! Every symbol is declared transcendental and the symbols are algebraically
//! independent, so two [`Scalar`]s denote the same real number exactly when
//! their canonical forms coincide. Floating "shadow" values attached to the
//! symbols are only ever used to decide signs (cell membership) and by the
//! numeric oracle, never for equality.

mod matrix;
mod parse;
pub mod poly;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use matrix::ScalarMatrix;
pub use poly::{Monomial, Poly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected a polynomial, found a proper fraction")]
    NotPolynomial,
    #[error("symbol `{0}` has no shadow value")]
    MissingShadow(String),
    #[error("shadow evaluation of the denominator is zero")]
    ShadowDenominatorZero,
    #[error("floating overflow during shadow evaluation")]
    Overflow,
    #[error("invalid symbol table: {0}")]
    InvalidTable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub name: String,
    pub shadow: Option<f64>,
}

/// Ordered, immutable list of declared transcendental symbols.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SymbolTable {
    /// Names must be identifiers (so expressions such as `sqrt(2)` cannot be
    /// smuggled in as symbols) and unique. Shadows, where given, must be
    /// finite, nonzero and pairwise distinct.
    pub fn new<I, S>(symbols: I) -> Result<Self, ScalarError>
    where
        I: IntoIterator<Item = (S, Option<f64>)>,
        S: Into<String>,
    {
        let symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(n, shadow)| Symbol { name: n.into(), shadow })
            .collect();
        for (i, s) in symbols.iter().enumerate() {
            if !is_identifier(&s.name) {
                return Err(ScalarError::InvalidTable(format!(
                    "`{}` is not an identifier",
                    s.name
                )));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(ScalarError::InvalidTable(format!(
                    "duplicate symbol `{}`",
                    s.name
                )));
            }
            if let Some(v) = s.shadow {
                if !v.is_finite() || v == 0.0 {
                    return Err(ScalarError::InvalidTable(format!(
                        "shadow of `{}` must be finite and nonzero",
                        s.name
                    )));
                }
                if symbols[..i].iter().any(|t| t.shadow == Some(v)) {
                    return Err(ScalarError::InvalidTable(format!(
                        "shadow of `{}` repeats another symbol's shadow",
                        s.name
                    )));
                }
            }
        }
        Ok(SymbolTable { symbols })
    }

    pub fn empty() -> Self {
        SymbolTable::default()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.symbols[index].name
    }

    /// The same names with a fresh set of shadows.
    pub fn with_shadows(&self, shadows: &[f64]) -> Result<Self, ScalarError> {
        if shadows.len() != self.symbols.len() {
            return Err(ScalarError::InvalidTable(
                "shadow count does not match symbol count".into(),
            ));
        }
        SymbolTable::new(
            self.symbols
                .iter()
                .zip(shadows)
                .map(|(s, &v)| (s.name.clone(), Some(v))),
        )
    }

    pub fn has_all_shadows(&self) -> bool {
        self.symbols.iter().all(|s| s.shadow.is_some())
    }

    pub fn shadow_values(&self) -> Result<Vec<f64>, ScalarError> {
        self.symbols
            .iter()
            .map(|s| s.shadow.ok_or_else(|| ScalarError::MissingShadow(s.name.clone())))
            .collect()
    }

    /// The scalar denoting symbol `name`.
    pub fn symbol(&self, name: &str) -> Result<Scalar, ScalarError> {
        self.index_of(name)
            .map(Scalar::var)
            .ok_or_else(|| ScalarError::UnknownSymbol(name.into()))
    }

    pub fn parse(&self, text: &str) -> Result<Scalar, ScalarError> {
        parse::parse_scalar(text, self)
    }

    pub fn format(&self, s: &Scalar) -> String {
        s.to_string_with(self)
    }
}

/// Reduced fraction of polynomials with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Scalar { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar { num: Poly::from_int(n), den: Poly::one() }
    }

    pub fn from_rational(q: BigRational) -> Self {
        Scalar { num: Poly::constant(q), den: Poly::one() }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(index: usize) -> Self {
        Scalar { num: Poly::var(index), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        Scalar { num: p, den: Poly::one() }
    }

    /// Canonical form of `num / den`.
    pub fn from_fraction(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Scalar::zero());
        }
        if let Some(c) = den.as_constant() {
            return Ok(Scalar { num: num.scale(&c.recip()), den: Poly::one() });
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading().expect("nonzero").1.clone();
        if lc.is_one() {
            Ok(Scalar { num, den })
        } else {
            let inv = lc.recip();
            Ok(Scalar { num: num.scale(&inv), den: den.scale(&inv) })
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    /// The numerator and denominator as scalars.
    pub fn denominator_of(&self) -> Scalar {
        Scalar::from_poly(self.den.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if let Some(c) = other.as_rational() {
            return Ok(Scalar {
                num: self.num.scale(&c.recip()),
                den: self.den.clone(),
            });
        }
        Scalar::from_fraction(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> Result<Scalar, ScalarError> {
        Scalar::one().try_div(self)
    }

    pub fn pow(&self, e: u32) -> Scalar {
        // powers of a reduced fraction stay reduced
        Scalar { num: self.num.pow(e), den: self.den.pow(e) }
    }

    /// Monomial coefficients of a polynomial scalar.
    pub fn expand(&self) -> Result<MonomialExpansion, ScalarError> {
        if !self.is_polynomial() {
            return Err(ScalarError::NotPolynomial);
        }
        Ok(MonomialExpansion(
            self.num.terms().map(|(m, c)| (m.clone(), c.clone())).collect(),
        ))
    }

    /// Substitute the table's shadows and evaluate in floating point.
    pub fn shadow_eval(&self, table: &SymbolTable) -> Result<f64, ScalarError> {
        let n = self.num.num_vars().max(self.den.num_vars());
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let sym = table
                .symbols
                .get(i)
                .ok_or_else(|| ScalarError::MissingShadow(format!("#{i}")))?;
            // symbols absent from the expression may lack a shadow
            let used = self.num.degree_in(i) > 0 || self.den.degree_in(i) > 0;
            values.push(match (sym.shadow, used) {
                (Some(v), _) => v,
                (None, false) => 0.0,
                (None, true) => return Err(ScalarError::MissingShadow(sym.name.clone())),
            });
        }
        let d = self.den.eval_f64(&values).ok_or(ScalarError::Overflow)?;
        if d == 0.0 {
            return Err(ScalarError::ShadowDenominatorZero);
        }
        let v = self.num.eval_f64(&values).ok_or(ScalarError::Overflow)? / d;
        if !v.is_finite() {
            return Err(ScalarError::Overflow);
        }
        Ok(v)
    }

    pub fn to_string_with(&self, table: &SymbolTable) -> String {
        let name = |i: usize| {
            table
                .symbols
                .get(i)
                .map(|s| s.name.clone())
                .unwrap_or_else(|| format!("s{i}"))
        };
        let mut out = String::new();
        if self.den.is_one() {
            self.num.fmt_with(&mut out, &name).expect("string write");
            return out;
        }
        if self.num.num_terms() > 1 {
            out.push('(');
            self.num.fmt_with(&mut out, &name).expect("string write");
            out.push(')');
        } else {
            self.num.fmt_with(&mut out, &name).expect("string write");
        }
        out.push('/');
        if self.den.is_pure_power() {
            self.den.fmt_with(&mut out, &name).expect("string write");
        } else {
            out.push('(');
            self.den.fmt_with(&mut out, &name).expect("string write");
            out.push(')');
        }
        out
    }
}

impl fmt::Display for Scalar {
    // table-free rendering with placeholder names s0, s1, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&SymbolTable::empty()))
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        if self.den == o.den {
            return Scalar::from_fraction(self.num.add(&o.num), self.den.clone())
                .expect("nonzero denominator");
        }
        if o.den.is_one() {
            return Scalar {
                num: self.num.add(&o.num.mul(&self.den)),
                den: self.den.clone(),
            };
        }
        if self.den.is_one() {
            return Scalar {
                num: o.num.add(&self.num.mul(&o.den)),
                den: o.den.clone(),
            };
        }
        Scalar::from_fraction(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
        .expect("nonzero denominator")
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Scalar { num: self.num.mul(&o.num), den: Poly::one() };
        }
        if let Some(c) = o.as_rational() {
            return Scalar { num: self.num.scale(&c), den: self.den.clone() };
        }
        if let Some(c) = self.as_rational() {
            return Scalar { num: o.num.scale(&c), den: o.den.clone() };
        }
        Scalar::from_fraction(self.num.mul(&o.num), self.den.mul(&o.den))
            .expect("nonzero denominator")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::one()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar, ScalarError> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.try_div(b)?,
    })
}

/// Finitely supported map from monomials to rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MonomialExpansion(pub BTreeMap<Monomial, BigRational>);

impl MonomialExpansion {
    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.0.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn reassemble(&self) -> Scalar {
        Scalar::from_poly(Poly::from_terms(self.0.clone()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// Sign decisions by shadow evaluation at a fixed tolerance.
#[derive(Clone, Copy, Debug)]
pub struct ShadowOrder<'a> {
    pub table: &'a SymbolTable,
    pub tolerance: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

impl<'a> ShadowOrder<'a> {
    pub fn new(table: &'a SymbolTable, tolerance: f64) -> Self {
        ShadowOrder { table, tolerance }
    }

    pub fn sign(&self, s: &Scalar) -> Result<Sign, ScalarError> {
        if let Some(q) = s.as_rational() {
            return Ok(match q.cmp(&BigRational::zero()) {
                std::cmp::Ordering::Less => Sign::Negative,
                std::cmp::Ordering::Equal => Sign::Zero,
                std::cmp::Ordering::Greater => Sign::Positive,
            });
        }
        let v = s.shadow_eval(self.table)?;
        Ok(if v < -self.tolerance {
            Sign::Negative
        } else if v > self.tolerance {
            Sign::Positive
        } else {
            Sign::Zero
        })
    }

    pub fn is_negative(&self, s: &Scalar) -> Result<bool, ScalarError> {
        Ok(self.sign(s)? == Sign::Negative)
    }
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter()
        .zip(b)
        .fold(Scalar::zero(), |acc, (x, y)| &acc + &(x * y))
}

pub fn vec_add(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Scalar], c: &Scalar) -> Vec<Scalar> {
    a.iter().map(|x| x * c).collect()
}

pub fn format_vec(v: &[Scalar], table: &SymbolTable) -> Vec<String> {
    v.iter().map(|s| s.to_string_with(table)).collect()
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    fn table() -> SymbolTable {
        SymbolTable::new([("l", Some(1.4142)), ("m", Some(1.7320))]).unwrap()
    }

    #[test]
    fn parse_canonicalizes() {
        let t = table();
        let a = t.parse("1/2 + 3*l").unwrap();
        assert_eq!(a, t.parse("(6*l+1)/2").unwrap());
        assert_eq!(t.format(&a), "3*l + 1/2");
        assert_eq!(t.parse("l/l").unwrap(), Scalar::one());
    }

    #[test]
    fn parse_cancels_common_factor() {
        // oracle: (l^2 - 1) = (l - 1)(l + 1) by polynomial long division
        let t = table();
        let l = Poly::var(0);
        let (q, r) = {
            let num = l.mul(&l).sub(&Poly::one());
            let den = l.sub(&Poly::one());
            let q = num.div_exact(&den).unwrap();
            (q.clone(), num.sub(&q.mul(&den)))
        };
        assert!(r.is_zero());
        let s = t.parse("(l^2-1)/(l-1)").unwrap();
        assert_eq!(s, Scalar::from_poly(q));
        assert_eq!(t.format(&s), "l + 1");
    }

    #[test]
    fn arithmetic_examples() {
        let t = table();
        let l = t.parse("l").unwrap();
        assert_eq!(&l + &t.parse("1-l").unwrap(), Scalar::one());
        assert_eq!(&l * &t.parse("1/l").unwrap(), Scalar::one());
        // oracle: common denominator (l-1)(l+1) = l^2 - 1, numerator (l+1)+(l-1) = 2l
        let sum = &t.parse("1/(l-1)").unwrap() + &t.parse("1/(l+1)").unwrap();
        assert_eq!(sum.numerator(), &Poly::var(0).scale(&BigRational::from_integer(2.into())));
        assert_eq!(sum.denominator(), &Poly::var(0).pow(2).sub(&Poly::one()));
        assert_eq!(t.format(&sum), "2*l/(l^2 - 1)");
        assert_eq!(
            arith(&l, &Scalar::zero(), ArithOp::Div),
            Err(ScalarError::DivisionByZero)
        );
    }

    #[test]
    fn expansion_examples() {
        let t = table();
        let e = t.parse("2 + 3*l - l*m/1").unwrap().expand().unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.coefficient(&Monomial::one()), BigRational::from_integer(2.into()));
        assert_eq!(e.coefficient(&Monomial::var(0)), BigRational::from_integer(3.into()));
        let lm = Monomial::var(0).mul(&Monomial::var(1));
        assert_eq!(e.coefficient(&lm), BigRational::from_integer((-1).into()));
        assert!(Scalar::zero().expand().unwrap().is_empty());
        // binomial oracle: (l+1)^2 = C(2,0) + C(2,1) l + C(2,2) l^2
        let sq = t.parse("(l+1)^2").unwrap().expand().unwrap();
        for (k, c) in [1, 2, 1].into_iter().enumerate() {
            assert_eq!(
                sq.coefficient(&Monomial::var_pow(0, k as u32)),
                BigRational::from_integer(c.into())
            );
        }
        assert_eq!(
            t.parse("1/l").unwrap().expand(),
            Err(ScalarError::NotPolynomial)
        );
    }

    #[test]
    fn shadow_examples() {
        let t = SymbolTable::new([("l", Some(1.4142))]).unwrap();
        assert_eq!(t.parse("l").unwrap().shadow_eval(&t).unwrap(), 1.4142);
        let t15 = t.with_shadows(&[1.5]).unwrap();
        assert!((t.parse("l^2-2").unwrap().shadow_eval(&t15).unwrap() - 0.25).abs() < 1e-12);
        let t1 = t.with_shadows(&[1.0]).unwrap();
        assert_eq!(
            t.parse("1/(l-1)").unwrap().shadow_eval(&t1),
            Err(ScalarError::ShadowDenominatorZero)
        );
        let bare = SymbolTable::new([("l", None::<f64>)]).unwrap();
        assert!(matches!(
            bare.parse("l").unwrap().shadow_eval(&bare),
            Err(ScalarError::MissingShadow(_))
        ));
    }

    #[test]
    fn table_validation() {
        assert!(SymbolTable::new([("l", Some(1.0)), ("l", Some(2.0))]).is_err());
        assert!(SymbolTable::new([("l", Some(0.0))]).is_err());
        assert!(SymbolTable::new([("l", Some(f64::NAN))]).is_err());
        assert!(SymbolTable::new([("a", Some(1.5)), ("b", Some(1.5))]).is_err());
        assert!(SymbolTable::new([("sqrt(2)", Some(1.41))]).is_err());
        assert!(SymbolTable::new([("x_1", None::<f64>)]).is_ok());
    }
}
