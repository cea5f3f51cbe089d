use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::intlinalg::{hnf, solve_diophantine, DiophantineSolution, ZMatrix};
use crate::scalarfield::{Monomial, Poly, Scalar, SymbolTable};

/// Integer coordinates for a finitely generated additive subgroup of `ℝ^q`
/// with scalar entries: `v ↦ D·Q·v` expanded in monomials, one column per
/// (monomial, coordinate) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialCoordinates {
    pub denominator: Poly,
    pub scale: BigInt,
    pub columns: Vec<(Monomial, usize)>,
}

impl MonomialCoordinates {
    fn build(dim: usize, vectors: &[Vec<Scalar>]) -> Self {
        let mut den = Poly::one();
        for v in vectors {
            for e in v {
                if !e.denominator().is_one() {
                    den = den.lcm(e.denominator());
                }
            }
        }
        let den = den.monic();
        let mut scale = BigInt::one();
        let mut columns = Vec::new();
        for v in vectors {
            for (k, e) in v.iter().enumerate() {
                let p = cleared(e, &den);
                scale = scale.lcm(&p.coefficient_denominator_lcm());
                for (m, _) in p.terms() {
                    columns.push((m.clone(), k));
                }
            }
        }
        columns.sort();
        columns.dedup();
        debug_assert!(columns.iter().all(|(_, k)| *k < dim));
        MonomialCoordinates { denominator: den, scale, columns }
    }

    /// Integer coordinates of `v`, or `None` when `v` lies outside the
    /// coordinate module (and so outside any group it was built for).
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<BigInt>> {
        let mut out = vec![BigInt::zero(); self.columns.len()];
        for (k, e) in v.iter().enumerate() {
            let scaled = e * &Scalar::from_poly(self.denominator.clone());
            if !scaled.is_polynomial() {
                return None;
            }
            for (m, c) in scaled.numerator().terms() {
                let c = c * BigRational::from_integer(self.scale.clone());
                if !c.is_integer() {
                    return None;
                }
                let idx = self.columns.binary_search(&(m.clone(), k)).ok()?;
                out[idx] = c.to_integer();
            }
        }
        Some(out)
    }

    pub fn vector(&self, dim: usize, coords: &[BigInt]) -> Vec<Scalar> {
        let mut polys = vec![Poly::zero(); dim];
        for ((m, k), c) in self.columns.iter().zip(coords) {
            if !c.is_zero() {
                let q = BigRational::new(c.clone(), self.scale.clone());
                polys[*k] = polys[*k].add(&Poly::term(q, m.clone()));
            }
        }
        polys
            .into_iter()
            .map(|p| {
                Scalar::from_fraction(p, self.denominator.clone()).expect("monic denominator")
            })
            .collect()
    }
}

fn cleared(e: &Scalar, den: &Poly) -> Poly {
    if e.denominator().is_one() {
        return e.numerator().mul(den);
    }
    let cofactor = den.div_exact(e.denominator()).expect("common denominator");
    e.numerator().mul(&cofactor)
}

/// Finitely generated group of translations of `ℝ^q`.
#[derive(Clone, Debug)]
pub struct TranslationGroup {
    dim: usize,
    generators: Vec<Vec<Scalar>>,
    coords: MonomialCoordinates,
    // generator coordinates as rows
    matrix: ZMatrix,
    // HNF basis of the row lattice
    canonical: Vec<Vec<BigInt>>,
}

impl TranslationGroup {
    /// Panics if a generator has the wrong length.
    pub fn new(dim: usize, generators: Vec<Vec<Scalar>>) -> Self {
        assert!(generators.iter().all(|g| g.len() == dim), "generator dimension mismatch");
        let coords = MonomialCoordinates::build(dim, &generators);
        let rows: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| coords.coordinates(g).expect("generators lie in their own module"))
            .collect();
        let matrix = ZMatrix::from_rows(rows, coords.columns.len());
        let canonical = hnf(&matrix).basis();
        TranslationGroup { dim, generators, coords, matrix, canonical }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<Scalar>] {
        &self.generators
    }

    pub fn coordinates(&self) -> &MonomialCoordinates {
        &self.coords
    }

    /// Generator coordinates, one row per generator.
    pub fn coordinate_matrix(&self) -> &ZMatrix {
        &self.matrix
    }

    pub fn canonical_coords(&self) -> &[Vec<BigInt>] {
        &self.canonical
    }

    /// Rank of the group as a free abelian group.
    pub fn rank(&self) -> usize {
        self.canonical.len()
    }

    pub fn canonical_generators(&self) -> Vec<Vec<Scalar>> {
        self.canonical.iter().map(|r| self.coords.vector(self.dim, r)).collect()
    }

    /// Integer coefficients expressing `y` in the generators, if `y ∈ Γ`.
    pub fn membership(&self, y: &[Scalar]) -> Option<Vec<BigInt>> {
        assert_eq!(y.len(), self.dim, "dimension mismatch");
        if self.generators.is_empty() {
            return y.iter().all(Scalar::is_zero).then(Vec::new);
        }
        let b = self.coords.coordinates(y)?;
        match solve_diophantine(&self.matrix.transpose(), &b) {
            DiophantineSolution::Solvable { particular, .. } => Some(particular),
            DiophantineSolution::NoSolution { .. } => None,
        }
    }

    pub fn contains(&self, y: &[Scalar]) -> bool {
        self.membership(y).is_some()
    }

    /// Integer relations among the generators.
    pub fn relations(&self) -> Vec<Vec<BigInt>> {
        if self.generators.is_empty() {
            return Vec::new();
        }
        let zero = vec![BigInt::zero(); self.coords.columns.len()];
        match solve_diophantine(&self.matrix.transpose(), &zero) {
            DiophantineSolution::Solvable { kernel_basis, .. } => kernel_basis,
            DiophantineSolution::NoSolution { .. } => unreachable!("homogeneous system"),
        }
    }

    pub fn combination(&self, coefficients: &[BigInt]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.dim];
        for (g, c) in self.generators.iter().zip(coefficients) {
            if c.is_zero() {
                continue;
            }
            let c = Scalar::from_rational(BigRational::from_integer(c.clone()));
            for (o, x) in out.iter_mut().zip(g) {
                *o = &*o + &(&c * x);
            }
        }
        out
    }

    pub fn display<'a>(&'a self, table: &'a SymbolTable) -> impl fmt::Display + 'a {
        GroupDisplay { group: self, table }
    }
}

impl PartialEq for TranslationGroup {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.generators.iter().all(|g| other.contains(g))
            && other.generators.iter().all(|g| self.contains(g))
    }
}

struct GroupDisplay<'a> {
    group: &'a TranslationGroup,
    table: &'a SymbolTable,
}

impl fmt::Display for GroupDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self
            .group
            .canonical_generators()
            .iter()
            .map(|g| {
                let parts: Vec<String> = g.iter().map(|s| s.to_string_with(self.table)).collect();
                if parts.len() == 1 {
                    parts[0].clone()
                } else {
                    format!("({})", parts.join(", "))
                }
            })
            .collect();
        write!(f, "<{}>", gens.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SymbolTable {
        SymbolTable::new([("l", None::<f64>), ("m", None)]).unwrap()
    }

    fn v(t: &SymbolTable, xs: &[&str]) -> Vec<Scalar> {
        xs.iter().map(|x| t.parse(x).unwrap()).collect()
    }

    #[test]
    fn kronecker_group() {
        let t = table();
        let g = TranslationGroup::new(1, vec![v(&t, &["1"]), v(&t, &["l"])]);
        assert_eq!(g.rank(), 2);
        let canon: Vec<String> =
            g.canonical_generators().iter().map(|x| x[0].to_string_with(&t)).collect();
        assert_eq!(canon, vec!["1", "l"]);
        assert_eq!(g.display(&t).to_string(), "<1, l>");
        let c = g.membership(&v(&t, &["3 + 2*l"])).unwrap();
        assert_eq!(c, vec![BigInt::from(3), BigInt::from(2)]);
        assert!(g.membership(&v(&t, &["1/2"])).is_none());
        assert!(g.membership(&v(&t, &["m"])).is_none());
        assert!(g.membership(&v(&t, &["1/l"])).is_none());
        assert!(g.relations().is_empty());
    }

    #[test]
    fn redundant_generators_collapse() {
        let t = table();
        let g = TranslationGroup::new(1, vec![v(&t, &["2"]), v(&t, &["3"])]);
        assert_eq!(g.rank(), 1);
        assert_eq!(g.canonical_generators(), vec![v(&t, &["1"])]);
        assert_eq!(g.relations().len(), 1);
        assert_eq!(g, TranslationGroup::new(1, vec![v(&t, &["1"])]));
        assert_ne!(g, TranslationGroup::new(1, vec![v(&t, &["2"])]));
    }

    #[test]
    fn symbolic_denominators() {
        let t = table();
        let g = TranslationGroup::new(2, vec![v(&t, &["1/l", "0"]), v(&t, &["1", "1/(l+1)"])]);
        let y = v(&t, &["2/l - 1", "-1/(l+1)"]);
        assert_eq!(g.membership(&y).unwrap(), vec![BigInt::from(2), BigInt::from(-1)]);
        assert!(!g.contains(&v(&t, &["1/l^2", "0"])));
        let canon = TranslationGroup::new(2, g.canonical_generators());
        assert_eq!(canon, g);
    }

    #[test]
    fn three_torus_projections() {
        let t = table();
        let g = TranslationGroup::new(
            2,
            vec![v(&t, &["-l", "-m"]), v(&t, &["1", "0"]), v(&t, &["0", "1"])],
        );
        let canon = g.canonical_generators();
        assert_eq!(canon, vec![v(&t, &["1", "0"]), v(&t, &["0", "1"]), v(&t, &["l", "m"])]);
    }

    #[test]
    fn trivial_group() {
        let g = TranslationGroup::new(2, vec![]);
        assert!(g.contains(&[Scalar::zero(), Scalar::zero()]));
        assert!(!g.contains(&[Scalar::one(), Scalar::zero()]));
        assert_eq!(g.rank(), 0);
    }
}
