//! Linear foliations of tori `ℝⁿ/ℤⁿ` by translates of a subspace `H`:
//! leaf closures, deck groups and the leaf-space chart.

mod translation;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::affpseudo::{FGAffineGroup, OpenCell};
use crate::intlinalg::{rank_rational, QMatrix};
use crate::quasifold::QuasifoldChart;
use crate::scalarfield::{Poly, Scalar, ScalarMatrix};

pub use translation::{MonomialCoordinates, TranslationGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorusError {
    #[error("need 1 <= p < n directions, got p = {p} for n = {n}")]
    DirectionCount { n: usize, p: usize },
    #[error("direction {index} has {found} entries, expected {expected}")]
    Dimension { index: usize, expected: usize, found: usize },
    #[error("directions are linearly dependent")]
    Dependent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFoliationSpec {
    n: usize,
    directions: Vec<Vec<Scalar>>,
    // reduced row echelon form of the directions and its pivot columns
    echelon: ScalarMatrix,
    pivots: Vec<usize>,
}

impl LinearFoliationSpec {
    pub fn new(n: usize, directions: Vec<Vec<Scalar>>) -> Result<Self, TorusError> {
        let p = directions.len();
        if p == 0 || p >= n {
            return Err(TorusError::DirectionCount { n, p });
        }
        for (index, d) in directions.iter().enumerate() {
            if d.len() != n {
                return Err(TorusError::Dimension { index, expected: n, found: d.len() });
            }
        }
        let (echelon, pivots) = ScalarMatrix::from_rows(directions.clone()).rref();
        if pivots.len() < p {
            return Err(TorusError::Dependent);
        }
        Ok(LinearFoliationSpec { n, directions, echelon, pivots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Vec<Scalar>] {
        &self.directions
    }

    /// Coordinate axes spanning the transversal `W`, ascending.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.pivots.contains(i)).collect()
    }

    /// Projection of `v ∈ ℝⁿ` onto `W` along `H`, in complement coordinates.
    pub fn project(&self, v: &[Scalar]) -> Vec<Scalar> {
        let comp = self.complement();
        comp.iter()
            .map(|&c| {
                let mut acc = v[c].clone();
                for (j, &pj) in self.pivots.iter().enumerate() {
                    let r = self.echelon.get(j, c);
                    if !r.is_zero() && !v[pj].is_zero() {
                        acc = &acc - &(&v[pj] * r);
                    }
                }
                acc
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureReport {
    pub hull_basis: Vec<Vec<BigRational>>,
    pub closure_dim: usize,
    pub structure_dim: usize,
    pub dense: bool,
}

/// Monomial coefficient vectors of a family of vectors, after clearing
/// denominators of each vector separately.
fn coefficient_vectors(n: usize, vectors: &[Vec<Scalar>]) -> Vec<Vec<BigRational>> {
    let mut rows = Vec::new();
    for d in vectors {
        let mut den = Poly::one();
        for e in d {
            if !e.denominator().is_one() {
                den = den.lcm(e.denominator());
            }
        }
        let scale = Scalar::from_poly(den);
        let mut by_monomial = std::collections::BTreeMap::new();
        for (k, e) in d.iter().enumerate() {
            let p = e * &scale;
            let expansion = p.expand().expect("denominators cleared");
            for (m, c) in expansion.0 {
                by_monomial
                    .entry(m)
                    .or_insert_with(|| vec![BigRational::zero(); n])[k] = c;
            }
        }
        rows.extend(by_monomial.into_values());
    }
    rows
}

/// Smallest rational subspace whose real span contains `H`.
pub fn rational_hull(spec: &LinearFoliationSpec) -> ClosureReport {
    let n = spec.n;
    let rows = coefficient_vectors(n, &spec.directions);
    let m = QMatrix::from_rows(rows.clone(), n);
    let closure_dim = rank_rational(&m);
    let (r, pivots) = m.rref();
    let hull_basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
    ClosureReport {
        hull_basis,
        closure_dim,
        structure_dim: closure_dim - spec.p(),
        dense: closure_dim == n,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeckGroup {
    /// Coordinate axes of the transversal, 0-based.
    pub complement: Vec<usize>,
    pub group: TranslationGroup,
}

/// Images of `e_1..e_n` under projection onto the coordinate complement.
pub fn deck_group(spec: &LinearFoliationSpec) -> DeckGroup {
    let gens: Vec<Vec<Scalar>> = (0..spec.n)
        .map(|i| {
            let mut e = vec![Scalar::zero(); spec.n];
            e[i] = Scalar::one();
            spec.project(&e)
        })
        .collect();
    let q = spec.n - spec.p();
    DeckGroup { complement: spec.complement(), group: TranslationGroup::new(q, gens) }
}

pub fn leaf_space_model(spec: &LinearFoliationSpec) -> QuasifoldChart {
    let deck = deck_group(spec);
    let q = deck.group.dim();
    let group = FGAffineGroup::translations(q, deck.group.generators())
        .expect("projections have the complement dimension");
    QuasifoldChart::new(group, OpenCell::whole(q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafRelation {
    SameLeaf,
    DifferentLeaf,
}

/// `x − y ∈ H + ℤⁿ`, decided exactly.
pub fn point_same_leaf(spec: &LinearFoliationSpec, x: &[Scalar], y: &[Scalar]) -> LeafRelation {
    assert_eq!(x.len(), spec.n, "dimension mismatch");
    assert_eq!(y.len(), spec.n, "dimension mismatch");
    let d: Vec<Scalar> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if deck_group(spec).group.contains(&spec.project(&d)) {
        LeafRelation::SameLeaf
    } else {
        LeafRelation::DifferentLeaf
    }
}

/// Rank of the rational hull of an arbitrary family of vectors.
pub fn rational_rank(n: usize, vectors: &[Vec<Scalar>]) -> usize {
    rank_rational(&QMatrix::from_rows(coefficient_vectors(n, vectors), n))
}
