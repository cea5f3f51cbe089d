use std::fmt;

use crate::scalarfield::{vec_add, Scalar, ScalarMatrix, SymbolTable};

use super::AffineError;

/// `x -> A x + b` with `A` invertible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    linear: ScalarMatrix,
    translation: Vec<Scalar>,
}

impl AffineMap {
    pub fn new(linear: ScalarMatrix, translation: Vec<Scalar>) -> Result<Self, AffineError> {
        if !linear.is_square() {
            return Err(AffineError::NotSquare);
        }
        if linear.rows() != translation.len() {
            return Err(AffineError::Dimension {
                expected: linear.rows(),
                found: translation.len(),
            });
        }
        if linear.determinant().is_zero() {
            return Err(AffineError::Singular);
        }
        Ok(AffineMap { linear, translation })
    }

    // callers guarantee invertibility
    pub(crate) fn from_parts(linear: ScalarMatrix, translation: Vec<Scalar>) -> Self {
        debug_assert_eq!(linear.rows(), translation.len());
        AffineMap { linear, translation }
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap::from_parts(ScalarMatrix::identity(dim), vec![Scalar::zero(); dim])
    }

    pub fn translation_by(v: Vec<Scalar>) -> Self {
        AffineMap::from_parts(ScalarMatrix::identity(v.len()), v)
    }

    pub fn linear_map(a: ScalarMatrix) -> Result<Self, AffineError> {
        let n = a.rows();
        AffineMap::new(a, vec![Scalar::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn linear(&self) -> &ScalarMatrix {
        &self.linear
    }

    pub fn translation(&self) -> &[Scalar] {
        &self.translation
    }

    pub fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        vec_add(&self.linear.mul_vec(x), &self.translation)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        assert_eq!(self.dim(), inner.dim(), "dimension mismatch");
        if inner.is_translation() {
            return AffineMap::from_parts(
                self.linear.clone(),
                vec_add(&self.linear.mul_vec(&inner.translation), &self.translation),
            );
        }
        AffineMap::from_parts(
            self.linear.mul(&inner.linear),
            vec_add(&self.linear.mul_vec(&inner.translation), &self.translation),
        )
    }

    pub fn inverse(&self) -> AffineMap {
        if self.is_translation() {
            return AffineMap::translation_by(self.translation.iter().map(|x| -x).collect());
        }
        let inv = self.linear.inverse().expect("affine maps are invertible");
        let t = inv.mul_vec(&self.translation).into_iter().map(|x| -x).collect();
        AffineMap::from_parts(inv, t)
    }

    pub fn is_identity(&self) -> bool {
        self.translation.iter().all(Scalar::is_zero) && self.linear.is_identity()
    }

    pub fn is_translation(&self) -> bool {
        self.linear.is_identity()
    }

    /// `AᵀA = I` exactly.
    pub fn is_euclidean_isometry(&self) -> bool {
        self.linear.transpose().mul(&self.linear).is_identity()
    }

    pub fn display<'a>(&'a self, table: &'a SymbolTable) -> AffineDisplay<'a> {
        AffineDisplay { map: self, table }
    }
}

pub struct AffineDisplay<'a> {
    map: &'a AffineMap,
    table: &'a SymbolTable,
}

impl fmt::Display for AffineDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_row = |row: &[Scalar]| {
            row.iter()
                .map(|s| s.to_string_with(self.table))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let rows: Vec<String> = self
            .map
            .linear
            .to_rows()
            .iter()
            .map(|r| format!("[{}]", fmt_row(r)))
            .collect();
        write!(
            f,
            "A=[{}] b=[{}]",
            rows.join(", "),
            fmt_row(&self.map.translation)
        )
    }
}

/// Germ of an affine map at a basepoint. Affine maps are determined by their
/// 1-jet, so a germ is just the pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Germ {
    pub map: AffineMap,
    pub basepoint: Vec<Scalar>,
}

impl Germ {
    pub fn new(map: AffineMap, basepoint: Vec<Scalar>) -> Result<Self, AffineError> {
        if basepoint.len() != map.dim() {
            return Err(AffineError::Dimension { expected: map.dim(), found: basepoint.len() });
        }
        Ok(Germ { map, basepoint })
    }

    pub fn unit(basepoint: Vec<Scalar>) -> Self {
        Germ { map: AffineMap::identity(basepoint.len()), basepoint }
    }

    pub fn target(&self) -> Vec<Scalar> {
        self.map.apply(&self.basepoint)
    }

    pub fn inverse(&self) -> Germ {
        Germ { map: self.map.inverse(), basepoint: self.target() }
    }
}

/// Groupoid product `g · h`, defined when `g` starts where `h` ends.
pub fn compose_germ(g: &Germ, h: &Germ) -> Result<Germ, AffineError> {
    if g.basepoint != h.target() {
        return Err(AffineError::BasepointMismatch);
    }
    Ok(Germ { map: g.map.compose(&h.map), basepoint: h.basepoint.clone() })
}

pub fn is_euclidean_isometry(m: &AffineMap) -> bool {
    m.is_euclidean_isometry()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &SymbolTable, e: &str) -> Scalar {
        t.parse(e).unwrap()
    }

    fn table() -> SymbolTable {
        SymbolTable::new([("l", Some(std::f64::consts::SQRT_2))]).unwrap()
    }

    fn map1(t: &SymbolTable, a: &str, b: &str) -> AffineMap {
        AffineMap::new(ScalarMatrix::from_rows(vec![vec![s(t, a)]]), vec![s(t, b)]).unwrap()
    }

    #[test]
    fn germ_composition_examples() {
        let t = table();
        let id0 = Germ::unit(vec![Scalar::zero()]);
        assert_eq!(compose_germ(&id0, &id0).unwrap(), id0);

        let by_one = Germ::new(map1(&t, "1", "1"), vec![Scalar::zero()]).unwrap();
        let by_l = Germ::new(map1(&t, "1", "l"), vec![Scalar::one()]).unwrap();
        let c = compose_germ(&by_l, &by_one).unwrap();
        assert_eq!(c.map, map1(&t, "1", "1+l"));
        assert_eq!(c.basepoint, vec![Scalar::zero()]);

        // (x -> 2x at 1) after (x -> x+1 at 0) is x -> 2x+2 at 0
        let dbl = Germ::new(map1(&t, "2", "0"), vec![Scalar::one()]).unwrap();
        let c = compose_germ(&dbl, &by_one).unwrap();
        assert_eq!(c.map, map1(&t, "2", "2"));
        // evaluate both sides at three sample points
        for v in ["0", "3", "l"] {
            let x = vec![s(&t, v)];
            assert_eq!(c.map.apply(&x), dbl.map.apply(&by_one.map.apply(&x)));
        }

        assert_eq!(compose_germ(&by_one, &by_one), Err(AffineError::BasepointMismatch));
    }

    #[test]
    fn isometry_examples() {
        let t = table();
        assert!(map1(&t, "1", "l").is_euclidean_isometry());
        assert!(!map1(&t, "2", "0").is_euclidean_isometry());
        let rot = ScalarMatrix::from_rows(vec![
            vec![s(&t, "3/5"), s(&t, "4/5")],
            vec![s(&t, "-4/5"), s(&t, "3/5")],
        ]);
        assert!(AffineMap::linear_map(rot).unwrap().is_euclidean_isometry());
    }

    #[test]
    fn inverse_round_trip() {
        let t = table();
        let a = ScalarMatrix::from_rows(vec![
            vec![s(&t, "l"), s(&t, "1")],
            vec![s(&t, "0"), s(&t, "2")],
        ]);
        let m = AffineMap::new(a, vec![s(&t, "1/l"), s(&t, "-3")]).unwrap();
        assert!(m.compose(&m.inverse()).is_identity());
        assert!(m.inverse().compose(&m).is_identity());
        assert_eq!(
            AffineMap::new(ScalarMatrix::from_rows(vec![vec![Scalar::zero()]]), vec![Scalar::one()]),
            Err(AffineError::Singular)
        );
    }
}
