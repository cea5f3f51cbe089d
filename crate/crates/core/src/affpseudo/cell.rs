use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;

use crate::scalarfield::{dot, Scalar, ScalarError, ShadowOrder, Sign};

use super::{AffineError, AffineMap};

/// Strict half-space `⟨normal, x⟩ < offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfSpace {
    pub normal: Vec<Scalar>,
    pub offset: Scalar,
}

impl HalfSpace {
    pub fn new(normal: Vec<Scalar>, offset: Scalar) -> Self {
        HalfSpace { normal, offset }
    }

    /// `lo < x_i < hi` as two half-spaces.
    pub fn interval(dim: usize, i: usize, lo: Scalar, hi: Scalar) -> [HalfSpace; 2] {
        let mut up = vec![Scalar::zero(); dim];
        up[i] = Scalar::one();
        let down = up.iter().map(|x| -x).collect();
        [HalfSpace::new(up, hi), HalfSpace::new(down, -lo)]
    }
}

/// Open convex polyhedral cell. No constraints means all of `ℝ^q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpenCell {
    dim: usize,
    constraints: Vec<HalfSpace>,
}

impl OpenCell {
    pub fn whole(dim: usize) -> Self {
        OpenCell { dim, constraints: Vec::new() }
    }

    pub fn new(dim: usize, constraints: Vec<HalfSpace>) -> Result<Self, AffineError> {
        for h in &constraints {
            if h.normal.len() != dim {
                return Err(AffineError::Dimension { expected: dim, found: h.normal.len() });
            }
        }
        Ok(OpenCell { dim, constraints })
    }

    /// Open box `lo_i < x_i < hi_i`.
    pub fn open_box(lo: &[Scalar], hi: &[Scalar]) -> Self {
        let dim = lo.len();
        let constraints = lo
            .iter()
            .zip(hi)
            .enumerate()
            .flat_map(|(i, (a, b))| HalfSpace::interval(dim, i, a.clone(), b.clone()))
            .collect();
        OpenCell { dim, constraints }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[HalfSpace] {
        &self.constraints
    }

    pub fn is_whole(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn contains(&self, x: &[Scalar], order: &ShadowOrder) -> Result<bool, ScalarError> {
        for h in &self.constraints {
            let slack = &h.offset - &dot(&h.normal, x);
            if order.sign(&slack)? != Sign::Positive {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, other: &OpenCell) -> OpenCell {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut constraints = self.constraints.clone();
        for h in &other.constraints {
            if !constraints.contains(h) {
                constraints.push(h.clone());
            }
        }
        OpenCell { dim: self.dim, constraints }
    }

    /// `{x : m(x) ∈ self}`.
    pub fn pullback(&self, m: &AffineMap) -> OpenCell {
        let at = m.linear().transpose();
        let constraints = self
            .constraints
            .iter()
            .map(|h| HalfSpace {
                normal: at.mul_vec(&h.normal),
                offset: &h.offset - &dot(&h.normal, m.translation()),
            })
            .collect();
        OpenCell { dim: self.dim, constraints }
    }

    /// `m(self)`.
    pub fn pushforward(&self, m: &AffineMap) -> OpenCell {
        if self.is_whole() {
            return self.clone();
        }
        self.pullback(&m.inverse())
    }

    /// A floating point strictly inside the shadow image of the cell, if any.
    pub fn feasible_point(&self, order: &ShadowOrder) -> Result<Option<Vec<f64>>, ScalarError> {
        let mut rows = Vec::with_capacity(self.constraints.len());
        for h in &self.constraints {
            let a = h
                .normal
                .iter()
                .map(|s| s.shadow_eval(order.table))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((a, h.offset.shadow_eval(order.table)?));
        }
        Ok(fourier_motzkin_point(rows, self.dim, order.tolerance))
    }

    pub fn is_nonempty(&self, order: &ShadowOrder) -> Result<bool, ScalarError> {
        Ok(self.feasible_point(order)?.is_some())
    }

    /// A rational point inside the cell, checked by exact membership.
    pub fn rational_point(&self, order: &ShadowOrder) -> Result<Option<Vec<Scalar>>, ScalarError> {
        let Some(p) = self.feasible_point(order)? else { return Ok(None) };
        for bits in 0..=40u32 {
            let scale = f64::from(2u32).powi(bits as i32);
            let cand: Vec<Scalar> = p
                .iter()
                .map(|v| {
                    let n = BigInt::from_f64((v * scale).round()).unwrap_or_default();
                    Scalar::from_rational(BigRational::new(n, BigInt::from(1u64) << bits))
                })
                .collect();
            if self.contains(&cand, order)? {
                return Ok(Some(cand));
            }
        }
        Ok(None)
    }
}

const FM_LIMIT: usize = 20_000;

/// Fourier-Motzkin elimination for `a·x < c`, then back-substitution picking
/// interior values coordinate by coordinate.
fn fourier_motzkin_point(rows: Vec<(Vec<f64>, f64)>, dim: usize, tol: f64) -> Option<Vec<f64>> {
    let eps = 1e-14;
    // systems[j] involves variables 0..dim-j
    let mut systems = vec![rows];
    for k in (0..dim).rev() {
        let cur = systems.last().expect("nonempty");
        let (mut pos, mut neg, mut next) = (Vec::new(), Vec::new(), Vec::new());
        for (a, c) in cur {
            if a[k] > eps {
                pos.push((a, *c));
            } else if a[k] < -eps {
                neg.push((a, *c));
            } else {
                next.push((a[..k].to_vec(), *c));
            }
        }
        for (ap, cp) in &pos {
            for (an, cn) in &neg {
                let (wp, wn) = (1.0 / ap[k], -1.0 / an[k]);
                let a: Vec<f64> = (0..k).map(|j| ap[j] * wp + an[j] * wn).collect();
                next.push((a, cp * wp + cn * wn));
                if next.len() > FM_LIMIT {
                    return None;
                }
            }
        }
        systems.push(next);
    }
    if systems[dim].iter().any(|(_, c)| *c <= tol) {
        return None;
    }
    let mut x = vec![0.0; dim];
    for k in 0..dim {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (a, c) in &systems[dim - 1 - k] {
            let rest: f64 = (0..k).map(|j| a[j] * x[j]).sum();
            let bound = (c - rest) / a[k];
            if a[k] > eps {
                hi = hi.min(bound);
            } else if a[k] < -eps {
                lo = lo.max(bound);
            }
        }
        x[k] = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if hi - lo <= tol {
                    return None;
                }
                (lo + hi) / 2.0
            }
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        };
    }
    Some(x)
}

/// Affine map restricted to an open cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub map: AffineMap,
    pub domain: OpenCell,
}

impl Transition {
    pub fn new(map: AffineMap, domain: OpenCell, order: &ShadowOrder) -> Result<Self, AffineError> {
        if domain.dim() != map.dim() {
            return Err(AffineError::Dimension { expected: map.dim(), found: domain.dim() });
        }
        if !domain.is_nonempty(order)? {
            return Err(AffineError::EmptyDomain);
        }
        Ok(Transition { map, domain })
    }

    /// No emptiness check; used for globally defined maps.
    pub fn global(map: AffineMap) -> Self {
        let dim = map.dim();
        Transition { map, domain: OpenCell::whole(dim) }
    }

    pub fn identity_on(domain: OpenCell) -> Self {
        Transition { map: AffineMap::identity(domain.dim()), domain }
    }

    pub fn codomain(&self) -> OpenCell {
        self.domain.pushforward(&self.map)
    }

    /// `self ∘ inner` on `inner.domain ∩ inner⁻¹(self.domain)`.
    pub fn compose(&self, inner: &Transition) -> Transition {
        Transition {
            map: self.map.compose(&inner.map),
            domain: inner.domain.intersect(&self.domain.pullback(&inner.map)),
        }
    }

    pub fn inverse(&self) -> Transition {
        Transition { map: self.map.inverse(), domain: self.codomain() }
    }

    pub fn restrict(&self, cell: &OpenCell) -> Transition {
        Transition { map: self.map.clone(), domain: self.domain.intersect(cell) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfield::{ScalarMatrix, SymbolTable, DEFAULT_TOLERANCE};

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn box_membership_and_witness() {
        let t = SymbolTable::new([("l", Some(std::f64::consts::SQRT_2))]).unwrap();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let l = t.parse("l").unwrap();
        let cell = OpenCell::open_box(&[q(0, 1), q(1, 1)], &[l.clone(), q(3, 2)]);
        assert!(cell.contains(&[q(1, 1), q(5, 4)], &order).unwrap());
        assert!(!cell.contains(&[q(3, 2), q(5, 4)], &order).unwrap());
        // boundary is excluded
        assert!(!cell.contains(&[q(0, 1), q(5, 4)], &order).unwrap());
        let p = cell.rational_point(&order).unwrap().unwrap();
        assert!(cell.contains(&p, &order).unwrap());

        let empty = OpenCell::open_box(&[q(1, 1)], &[q(1, 1)]);
        assert!(!empty.is_nonempty(&order).unwrap());
        assert!(OpenCell::whole(3).is_nonempty(&order).unwrap());
    }

    #[test]
    fn pushforward_matches_pointwise_image() {
        let t = SymbolTable::empty();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let a = ScalarMatrix::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(0, 1), q(-1, 1)]]);
        let m = AffineMap::new(a, vec![q(1, 1), q(3, 1)]).unwrap();
        let cell = OpenCell::open_box(&[q(0, 1), q(0, 1)], &[q(1, 1), q(1, 1)]);
        let image = cell.pushforward(&m);
        for (x, y) in [(1, 1), (1, 3), (3, 1), (0, 0), (2, 2)] {
            let p = vec![q(x, 4), q(y, 4)];
            assert_eq!(
                cell.contains(&p, &order).unwrap(),
                image.contains(&m.apply(&p), &order).unwrap()
            );
        }
    }

    #[test]
    fn transition_composition_domains() {
        let t = SymbolTable::empty();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let shift = AffineMap::translation_by(vec![q(1, 1)]);
        let f = Transition::new(shift.clone(), OpenCell::open_box(&[q(0, 1)], &[q(2, 1)]), &order)
            .unwrap();
        let g = Transition::new(shift, OpenCell::open_box(&[q(2, 1)], &[q(5, 1)]), &order).unwrap();
        // g∘f is defined where x ∈ (0,2) and x+1 ∈ (2,5): x ∈ (1,2)
        let c = g.compose(&f);
        assert!(c.domain.contains(&[q(3, 2)], &order).unwrap());
        assert!(!c.domain.contains(&[q(1, 2)], &order).unwrap());
        assert!(f.inverse().compose(&f).map.is_identity());
        assert_eq!(
            Transition::new(AffineMap::identity(1), OpenCell::open_box(&[q(1, 1)], &[q(0, 1)]), &order),
            Err(AffineError::EmptyDomain)
        );
    }
}
