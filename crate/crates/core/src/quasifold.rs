//! Quasifold charts `(V, Γ)`, atlases glued by affine lifts, and the
//! structural pseudogroup generated by chart groups and transitions.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::affpseudo::{
    AffineError, AffineMap, BallElement, FGAffineGroup, Letter, OpenCell, OrbitVerdict,
    Transition, Word,
};
use crate::scalarfield::{Scalar, ScalarError, ShadowOrder};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuasifoldError {
    #[error("chart index {0} out of range")]
    ChartIndex(usize),
    #[error("transition {0} is not certified")]
    Uncertified(usize),
    #[error("point is not in the cell of chart {0}")]
    NotInCell(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasifoldChart {
    group: FGAffineGroup,
    cell: OpenCell,
}

impl QuasifoldChart {
    /// Panics if the cell and group dimensions differ.
    pub fn new(group: FGAffineGroup, cell: OpenCell) -> Self {
        assert_eq!(group.dim(), cell.dim(), "chart dimension mismatch");
        QuasifoldChart { group, cell }
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn group(&self) -> &FGAffineGroup {
        &self.group
    }

    pub fn cell(&self) -> &OpenCell {
        &self.cell
    }

    /// Deterministic sample points of the cell: a rational witness and its
    /// axis-parallel neighbours at dyadic distances that stay inside.
    pub fn sample_points(&self, order: &ShadowOrder) -> Result<Vec<Vec<Scalar>>, ScalarError> {
        let Some(p) = self.cell.rational_point(order)? else { return Ok(Vec::new()) };
        let mut out = vec![p.clone()];
        for i in 0..self.dim() {
            for k in 0..4u32 {
                let h = Scalar::from_rational(BigRational::new(
                    BigInt::from(1),
                    BigInt::from(1u64 << (2 * k)),
                ));
                for sign in [1, -1] {
                    let mut q = p.clone();
                    q[i] = &q[i] + &(&h * &Scalar::from_int(sign));
                    if self.cell.contains(&q, order)? {
                        out.push(q);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Each generator and inverse maps the cell into itself: exact for the
    /// whole space, on sample points otherwise.
    pub fn check_invariance(&self, order: &ShadowOrder) -> Result<bool, ScalarError> {
        if self.cell.is_whole() {
            return Ok(true);
        }
        let samples = self.sample_points(order)?;
        for l in self.group.letters() {
            let g = self.group.letter_map(l);
            for p in &samples {
                if !self.cell.contains(&g.apply(p), order)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtlasTransition {
    pub source: usize,
    pub target: usize,
    pub lift: Transition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtlasObject {
    pub charts: Vec<QuasifoldChart>,
    pub transitions: Vec<AtlasTransition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivariance {
    /// `witnesses[k]` conjugates source generator `k`.
    Certified { witnesses: Vec<BallElement> },
    Failed { generator: usize },
}

impl Equivariance {
    pub fn is_certified(&self) -> bool {
        matches!(self, Equivariance::Certified { .. })
    }
}

/// `ψ ∘ γ ∘ ψ⁻¹` must lie in the target ball for every source generator `γ`.
pub fn check_equivariance(
    source: &FGAffineGroup,
    target: &FGAffineGroup,
    lift: &AffineMap,
    radius: usize,
) -> Equivariance {
    let ball: HashMap<AffineMap, BallElement> = target
        .word_ball(radius)
        .into_iter()
        .map(|e| (e.map.clone(), e))
        .collect();
    let inv = lift.inverse();
    let mut witnesses = Vec::new();
    for (k, g) in source.generators().iter().enumerate() {
        let conj = lift.compose(g).compose(&inv);
        match ball.get(&conj) {
            Some(e) => witnesses.push(e.clone()),
            None => return Equivariance::Failed { generator: k },
        }
    }
    Equivariance::Certified { witnesses }
}

impl AtlasObject {
    pub fn new(
        charts: Vec<QuasifoldChart>,
        transitions: Vec<AtlasTransition>,
    ) -> Result<Self, QuasifoldError> {
        for t in &transitions {
            for idx in [t.source, t.target] {
                if idx >= charts.len() {
                    return Err(QuasifoldError::ChartIndex(idx));
                }
            }
            let (ds, dt) = (charts[t.source].dim(), charts[t.target].dim());
            if ds != dt || t.lift.map.dim() != ds {
                return Err(QuasifoldError::Dimension { expected: ds, found: t.lift.map.dim() });
            }
        }
        Ok(AtlasObject { charts, transitions })
    }

    pub fn single(chart: QuasifoldChart) -> Self {
        AtlasObject { charts: vec![chart], transitions: Vec::new() }
    }

    pub fn check_transition(&self, index: usize, radius: usize) -> Equivariance {
        let t = &self.transitions[index];
        check_equivariance(
            self.charts[t.source].group(),
            self.charts[t.target].group(),
            &t.lift.map,
            radius,
        )
    }

    /// Moves used by point searches: chart generators (chart-major order),
    /// then transitions.
    pub fn move_count(&self) -> usize {
        self.charts.iter().map(|c| c.group().generators().len()).sum::<usize>()
            + self.transitions.len()
    }
}

/// A generator of the structural pseudogroup on the disjoint union of cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StructuralGenerator {
    pub source: usize,
    pub target: usize,
    pub transition: Transition,
}

/// Chart group generators and their inverses on each chart, plus
/// `γ′ ∘ ψ` and its inverse for every transition `ψ` and `γ′` in the target
/// ball of the given radius. Deduplicated, first occurrence kept.
pub fn structural_pseudogroup(
    atlas: &AtlasObject,
    radius: usize,
) -> Result<Vec<StructuralGenerator>, QuasifoldError> {
    for k in 0..atlas.transitions.len() {
        if !atlas.check_transition(k, radius).is_certified() {
            return Err(QuasifoldError::Uncertified(k));
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |g: StructuralGenerator| {
        if seen.insert(g.clone()) {
            out.push(g);
        }
    };
    for (i, chart) in atlas.charts.iter().enumerate() {
        for l in chart.group().letters() {
            let map = chart.group().letter_map(l).clone();
            push(StructuralGenerator {
                source: i,
                target: i,
                transition: Transition { map, domain: chart.cell().clone() },
            });
        }
    }
    for t in &atlas.transitions {
        let target = &atlas.charts[t.target];
        let source_cell = atlas.charts[t.source].cell();
        for e in target.group().word_ball(radius) {
            let map = e.map.compose(&t.lift.map);
            let domain = t
                .lift
                .domain
                .intersect(source_cell)
                .intersect(&target.cell().pullback(&map));
            let forward = Transition { map, domain };
            let backward = forward.inverse();
            push(StructuralGenerator { source: t.source, target: t.target, transition: forward });
            push(StructuralGenerator { source: t.target, target: t.source, transition: backward });
        }
    }
    Ok(out)
}

/// Bounded search for a pseudogroup element carrying `(i, x)` to `(j, y)`.
/// Word letters index the atlas moves (see [`AtlasObject::move_count`]).
pub fn quotient_point_equal(
    atlas: &AtlasObject,
    (i, x): (usize, &[Scalar]),
    (j, y): (usize, &[Scalar]),
    radius: usize,
    order: &ShadowOrder,
) -> Result<OrbitVerdict, QuasifoldError> {
    for (idx, p) in [(i, x), (j, y)] {
        let chart = atlas.charts.get(idx).ok_or(QuasifoldError::ChartIndex(idx))?;
        if p.len() != chart.dim() {
            return Err(QuasifoldError::Dimension { expected: chart.dim(), found: p.len() });
        }
        if !chart.cell().contains(p, order)? {
            return Err(QuasifoldError::NotInCell(idx));
        }
    }
    let isolated = atlas.transitions.iter().all(|t| t.source != i && t.target != i);
    if isolated {
        if i != j {
            return Ok(OrbitVerdict::Unequal);
        }
        return Ok(atlas.charts[i].group().orbit_equal(x, y, radius));
    }
    if (i, x) == (j, y) {
        return Ok(OrbitVerdict::Equal { word: Word::empty() });
    }

    // (move index, chart, map) for every move and its inverse
    let mut moves: Vec<(Letter, usize, usize, &AffineMap, Option<&OpenCell>)> = Vec::new();
    let mut inverses: Vec<AffineMap> = Vec::new();
    let mut offset = 0;
    for (c, chart) in atlas.charts.iter().enumerate() {
        for l in chart.group().letters() {
            let letter = Letter { generator: offset + l.generator, inverse: l.inverse };
            moves.push((letter, c, c, chart.group().letter_map(l), None));
        }
        offset += chart.group().generators().len();
    }
    for t in &atlas.transitions {
        inverses.push(t.lift.map.inverse());
    }
    let codomains: Vec<OpenCell> = atlas.transitions.iter().map(|t| t.lift.codomain()).collect();
    for (k, t) in atlas.transitions.iter().enumerate() {
        let g = offset + k;
        moves.push((
            Letter { generator: g, inverse: false },
            t.source,
            t.target,
            &t.lift.map,
            Some(&t.lift.domain),
        ));
        moves.push((
            Letter { generator: g, inverse: true },
            t.target,
            t.source,
            &inverses[k],
            Some(&codomains[k]),
        ));
    }

    let start = (i, x.to_vec());
    let goal = (j, y.to_vec());
    let mut seen: HashMap<(usize, Vec<Scalar>), Word> = HashMap::from([(start.clone(), Word::empty())]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, depth)) = queue.pop_front() {
        if state == goal {
            let word = seen.remove(&state).expect("visited");
            return Ok(OrbitVerdict::Equal { word });
        }
        if depth == radius {
            continue;
        }
        let word = seen[&state].clone();
        for &(letter, from, to, map, domain) in &moves {
            if from != state.0 {
                continue;
            }
            if let Some(d) = domain {
                if !d.contains(&state.1, order)? {
                    continue;
                }
            }
            let p = map.apply(&state.1);
            if !atlas.charts[to].cell().contains(&p, order)? {
                continue;
            }
            let next = (to, p);
            if !seen.contains_key(&next) {
                seen.insert(next.clone(), Word(vec![letter]).concat(&word));
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(OrbitVerdict::NotWithinBound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfield::{ScalarMatrix, SymbolTable, DEFAULT_TOLERANCE};

    fn table() -> SymbolTable {
        SymbolTable::new([("l", Some(std::f64::consts::SQRT_2))]).unwrap()
    }

    fn s(t: &SymbolTable, e: &str) -> Scalar {
        t.parse(e).unwrap()
    }

    fn scale(t: &SymbolTable, a: &str) -> AffineMap {
        AffineMap::linear_map(ScalarMatrix::from_rows(vec![vec![s(t, a)]])).unwrap()
    }

    fn kronecker(t: &SymbolTable, a: &str, b: &str) -> QuasifoldChart {
        let g = FGAffineGroup::translations(1, &[vec![s(t, a)], vec![s(t, b)]]).unwrap();
        QuasifoldChart::new(g, OpenCell::whole(1))
    }

    #[test]
    fn equivariance_examples() {
        let t = table();
        let k = kronecker(&t, "1", "l");
        let id = check_equivariance(k.group(), k.group(), &AffineMap::identity(1), 1);
        let Equivariance::Certified { witnesses } = id else { panic!("identity lift") };
        assert_eq!(witnesses[0].map, k.group().generators()[0]);

        let scaled = kronecker(&t, "l", "l^2");
        let cert = check_equivariance(k.group(), scaled.group(), &scale(&t, "l"), 1);
        let Equivariance::Certified { witnesses } = cert else { panic!("λx lift") };
        assert_eq!(witnesses[0].map, AffineMap::translation_by(vec![s(&t, "l")]));

        let circle = FGAffineGroup::translations(1, &[vec![Scalar::one()]]).unwrap();
        assert_eq!(
            check_equivariance(&circle, &circle, &scale(&t, "1/2"), 3),
            Equivariance::Failed { generator: 0 }
        );
    }

    #[test]
    fn structural_pseudogroup_sizes() {
        let t = table();
        let single = AtlasObject::single(kronecker(&t, "1", "l"));
        let gens = structural_pseudogroup(&single, 2).unwrap();
        // both translations and their inverses
        assert_eq!(gens.len(), 4);

        let glued = AtlasObject::new(
            vec![kronecker(&t, "1", "l"), kronecker(&t, "1", "l")],
            vec![AtlasTransition {
                source: 0,
                target: 1,
                lift: Transition::global(AffineMap::identity(1)),
            }],
        )
        .unwrap();
        assert_eq!(structural_pseudogroup(&glued, 0), Err(QuasifoldError::Uncertified(0)));
        let gens = structural_pseudogroup(&glued, 1).unwrap();
        // the radius-1 ball of a rank-2 translation group has 5 elements
        assert_eq!(gens.len(), 4 + 4 + 2 * 5);
        assert!(gens.iter().any(|g| g.source == 0 && g.target == 1 && g.transition.map.is_identity()));

        let rescaled = AtlasObject::new(
            vec![kronecker(&t, "1", "l"), kronecker(&t, "l", "l^2")],
            vec![AtlasTransition { source: 0, target: 1, lift: Transition::global(scale(&t, "l")) }],
        )
        .unwrap();
        for radius in 1..4 {
            let ball = rescaled.charts[1].group().word_ball(radius).len();
            let gens = structural_pseudogroup(&rescaled, radius).unwrap();
            assert_eq!(gens.len(), 4 + 4 + 2 * ball);
        }
    }

    #[test]
    fn uncertified_transition_is_rejected() {
        let t = table();
        let circle = QuasifoldChart::new(
            FGAffineGroup::translations(1, &[vec![Scalar::one()]]).unwrap(),
            OpenCell::whole(1),
        );
        let atlas = AtlasObject::new(
            vec![circle.clone(), circle],
            vec![AtlasTransition { source: 0, target: 1, lift: Transition::global(scale(&t, "1/2")) }],
        )
        .unwrap();
        assert_eq!(structural_pseudogroup(&atlas, 2), Err(QuasifoldError::Uncertified(0)));
    }

    #[test]
    fn quotient_points() {
        let t = table();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let single = AtlasObject::single(kronecker(&t, "1", "l"));
        let zero = [Scalar::zero()];
        assert_eq!(
            quotient_point_equal(&single, (0, &zero), (0, &[s(&t, "7 - 4*l")]), 2, &order).unwrap(),
            OrbitVerdict::EqualExact { coefficients: vec![BigInt::from(7), BigInt::from(-4)] }
        );
        assert_eq!(
            quotient_point_equal(&single, (0, &zero), (0, &[s(&t, "1/3")]), 2, &order).unwrap(),
            OrbitVerdict::Unequal
        );

        let rescaled = AtlasObject::new(
            vec![kronecker(&t, "1", "l"), kronecker(&t, "l", "l^2")],
            vec![AtlasTransition { source: 0, target: 1, lift: Transition::global(scale(&t, "l")) }],
        )
        .unwrap();
        // 0 ~ 1 in chart 0, then ψ(1) = λ
        let v = quotient_point_equal(&rescaled, (0, &zero), (1, &[s(&t, "l")]), 2, &order).unwrap();
        let OrbitVerdict::Equal { word } = v else { panic!("expected a word") };
        assert_eq!(word.len(), 2);
        let v = quotient_point_equal(&rescaled, (0, &zero), (1, &[s(&t, "1/2")]), 3, &order).unwrap();
        assert_eq!(v, OrbitVerdict::NotWithinBound);
    }

    #[test]
    fn invariance_on_cells() {
        let t = SymbolTable::empty();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let flip = AffineMap::linear_map(ScalarMatrix::from_rows(vec![vec![Scalar::from_int(-1)]]))
            .unwrap();
        let g = FGAffineGroup::new(1, vec![flip]).unwrap();
        let sym = QuasifoldChart::new(
            g.clone(),
            OpenCell::open_box(&[Scalar::from_int(-1)], &[Scalar::from_int(1)]),
        );
        assert!(sym.check_invariance(&order).unwrap());
        let lopsided =
            QuasifoldChart::new(g, OpenCell::open_box(&[Scalar::from_int(0)], &[Scalar::from_int(1)]));
        assert!(!lopsided.check_invariance(&order).unwrap());
    }
}
