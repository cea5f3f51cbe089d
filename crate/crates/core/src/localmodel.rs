//! Affine local model `π₁(X) ⋉ (H × E₀)`: generators act by
//! `τ·(h, v) = (h + ψ(τ), ρ(τ)v)` on `ℝ^r × ℝ^d`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::affpseudo::{AffineMap, BallElement, FGAffineGroup, Letter, OpenCell, Word};
use crate::intlinalg::{hnf, ZMatrix};
use crate::quasifold::QuasifoldChart;
use crate::scalarfield::{vec_add, vec_sub, Scalar, ScalarError, ScalarMatrix, ShadowOrder};
use crate::torusfol::{deck_group, LinearFoliationSpec, TranslationGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Presentation {
    Free,
    FreeAbelian,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalModelError {
    #[error("at least one generator is required")]
    NoGenerators,
    #[error("carrier dimension r + d must be positive")]
    EmptyCarrier,
    #[error("expected {expected} generators, got {found} {what}")]
    GeneratorCount { what: &'static str, expected: usize, found: usize },
    #[error("psi of generator {index} has length {found}, expected {expected}")]
    PsiDimension { index: usize, expected: usize, found: usize },
    #[error("rho of generator {index} is not {expected}x{expected}")]
    RhoDimension { index: usize, expected: usize },
    #[error("rho of generator {0} is not invertible")]
    NonInvertible(usize),
    #[error("rho of generators {0} and {1} do not commute")]
    NotCommuting(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalModelInput {
    pub r: usize,
    pub d: usize,
    pub presentation: Presentation,
    /// One translation vector in `ℝ^r` per generator.
    pub psi: Vec<Vec<Scalar>>,
    /// One `d×d` matrix per generator; may be left empty when `d = 0`.
    pub rho: Vec<ScalarMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineActionGroupoid {
    r: usize,
    d: usize,
    presentation: Presentation,
    psi: Vec<Vec<Scalar>>,
    rho: Vec<ScalarMatrix>,
    group: FGAffineGroup,
}

fn block_generator(r: usize, d: usize, psi: &[Scalar], rho: &ScalarMatrix) -> AffineMap {
    let mut a = ScalarMatrix::identity(r + d);
    for i in 0..d {
        for j in 0..d {
            a.set(r + i, r + j, rho.get(i, j).clone());
        }
    }
    let mut b = psi.to_vec();
    b.resize(r + d, Scalar::zero());
    AffineMap::new(a, b).expect("invertible block map")
}

pub fn build_local_model(input: &LocalModelInput) -> Result<AffineActionGroupoid, LocalModelError> {
    let LocalModelInput { r, d, presentation, psi, rho } = input.clone();
    if r + d == 0 {
        return Err(LocalModelError::EmptyCarrier);
    }
    let g = psi.len().max(rho.len());
    if g == 0 {
        return Err(LocalModelError::NoGenerators);
    }
    let psi = if r == 0 && psi.is_empty() { vec![Vec::new(); g] } else { psi };
    let rho = if d == 0 && rho.is_empty() { vec![ScalarMatrix::zeros(0, 0); g] } else { rho };
    if psi.len() != g {
        return Err(LocalModelError::GeneratorCount { what: "psi vectors", expected: g, found: psi.len() });
    }
    if rho.len() != g {
        return Err(LocalModelError::GeneratorCount { what: "rho matrices", expected: g, found: rho.len() });
    }
    for (index, v) in psi.iter().enumerate() {
        if v.len() != r {
            return Err(LocalModelError::PsiDimension { index, expected: r, found: v.len() });
        }
    }
    for (index, m) in rho.iter().enumerate() {
        if m.rows() != d || m.cols() != d {
            return Err(LocalModelError::RhoDimension { index, expected: d });
        }
        if d > 0 && m.determinant().is_zero() {
            return Err(LocalModelError::NonInvertible(index));
        }
    }
    if presentation == Presentation::FreeAbelian && d > 0 {
        for i in 0..g {
            for j in i + 1..g {
                if rho[i].mul(&rho[j]) != rho[j].mul(&rho[i]) {
                    return Err(LocalModelError::NotCommuting(i, j));
                }
            }
        }
    }
    let gens = psi.iter().zip(&rho).map(|(p, m)| block_generator(r, d, p, m)).collect();
    let group = FGAffineGroup::new(r + d, gens).expect("generators share the carrier dimension");
    Ok(AffineActionGroupoid { r, d, presentation, psi, rho, group })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomFailure {
    pub word: Word,
    pub letter: Letter,
    pub point: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionAxiomReport {
    pub ball_size: usize,
    pub checks: usize,
    pub failures: Vec<AxiomFailure>,
}

impl ActionAxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockInvarianceReport {
    pub ball_size: usize,
    /// Words whose action is not `(h, v) ↦ (h + Σψ, A v + c)`.
    pub failures: Vec<Word>,
}

impl BlockInvarianceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl AffineActionGroupoid {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn carrier_dim(&self) -> usize {
        self.r + self.d
    }

    pub fn presentation(&self) -> Presentation {
        self.presentation
    }

    pub fn psi(&self) -> &[Vec<Scalar>] {
        &self.psi
    }

    pub fn rho(&self) -> &[ScalarMatrix] {
        &self.rho
    }

    pub fn group(&self) -> &FGAffineGroup {
        &self.group
    }

    pub fn generator_count(&self) -> usize {
        self.psi.len()
    }

    /// The translation group `Γ = ψ(π₁)` on `H`.
    pub fn translation_group(&self) -> TranslationGroup {
        TranslationGroup::new(self.r, self.psi.clone())
    }

    pub fn chart(&self) -> QuasifoldChart {
        QuasifoldChart::new(self.group.clone(), OpenCell::whole(self.carrier_dim()))
    }

    /// Sum of `ψ` along a word, with signs for inverse letters.
    pub fn psi_sum(&self, w: &Word) -> Vec<Scalar> {
        w.0.iter().fold(vec![Scalar::zero(); self.r], |acc, l| {
            let v = &self.psi[l.generator];
            if l.inverse {
                vec_sub(&acc, v)
            } else {
                vec_add(&acc, v)
            }
        })
    }

    /// Deterministic rational sample points of the carrier.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<Scalar>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                (0..self.carrier_dim())
                    .map(|_| Scalar::from_ratio(rng.gen_range(-20..=20), rng.gen_range(1..=6)))
                    .collect()
            })
            .collect()
    }

    /// `(τσ)·p = τ·(σ·p)` for every `σ` in the ball of radius `radius`,
    /// every letter `τ`, and every point. The left side is evaluated from
    /// the word `τσ`, the right side by acting twice. By induction on word
    /// length this covers all pairs of ball elements.
    pub fn check_action_axioms(&self, radius: usize, points: &[Vec<Scalar>]) -> ActionAxiomReport {
        let ball = self.group.word_ball(radius);
        let id = AffineMap::identity(self.carrier_dim());
        let mut failures = Vec::new();
        let mut checks = 0;
        for p in points {
            checks += 1;
            if id.apply(p) != *p {
                failures.push(AxiomFailure { word: Word::empty(), letter: Letter { generator: 0, inverse: false }, point: p.clone() });
            }
        }
        for e in &ball {
            let images: Vec<Vec<Scalar>> = points.iter().map(|p| e.map.apply(p)).collect();
            for l in self.group.letters() {
                let product = self.group.word_map(&e.word.prepend(l));
                let tau = self.group.letter_map(l);
                for (p, sp) in points.iter().zip(&images) {
                    checks += 1;
                    if product.apply(p) != tau.apply(sp) {
                        failures.push(AxiomFailure { word: e.word.clone(), letter: l, point: p.clone() });
                    }
                }
            }
        }
        ActionAxiomReport { ball_size: ball.len(), checks, failures }
    }

    /// Every ball element fixes the splitting `H × E₀` and moves the
    /// `H`-coordinate by the `ψ`-sum of its word.
    pub fn check_block_invariance(&self, radius: usize) -> BlockInvarianceReport {
        let ball = self.group.word_ball(radius);
        let (r, n) = (self.r, self.carrier_dim());
        let failures = ball
            .iter()
            .filter(|e| {
                let a = e.map.linear();
                let block_ok = (0..n).all(|i| {
                    (0..n).all(|j| {
                        let v = a.get(i, j);
                        if i < r || j < r {
                            if i == j { v.is_one() } else { v.is_zero() }
                        } else {
                            true
                        }
                    })
                });
                let sum = self.psi_sum(&e.word);
                let shift_ok = e.map.translation()[..r] == sum[..]
                    && e.map.translation()[r..].iter().all(Scalar::is_zero);
                !(block_ok && shift_ok)
            })
            .map(|e| e.word.clone())
            .collect();
        BlockInvarianceReport { ball_size: ball.len(), failures }
    }

    /// Size of the group if the word ball stabilizes before `max_radius`.
    pub fn finite_order(&self, max_radius: usize) -> Option<usize> {
        let mut prev = 1;
        for radius in 1..=max_radius {
            let size = self.group.word_ball(radius).len();
            if size == prev {
                return Some(size);
            }
            prev = size;
        }
        None
    }

    pub fn word_for_exponents(exponents: &[BigInt]) -> Word {
        let mut letters = Vec::new();
        for (generator, e) in exponents.iter().enumerate() {
            let inverse = e.is_negative();
            let mut k = e.abs();
            while !k.is_zero() {
                letters.push(Letter { generator, inverse });
                k -= 1;
            }
        }
        Word(letters)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveQuotientReport {
    pub radius: usize,
    /// The kernel is known completely, not only up to `radius`.
    pub exact: bool,
    /// Nonempty reduced words acting as the identity, one per inverse pair.
    pub kernel_words: Vec<Word>,
    /// For free-abelian input: a lattice basis of kernel exponent vectors.
    pub kernel_lattice: Option<Vec<Vec<BigInt>>>,
    /// Generator indices with pairwise distinct nontrivial action.
    pub effective_generators: Vec<usize>,
}

impl EffectiveQuotientReport {
    pub fn is_trivial(&self) -> bool {
        self.kernel_words.is_empty()
    }
}

fn lattice_basis(vectors: Vec<Vec<BigInt>>, g: usize) -> Vec<Vec<BigInt>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    hnf(&ZMatrix::from_rows(vectors, g)).basis()
}

fn exponent_vectors(g: usize, radius: usize) -> Vec<Vec<i64>> {
    fn rec(i: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in -left..=left {
            cur[i] = e;
            rec(i + 1, left - e.abs(), cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    rec(0, radius as i64, &mut vec![0; g], &mut out);
    out.sort_by_key(|v| (v.iter().map(|e| e.abs()).sum::<i64>(), v.clone()));
    out
}

pub fn effective_quotient(gpd: &AffineActionGroupoid, radius: usize) -> EffectiveQuotientReport {
    let g = gpd.generator_count();
    let mut effective_generators: Vec<usize> = Vec::new();
    for i in 0..g {
        let m = &gpd.group.generators()[i];
        if !m.is_identity() && effective_generators.iter().all(|&j| gpd.group.generators()[j] != *m) {
            effective_generators.push(i);
        }
    }
    match gpd.presentation {
        Presentation::FreeAbelian if gpd.d == 0 => {
            let relations = if gpd.psi.iter().flatten().all(Scalar::is_zero) {
                (0..g)
                    .map(|i| (0..g).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
                    .collect()
            } else {
                gpd.translation_group().relations()
            };
            let basis = lattice_basis(relations, g);
            let kernel_words = basis.iter().map(|v| AffineActionGroupoid::word_for_exponents(v)).collect();
            EffectiveQuotientReport {
                radius,
                exact: true,
                kernel_words,
                kernel_lattice: Some(basis),
                effective_generators,
            }
        }
        Presentation::FreeAbelian => {
            let mut found = Vec::new();
            let mut kernel_words = Vec::new();
            for e in exponent_vectors(g, radius) {
                if e.iter().all(|&x| x == 0) {
                    continue;
                }
                // keep one of each ± pair: first nonzero exponent positive
                if e.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                    continue;
                }
                let big: Vec<BigInt> = e.iter().map(|&x| BigInt::from(x)).collect();
                let w = AffineActionGroupoid::word_for_exponents(&big);
                if gpd.group.word_map(&w).is_identity() {
                    kernel_words.push(w);
                    found.push(big);
                }
            }
            EffectiveQuotientReport {
                radius,
                exact: false,
                kernel_words,
                kernel_lattice: Some(lattice_basis(found, g)),
                effective_generators,
            }
        }
        Presentation::Free => {
            let kernel_words = free_kernel_words(&gpd.group, radius);
            EffectiveQuotientReport { radius, exact: false, kernel_words, kernel_lattice: None, effective_generators }
        }
    }
}

/// Reduced words of length `1..=radius` acting trivially.
fn free_kernel_words(group: &FGAffineGroup, radius: usize) -> Vec<Word> {
    let letters = group.letters();
    let mut level: Vec<(Word, AffineMap)> = vec![(Word::empty(), AffineMap::identity(group.dim()))];
    let mut kernel: Vec<Word> = Vec::new();
    let mut listed: HashMap<Word, ()> = HashMap::new();
    for _ in 0..radius {
        let mut next = Vec::new();
        for (w, m) in &level {
            for &l in &letters {
                if w.0.first() == Some(&l.inv()) {
                    continue;
                }
                let nw = w.prepend(l);
                let nm = group.letter_map(l).compose(m);
                if nm.is_identity() && !listed.contains_key(&nw.inverse()) {
                    listed.insert(nw.clone(), ());
                    kernel.push(nw.clone());
                }
                next.push((nw, nm));
            }
        }
        level = next;
    }
    kernel
}

/// The deck group of a linear torus foliation as a `d = 0` model.
pub fn dense_leaf_model(spec: &LinearFoliationSpec) -> AffineActionGroupoid {
    let deck = deck_group(spec);
    let input = LocalModelInput {
        r: deck.group.dim(),
        d: 0,
        presentation: Presentation::FreeAbelian,
        psi: deck.group.generators().to_vec(),
        rho: Vec::new(),
    };
    build_local_model(&input).expect("deck data is a valid model")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartVerdict {
    pub block_affine: bool,
    pub cell_invariant: bool,
}

impl ChartVerdict {
    pub fn is_chart(&self) -> bool {
        self.block_affine && self.cell_invariant
    }
}

pub fn isotropy_and_charts(
    gpd: &AffineActionGroupoid,
    x: &[Scalar],
    radius: usize,
    order: &ShadowOrder,
) -> Result<(Vec<BallElement>, ChartVerdict), ScalarError> {
    assert_eq!(x.len(), gpd.carrier_dim(), "point outside the carrier");
    let isotropy = gpd.group.isotropy_ball(x, radius);
    let verdict = ChartVerdict {
        block_affine: gpd.check_block_invariance(radius).passed(),
        cell_invariant: gpd.chart().check_invariance(order)?,
    };
    Ok((isotropy, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfield::{SymbolTable, DEFAULT_TOLERANCE};

    fn table() -> SymbolTable {
        SymbolTable::new([("l", Some(std::f64::consts::SQRT_2)), ("m", Some(1.7320508075688772))])
            .unwrap()
    }

    fn s(t: &SymbolTable, x: &str) -> Scalar {
        t.parse(x).unwrap()
    }

    fn rotation() -> ScalarMatrix {
        ScalarMatrix::from_rows(vec![
            vec![Scalar::zero(), Scalar::from_int(-1)],
            vec![Scalar::one(), Scalar::from_int(-1)],
        ])
    }

    fn kronecker(t: &SymbolTable) -> AffineActionGroupoid {
        build_local_model(&LocalModelInput {
            r: 1,
            d: 0,
            presentation: Presentation::FreeAbelian,
            psi: vec![vec![s(t, "1")], vec![s(t, "l")]],
            rho: vec![],
        })
        .unwrap()
    }

    fn rotation_model() -> AffineActionGroupoid {
        build_local_model(&LocalModelInput {
            r: 0,
            d: 2,
            presentation: Presentation::FreeAbelian,
            psi: vec![],
            rho: vec![rotation()],
        })
        .unwrap()
    }

    #[test]
    fn kronecker_model() {
        let t = table();
        let k = kronecker(&t);
        assert_eq!(k.translation_group(), TranslationGroup::new(1, vec![vec![s(&t, "1")], vec![s(&t, "l")]]));
        assert!(k.group().is_translation_group());
        let q = effective_quotient(&k, 4);
        assert!(q.exact && q.is_trivial());
        assert_eq!(q.effective_generators, vec![0, 1]);
        let pts = k.sample_points(5, 1);
        assert!(k.check_action_axioms(3, &pts).passed());
        assert!(k.check_block_invariance(3).passed());
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let (iso, verdict) = isotropy_and_charts(&k, &[s(&t, "1/3")], 3, &order).unwrap();
        assert_eq!(iso.len(), 1);
        assert!(verdict.is_chart());
    }

    #[test]
    fn equal_translations_have_kernel() {
        let t = table();
        let m = build_local_model(&LocalModelInput {
            r: 1,
            d: 0,
            presentation: Presentation::FreeAbelian,
            psi: vec![vec![s(&t, "1")], vec![s(&t, "1")]],
            rho: vec![],
        })
        .unwrap();
        let q = effective_quotient(&m, 3);
        assert_eq!(q.kernel_lattice, Some(vec![vec![BigInt::from(1), BigInt::from(-1)]]));
        assert_eq!(q.kernel_words[0].to_string(), "g1*g2^-1");
        assert_eq!(q.effective_generators, vec![0]);
    }

    #[test]
    fn rotation_kernel_at_radius_three() {
        let m = rotation_model();
        assert!(effective_quotient(&m, 2).is_trivial());
        let q = effective_quotient(&m, 3);
        assert_eq!(q.kernel_lattice, Some(vec![vec![BigInt::from(3)]]));
        assert_eq!(q.kernel_words, vec![Word(vec![Letter { generator: 0, inverse: false }; 3])]);
        assert_eq!(m.finite_order(6), Some(3));
        assert!(!m.group().generators()[0].is_euclidean_isometry());
    }

    #[test]
    fn rotation_isotropy() {
        let t = table();
        let order = ShadowOrder::new(&t, DEFAULT_TOLERANCE);
        let m = rotation_model();
        let (iso, verdict) = isotropy_and_charts(&m, &[Scalar::zero(), Scalar::zero()], 4, &order).unwrap();
        assert_eq!(iso.len(), 3);
        assert!(verdict.is_chart());
        let (iso, _) = isotropy_and_charts(&m, &[Scalar::one(), Scalar::zero()], 4, &order).unwrap();
        assert_eq!(iso.len(), 1);
    }

    #[test]
    fn dilation_model_is_accepted() {
        let m = build_local_model(&LocalModelInput {
            r: 1,
            d: 1,
            presentation: Presentation::Free,
            psi: vec![vec![Scalar::one()]],
            rho: vec![ScalarMatrix::from_rows(vec![vec![Scalar::from_int(2)]])],
        })
        .unwrap();
        let g = &m.group().generators()[0];
        assert!(!g.is_euclidean_isometry());
        assert_eq!(g.apply(&[Scalar::zero(), Scalar::one()]), vec![Scalar::one(), Scalar::from_int(2)]);
        assert!(m.check_block_invariance(4).passed());
        assert!(effective_quotient(&m, 4).is_trivial());
    }

    #[test]
    fn input_errors() {
        let singular = ScalarMatrix::from_rows(vec![vec![Scalar::zero()]]);
        let base = LocalModelInput {
            r: 0,
            d: 1,
            presentation: Presentation::FreeAbelian,
            psi: vec![],
            rho: vec![singular],
        };
        assert_eq!(build_local_model(&base), Err(LocalModelError::NonInvertible(0)));
        let a = ScalarMatrix::from_rows(vec![
            vec![Scalar::one(), Scalar::one()],
            vec![Scalar::zero(), Scalar::one()],
        ]);
        let b = ScalarMatrix::from_rows(vec![
            vec![Scalar::one(), Scalar::zero()],
            vec![Scalar::one(), Scalar::one()],
        ]);
        let mut noncomm = LocalModelInput { r: 0, d: 2, presentation: Presentation::FreeAbelian, psi: vec![], rho: vec![a, b] };
        assert_eq!(build_local_model(&noncomm), Err(LocalModelError::NotCommuting(0, 1)));
        noncomm.presentation = Presentation::Free;
        let free = build_local_model(&noncomm).unwrap();
        // the free group on two unipotents acts faithfully at small radius
        assert!(effective_quotient(&free, 4).is_trivial());
    }

    #[test]
    fn dense_leaf_matches_leaf_space() {
        let t = table();
        let three = LinearFoliationSpec::new(3, vec![vec![s(&t, "1"), s(&t, "l"), s(&t, "m")]]).unwrap();
        let gpd = dense_leaf_model(&three);
        let expected = TranslationGroup::new(
            2,
            vec![vec![s(&t, "1"), s(&t, "0")], vec![s(&t, "0"), s(&t, "1")], vec![s(&t, "l"), s(&t, "m")]],
        );
        assert_eq!(gpd.translation_group(), expected);
        let slope = LinearFoliationSpec::new(2, vec![vec![s(&t, "1"), s(&t, "1")]]).unwrap();
        let circle = dense_leaf_model(&slope);
        assert_eq!(circle.translation_group().canonical_generators(), vec![vec![s(&t, "1")]]);
        let q = effective_quotient(&circle, 2);
        assert!(q.exact);
        assert_eq!(q.kernel_lattice.unwrap().len(), 1);
    }

    #[test]
    fn exponent_enumeration_counts() {
        // lattice points of the l1 ball in Z^2 of radius 3
        assert_eq!(exponent_vectors(2, 3).len(), 25);
        assert_eq!(exponent_vectors(1, 3).len(), 7);
    }
}
