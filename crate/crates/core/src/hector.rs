//! Suspension of a finite family of affine transitions `ψ_1..ψ_m` of `ℝ^q`.
//!
//! The foliated space is kept combinatorial. Blocks are
//! `ℝ^q × ℝ × (0,1)` and `dom ψ_i × (i,i+1) × (0,3)`, glued by
//! `(x,s,t) ~ (ψ_i(x), s, t−2)` for `s ∈ (i,i+1)` and `t ∈ (2,3)`. The
//! cocycle is given by piecewise descriptors on the charts
//! `bot`, `bot_i`, `mid_i`, `top_i`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::affpseudo::{AffineMap, HalfSpace, OpenCell, Transition};
use crate::scalarfield::{Scalar, ScalarError, ScalarMatrix, ShadowOrder};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HectorError {
    #[error("at least one generator is required")]
    NoGenerators,
    #[error("generator {index} acts on dimension {found}, expected {expected}")]
    Dimension { index: usize, expected: usize, found: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_str(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Charts of the cocycle. Strip indices are 0-based here and printed 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChartKind {
    Bottom,
    Bot(usize),
    Mid(usize),
    Top(usize),
}

impl ChartKind {
    pub fn strip(self) -> Option<usize> {
        match self {
            ChartKind::Bottom => None,
            ChartKind::Bot(k) | ChartKind::Mid(k) | ChartKind::Top(k) => Some(k),
        }
    }

    // t-interval of the block V^• (open)
    pub fn t_range(self) -> (BigRational, BigRational) {
        match self {
            ChartKind::Bottom => (rat(0, 1), rat(1, 1)),
            ChartKind::Bot(_) => (rat(0, 1), rat(3, 2)),
            ChartKind::Mid(_) => (rat(1, 1), rat(2, 1)),
            ChartKind::Top(_) => (rat(3, 2), rat(3, 1)),
        }
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::Bottom => f.write_str("bot"),
            ChartKind::Bot(k) => write!(f, "bot_{}", k + 1),
            ChartKind::Mid(k) => write!(f, "mid_{}", k + 1),
            ChartKind::Top(k) => write!(f, "top_{}", k + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalMap {
    Identity,
    Psi(usize),
    PsiInverse(usize),
}

impl fmt::Display for LocalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalMap::Identity => f.write_str("x"),
            LocalMap::Psi(k) => write!(f, "psi_{}(x)", k + 1),
            LocalMap::PsiInverse(k) => write!(f, "psi_{}^-1(x)", k + 1),
        }
    }
}

/// `σ([x,s,t]) = map(x)` for `t ∈ (t_lo, t_hi)`, and `s` in the strip if given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub t_lo: BigRational,
    pub t_hi: BigRational,
    pub strip: Option<usize>,
    pub map: LocalMap,
}

impl Piece {
    fn new(lo: BigRational, hi: BigRational, strip: Option<usize>, map: LocalMap) -> Self {
        Piece { t_lo: lo, t_hi: hi, strip, map }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Descriptor {
    pub chart: ChartKind,
    pub pieces: Vec<Piece>,
}

/// `σ_to = map ∘ σ_from` on the overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleElement {
    pub from: ChartKind,
    pub to: ChartKind,
    pub map: LocalMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuspensionPoint {
    pub x: Vec<Scalar>,
    pub s: BigRational,
    pub t: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub x_domain: OpenCell,
    /// `None` means unbounded.
    pub s_range: Option<(BigRational, BigRational)>,
    pub t_range: (BigRational, BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuspensionComplex {
    dim: usize,
    generators: Vec<Transition>,
    images: Vec<OpenCell>,
    pub descriptors: Vec<Descriptor>,
    pub cocycle: Vec<CocycleElement>,
}

pub fn build_suspension(generators: Vec<Transition>) -> Result<SuspensionComplex, HectorError> {
    SuspensionComplex::new(generators)
}

impl SuspensionComplex {
    pub fn new(generators: Vec<Transition>) -> Result<Self, HectorError> {
        let Some(first) = generators.first() else { return Err(HectorError::NoGenerators) };
        let dim = first.map.dim();
        for (index, g) in generators.iter().enumerate() {
            if g.map.dim() != dim || g.domain.dim() != dim {
                return Err(HectorError::Dimension { index, expected: dim, found: g.map.dim() });
            }
        }
        let m = generators.len();
        let (zero, one, half3, two, three) = (rat(0, 1), rat(1, 1), rat(3, 2), rat(2, 1), rat(3, 1));
        let mut bottom = vec![Piece::new(zero.clone(), one.clone(), None, LocalMap::Identity)];
        for k in 0..m {
            bottom.push(Piece::new(two.clone(), three.clone(), Some(k), LocalMap::Psi(k)));
        }
        let mut descriptors = vec![Descriptor { chart: ChartKind::Bottom, pieces: bottom }];
        let mut cocycle = Vec::new();
        for k in 0..m {
            descriptors.push(Descriptor {
                chart: ChartKind::Bot(k),
                pieces: vec![
                    Piece::new(zero.clone(), half3.clone(), Some(k), LocalMap::Identity),
                    Piece::new(two.clone(), three.clone(), Some(k), LocalMap::Psi(k)),
                ],
            });
            descriptors.push(Descriptor {
                chart: ChartKind::Mid(k),
                pieces: vec![Piece::new(one.clone(), two.clone(), Some(k), LocalMap::Identity)],
            });
            descriptors.push(Descriptor {
                chart: ChartKind::Top(k),
                pieces: vec![
                    Piece::new(zero.clone(), one.clone(), Some(k), LocalMap::PsiInverse(k)),
                    Piece::new(half3.clone(), three.clone(), Some(k), LocalMap::Identity),
                ],
            });
            cocycle.push(CocycleElement {
                from: ChartKind::Top(k),
                to: ChartKind::Bot(k),
                map: LocalMap::Psi(k),
            });
            cocycle.push(CocycleElement {
                from: ChartKind::Top(k),
                to: ChartKind::Bottom,
                map: LocalMap::Psi(k),
            });
        }
        let images = generators.iter().map(Transition::codomain).collect();
        Ok(SuspensionComplex { dim, generators, images, descriptors, cocycle })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Transition] {
        &self.generators
    }

    pub fn strips(&self) -> usize {
        self.generators.len()
    }

    pub fn blocks(&self) -> Vec<Block> {
        let mut out = vec![Block {
            name: "bot".into(),
            x_domain: OpenCell::whole(self.dim),
            s_range: None,
            t_range: (rat(0, 1), rat(1, 1)),
        }];
        for (k, g) in self.generators.iter().enumerate() {
            let i = k as i64 + 1;
            out.push(Block {
                name: format!("strip_{i}"),
                x_domain: g.domain.clone(),
                s_range: Some((rat(i, 1), rat(i + 1, 1))),
                t_range: (rat(0, 1), rat(3, 1)),
            });
        }
        out
    }

    /// Human-readable glue rules, one per strip.
    pub fn glue_rules(&self) -> Vec<String> {
        (1..=self.strips())
            .map(|i| format!("(x,s,t) ~ (psi_{i}(x),s,t-2) for x in dom psi_{i}, s in ({i},{}), t in (2,3)", i + 1))
            .collect()
    }

    pub fn local_map(&self, m: LocalMap) -> AffineMap {
        match m {
            LocalMap::Identity => AffineMap::identity(self.dim),
            LocalMap::Psi(k) => self.generators[k].map.clone(),
            LocalMap::PsiInverse(k) => self.generators[k].map.inverse(),
        }
    }

    fn strip_of(&self, s: &BigRational) -> Option<usize> {
        if s.is_integer() {
            return None;
        }
        let f = s.floor().to_integer();
        if f >= BigInt::one() && f <= BigInt::from(self.strips()) {
            Some(usize::try_from(f - 1).expect("small"))
        } else {
            None
        }
    }

    fn in_open(t: &BigRational, lo: &BigRational, hi: &BigRational) -> bool {
        lo < t && t < hi
    }

    pub fn contains(&self, p: &SuspensionPoint, order: &ShadowOrder) -> Result<bool, ScalarError> {
        if Self::in_open(&p.t, &rat(0, 1), &rat(1, 1)) {
            return Ok(true);
        }
        match self.strip_of(&p.s) {
            Some(k) if Self::in_open(&p.t, &rat(0, 1), &rat(3, 1)) => {
                self.generators[k].domain.contains(&p.x, order)
            }
            _ => Ok(false),
        }
    }

    /// The unique other point glued to `p`, if any.
    pub fn partner(
        &self,
        p: &SuspensionPoint,
        order: &ShadowOrder,
    ) -> Result<Option<SuspensionPoint>, ScalarError> {
        let Some(k) = self.strip_of(&p.s) else { return Ok(None) };
        let g = &self.generators[k];
        if Self::in_open(&p.t, &rat(2, 1), &rat(3, 1)) && g.domain.contains(&p.x, order)? {
            return Ok(Some(SuspensionPoint {
                x: g.map.apply(&p.x),
                s: p.s.clone(),
                t: &p.t - rat(2, 1),
            }));
        }
        if Self::in_open(&p.t, &rat(0, 1), &rat(1, 1)) && self.images[k].contains(&p.x, order)? {
            return Ok(Some(SuspensionPoint {
                x: g.map.inverse().apply(&p.x),
                s: p.s.clone(),
                t: &p.t + rat(2, 1),
            }));
        }
        Ok(None)
    }

    /// Membership in the graph of the glue relation.
    pub fn related(
        &self,
        p: &SuspensionPoint,
        q: &SuspensionPoint,
        order: &ShadowOrder,
    ) -> Result<bool, ScalarError> {
        if !self.contains(p, order)? || !self.contains(q, order)? {
            return Ok(false);
        }
        Ok(p == q || self.partner(p, order)?.as_ref() == Some(q))
    }

    pub fn riemannian_flag(&self) -> bool {
        self.generators.iter().all(|g| g.map.is_euclidean_isometry())
    }

    /// Generators read back from the cocycle elements `top_i -> bot_i`.
    pub fn holonomy_generators(&self) -> Vec<Transition> {
        (0..self.strips())
            .filter_map(|k| {
                let e = self
                    .cocycle
                    .iter()
                    .find(|e| e.from == ChartKind::Top(k) && e.to == ChartKind::Bot(k))?;
                let domain = self.generators[k].domain.clone();
                Some(match e.map {
                    LocalMap::Identity => Transition::identity_on(domain),
                    LocalMap::Psi(j) => self.generators[j].clone(),
                    LocalMap::PsiInverse(j) => self.generators[j].inverse(),
                })
            })
            .collect()
    }

    fn expected_element(&self, from: ChartKind, to: ChartKind) -> AffineMap {
        if let Some(e) = self.cocycle.iter().find(|e| e.from == from && e.to == to) {
            return self.local_map(e.map);
        }
        if let Some(e) = self.cocycle.iter().find(|e| e.from == to && e.to == from) {
            return self.local_map(e.map).inverse();
        }
        AffineMap::identity(self.dim)
    }
}

pub fn holonomy_generators(c: &SuspensionComplex) -> Vec<Transition> {
    c.holonomy_generators()
}

pub fn riemannian_flag(c: &SuspensionComplex) -> bool {
    c.riemannian_flag()
}

// ---------------------------------------------------------------------------
// cocycle verification by region decomposition

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TCell {
    Open(BigRational, BigRational),
    Point(BigRational),
}

impl TCell {
    fn inside(&self, lo: &BigRational, hi: &BigRational) -> bool {
        match self {
            TCell::Open(a, b) => lo <= a && b <= hi,
            TCell::Point(v) => lo < v && v < hi,
        }
    }

    fn sample(&self) -> BigRational {
        match self {
            TCell::Open(a, b) => (a + b) / rat(2, 1),
            TCell::Point(v) => v.clone(),
        }
    }

    fn shifted(&self, d: &BigRational) -> TCell {
        match self {
            TCell::Open(a, b) => TCell::Open(a + d, b + d),
            TCell::Point(v) => TCell::Point(v + d),
        }
    }
}

impl fmt::Display for TCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TCell::Open(a, b) => write!(f, "({},{})", rat_str(a), rat_str(b)),
            TCell::Point(v) => write!(f, "{{{}}}", rat_str(v)),
        }
    }
}

fn elementary_cells() -> Vec<TCell> {
    vec![
        TCell::Open(rat(0, 1), rat(1, 1)),
        TCell::Point(rat(1, 1)),
        TCell::Open(rat(1, 1), rat(3, 2)),
        TCell::Point(rat(3, 2)),
        TCell::Open(rat(3, 2), rat(2, 1)),
        TCell::Point(rat(2, 1)),
        TCell::Open(rat(2, 1), rat(3, 1)),
    ]
}

/// Which sets the x-coordinate of a region representative lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XFlags {
    pub in_domain: bool,
    pub in_image: bool,
    /// for `t ∈ (2,3)`: whether `ψ_i(x) ∈ dom ψ_i`
    pub image_in_domain: bool,
}

#[derive(Clone, Debug)]
struct Rep {
    t: TCell,
    in_domain: bool,
    in_image: bool,
    // x-coordinate of this representative as a map of the region's x
    from_region: AffineMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseStatus {
    Pass,
    Fail(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseVerdict {
    pub strip: usize,
    pub t_cell: TCell,
    pub flags: XFlags,
    pub charts: Vec<ChartKind>,
    /// Whether the region has points (decided by shadow feasibility).
    pub inhabited: bool,
    pub status: CaseStatus,
    pub witness: Option<SuspensionPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleCheckReport {
    pub cases: Vec<CaseVerdict>,
    /// Per strip: whether `M_i^top ∩ M^bot = M_i^top ∩ M_i^bot`.
    pub cross_strip_equal: Vec<bool>,
    pub passed: bool,
}

impl CocycleCheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CaseVerdict> {
        self.cases.iter().filter(|c| c.status != CaseStatus::Pass)
    }
}

/// A point of `a \ b` for open cells, via a violated constraint of `b`.
fn difference_point(
    a: &OpenCell,
    b: &OpenCell,
    order: &ShadowOrder,
) -> Result<Option<Vec<Scalar>>, ScalarError> {
    for h in b.constraints() {
        if h.normal.iter().all(Scalar::is_zero) {
            continue;
        }
        let flipped = HalfSpace::new(h.normal.iter().map(|x| -x).collect(), -&h.offset);
        let cell = OpenCell::new(a.dim(), vec![flipped]).expect("same dimension");
        if let Some(p) = a.intersect(&cell).rational_point(order)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

impl SuspensionComplex {
    fn in_block(&self, chart: ChartKind, strip: usize, rep: &Rep) -> bool {
        let (lo, hi) = chart.t_range();
        if !rep.t.inside(&lo, &hi) {
            return false;
        }
        match chart.strip() {
            None => true,
            Some(k) => k == strip && rep.in_domain,
        }
    }

    /// Values of the chart map on the region, one per matching piece and
    /// representative. `Err` when a matching piece is undefined there.
    fn sigma_candidates(
        &self,
        chart: ChartKind,
        strip: usize,
        reps: &[Rep],
    ) -> Result<Vec<AffineMap>, LocalMap> {
        let Some(desc) = self.descriptors.iter().find(|d| d.chart == chart) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for rep in reps {
            for piece in &desc.pieces {
                if !rep.t.inside(&piece.t_lo, &piece.t_hi) {
                    continue;
                }
                if piece.strip.is_some_and(|k| k != strip) {
                    continue;
                }
                let applicable = match piece.map {
                    LocalMap::Identity => true,
                    LocalMap::Psi(k) => k != strip || rep.in_domain,
                    LocalMap::PsiInverse(k) => k != strip || rep.in_image,
                };
                if !applicable {
                    return Err(piece.map);
                }
                out.push(self.local_map(piece.map).compose(&rep.from_region));
            }
        }
        Ok(out)
    }

    fn region_point(
        &self,
        strip: usize,
        t: &TCell,
        flags: XFlags,
        order: &ShadowOrder,
    ) -> Result<Option<Vec<Scalar>>, ScalarError> {
        let dom = &self.generators[strip].domain;
        let im = &self.images[strip];
        let is_high = matches!(t, TCell::Open(a, _) if *a == rat(2, 1));
        if is_high {
            let back = dom.pullback(&self.generators[strip].map);
            return if flags.image_in_domain {
                dom.intersect(&back).rational_point(order)
            } else {
                difference_point(dom, &back, order)
            };
        }
        let is_low = matches!(t, TCell::Open(a, b) if a.is_zero() && *b == rat(1, 1));
        if !is_low {
            // between the two glued ends only dom ψ matters
            return dom.rational_point(order);
        }
        match (flags.in_domain, flags.in_image) {
            (true, true) => dom.intersect(im).rational_point(order),
            (true, false) => difference_point(dom, im, order),
            (false, true) => difference_point(im, dom, order),
            // the complement of dom ∪ im; no pair of charts meets here
            (false, false) => Ok(None),
        }
    }

    /// Checks every chart pair on every region of the decomposition of strip
    /// `i` by elementary `t`-cells and by where `x` sits relative to
    /// `dom ψ_i` and `im ψ_i`.
    pub fn verify_cocycle(&self, order: &ShadowOrder) -> Result<CocycleCheckReport, ScalarError> {
        let mut cases = Vec::new();
        let mut cross = Vec::new();
        let two = rat(2, 1);
        for k in 0..self.strips() {
            let psi = self.generators[k].map.clone();
            let psi_inv = psi.inverse();
            let id = AffineMap::identity(self.dim);
            let charts = [ChartKind::Bottom, ChartKind::Bot(k), ChartKind::Mid(k), ChartKind::Top(k)];
            let mut top_bottom = Vec::new();
            let mut top_bot = Vec::new();
            for t in elementary_cells() {
                let low = t == TCell::Open(rat(0, 1), rat(1, 1));
                let high = t == TCell::Open(rat(2, 1), rat(3, 1));
                let flag_sets: Vec<XFlags> = if low {
                    [(true, true), (true, false), (false, true), (false, false)]
                        .into_iter()
                        .map(|(d, i)| XFlags { in_domain: d, in_image: i, image_in_domain: false })
                        .collect()
                } else if high {
                    [true, false]
                        .into_iter()
                        .map(|b| XFlags { in_domain: true, in_image: false, image_in_domain: b })
                        .collect()
                } else {
                    vec![XFlags { in_domain: true, in_image: false, image_in_domain: false }]
                };
                for flags in flag_sets {
                    let mut reps = vec![Rep {
                        t: t.clone(),
                        in_domain: flags.in_domain,
                        in_image: flags.in_image,
                        from_region: id.clone(),
                    }];
                    if high {
                        reps.push(Rep {
                            t: t.shifted(&-two.clone()),
                            in_domain: flags.image_in_domain,
                            in_image: true,
                            from_region: psi.clone(),
                        });
                    } else if low && flags.in_image {
                        reps.push(Rep {
                            t: t.shifted(&two),
                            in_domain: true,
                            in_image: false,
                            from_region: psi_inv.clone(),
                        });
                    }
                    let members: Vec<ChartKind> = charts
                        .iter()
                        .copied()
                        .filter(|&c| reps.iter().any(|r| self.in_block(c, k, r)))
                        .collect();
                    if members.len() < 2 {
                        continue;
                    }
                    let point = self.region_point(k, &t, flags, order)?;
                    let inhabited = point.is_some();
                    if inhabited && members.contains(&ChartKind::Top(k)) {
                        if members.contains(&ChartKind::Bottom) {
                            top_bottom.push((t.clone(), flags));
                        }
                        if members.contains(&ChartKind::Bot(k)) {
                            top_bot.push((t.clone(), flags));
                        }
                    }
                    let status = self.check_region(k, &members, &reps);
                    let witness = match (&status, point) {
                        (CaseStatus::Fail(_), Some(x)) => Some(SuspensionPoint {
                            x,
                            s: BigRational::from_integer(BigInt::from(k + 1)) + rat(1, 2),
                            t: t.sample(),
                        }),
                        _ => None,
                    };
                    cases.push(CaseVerdict {
                        strip: k,
                        t_cell: t.clone(),
                        flags,
                        charts: members,
                        inhabited,
                        status,
                        witness,
                    });
                }
            }
            cross.push(top_bottom == top_bot);
        }
        let passed = cases.iter().all(|c| c.status == CaseStatus::Pass);
        Ok(CocycleCheckReport { cases, cross_strip_equal: cross, passed })
    }

    fn check_region(&self, strip: usize, members: &[ChartKind], reps: &[Rep]) -> CaseStatus {
        let mut sigma = Vec::new();
        for &c in members {
            let cands = match self.sigma_candidates(c, strip, reps) {
                Ok(v) => v,
                Err(m) => return CaseStatus::Fail(format!("piece {m} of {c} is undefined on the region")),
            };
            let Some(first) = cands.first() else {
                return CaseStatus::Fail(format!("no descriptor piece of {c} covers the region"));
            };
            if cands.iter().any(|m| m != first) {
                return CaseStatus::Fail(format!("{c} is not well defined on the region"));
            }
            sigma.push((c, first.clone()));
        }
        for (a, sa) in &sigma {
            for (b, sb) in &sigma {
                if a >= b {
                    continue;
                }
                if self.expected_element(*a, *b).compose(sa) != *sb {
                    return CaseStatus::Fail(format!("sigma_{b} differs from g({a},{b}) o sigma_{a}"));
                }
            }
        }
        CaseStatus::Pass
    }
}

pub fn verify_cocycle(
    c: &SuspensionComplex,
    order: &ShadowOrder,
) -> Result<CocycleCheckReport, ScalarError> {
    c.verify_cocycle(order)
}

// ---------------------------------------------------------------------------
// closedness of the relation graph and graph charts

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GodementCase {
    /// `s₀` outside every strip: only the bottom block.
    BottomOnly,
    /// `s₀ = i`: both `t` limits must lie in `(0,1)`.
    IntegerS,
    /// `s₀ ∈ (i,i+1)` with `t₀, t₀′ ≤ 1`.
    StripLow,
    /// `s₀ ∈ (i,i+1)` with `1 < t₀ < 2`.
    StripMiddle,
    /// `s₀ ∈ (i,i+1)` with `t₀ ≥ 2`.
    StripHigh,
}

impl GodementCase {
    pub const ALL: [GodementCase; 5] = [
        GodementCase::BottomOnly,
        GodementCase::IntegerS,
        GodementCase::StripLow,
        GodementCase::StripMiddle,
        GodementCase::StripHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GodementCase::BottomOnly => "s0<1",
            GodementCase::IntegerS => "s0=i",
            GodementCase::StripLow => "strip:t0<=1",
            GodementCase::StripMiddle => "strip:1<t0<2",
            GodementCase::StripHigh => "strip:t0>=2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GodementCaseReport {
    pub case: GodementCase,
    pub sequences: usize,
    /// Limits that lie in `V × V` (the others escape and are vacuous).
    pub limits_in_v: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphChart {
    pub generator: usize,
    /// `(x,s,t) ↦ (ψ(x), s, t−2)` has invertible linear part.
    pub submersion: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GodementReport {
    pub samples: usize,
    pub cases: Vec<GodementCaseReport>,
    pub graph_charts: Vec<GraphChart>,
    pub passed: bool,
}

const SEQUENCE_LENGTH: u32 = 12;

fn random_rat(rng: &mut ChaCha8Rng, lo: &BigRational, hi: &BigRational) -> BigRational {
    // dyadic point strictly inside (lo, hi)
    let k: i64 = rng.gen_range(1..1024);
    lo + (hi - lo) * rat(k, 1024)
}

fn dyadic_step(rng: &mut ChaCha8Rng) -> BigRational {
    let k: i64 = rng.gen_range(-64..=64);
    rat(if k == 0 { 1 } else { k }, 4096)
}

fn scale_vec(v: &[BigRational], j: u32) -> Vec<Scalar> {
    let f = BigRational::new(BigInt::one(), BigInt::one() << j);
    v.iter().map(|x| Scalar::from_rational(x * &f)).collect()
}

struct Sampler<'a> {
    c: &'a SuspensionComplex,
    order: &'a ShadowOrder<'a>,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    /// Interior point of the strip domain and a direction keeping
    /// `x₀ + d/2^j` inside for `j ≥ 1`.
    fn x_in_domain(&mut self, k: usize) -> Result<(Vec<Scalar>, Vec<BigRational>), ScalarError> {
        let dom = &self.c.generators[k].domain;
        let base = dom.rational_point(self.order)?.expect("generator domains are nonempty");
        let mut x0 = base.clone();
        for _ in 0..8 {
            let off: Vec<Scalar> = (0..self.c.dim)
                .map(|_| Scalar::from_rational(dyadic_step(&mut self.rng) * rat(16, 1)))
                .collect();
            let cand: Vec<Scalar> = base.iter().zip(&off).map(|(a, b)| a + b).collect();
            if dom.contains(&cand, self.order)? {
                x0 = cand;
                break;
            }
        }
        let mut d: Vec<BigRational> = (0..self.c.dim).map(|_| dyadic_step(&mut self.rng)).collect();
        for _ in 0..40 {
            let mut ok = true;
            for j in 1..=SEQUENCE_LENGTH {
                let xj: Vec<Scalar> =
                    x0.iter().zip(scale_vec(&d, j)).map(|(a, b)| a + &b).collect();
                if !dom.contains(&xj, self.order)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok((x0, d));
            }
            d.iter_mut().for_each(|v| *v /= rat(2, 1));
        }
        Ok((x0, vec![BigRational::zero(); self.c.dim]))
    }

    fn x_anywhere(&mut self) -> (Vec<Scalar>, Vec<BigRational>) {
        let x0 = (0..self.c.dim)
            .map(|_| Scalar::from_rational(random_rat(&mut self.rng, &rat(-2, 1), &rat(2, 1))))
            .collect();
        let d = (0..self.c.dim).map(|_| dyadic_step(&mut self.rng)).collect();
        (x0, d)
    }

    fn boundary_or_interior(&mut self, boundary: &[BigRational], lo: &BigRational, hi: &BigRational) -> BigRational {
        if !boundary.is_empty() && self.rng.gen_range(0..4) == 0 {
            boundary[self.rng.gen_range(0..boundary.len())].clone()
        } else {
            random_rat(&mut self.rng, lo, hi)
        }
    }

    /// Step in `t` pointing into `(lo, hi)` from `t₀`, small enough to stay.
    fn t_step(&mut self, t0: &BigRational, lo: &BigRational, hi: &BigRational) -> BigRational {
        let room = (t0 - lo).min(hi - t0);
        let mag = dyadic_step(&mut self.rng).abs();
        if room <= BigRational::zero() {
            // on the boundary: move inwards
            return if t0 <= lo { mag } else { -mag };
        }
        let capped = if mag >= room { &room / rat(2, 1) } else { mag };
        if self.rng.gen_bool(0.5) {
            capped
        } else {
            -capped
        }
    }

    fn run(&mut self, case: GodementCase, report: &mut GodementCaseReport) -> Result<(), ScalarError> {
        let m = self.c.strips();
        let k = self.rng.gen_range(0..m);
        let strip_lo = BigRational::from_integer(BigInt::from(k + 1));
        let strip_hi = &strip_lo + rat(1, 1);
        let (x0, dx, s0, ds, t0, dt, glue): (_, _, BigRational, BigRational, BigRational, BigRational, i8);
        match case {
            GodementCase::BottomOnly => {
                (x0, dx) = self.x_anywhere();
                s0 = random_rat(&mut self.rng, &rat(-3, 1), &rat(1, 1));
                ds = -dyadic_step(&mut self.rng).abs();
                t0 = self.boundary_or_interior(&[rat(0, 1), rat(1, 1)], &rat(0, 1), &rat(1, 1));
                dt = self.t_step(&t0.clone(), &rat(0, 1), &rat(1, 1));
                glue = 0;
            }
            GodementCase::IntegerS => {
                (x0, dx) = self.x_in_domain(k)?;
                s0 = strip_lo.clone();
                ds = dyadic_step(&mut self.rng).abs();
                t0 = random_rat(&mut self.rng, &rat(0, 1), &rat(1, 1));
                dt = self.t_step(&t0.clone(), &rat(0, 1), &rat(1, 1));
                glue = if self.rng.gen_bool(0.5) { -1 } else { 0 };
            }
            GodementCase::StripLow => {
                (x0, dx) = self.x_in_domain(k)?;
                s0 = random_rat(&mut self.rng, &strip_lo, &strip_hi);
                ds = dyadic_step(&mut self.rng) / rat(1024, 1);
                t0 = self.boundary_or_interior(&[rat(1, 1)], &rat(0, 1), &rat(1, 1));
                dt = self.t_step(&t0.clone(), &rat(0, 1), &rat(1, 1));
                glue = if self.rng.gen_bool(0.5) { -1 } else { 0 };
            }
            GodementCase::StripMiddle => {
                (x0, dx) = self.x_in_domain(k)?;
                s0 = random_rat(&mut self.rng, &strip_lo, &strip_hi);
                ds = dyadic_step(&mut self.rng) / rat(1024, 1);
                t0 = random_rat(&mut self.rng, &rat(1, 1), &rat(2, 1));
                dt = self.t_step(&t0.clone(), &rat(1, 1), &rat(2, 1));
                glue = 0;
            }
            GodementCase::StripHigh => {
                (x0, dx) = self.x_in_domain(k)?;
                s0 = random_rat(&mut self.rng, &strip_lo, &strip_hi);
                ds = dyadic_step(&mut self.rng) / rat(1024, 1);
                t0 = self.boundary_or_interior(&[rat(2, 1)], &rat(2, 1), &rat(3, 1));
                dt = self.t_step(&t0.clone(), &rat(2, 1), &rat(3, 1));
                glue = if self.rng.gen_bool(0.75) { 1 } else { 0 };
            }
        }
        report.sequences += 1;
        let psi = &self.c.generators[k].map;
        let point = |j: u32| {
            let f = BigRational::new(BigInt::one(), BigInt::one() << j);
            SuspensionPoint {
                x: x0.iter().zip(scale_vec(&dx, j)).map(|(a, b)| a + &b).collect(),
                s: &s0 + &ds * &f,
                t: &t0 + &dt * &f,
            }
        };
        // the sequence must lie in the relation graph
        let mut glue = glue;
        for j in 1..=SEQUENCE_LENGTH {
            let p = point(j);
            let q = match glue {
                0 => p.clone(),
                _ => match self.c.partner(&p, self.order)? {
                    Some(q) => q,
                    None => {
                        glue = 0;
                        p.clone()
                    }
                },
            };
            if !self.c.related(&p, &q, self.order)? {
                report
                    .failures
                    .push(format!("sampled pair at j={j} is not in the relation"));
                return Ok(());
            }
        }
        // exact limit of the sequence and of its partner sequence
        let p0 = SuspensionPoint { x: x0.clone(), s: s0.clone(), t: t0.clone() };
        let q0 = match glue {
            0 => p0.clone(),
            1 => SuspensionPoint { x: psi.apply(&x0), s: s0.clone(), t: &t0 - rat(2, 1) },
            _ => SuspensionPoint { x: psi.inverse().apply(&x0), s: s0.clone(), t: &t0 + rat(2, 1) },
        };
        if !(self.c.contains(&p0, self.order)? && self.c.contains(&q0, self.order)?) {
            return Ok(());
        }
        report.limits_in_v += 1;
        if !self.c.related(&p0, &q0, self.order)? {
            report.failures.push(format!(
                "limit with s0={}, t0={}, t0'={} is not in the relation",
                rat_str(&s0),
                rat_str(&p0.t),
                rat_str(&q0.t)
            ));
        }
        let unit = (rat(0, 1), rat(1, 1));
        if case == GodementCase::IntegerS
            && !(Self::open(&p0.t, &unit) && Self::open(&q0.t, &unit))
        {
            report.failures.push("s0 = i limit with t outside (0,1)".into());
        }
        Ok(())
    }

    fn open(t: &BigRational, (lo, hi): &(BigRational, BigRational)) -> bool {
        lo < t && t < hi
    }
}

impl SuspensionComplex {
    /// Replays the closedness case analysis on sampled convergent sequences
    /// `p₀ + d/2^j` in the relation graph, and records the graph charts.
    pub fn verify_godement(
        &self,
        samples: usize,
        seed: u64,
        order: &ShadowOrder,
    ) -> Result<GodementReport, ScalarError> {
        let mut cases: Vec<GodementCaseReport> = GodementCase::ALL
            .iter()
            .map(|&case| GodementCaseReport { case, sequences: 0, limits_in_v: 0, failures: Vec::new() })
            .collect();
        let mut sampler = Sampler { c: self, order, rng: ChaCha8Rng::seed_from_u64(seed) };
        for n in 0..samples {
            let idx = n % cases.len();
            let case = cases[idx].case;
            sampler.run(case, &mut cases[idx])?;
        }
        let graph_charts = self
            .generators
            .iter()
            .enumerate()
            .map(|(generator, g)| GraphChart {
                generator,
                submersion: !graph_chart_map(&g.map).linear().determinant().is_zero(),
            })
            .collect::<Vec<_>>();
        let passed = cases.iter().all(|c| c.failures.is_empty())
            && graph_charts.iter().all(|g| g.submersion);
        Ok(GodementReport { samples, cases, graph_charts, passed })
    }
}

/// `(x,s,t) ↦ (ψ(x), s, t−2)` on `ℝ^{q+2}`.
pub fn graph_chart_map(psi: &AffineMap) -> AffineMap {
    let q = psi.dim();
    let mut a = ScalarMatrix::zeros(q + 2, q + 2);
    for i in 0..q {
        for j in 0..q {
            a.set(i, j, psi.linear().get(i, j).clone());
        }
    }
    a.set(q, q, Scalar::one());
    a.set(q + 1, q + 1, Scalar::one());
    let mut b = psi.translation().to_vec();
    b.push(Scalar::zero());
    b.push(Scalar::from_int(-2));
    AffineMap::new(a, b).expect("block map of an invertible map")
}

pub fn verify_godement(
    c: &SuspensionComplex,
    samples: usize,
    seed: u64,
    order: &ShadowOrder,
) -> Result<GodementReport, ScalarError> {
    c.verify_godement(samples, seed, order)
}
