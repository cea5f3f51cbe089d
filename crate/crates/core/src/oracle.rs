//! Floating-point and brute-force cross-checks, written independently of
//! the exact elimination code. Float findings are advisory; only results
//! re-verified in exact arithmetic count.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affpseudo::{AffineMap, FGAffineGroup, OpenCell, Transition, Word};
use crate::intlinalg::{DiophantineSolution, HnfResult, SnfResult, ZMatrix};
use crate::localmodel::{LocalModelInput, Presentation};
use crate::scalarfield::{Scalar, ScalarError, ScalarMatrix, SymbolTable, DEFAULT_TOLERANCE};
use crate::torusfol::LinearFoliationSpec;

#[derive(Clone, Debug)]
pub struct ShadowContext {
    pub table: SymbolTable,
    pub tolerance: f64,
    pub seed: u64,
}

impl ShadowContext {
    pub fn new(table: SymbolTable, tolerance: f64, seed: u64) -> Result<Self, ScalarError> {
        if !table.has_all_shadows() {
            let missing = table.symbols().iter().find(|s| s.shadow.is_none()).map(|s| s.name.clone());
            return Err(ScalarError::MissingShadow(missing.unwrap_or_default()));
        }
        Ok(ShadowContext { table, tolerance, seed })
    }

    /// Same symbols, with shadows drawn uniformly from `[1, 2)` by `seed`.
    pub fn seeded(table: &SymbolTable, seed: u64) -> Result<Self, ScalarError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shadows: Vec<f64> = (0..table.len()).map(|_| rng.gen_range(1.0..2.0)).collect();
        ShadowContext::new(table.with_shadows(&shadows)?, DEFAULT_TOLERANCE, seed)
    }

    pub fn eval(&self, s: &Scalar) -> Result<f64, ScalarError> {
        s.shadow_eval(&self.table)
    }

    pub fn eval_vec(&self, v: &[Scalar]) -> Result<Vec<f64>, ScalarError> {
        v.iter().map(|s| self.eval(s)).collect()
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureEstimate {
    /// Occupied boxes at `ε = 1/8, 1/16, 1/32`.
    pub counts: [usize; 3],
    pub slopes: [f64; 2],
    pub estimate: usize,
    /// Both slopes round to the same integer.
    pub stable: bool,
}

const RESOLUTIONS: [u32; 3] = [8, 16, 32];
const LEAF_TIME: f64 = 1.0e5;

/// Box-counting dimension of `{Σ tⱼ dⱼ mod 1}` for random leaf times.
pub fn closure_dim_report(
    spec: &LinearFoliationSpec,
    ctx: &ShadowContext,
    samples: usize,
) -> Result<ClosureEstimate, ScalarError> {
    let dirs: Vec<Vec<f64>> =
        spec.directions().iter().map(|d| ctx.eval_vec(d)).collect::<Result<_, _>>()?;
    let n = spec.n();
    let mut rng = ctx.rng();
    let mut boxes: [std::collections::HashSet<Vec<u32>>; 3] = Default::default();
    let mut p = vec![0.0f64; n];
    for _ in 0..samples {
        p.iter_mut().for_each(|x| *x = 0.0);
        for d in &dirs {
            let t: f64 = rng.gen_range(0.0..LEAF_TIME);
            for (x, c) in p.iter_mut().zip(d) {
                *x += t * c;
            }
        }
        for (k, &res) in RESOLUTIONS.iter().enumerate() {
            let key = p.iter().map(|x| ((x.rem_euclid(1.0) * res as f64) as u32).min(res - 1)).collect();
            boxes[k].insert(key);
        }
    }
    let counts = [boxes[0].len(), boxes[1].len(), boxes[2].len()];
    let slope = |a: usize, b: usize| (b as f64 / a as f64).log2();
    let slopes = [slope(counts[0], counts[1]), slope(counts[1], counts[2])];
    let estimate = slopes[1].round().max(0.0) as usize;
    Ok(ClosureEstimate { counts, slopes, estimate, stable: slopes[0].round() == slopes[1].round() })
}

pub fn closure_dim_estimate(
    spec: &LinearFoliationSpec,
    ctx: &ShadowContext,
    samples: usize,
) -> Result<usize, ScalarError> {
    Ok(closure_dim_report(spec, ctx, samples)?.estimate)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOrbit {
    /// Found by float search and confirmed exactly.
    Found(Word),
    /// `near_misses` counts float matches that failed exact re-verification.
    NotFound { near_misses: usize },
}

/// Breadth-first search over float images of `x`, up to word length `radius`.
pub fn orbit_bfs(
    g: &FGAffineGroup,
    x: &[Scalar],
    y: &[Scalar],
    ctx: &ShadowContext,
    radius: usize,
) -> Result<OracleOrbit, ScalarError> {
    let letters = g.letters();
    let float_maps = letters
        .iter()
        .map(|&l| {
            let m = g.letter_map(l);
            let n = m.dim();
            let a = (0..n)
                .map(|i| (0..n).map(|j| ctx.eval(m.linear().get(i, j))).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            Ok((a, ctx.eval_vec(m.translation())?))
        })
        .collect::<Result<Vec<_>, ScalarError>>()?;
    let target = ctx.eval_vec(y)?;
    let tol = ctx.tolerance;
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|v| (v / (tol * 1e3)).round() as i64).collect() };
    let close = |p: &[f64]| p.iter().zip(&target).all(|(a, b)| (a - b).abs() <= tol * (1.0 + b.abs()));
    let start = ctx.eval_vec(x)?;
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::from([(key(&start), ())]);
    let mut level = vec![(start, Word::empty())];
    let mut near_misses = 0;
    for depth in 0..=radius {
        for (p, w) in &level {
            if close(p) {
                if g.word_map(w).apply(x) == y {
                    return Ok(OracleOrbit::Found(w.clone()));
                }
                near_misses += 1;
            }
        }
        if depth == radius {
            break;
        }
        let mut next = Vec::new();
        for (p, w) in &level {
            for (&l, (a, b)) in letters.iter().zip(&float_maps) {
                let q: Vec<f64> = a
                    .iter()
                    .zip(b)
                    .map(|(row, bi)| row.iter().zip(p.iter()).map(|(r, v)| r * v).sum::<f64>() + bi)
                    .collect();
                if seen.insert(key(&q), ()).is_none() {
                    next.push((q, w.prepend(l)));
                }
            }
        }
        level = next;
    }
    Ok(OracleOrbit::NotFound { near_misses })
}

/// Rank of a float matrix by partial-pivot elimination.
pub fn float_rank(rows: &[Vec<f64>], tolerance: f64) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())) else {
            break;
        };
        if m[p][c].abs() <= tolerance * scale {
            continue;
        }
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            let f = m[i][c] / m[rank][c];
            let pivot = m[rank].clone();
            for (x, y) in m[i][c..cols].iter_mut().zip(&pivot[c..cols]) {
                *x -= f * y;
            }
        }
        rank += 1;
    }
    rank
}

pub fn shadow_rank(m: &ScalarMatrix, ctx: &ShadowContext) -> Result<usize, ScalarError> {
    let rows = m.to_rows().iter().map(|r| ctx.eval_vec(r)).collect::<Result<Vec<_>, _>>()?;
    Ok(float_rank(&rows, 1e-9))
}

// ---------------------------------------------------------------------------
// exact re-verification of integer factorizations

type Rows = Vec<Vec<BigInt>>;

fn rows_of(m: &ZMatrix) -> Rows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect()).collect()
}

fn matmul(a: &Rows, b: &Rows, inner: usize, cols: usize) -> Rows {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Determinant by Laplace expansion along the first row.
fn det(m: &Rows) -> BigInt {
    let n = m.len();
    match n {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => {
            let mut acc = BigInt::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Rows = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &m[0][j] * det(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// gcd of all `k×k` minors.
fn determinantal_divisor(m: &Rows, cols: usize, k: usize) -> BigInt {
    let mut g = BigInt::zero();
    for rs in subsets(m.len(), k) {
        for cs in subsets(cols, k) {
            let sub: Rows = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect()).collect();
            g = g.gcd(&det(&sub));
        }
    }
    g
}

fn minor_rank(m: &Rows, cols: usize) -> usize {
    (1..=m.len().min(cols)).rev().find(|&k| !determinantal_divisor(m, cols, k).is_zero()).unwrap_or(0)
}

fn is_unimodular(m: &Rows) -> bool {
    det(m).abs().is_one()
}

fn is_reduced_hnf(h: &Rows) -> bool {
    let mut last_pivot: Option<usize> = None;
    let mut seen_zero = false;
    for (i, row) in h.iter().enumerate() {
        match row.iter().position(|v| !v.is_zero()) {
            None => seen_zero = true,
            Some(c) => {
                if seen_zero || last_pivot.is_some_and(|p| c <= p) || !row[c].is_positive() {
                    return false;
                }
                for above in &h[..i] {
                    if above[c].is_negative() || above[c] >= row[c] {
                        return false;
                    }
                }
                last_pivot = Some(c);
            }
        }
    }
    true
}

fn is_smith(s: &Rows, cols: usize) -> bool {
    let mut prev: Option<BigInt> = None;
    let mut zero_seen = false;
    for (i, row) in s.iter().enumerate() {
        for (j, v) in row.iter().enumerate().take(cols) {
            if i != j && !v.is_zero() {
                return false;
            }
        }
        if i >= cols {
            continue;
        }
        let d = &row[i];
        if d.is_negative() {
            return false;
        }
        if d.is_zero() {
            zero_seen = true;
            continue;
        }
        if zero_seen || prev.as_ref().is_some_and(|p| !(d % p).is_zero()) {
            return false;
        }
        prev = Some(d.clone());
    }
    true
}

#[derive(Clone, Debug)]
pub enum MatrixClaim<'a> {
    Hnf { a: &'a ZMatrix, result: &'a HnfResult },
    Snf { a: &'a ZMatrix, result: &'a SnfResult },
    Solve { a: &'a ZMatrix, b: &'a [BigInt], solution: &'a DiophantineSolution },
}

pub fn verify_matrix_identity(claim: &MatrixClaim) -> bool {
    match claim {
        MatrixClaim::Hnf { a, result } => {
            let (ar, h, u) = (rows_of(a), rows_of(&result.h), rows_of(&result.u));
            u.len() == a.rows()
                && is_unimodular(&u)
                && matmul(&u, &ar, a.rows(), a.cols()) == h
                && is_reduced_hnf(&h)
        }
        MatrixClaim::Snf { a, result } => {
            let (ar, s, u, v) = (rows_of(a), rows_of(&result.s), rows_of(&result.u), rows_of(&result.v));
            u.len() == a.rows()
                && v.len() == a.cols()
                && is_unimodular(&u)
                && is_unimodular(&v)
                && matmul(&matmul(&u, &ar, a.rows(), a.cols()), &v, a.cols(), a.cols()) == s
                && is_smith(&s, a.cols())
        }
        MatrixClaim::Solve { a, b, solution } => {
            let ar = rows_of(a);
            let n = a.cols();
            let apply = |x: &[BigInt]| -> Vec<BigInt> {
                ar.iter().map(|row| row.iter().zip(x).fold(BigInt::zero(), |acc, (p, q)| acc + p * q)).collect()
            };
            let rank = minor_rank(&ar, n);
            // A x = b is solvable over Z iff the determinantal divisors of A
            // and [A | b] agree at the common rank
            let mut aug = ar.clone();
            for (row, bi) in aug.iter_mut().zip(b.iter()) {
                row.push(bi.clone());
            }
            let solvable = minor_rank(&aug, n + 1) == rank
                && (rank == 0 || determinantal_divisor(&ar, n, rank) == determinantal_divisor(&aug, n + 1, rank));
            match solution {
                DiophantineSolution::NoSolution { .. } => !solvable,
                DiophantineSolution::Solvable { particular, kernel_basis } => {
                    let k = kernel_basis.len();
                    particular.len() == n
                        && apply(particular) == *b
                        && kernel_basis.iter().all(|v| v.len() == n && apply(v).iter().all(Zero::is_zero))
                        && k == n - rank
                        // saturated: maximal minors of the kernel basis are coprime
                        && (k == 0 || determinantal_divisor(kernel_basis, n, k).is_one())
                }
            }
        }
    }
}

/// Small integer matrix with entries in `[-bound, bound]`.
pub fn random_zmatrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> ZMatrix {
    let data = (0..rows)
        .map(|_| (0..cols).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect())
        .collect();
    ZMatrix::from_rows(data, cols)
}

// ---------------------------------------------------------------------------
// random instances

fn small_scalar(rng: &mut ChaCha8Rng, symbols: usize) -> Scalar {
    let base = Scalar::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
    if symbols > 0 && rng.gen_bool(0.3) {
        &base + &Scalar::var(rng.gen_range(0..symbols))
    } else {
        base
    }
}

/// Invertible affine map of `ℝ^q`; the linear part is rational.
pub fn random_affine_map(rng: &mut ChaCha8Rng, q: usize, symbols: usize) -> AffineMap {
    loop {
        let rows = (0..q)
            .map(|_| (0..q).map(|_| Scalar::from_int(rng.gen_range(-2..=2))).collect())
            .collect();
        let b = (0..q).map(|_| small_scalar(rng, symbols)).collect();
        if let Ok(m) = AffineMap::new(ScalarMatrix::from_rows(rows), b) {
            return m;
        }
    }
}

/// A global transition or one restricted to a random rational box.
pub fn random_transition(rng: &mut ChaCha8Rng, q: usize, symbols: usize) -> Transition {
    let map = random_affine_map(rng, q, symbols);
    if rng.gen_bool(0.5) {
        return Transition::global(map);
    }
    let lo: Vec<Scalar> = (0..q).map(|_| Scalar::from_int(rng.gen_range(-3..=0))).collect();
    let hi: Vec<Scalar> = lo.iter().map(|l| l + &Scalar::from_int(rng.gen_range(1..=4))).collect();
    Transition { map, domain: OpenCell::open_box(&lo, &hi) }
}

fn random_int_matrix(rng: &mut ChaCha8Rng, d: usize) -> ScalarMatrix {
    loop {
        let rows = (0..d)
            .map(|_| (0..d).map(|_| Scalar::from_int(rng.gen_range(-2..=2))).collect())
            .collect();
        let m = ScalarMatrix::from_rows(rows);
        if !m.determinant().is_zero() {
            return m;
        }
    }
}

/// Valid local-model input with `r ≤ max_r`, `d ≤ max_d`, `g ≤ max_g`.
pub fn random_local_model_input(
    rng: &mut ChaCha8Rng,
    max_r: usize,
    max_d: usize,
    max_g: usize,
    symbols: usize,
) -> LocalModelInput {
    let (r, d) = loop {
        let (r, d) = (rng.gen_range(0..=max_r), rng.gen_range(0..=max_d));
        if r + d > 0 {
            break (r, d);
        }
    };
    let g = rng.gen_range(1..=max_g);
    let presentation = if rng.gen_bool(0.5) { Presentation::Free } else { Presentation::FreeAbelian };
    let psi = (0..g).map(|_| (0..r).map(|_| small_scalar(rng, symbols)).collect()).collect();
    let rho = match presentation {
        // powers of one matrix times rational scalars commute
        Presentation::FreeAbelian => {
            let base = random_int_matrix(rng, d);
            (0..g)
                .map(|_| {
                    let mut m = ScalarMatrix::identity(d);
                    for _ in 0..rng.gen_range(0..=2) {
                        m = m.mul(&base);
                    }
                    let c = Scalar::from_int(*[1, -1, 2].choose(rng).expect("nonempty"));
                    let scaled = m.to_rows().iter().map(|row| row.iter().map(|v| v * &c).collect()).collect();
                    ScalarMatrix::from_rows(scaled)
                })
                .collect()
        }
        Presentation::Free => (0..g).map(|_| random_int_matrix(rng, d)).collect(),
    };
    LocalModelInput { r, d, presentation, psi, rho: if d == 0 { Vec::new() } else { rho } }
}

/// Linearly independent directions in `ℝⁿ`, entries mixing integers and symbols.
pub fn random_foliation_spec(rng: &mut ChaCha8Rng, n: usize, symbols: usize) -> LinearFoliationSpec {
    loop {
        let p = rng.gen_range(1..n);
        let dirs = (0..p)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let c = Scalar::from_int(rng.gen_range(-2..=2));
                        if symbols > 0 && rng.gen_bool(0.4) {
                            &c * &Scalar::var(rng.gen_range(0..symbols))
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        if let Ok(spec) = LinearFoliationSpec::new(n, dirs) {
            return spec;
        }
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::intlinalg::{hnf, snf, solve_diophantine};

    fn table() -> SymbolTable {
        SymbolTable::new([("l", Some(1.41421356)), ("m", Some(1.7320508075688772))]).unwrap()
    }

    fn spec(t: &SymbolTable, n: usize, dir: &[&str]) -> LinearFoliationSpec {
        LinearFoliationSpec::new(n, vec![dir.iter().map(|x| t.parse(x).unwrap()).collect()]).unwrap()
    }

    #[test]
    fn closure_estimates() {
        let t = table();
        let ctx = ShadowContext::new(t.clone(), DEFAULT_TOLERANCE, 0).unwrap();
        assert_eq!(closure_dim_estimate(&spec(&t, 2, &["1", "l"]), &ctx, 20_000).unwrap(), 2);
        assert_eq!(closure_dim_estimate(&spec(&t, 2, &["1", "1"]), &ctx, 20_000).unwrap(), 1);
        assert_eq!(closure_dim_estimate(&spec(&t, 3, &["1", "l", "m"]), &ctx, 400_000).unwrap(), 3);
    }

    #[test]
    fn orbit_search_examples() {
        let t = table();
        let ctx = ShadowContext::new(t.clone(), DEFAULT_TOLERANCE, 0).unwrap();
        let g = FGAffineGroup::translations(1, &[vec![t.parse("1").unwrap()], vec![t.parse("l").unwrap()]])
            .unwrap();
        let zero = [Scalar::zero()];
        match orbit_bfs(&g, &zero, &[t.parse("3 + 2*l").unwrap()], &ctx, 6).unwrap() {
            OracleOrbit::Found(w) => assert_eq!(w.len(), 5),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            orbit_bfs(&g, &zero, &[Scalar::from_ratio(1, 2)], &ctx, 12).unwrap(),
            OracleOrbit::NotFound { near_misses: 0 }
        );
        assert_eq!(orbit_bfs(&g, &zero, &zero, &ctx, 0).unwrap(), OracleOrbit::Found(Word::empty()));
    }

    #[test]
    fn float_near_miss_is_not_trusted() {
        // l and 1414213/1000000 agree to within the tolerance but differ exactly
        let t = SymbolTable::new([("l", Some(1.414213))]).unwrap();
        let ctx = ShadowContext::new(t.clone(), 1e-3, 0).unwrap();
        let g = FGAffineGroup::translations(1, &[vec![t.parse("l").unwrap()]]).unwrap();
        let r = orbit_bfs(&g, &[Scalar::zero()], &[t.parse("1414213/1000000").unwrap()], &ctx, 2).unwrap();
        assert_eq!(r, OracleOrbit::NotFound { near_misses: 1 });
    }

    #[test]
    fn factorization_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..4);
            let a = random_zmatrix(&mut rng, rows, cols, 6);
            let h = hnf(&a);
            assert!(verify_matrix_identity(&MatrixClaim::Hnf { a: &a, result: &h }));
            let s = snf(&a);
            assert!(verify_matrix_identity(&MatrixClaim::Snf { a: &a, result: &s }));
            let b: Vec<BigInt> = (0..rows).map(|_| BigInt::from(rng.gen_range(-6..=6))).collect();
            let sol = solve_diophantine(&a, &b);
            assert!(verify_matrix_identity(&MatrixClaim::Solve { a: &a, b: &b, solution: &sol }));
        }
    }

    #[test]
    fn tampered_factorizations_fail() {
        let a = ZMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let mut h = hnf(&a);
        let old = h.u.get(0, 0).clone();
        h.u.set(0, 0, old + 1);
        assert!(!verify_matrix_identity(&MatrixClaim::Hnf { a: &a, result: &h }));
        let mut s = snf(&a);
        let old = s.s.get(1, 1).clone();
        s.s.set(1, 1, old * 2);
        assert!(!verify_matrix_identity(&MatrixClaim::Snf { a: &a, result: &s }));
        let b = [BigInt::from(1), BigInt::from(0)];
        let wrong = DiophantineSolution::Solvable { particular: vec![BigInt::zero(); 2], kernel_basis: vec![] };
        assert!(!verify_matrix_identity(&MatrixClaim::Solve { a: &a, b: &b, solution: &wrong }));
        let right = solve_diophantine(&a, &b);
        assert!(!right.is_solvable());
        assert!(verify_matrix_identity(&MatrixClaim::Solve { a: &a, b: &b, solution: &right }));
    }

    #[test]
    fn shadow_rank_matches_exact() {
        let t = table();
        let m = ScalarMatrix::from_rows(vec![
            vec![t.parse("1").unwrap(), t.parse("l").unwrap()],
            vec![t.parse("l").unwrap(), t.parse("l^2").unwrap()],
        ]);
        for seed in 0..10 {
            let ctx = ShadowContext::seeded(&t, seed).unwrap();
            assert_eq!(shadow_rank(&m, &ctx).unwrap(), m.rank());
        }
    }
}
