use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;

use crate::scalarfield::Scalar;
use crate::torusfol::TranslationGroup;

use super::{AffineError, AffineMap};

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

/// Word in the generators; the last letter acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(generator: usize) -> Self {
        Word(vec![Letter { generator, inverse: false }])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// `self · other`, freely reduced at the seam.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn prepend(&self, l: Letter) -> Word {
        Word(vec![l]).concat(self)
    }

    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> WordDisplay<'a> {
        WordDisplay { word: self, names }
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a dyn Fn(usize) -> String,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.word.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str(&(self.names)(l.generator))?;
            if l.inverse {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |i: usize| format!("g{}", i + 1);
        self.display_with(&names).fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallElement {
    pub word: Word,
    pub map: AffineMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitVerdict {
    /// Some word of bounded length carries `x` to `y`.
    Equal { word: Word },
    /// `y - x` is the given integer combination of translation generators.
    EqualExact { coefficients: Vec<BigInt> },
    /// Decided exactly that no group element carries `x` to `y`.
    Unequal,
    NotWithinBound,
}

impl OrbitVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, OrbitVerdict::Equal { .. } | OrbitVerdict::EqualExact { .. })
    }
}

/// Group generated by finitely many affine maps of `ℝ^q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FGAffineGroup {
    dim: usize,
    generators: Vec<AffineMap>,
    inverses: Vec<AffineMap>,
}

impl FGAffineGroup {
    /// An empty generator list gives the trivial group.
    pub fn new(dim: usize, generators: Vec<AffineMap>) -> Result<Self, AffineError> {
        for g in &generators {
            if g.dim() != dim {
                return Err(AffineError::Dimension { expected: dim, found: g.dim() });
            }
        }
        let inverses = generators.iter().map(AffineMap::inverse).collect();
        Ok(FGAffineGroup { dim, generators, inverses })
    }

    pub fn translations(dim: usize, vectors: &[Vec<Scalar>]) -> Result<Self, AffineError> {
        let gens = vectors
            .iter()
            .map(|v| {
                if v.len() != dim {
                    return Err(AffineError::Dimension { expected: dim, found: v.len() });
                }
                Ok(AffineMap::translation_by(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        FGAffineGroup::new(dim, gens)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[AffineMap] {
        &self.generators
    }

    pub fn letter_map(&self, l: Letter) -> &AffineMap {
        if l.inverse {
            &self.inverses[l.generator]
        } else {
            &self.generators[l.generator]
        }
    }

    /// Generators then inverses, in generator order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.generators.len())
            .flat_map(|g| {
                [Letter { generator: g, inverse: false }, Letter { generator: g, inverse: true }]
            })
            .collect()
    }

    pub fn word_map(&self, w: &Word) -> AffineMap {
        w.0.iter().fold(AffineMap::identity(self.dim), |acc, &l| acc.compose(self.letter_map(l)))
    }

    pub fn is_translation_group(&self) -> bool {
        self.generators.iter().all(AffineMap::is_translation)
    }

    pub fn translation_group(&self) -> Option<TranslationGroup> {
        self.is_translation_group().then(|| {
            TranslationGroup::new(
                self.dim,
                self.generators.iter().map(|g| g.translation().to_vec()).collect(),
            )
        })
    }

    /// Distinct maps given by words of length at most `radius`, in
    /// breadth-first order; each carries a shortest word.
    pub fn word_ball(&self, radius: usize) -> Vec<BallElement> {
        let id = AffineMap::identity(self.dim);
        let mut seen: HashSet<AffineMap> = HashSet::from([id.clone()]);
        let mut out = vec![BallElement { word: Word::empty(), map: id }];
        let mut frontier = vec![0usize];
        let letters = self.letters();
        for _ in 0..radius {
            let mut next = Vec::new();
            for &idx in &frontier {
                for &l in &letters {
                    let m = self.letter_map(l).compose(&out[idx].map);
                    if seen.insert(m.clone()) {
                        next.push(out.len());
                        out.push(BallElement { word: out[idx].word.prepend(l), map: m });
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }

    /// Bounded search for `γ` with `γx = y`; decisive for translation groups.
    pub fn orbit_equal(&self, x: &[Scalar], y: &[Scalar], radius: usize) -> OrbitVerdict {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        assert_eq!(y.len(), self.dim, "dimension mismatch");
        if x == y {
            return OrbitVerdict::Equal { word: Word::empty() };
        }
        if let Some(tg) = self.translation_group() {
            let diff: Vec<Scalar> = y.iter().zip(x).map(|(a, b)| a - b).collect();
            return match tg.membership(&diff) {
                Some(coefficients) => OrbitVerdict::EqualExact { coefficients },
                None => OrbitVerdict::Unequal,
            };
        }
        match self.orbit_search(x, y, radius) {
            Some(word) => OrbitVerdict::Equal { word },
            None => OrbitVerdict::NotWithinBound,
        }
    }

    /// Breadth-first search over orbit points, shortest word first.
    pub fn orbit_search(&self, x: &[Scalar], y: &[Scalar], radius: usize) -> Option<Word> {
        let mut seen: HashMap<Vec<Scalar>, Word> = HashMap::from([(x.to_vec(), Word::empty())]);
        let mut queue = VecDeque::from([(x.to_vec(), 0usize)]);
        let letters = self.letters();
        while let Some((p, depth)) = queue.pop_front() {
            if p == y {
                return seen.remove(&p);
            }
            if depth == radius {
                continue;
            }
            let w = seen[&p].clone();
            for &l in &letters {
                let q = self.letter_map(l).apply(&p);
                if !seen.contains_key(&q) {
                    seen.insert(q.clone(), w.prepend(l));
                    queue.push_back((q, depth + 1));
                }
            }
        }
        None
    }

    /// Ball elements fixing `x`.
    pub fn isotropy_ball(&self, x: &[Scalar], radius: usize) -> Vec<BallElement> {
        if self.is_translation_group() {
            // a translation fixes a point only if it is trivial
            return self
                .word_ball(radius)
                .into_iter()
                .filter(|e| e.map.translation().iter().all(Scalar::is_zero))
                .collect();
        }
        self.word_ball(radius).into_iter().filter(|e| e.map.apply(x) == x).collect()
    }
}

pub fn word_ball(g: &FGAffineGroup, radius: usize) -> Vec<AffineMap> {
    g.word_ball(radius).into_iter().map(|e| e.map).collect()
}

pub fn orbit_equal(g: &FGAffineGroup, x: &[Scalar], y: &[Scalar], radius: usize) -> OrbitVerdict {
    g.orbit_equal(x, y, radius)
}

pub fn isotropy_ball(g: &FGAffineGroup, x: &[Scalar], radius: usize) -> Vec<AffineMap> {
    g.isotropy_ball(x, radius).into_iter().map(|e| e.map).collect()
}
