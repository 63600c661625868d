//! Word algebra over the split alphabet `Y ∪ X ∪ {t}`.
//!
//! Words are plain letter sequences. Nothing here normalizes behind the
//! caller's back: [`Word::concat`] is the monoid product, and free reduction
//! is an explicit operation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

use thiserror::Error;

/// Which part of the alphabet a generator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorClass {
    /// Letters of the free base group `F(Y)`.
    Base,
    /// Stable letters `x_i` of the HNN-extension.
    Stable,
    /// The letter `t` of a semidirect layer on top of the extension.
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorId {
    pub class: GeneratorClass,
    /// 1-based.
    pub index: u32,
}

impl GeneratorId {
    pub const OUTER: GeneratorId = GeneratorId {
        class: GeneratorClass::Outer,
        index: 1,
    };

    pub fn base(index: u32) -> Self {
        assert!(index >= 1, "generator indices are 1-based");
        GeneratorId {
            class: GeneratorClass::Base,
            index,
        }
    }

    pub fn stable(index: u32) -> Self {
        assert!(index >= 1, "generator indices are 1-based");
        GeneratorId {
            class: GeneratorClass::Stable,
            index,
        }
    }

    pub fn is_base(self) -> bool {
        self.class == GeneratorClass::Base
    }

    /// Stable or outer: the letters that split a word into base segments.
    pub fn is_separator(self) -> bool {
        self.class != GeneratorClass::Base
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            GeneratorClass::Base => write!(f, "y{}", self.index),
            GeneratorClass::Stable => write!(f, "x{}", self.index),
            GeneratorClass::Outer => f.write_str("t"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn from_exponent(e: i64) -> Sign {
        if e < 0 {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: GeneratorId,
    pub sign: Sign,
}

impl Letter {
    pub fn new(generator: GeneratorId, sign: Sign) -> Self {
        Letter { generator, sign }
    }

    pub fn pos(generator: GeneratorId) -> Self {
        Letter::new(generator, Sign::Pos)
    }

    pub fn neg(generator: GeneratorId) -> Self {
        Letter::new(generator, Sign::Neg)
    }

    pub fn y(index: u32) -> Self {
        Letter::pos(GeneratorId::base(index))
    }

    pub fn x(index: u32) -> Self {
        Letter::pos(GeneratorId::stable(index))
    }

    pub fn t() -> Self {
        Letter::pos(GeneratorId::OUTER)
    }

    pub fn inverse(self) -> Self {
        Letter::new(self.generator, -self.sign)
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.sign != other.sign
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Pos => write!(f, "{}", self.generator),
            Sign::Neg => write!(f, "{}^-1", self.generator),
        }
    }
}

/// An element of the free monoid on signed letters.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// `g^e` spelled out as `|e|` letters.
    pub fn power(generator: GeneratorId, e: i64) -> Self {
        let l = Letter::new(generator, Sign::from_exponent(e));
        Word(vec![l; e.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Letter> {
        self.0.iter()
    }

    /// Monoid product; no cancellation at the junction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| !p[0].cancels(p[1]))
    }

    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.len());
        push_reduced(&mut out, &self.0);
        Word(out)
    }

    /// `free_reduce(b⁻¹ a b)`, i.e. `a^b`.
    pub fn conjugate(&self, by: &Word) -> Word {
        by.inverse().concat(self).concat(by).free_reduce()
    }

    /// `free_reduce(a b a⁻¹ b⁻¹)`.
    pub fn commutator(&self, other: &Word) -> Word {
        self.concat(other)
            .concat(&self.inverse())
            .concat(&other.inverse())
            .free_reduce()
    }

    pub fn exp_sum(&self, g: GeneratorId) -> i64 {
        self.0
            .iter()
            .filter(|l| l.generator == g)
            .map(|l| l.sign.value())
            .sum()
    }

    pub fn contains_generator(&self, g: GeneratorId) -> bool {
        self.0.iter().any(|l| l.generator == g)
    }

    pub fn only_base(&self) -> bool {
        self.0.iter().all(|l| l.generator.is_base())
    }

    pub fn project(&self, keep: Keep) -> Word {
        let kept: Vec<Letter> = self
            .0
            .iter()
            .copied()
            .filter(|l| keep.keeps(l.generator))
            .collect();
        let mut out = Vec::with_capacity(kept.len());
        push_reduced(&mut out, &kept);
        Word(out)
    }

    /// `π_X`: the image in `F(X)` (stable and outer letters).
    pub fn project_stable(&self) -> Word {
        self.project(Keep::StableAndOuter)
    }

    /// `π_Y`: the image in `F(Y)`.
    pub fn project_base(&self) -> Word {
        self.project(Keep::Base)
    }

    /// Sequence of stable and outer letters, in order.
    pub fn stable_signature(&self) -> Vec<Letter> {
        self.0
            .iter()
            .copied()
            .filter(|l| l.generator.is_separator())
            .collect()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }
}

/// Appends `letters` to an already reduced `out`, cancelling as it goes.
fn push_reduced(out: &mut Vec<Letter>, letters: &[Letter]) {
    for &l in letters {
        match out.last() {
            Some(&top) if top.cancels(l) => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
}

impl From<Vec<Letter>> for Word {
    fn from(letters: Vec<Letter>) -> Self {
        Word(letters)
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Letter;
    type IntoIter = std::slice::Iter<'a, Letter>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Default spelling: `y<i>`, `x<i>`, `t`, inverses as `^-1`, empty word as `1`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Base,
    StableAndOuter,
}

impl Keep {
    fn keeps(self, g: GeneratorId) -> bool {
        match self {
            Keep::Base => g.is_base(),
            Keep::StableAndOuter => g.is_separator(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("generator map has no image for {0}")]
    MissingImage(GeneratorId),
}

/// A homomorphism of free groups given by the images of generators.
///
/// Outer letters without an explicit image are fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneratorMap {
    images: BTreeMap<GeneratorId, Word>,
}

impl GeneratorMap {
    pub fn new() -> Self {
        GeneratorMap::default()
    }

    /// The identity on the given generators.
    pub fn identity<I: IntoIterator<Item = GeneratorId>>(gens: I) -> Self {
        let images = gens
            .into_iter()
            .map(|g| (g, Word::letter(Letter::pos(g))))
            .collect();
        GeneratorMap { images }
    }

    pub fn with(mut self, g: GeneratorId, image: Word) -> Self {
        self.insert(g, image);
        self
    }

    pub fn insert(&mut self, g: GeneratorId, image: Word) {
        self.images.insert(g, image);
    }

    pub fn image(&self, g: GeneratorId) -> Option<&Word> {
        self.images.get(&g)
    }

    pub fn generators(&self) -> impl Iterator<Item = GeneratorId> + '_ {
        self.images.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GeneratorId, &Word)> + '_ {
        self.images.iter().map(|(g, w)| (*g, w))
    }

    /// Substitutes images letter by letter and freely reduces.
    pub fn apply(&self, w: &Word) -> Result<Word, MapError> {
        let mut out = Vec::with_capacity(w.len());
        for &l in w {
            match self.images.get(&l.generator) {
                Some(image) => match l.sign {
                    Sign::Pos => push_reduced(&mut out, image.letters()),
                    Sign::Neg => push_reduced(&mut out, image.inverse().letters()),
                },
                None if l.generator.class == GeneratorClass::Outer => {
                    push_reduced(&mut out, &[l]);
                }
                None => return Err(MapError::MissingImage(l.generator)),
            }
        }
        Ok(Word(out))
    }

    /// The map `w ↦ self(other(w))`.
    pub fn compose_after(&self, other: &GeneratorMap) -> Result<GeneratorMap, MapError> {
        let mut images = BTreeMap::new();
        for (g, image) in &other.images {
            images.insert(*g, self.apply(image)?);
        }
        Ok(GeneratorMap { images })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(i: u32) -> Letter {
        Letter::y(i)
    }
    fn x(i: u32) -> Letter {
        Letter::x(i)
    }
    fn w(ls: &[Letter]) -> Word {
        Word::new(ls.to_vec())
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(w(&[x(1), x(1).inverse()]).free_reduce(), Word::empty());
        assert_eq!(
            w(&[y(1), y(2), y(2).inverse(), y(1)]).free_reduce(),
            w(&[y(1), y(1)])
        );
        let nested = w(&[
            y(1),
            x(1),
            y(1).inverse(),
            y(1),
            x(1).inverse(),
            y(1).inverse(),
        ]);
        assert_eq!(nested.free_reduce(), Word::empty());
    }

    #[test]
    fn concat_and_invert() {
        assert_eq!(w(&[x(1)]).concat(&w(&[y(1)])), w(&[x(1), y(1)]));
        assert_eq!(
            w(&[x(1), y(2).inverse()]).inverse(),
            w(&[y(2), x(1).inverse()])
        );
        let a = w(&[y(1), x(2), y(1)]);
        assert!(a.concat(&a.inverse()).free_reduce().is_empty());
        // concat does not reduce
        assert_eq!(a.concat(&a.inverse()).len(), 6);
    }

    #[test]
    fn conjugation_convention() {
        assert_eq!(
            w(&[y(1)]).conjugate(&w(&[x(1)])),
            w(&[x(1).inverse(), y(1), x(1)])
        );
        assert_eq!(
            w(&[x(1)]).conjugate(&w(&[y(1).inverse()])),
            w(&[y(1), x(1), y(1).inverse()])
        );
        assert_eq!(w(&[y(1)]).conjugate(&w(&[y(1)])), w(&[y(1)]));
    }

    #[test]
    fn commutator_convention() {
        let c = w(&[y(1)]).commutator(&w(&[x(1)]));
        assert_eq!(c, w(&[y(1), x(1), y(1).inverse(), x(1).inverse()]));
        // [y, x] x y = y x
        assert_eq!(c.concat(&w(&[x(1), y(1)])).free_reduce(), w(&[y(1), x(1)]));
        let a = w(&[y(2), x(1)]);
        assert!(a.commutator(&a).is_empty());
    }

    #[test]
    fn exponent_sums() {
        let word = w(&[y(1), x(1), y(2), x(1).inverse(), x(1)]);
        assert_eq!(word.exp_sum(GeneratorId::stable(1)), 1);
        assert_eq!(w(&[y(1), x(1)]).exp_sum(GeneratorId::base(2)), 0);
    }

    #[test]
    fn projections() {
        assert_eq!(w(&[y(1), x(1), y(2), x(2)]).project_stable(), w(&[x(1), x(2)]));
        let word = w(&[y(1), x(1), y(2), x(1).inverse()]);
        assert_eq!(word.project_stable(), Word::empty());
        assert_eq!(word.project_base(), w(&[y(1), y(2)]));
    }

    #[test]
    fn generator_map_application() {
        let phi = GeneratorMap::new()
            .with(GeneratorId::stable(1), w(&[y(1), x(1), y(1).inverse()]))
            .with(
                GeneratorId::base(1),
                w(&[y(1)]).concat(&w(&[x(1)]).commutator(&w(&[y(1)]))),
            );
        assert_eq!(
            phi.apply(&w(&[x(1)])).unwrap(),
            w(&[y(1), x(1), y(1).inverse()])
        );
        assert_eq!(
            phi.apply(&w(&[y(1)])).unwrap(),
            w(&[y(1), x(1), y(1), x(1).inverse(), y(1).inverse()])
        );
        // outer letters default to themselves
        assert_eq!(phi.apply(&w(&[Letter::t()])).unwrap(), w(&[Letter::t()]));
        assert_eq!(
            phi.apply(&w(&[y(2)])),
            Err(MapError::MissingImage(GeneratorId::base(2)))
        );
        let id = GeneratorMap::identity([GeneratorId::base(1), GeneratorId::stable(1)]);
        let word = w(&[y(1), x(1), x(1).inverse(), y(1)]);
        assert_eq!(id.apply(&word).unwrap(), word.free_reduce());
    }

    #[test]
    fn display_spelling() {
        assert_eq!(Word::empty().to_string(), "1");
        assert_eq!(
            w(&[y(2).inverse(), y(1), Letter::t()]).to_string(),
            "y2^-1 y1 t"
        );
    }
}
