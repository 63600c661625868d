//! Multiple HNN-extensions of a free group by basis-conjugating embeddings.
//!
//! A presentation lists base generators `Y`, stable generators `X` and, for
//! every stable letter `x`, a list of associations `(y, w, v)` standing for
//! the relation `(y^w)^x = y^v`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::braid::{ExtensionError, SemidirectExtension};
use crate::syntax::Alphabet;
use crate::words::{GeneratorClass, GeneratorId, GeneratorMap, Letter, Sign, Word};

/// One basis-conjugating pair `y ↦ y^w`, `y ↦ y^v` attached to a stable letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub y: GeneratorId,
    pub w: Word,
    pub v: Word,
}

impl Association {
    pub fn new(y: GeneratorId, w: Word, v: Word) -> Self {
        Association { y, w, v }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnnPresentation {
    base_names: Vec<String>,
    stable_names: Vec<String>,
    assoc: BTreeMap<GeneratorId, Vec<Association>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conjugator {
    W,
    V,
}

impl fmt::Display for Conjugator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conjugator::W => "w",
            Conjugator::V => "v",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownGenerator(GeneratorId),
    NotStable(GeneratorId),
    AssociatedNotBase { stable: GeneratorId, y: GeneratorId },
    DuplicateAssociation { stable: GeneratorId, y: GeneratorId },
    ConjugatorNotInBase { stable: GeneratorId, y: GeneratorId, which: Conjugator },
    UnreducedConjugator { stable: GeneratorId, y: GeneratorId, which: Conjugator },
    ConjugatorStartsWithGenerator { stable: GeneratorId, y: GeneratorId, which: Conjugator },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownGenerator(g) => write!(f, "unknown generator {g}"),
            Violation::NotStable(g) => write!(f, "{g} is not a stable generator"),
            Violation::AssociatedNotBase { stable, y } => {
                write!(f, "{stable}: associated generator {y} is not a base generator")
            }
            Violation::DuplicateAssociation { stable, y } => {
                write!(f, "{stable}: {y} is associated more than once")
            }
            Violation::ConjugatorNotInBase { stable, y, which } => {
                write!(f, "{stable}, {y}: conjugator {which} not in F(Y)")
            }
            Violation::UnreducedConjugator { stable, y, which } => {
                write!(f, "{stable}, {y}: conjugator {which} is not freely reduced")
            }
            Violation::ConjugatorStartsWithGenerator { stable, y, which } => {
                write!(f, "{stable}, {y}: {which} begins with y^{{±1}}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("invalid presentation: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("preset needs n >= 2, got {0}")]
    PresetTooSmall(u32),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

fn join_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl HnnPresentation {
    pub fn new(base_names: Vec<String>, stable_names: Vec<String>) -> Self {
        HnnPresentation {
            base_names,
            stable_names,
            assoc: BTreeMap::new(),
        }
    }

    /// Names `y1..y<base>` and `x1..x<stable>`.
    pub fn with_default_names(base: u32, stable: u32) -> Self {
        HnnPresentation::new(
            (1..=base).map(|i| format!("y{i}")).collect(),
            (1..=stable).map(|i| format!("x{i}")).collect(),
        )
    }

    pub fn add_association(&mut self, stable: GeneratorId, a: Association) {
        self.assoc.entry(stable).or_default().push(a);
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn stable_names(&self) -> &[String] {
        &self.stable_names
    }

    pub fn base_rank(&self) -> u32 {
        self.base_names.len() as u32
    }

    pub fn stable_rank(&self) -> u32 {
        self.stable_names.len() as u32
    }

    pub fn base_generators(&self) -> impl Iterator<Item = GeneratorId> {
        (1..=self.base_rank()).map(GeneratorId::base)
    }

    pub fn stable_generators(&self) -> impl Iterator<Item = GeneratorId> {
        (1..=self.stable_rank()).map(GeneratorId::stable)
    }

    /// Base then stable generators.
    pub fn generators(&self) -> Vec<GeneratorId> {
        self.base_generators().chain(self.stable_generators()).collect()
    }

    pub fn associations(&self, stable: GeneratorId) -> &[Association] {
        self.assoc.get(&stable).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_associations(&self) -> impl Iterator<Item = (GeneratorId, &Association)> {
        self.assoc
            .iter()
            .flat_map(|(s, list)| list.iter().map(move |a| (*s, a)))
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.base_names.clone(), self.stable_names.clone(), None)
    }

    pub fn knows(&self, g: GeneratorId) -> bool {
        match g.class {
            GeneratorClass::Base => g.index >= 1 && g.index <= self.base_rank(),
            GeneratorClass::Stable => g.index >= 1 && g.index <= self.stable_rank(),
            GeneratorClass::Outer => false,
        }
    }

    /// `φ_i = ψ_i` for every stable letter, so the projection onto
    /// `F(X) × F(Y)` is defined.
    pub fn is_symmetric(&self) -> bool {
        self.all_associations()
            .all(|(_, a)| a.w.free_reduce() == a.v.free_reduce())
    }

    /// The defining relators `x⁻¹ w⁻¹ y w x · v⁻¹ y⁻¹ v`, one per association.
    pub fn relators(&self) -> Vec<Word> {
        self.all_associations()
            .map(|(s, a)| {
                let y = Word::letter(Letter::pos(a.y));
                let lhs = y.conjugate(&a.w).conjugate(&Word::letter(Letter::pos(s)));
                let rhs = y.conjugate(&a.v);
                lhs.concat(&rhs.inverse()).free_reduce()
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for (&stable, list) in &self.assoc {
            if stable.class != GeneratorClass::Stable {
                out.push(Violation::NotStable(stable));
                continue;
            }
            if !self.knows(stable) {
                out.push(Violation::UnknownGenerator(stable));
            }
            let mut seen = BTreeSet::new();
            for a in list {
                if !a.y.is_base() {
                    out.push(Violation::AssociatedNotBase { stable, y: a.y });
                } else if !self.knows(a.y) {
                    out.push(Violation::UnknownGenerator(a.y));
                }
                if !seen.insert(a.y) {
                    out.push(Violation::DuplicateAssociation { stable, y: a.y });
                }
                for (which, c) in [(Conjugator::W, &a.w), (Conjugator::V, &a.v)] {
                    for l in c {
                        if l.generator.is_base() && !self.knows(l.generator) {
                            out.push(Violation::UnknownGenerator(l.generator));
                        }
                    }
                    if !c.only_base() {
                        out.push(Violation::ConjugatorNotInBase { stable, y: a.y, which });
                    }
                    if !c.is_reduced() {
                        out.push(Violation::UnreducedConjugator { stable, y: a.y, which });
                    }
                    if c.first().is_some_and(|l| l.generator == a.y) {
                        out.push(Violation::ConjugatorStartsWithGenerator {
                            stable,
                            y: a.y,
                            which,
                        });
                    }
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    /// `y^ε y^-ε → 1`
    BaseCancel = 1,
    /// `x^ε x^-ε → 1`
    StableCancel = 2,
    /// `x v⁻¹ y^ε → w⁻¹ y^ε w x v⁻¹`
    PushForward = 3,
    /// `x⁻¹ w⁻¹ y^ε → v⁻¹ y^ε v x⁻¹ w⁻¹`
    PushBackward = 4,
}

impl RuleKind {
    pub fn number(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub kind: RuleKind,
    pub lhs: Word,
    pub rhs: Word,
    pub stable: Option<GeneratorId>,
    pub assoc_index: Option<usize>,
}

impl RewriteRule {
    pub fn cancellation(l: Letter) -> Self {
        let kind = if l.generator.is_base() {
            RuleKind::BaseCancel
        } else {
            RuleKind::StableCancel
        };
        RewriteRule {
            kind,
            lhs: Word::new(vec![l, l.inverse()]),
            rhs: Word::empty(),
            stable: None,
            assoc_index: None,
        }
    }
}

/// Emits the full rule list: base cancellations, stable cancellations, then
/// all forward pushes, then all backward pushes.
pub fn compile_rules(p: &HnnPresentation) -> Result<Vec<RewriteRule>, PresentationError> {
    p.validate().map_err(PresentationError::Invalid)?;
    let mut rules = Vec::new();
    for g in p.base_generators().chain(p.stable_generators()) {
        for sign in [Sign::Pos, Sign::Neg] {
            rules.push(RewriteRule::cancellation(Letter::new(g, sign)));
        }
    }
    for kind in [RuleKind::PushForward, RuleKind::PushBackward] {
        for x in p.stable_generators() {
            for (j, a) in p.associations(x).iter().enumerate() {
                for sign in [Sign::Pos, Sign::Neg] {
                    rules.push(push_rule(kind, x, j, a, sign));
                }
            }
        }
    }
    Ok(rules)
}

fn push_rule(kind: RuleKind, x: GeneratorId, j: usize, a: &Association, sign: Sign) -> RewriteRule {
    let ye = Word::letter(Letter::new(a.y, sign));
    let w_inv = a.w.inverse();
    let v_inv = a.v.inverse();
    let (stable_letter, pattern_conj, rhs_outer, rhs_inner) = match kind {
        RuleKind::PushForward => (Letter::pos(x), &v_inv, &a.w, &v_inv),
        RuleKind::PushBackward => (Letter::neg(x), &w_inv, &a.v, &w_inv),
        _ => unreachable!("cancellation rules are built separately"),
    };
    let sx = Word::letter(stable_letter);
    let lhs = sx.concat(pattern_conj).concat(&ye);
    let rhs = rhs_outer
        .inverse()
        .concat(&ye)
        .concat(rhs_outer)
        .concat(&sx)
        .concat(rhs_inner);
    RewriteRule {
        kind,
        lhs,
        rhs,
        stable: Some(x),
        assoc_index: Some(j),
    }
}

/// `G_n`: `x_i` commutes with `y_j` for `j > i` and with `y_j^{y_i}` for `j < i`.
pub fn gn(n: u32) -> Result<HnnPresentation, PresentationError> {
    if n < 2 {
        return Err(PresentationError::PresetTooSmall(n));
    }
    let m = n - 1;
    let mut p = HnnPresentation::with_default_names(m, m);
    for i in 1..=m {
        for j in (1..=m).filter(|&j| j != i) {
            let conj = if j > i {
                Word::empty()
            } else {
                Word::letter(Letter::y(i))
            };
            p.add_association(
                GeneratorId::stable(i),
                Association::new(GeneratorId::base(j), conj.clone(), conj),
            );
        }
    }
    Ok(p)
}

/// `P⁽²⁾_{n+1} = G_n ⋊ ⟨t⟩` with `t = x_n` acting by
/// `x_i ↦ y_i x_i y_i⁻¹`, `y_i ↦ y_i x_i y_i x_i⁻¹ y_i⁻¹`.
pub fn p2(n: u32) -> Result<SemidirectExtension, PresentationError> {
    let base = gn(n)?;
    let mut phi = GeneratorMap::new();
    let mut phi_inv = GeneratorMap::new();
    for i in 1..=n - 1 {
        let (x, y) = (Letter::x(i), Letter::y(i));
        let (xi, yi) = (x.inverse(), y.inverse());
        phi.insert(x.generator, Word::new(vec![y, x, yi]));
        phi.insert(y.generator, Word::new(vec![y, x, y, xi, yi]));
        phi_inv.insert(y.generator, Word::new(vec![xi, y, x]));
        phi_inv.insert(x.generator, Word::new(vec![xi, yi, x, y, x]));
    }
    Ok(SemidirectExtension::new(base, phi, phi_inv)?)
}
