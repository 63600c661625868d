//! The semidirect layer `G_n ⋊ ⟨t⟩`, where `t` acts on the base HNN group
//! through an automorphism `φ`. For the pure-braid specialization `t` plays
//! the role of `x_n` and `φ` comes from [`crate::presentation::p2`].
//!
//! Elements are kept as `(g, k)` meaning `g t^k` with `g` in normal form;
//! every `t` is pushed rightward with `t^ε g = φ^{-ε}(g) t^ε`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::pingpong::{
    descends_to_identity, free_product_oracle, Certificate, Condition, GroupOracle, OracleBounds, OracleReport,
    Status, SubgroupSpec, SupportMode,
};
use crate::presentation::{p2, HnnPresentation, PresentationError, Violation};
use crate::rewrite::{RewriteError, RuleSet};
use crate::syntax::Alphabet;
use crate::words::{GeneratorClass, GeneratorId, GeneratorMap, Letter, MapError, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("invalid base presentation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidBase(Vec<Violation>),
    #[error("phi and its inverse do not compose to the identity on {0}")]
    NotMutuallyInverse(GeneratorId),
    #[error("outer letter t is not allowed here")]
    OuterLetter,
    #[error("expected {expected} words, got {got}")]
    WordCount { expected: usize, got: usize },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

#[derive(Debug, Clone)]
pub struct SemidirectExtension {
    base: HnnPresentation,
    phi: GeneratorMap,
    phi_inverse: GeneratorMap,
    rules: RuleSet,
    alphabet: Alphabet,
}

impl SemidirectExtension {
    /// Builds the extension, checking that `phi` and `phi_inverse` are
    /// mutually inverse on generators. Whether `phi` respects the base
    /// relators is left to [`verify_extension`].
    pub fn new(base: HnnPresentation, phi: GeneratorMap, phi_inverse: GeneratorMap) -> Result<Self, ExtensionError> {
        let ext = Self::new_unchecked(base, phi, phi_inverse)?;
        for g in ext.base.generators() {
            let w = Word::letter(Letter::pos(g));
            if ext.phi.apply(&ext.phi_inverse.apply(&w)?)? != w || ext.phi_inverse.apply(&ext.phi.apply(&w)?)? != w {
                return Err(ExtensionError::NotMutuallyInverse(g));
            }
        }
        Ok(ext)
    }

    /// Like [`SemidirectExtension::new`] but without the inverse check; the
    /// base presentation is still validated.
    pub fn new_unchecked(base: HnnPresentation, phi: GeneratorMap, phi_inverse: GeneratorMap) -> Result<Self, ExtensionError> {
        let rules = match RuleSet::compile(&base) {
            Ok(r) => r,
            Err(PresentationError::Invalid(v)) => return Err(ExtensionError::InvalidBase(v)),
            Err(e) => unreachable!("compile only reports invalid presentations: {e}"),
        };
        let alphabet = Alphabet::new(base.base_names().to_vec(), base.stable_names().to_vec(), Some("t".into()));
        Ok(SemidirectExtension {
            base,
            phi,
            phi_inverse,
            rules,
            alphabet,
        })
    }

    pub fn base(&self) -> &HnnPresentation {
        &self.base
    }

    /// The base alphabet plus the outer letter `t`.
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet.clone()
    }

    pub fn phi(&self) -> &GeneratorMap {
        &self.phi
    }

    pub fn phi_inverse(&self) -> &GeneratorMap {
        &self.phi_inverse
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// `φ^k(w)`, freely reduced.
    pub fn phi_power(&self, w: &Word, k: i64) -> Result<Word, ExtensionError> {
        if w.contains_generator(GeneratorId::OUTER) {
            return Err(ExtensionError::OuterLetter);
        }
        let map = if k >= 0 { &self.phi } else { &self.phi_inverse };
        let mut out = w.free_reduce();
        for _ in 0..k.unsigned_abs() {
            out = map.apply(&out)?;
        }
        Ok(out)
    }

    /// Pushes every `t` to the right: returns the freely reduced base part
    /// and the total `t`-exponent, without normalizing in the base group.
    fn push(&self, w: &Word) -> Result<Pushed, ExtensionError> {
        let mut k: i64 = 0;
        let mut images: HashMap<(Letter, i64), Word> = HashMap::new();
        let mut g = Vec::new();
        for &l in w.iter() {
            if l.generator == GeneratorId::OUTER {
                k += l.sign.value();
                continue;
            }
            let key = (l, -k);
            if let std::collections::hash_map::Entry::Vacant(e) = images.entry(key) {
                let img = self.phi_power(&Word::letter(l), -k)?;
                e.insert(img);
            }
            g.extend_from_slice(images[&key].letters());
        }
        Ok(Pushed {
            g: Word::new(g).free_reduce(),
            k,
            powers: None,
        })
    }

    /// `w = g t^k` with `g` freely reduced but not normalized.
    pub fn pushed(&self, w: &Word) -> Result<(Word, i64), ExtensionError> {
        let p = self.push(w)?;
        Ok((p.g, p.k))
    }

    pub fn semidirect_nf(&self, w: &Word) -> Result<SemidirectElement, ExtensionError> {
        let p = self.push(w)?;
        Ok(SemidirectElement {
            g: self.rules.normalize(&p.g)?,
            k: p.k,
        })
    }

    pub fn semidirect_equal(&self, u: &Word, v: &Word) -> Result<bool, ExtensionError> {
        Ok(self.semidirect_nf(u)? == self.semidirect_nf(v)?)
    }
}

/// How many powers `φ^j` of each oracle factor are precomputed.
const POWER_TABLE_RADIUS: i64 = 16;

/// Oracle element: a pushed but unnormalized word `g t^k`. Products are the
/// pushed form of the concatenated words, so the oracle judges exactly what
/// [`SemidirectExtension::semidirect_nf`] would on the spelled-out product.
#[derive(Debug, Clone)]
pub struct Pushed {
    g: Word,
    k: i64,
    /// `φ^j(g)` for `|j| ≤ POWER_TABLE_RADIUS`, kept for factors.
    powers: Option<Arc<Vec<Word>>>,
}

impl Pushed {
    fn power<'a>(&'a self, ext: &SemidirectExtension, j: i64) -> Result<std::borrow::Cow<'a, Word>, ExtensionError> {
        match &self.powers {
            Some(table) if j.abs() <= POWER_TABLE_RADIUS => Ok(std::borrow::Cow::Borrowed(&table[(j + POWER_TABLE_RADIUS) as usize])),
            _ => Ok(std::borrow::Cow::Owned(ext.phi_power(&self.g, j)?)),
        }
    }
}

impl GroupOracle for SemidirectExtension {
    type Element = Pushed;

    fn element(&self, w: &Word) -> Result<Pushed, RewriteError> {
        let mut p = self.push(w).map_err(rewrite_only)?;
        let table = (-POWER_TABLE_RADIUS..=POWER_TABLE_RADIUS)
            .map(|j| self.phi_power(&p.g, j))
            .collect::<Result<Vec<_>, _>>()
            .map_err(rewrite_only)?;
        p.powers = Some(Arc::new(table));
        Ok(p)
    }

    /// `(g, k)(h, l) = (g φ^{-k}(h), k + l)`, freely reduced only.
    fn multiply(&self, a: &Pushed, b: &Pushed) -> Result<Pushed, RewriteError> {
        let h = b.power(self, -a.k).map_err(rewrite_only)?;
        Ok(Pushed {
            g: a.g.concat(&h).free_reduce(),
            k: a.k + b.k,
            powers: None,
        })
    }

    fn is_identity(&self, e: &Pushed) -> Result<bool, RewriteError> {
        Ok(e.k == 0 && self.rules.normalize(&e.g)?.is_empty())
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
}

fn rewrite_only(e: ExtensionError) -> RewriteError {
    match e {
        ExtensionError::Rewrite(r) => r,
        // maps of a constructed extension cover every base generator
        other => panic!("semidirect arithmetic failed: {other}"),
    }
}

/// `g t^k` with `g` a normal form of the base group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemidirectElement {
    pub g: Word,
    pub k: i64,
}

impl SemidirectElement {
    pub fn identity() -> Self {
        SemidirectElement { g: Word::empty(), k: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.g.is_empty() && self.k == 0
    }

    /// The word `g t^k`.
    pub fn to_word(&self) -> Word {
        self.g.concat(&Word::power(GeneratorId::OUTER, self.k))
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        DisplayElement { e: self, alphabet }
    }
}

struct DisplayElement<'a> {
    e: &'a SemidirectElement,
    alphabet: &'a Alphabet,
}

impl fmt::Display for DisplayElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.alphabet.format(&self.e.g), self.e.k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionReport {
    pub checks: Vec<Condition>,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Condition::passed)
    }
}

/// Checks that `φ` is an automorphism of the base group that descends to the
/// identity on `F(X) × F(Y)`.
pub fn verify_extension(ext: &SemidirectExtension) -> ExtensionReport {
    let alphabet = ext.alphabet();
    let mut checks = Vec::new();

    for (name, map) in [("phi", &ext.phi), ("phi^-1", &ext.phi_inverse)] {
        let cname = format!("{name} maps every relator to 1");
        let mut cond = Condition::pass(&cname);
        for r in ext.base.relators() {
            let image = map.apply(&r).map_err(ExtensionError::from).and_then(|w| Ok(ext.rules.normalize(&w)?));
            match image {
                Ok(nf) if nf.is_empty() => {}
                Ok(nf) => {
                    cond = Condition::new(
                        &cname,
                        Status::Fail,
                        Some(format!("{name}({}) = {} != 1", alphabet.format(&r), alphabet.format(&nf))),
                    );
                    break;
                }
                Err(e) => {
                    cond = Condition::new(&cname, Status::Fail, Some(format!("{}: {e}", alphabet.format(&r))));
                    break;
                }
            }
        }
        checks.push(cond);
    }

    for (name, outer, inner) in [
        ("phi o phi^-1 = id", &ext.phi, &ext.phi_inverse),
        ("phi^-1 o phi = id", &ext.phi_inverse, &ext.phi),
    ] {
        let mut cond = Condition::pass(name);
        for g in ext.base.generators() {
            let w = Word::letter(Letter::pos(g));
            match inner.apply(&w).and_then(|u| outer.apply(&u)) {
                Ok(u) if u == w => {}
                Ok(u) => {
                    cond = Condition::new(name, Status::Fail, Some(format!("{} -> {}", alphabet.name(g), alphabet.format(&u))));
                    break;
                }
                Err(e) => {
                    cond = Condition::new(name, Status::Fail, Some(e.to_string()));
                    break;
                }
            }
        }
        checks.push(cond);
    }

    let name = "pi o phi = pi";
    checks.push(match descends_to_identity(&ext.phi, &ext.base) {
        Ok(true) => Condition::pass(name),
        Ok(false) => {
            let g = ext
                .base
                .generators()
                .into_iter()
                .find(|&g| {
                    let w = Word::letter(Letter::pos(g));
                    let img = ext.phi.image(g).cloned().unwrap_or_default();
                    img.project_stable() != w.project_stable() || img.project_base() != w.project_base()
                })
                .map(|g| alphabet.name(g));
            Condition::new(name, Status::Fail, g)
        }
        Err(e) => Condition::new(name, Status::Fail, Some(e.to_string())),
    });

    ExtensionReport { checks }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationCheck {
    /// `R1`…`R4`, `R1'`…`R4'`.
    pub family: &'static str,
    pub i: u32,
    pub j: u32,
    pub relator: Word,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BraidRelationReport {
    pub n: u32,
    pub checks: Vec<RelationCheck>,
}

impl BraidRelationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// The relator words `lhs · rhs⁻¹` of both braid relation families in the
/// generators of `p2(n)`, with `x_n` written as `t`.
pub fn braid_relators(n: u32) -> Vec<(&'static str, u32, u32, Word)> {
    let x = |i: u32| Word::letter(if i == n { Letter::t() } else { Letter::x(i) });
    let y = |i: u32| Word::letter(Letter::y(i));
    let rel = |lhs: Word, rhs: Word| lhs.concat(&rhs.inverse()).free_reduce();
    let one = Word::empty();
    let m = n - 1;
    let mut out = Vec::new();
    for i in 1..=m {
        for j in i + 1..=m {
            out.push(("R1", i, j, rel(x(i).conjugate(&y(j)), x(i))));
        }
    }
    for i in 1..=m {
        out.push(("R2", i, i, rel(x(i).conjugate(&y(i)), x(i).conjugate(&x(i).concat(&x(n)).inverse()))));
    }
    for i in 1..=m {
        for j in 1..i {
            out.push(("R3", i, j, rel(x(i).conjugate(&y(j)), x(i).conjugate(&x(n).commutator(&x(j))))));
        }
    }
    for j in 1..=m {
        out.push(("R4", n, j, rel(x(n).conjugate(&y(j)), x(n).conjugate(&x(j).inverse()))));
    }
    for i in 1..=m {
        for j in i + 1..=m {
            out.push(("R1'", i, j, rel(x(i).commutator(&y(j)), one.clone())));
        }
    }
    for i in 1..=m {
        out.push(("R2'", i, i, rel(x(i).conjugate(&x(n)), x(i).conjugate(&y(i).inverse()))));
    }
    for i in 1..=m {
        for j in 1..i {
            out.push(("R3'", i, j, rel(x(i).commutator(&y(j).conjugate(&y(i))), one.clone())));
        }
    }
    for i in 1..=m {
        out.push(("R4'", i, i, rel(y(i).conjugate(&x(n)), y(i).concat(&x(i).commutator(&y(i))))));
    }
    out
}

pub fn verify_braid_relations(n: u32) -> Result<BraidRelationReport, PresentationError> {
    let ext = p2(n)?;
    let mut checks = Vec::new();
    for (family, i, j, relator) in braid_relators(n) {
        let holds = ext.semidirect_nf(&relator).map(|e| e.is_identity()).unwrap_or(false);
        checks.push(RelationCheck {
            family,
            i,
            j,
            relator,
            holds,
        });
    }
    Ok(BraidRelationReport { n, checks })
}

/// Freeness of `⟨w_1, …, w_{n-1}, t⟩` in `G_n ⋊ ⟨t⟩`, where `n - 1` is the
/// number of stable letters: each `w_i` has nonzero exponent sum exactly in
/// `x_i` (and none in `t`), and no `w_i` commutes with `t`.
pub fn theorem3_check(ext: &SemidirectExtension, words: &[Word], mode: SupportMode) -> Result<Certificate, ExtensionError> {
    let m = ext.base.stable_rank() as usize;
    if words.len() != m {
        return Err(ExtensionError::WordCount {
            expected: m,
            got: words.len(),
        });
    }
    let alphabet = ext.alphabet();
    let xs: Vec<GeneratorId> = ext.base.stable_generators().chain([GeneratorId::OUTER]).collect();
    let mut conditions = Vec::new();
    for (idx, w) in words.iter().enumerate() {
        if let Some(l) = w.iter().find(|l| !ext.base.knows(l.generator) && l.generator != GeneratorId::OUTER) {
            return Err(ExtensionError::Map(MapError::MissingImage(l.generator)));
        }
        let i = idx as u32 + 1;
        let label = alphabet.format(w);

        let table: Vec<String> = xs.iter().map(|&g| format!("{}:{}", alphabet.name(g), w.exp_sum(g))).collect();
        let pattern_ok = xs
            .iter()
            .all(|&g| (w.exp_sum(g) != 0) == (g == GeneratorId::stable(i)));
        conditions.push(Condition::new(
            format!("exponent sums of w{i} nonzero exactly at x{i}"),
            if pattern_ok { Status::Pass } else { Status::Fail },
            Some(table.join(" ")),
        ));

        let c = ext.semidirect_nf(&w.commutator(&Word::letter(Letter::t())))?;
        conditions.push(if c.is_identity() {
            Condition::new(format!("[w{i}, t] != 1"), Status::Fail, Some(format!("[{label}, t] = 1")))
        } else {
            Condition::new(format!("[w{i}, t] != 1"), Status::Pass, Some(format!("[{label}, t] = {}", c.display(&alphabet))))
        });

        if mode == SupportMode::Strict {
            let allowed = |g: GeneratorId| g.class == GeneratorClass::Base || g == GeneratorId::stable(i);
            let stray = w.iter().find(|l| !allowed(l.generator));
            conditions.push(Condition::new(
                format!("w{i} uses only Y and x{i}"),
                if stray.is_some() { Status::Fail } else { Status::Pass },
                stray.map(|l| format!("{label} contains {}", alphabet.name(l.generator))),
            ));
        }
    }
    let names: Vec<String> = words.iter().map(|w| alphabet.format(w)).chain(["t".to_string()]).collect();
    Ok(Certificate::from_conditions(
        "braid-freeness",
        format!("<{}> is free of rank {}", names.join(", "), m + 1),
        conditions,
        mode == SupportMode::Lax,
    ))
}

/// The oracle specs `{⟨w_1⟩, …, ⟨w_{n-1}⟩, ⟨t⟩}` matching a braid
/// freeness claim.
pub fn theorem3_oracle_specs(ext: &SemidirectExtension, words: &[Word]) -> Vec<SubgroupSpec> {
    let alphabet = ext.alphabet();
    words
        .iter()
        .map(|w| SubgroupSpec::cyclic(format!("<{}>", alphabet.format(w)), w.clone()))
        .chain([SubgroupSpec::cyclic("<t>", Word::letter(Letter::t()))])
        .collect()
}

/// Bounded search for a relation in `H ∗ ⟨t⟩`.
pub fn danilevich_probe(ext: &SemidirectExtension, h_generators: &[Word], bounds: &OracleBounds) -> Result<OracleReport, ExtensionError> {
    if h_generators.iter().any(|w| w.contains_generator(GeneratorId::OUTER)) {
        return Err(ExtensionError::OuterLetter);
    }
    let specs = [
        SubgroupSpec::new("H", h_generators.to_vec(), []),
        SubgroupSpec::cyclic("<t>", Word::letter(Letter::t())),
    ];
    Ok(free_product_oracle(&specs, ext, bounds))
}
