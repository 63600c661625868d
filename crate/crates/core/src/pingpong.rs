//! Freeness certificates for collections of subgroups, and the bounded
//! brute-force oracles used to cross-check them.
//!
//! A [`Certificate`] never asserts more than its conditions establish: a
//! failed condition refutes, a missing piece of evidence leaves the verdict
//! inconclusive, and evidence that is only declared or sampled marks the
//! certificate conditional.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::presentation::{HnnPresentation, PresentationError};
use crate::rewrite::{RewriteError, RuleSet};
use crate::syntax::Alphabet;
use crate::words::{GeneratorClass, GeneratorId, GeneratorMap, MapError, Word};

/// How far in each direction `orbit` evidence searches for a generator.
pub const ORBIT_SEARCH_RADIUS: i64 = 16;

/// A group with a solvable word problem, as needed by the oracles.
pub trait GroupOracle: Sync {
    type Element: Clone + Send + Sync;

    fn element(&self, w: &Word) -> Result<Self::Element, RewriteError>;
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Result<Self::Element, RewriteError>;
    fn is_identity(&self, e: &Self::Element) -> Result<bool, RewriteError>;
    fn alphabet(&self) -> &Alphabet;
}

/// An HNN presentation together with its compiled rules.
#[derive(Debug, Clone)]
pub struct HnnGroup {
    presentation: HnnPresentation,
    rules: RuleSet,
    alphabet: Alphabet,
}

impl HnnGroup {
    pub fn new(p: &HnnPresentation) -> Result<Self, PresentationError> {
        Ok(HnnGroup {
            rules: RuleSet::compile(p)?,
            alphabet: p.alphabet(),
            presentation: p.clone(),
        })
    }

    pub fn presentation(&self) -> &HnnPresentation {
        &self.presentation
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }
}

impl GroupOracle for HnnGroup {
    type Element = Word;

    fn element(&self, w: &Word) -> Result<Word, RewriteError> {
        self.rules.normalize(w)
    }

    fn multiply(&self, a: &Word, b: &Word) -> Result<Word, RewriteError> {
        self.rules.normalize_extension(a, b)
    }

    fn is_identity(&self, e: &Word) -> Result<bool, RewriteError> {
        Ok(e.is_empty())
    }

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
}

/// Membership in `⟨Y⟩`: the normal form has no stable or outer letters.
pub fn in_base_subgroup(w: &Word, rules: &RuleSet) -> Result<bool, RewriteError> {
    Ok(rules.normalize(w)?.only_base())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupSpec {
    pub label: String,
    pub generators: Vec<Word>,
    /// The stable letters `T_t` the subgroup is allowed to use.
    pub support: BTreeSet<GeneratorId>,
}

impl SubgroupSpec {
    pub fn new(label: impl Into<String>, generators: Vec<Word>, support: impl IntoIterator<Item = GeneratorId>) -> Self {
        SubgroupSpec {
            label: label.into(),
            generators,
            support: support.into_iter().collect(),
        }
    }

    /// A cyclic subgroup `⟨w⟩` with no support; for oracle use.
    pub fn cyclic(label: impl Into<String>, w: Word) -> Self {
        SubgroupSpec::new(label, vec![w], [])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportMode {
    /// Generator words may use only base letters and the declared support.
    Strict,
    /// Containment in `⟨Y, T_t⟩` is taken on trust; certificates are conditional.
    Lax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: String,
    pub status: Status,
    pub witness: Option<String>,
}

impl Condition {
    pub fn new(name: impl Into<String>, status: Status, witness: Option<String>) -> Self {
        Condition {
            name: name.into(),
            status,
            witness,
        }
    }

    pub fn pass(name: impl Into<String>) -> Self {
        Condition::new(name, Status::Pass, None)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Refuted => 1,
            Verdict::Inconclusive => 3,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub theorem: String,
    pub claim: String,
    pub conditions: Vec<Condition>,
    /// Set when some hypothesis was declared or sampled rather than proved.
    pub conditional: bool,
    pub oracle_bounds: Option<OracleBounds>,
}

impl Certificate {
    pub fn from_conditions(theorem: &str, claim: String, conditions: Vec<Condition>, conditional: bool) -> Self {
        let verdict = if conditions.iter().any(|c| c.status == Status::Fail) {
            Verdict::Refuted
        } else if conditions.iter().any(|c| c.status == Status::Unknown) {
            Verdict::Inconclusive
        } else {
            Verdict::Certified
        };
        Certificate {
            verdict,
            theorem: theorem.to_string(),
            claim,
            conditions,
            conditional,
            oracle_bounds: None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn failed(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| c.status == Status::Fail)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}{}", self.verdict, if self.conditional { " (conditional)" } else { "" })?;
        writeln!(f, "theorem: {}", self.theorem)?;
        writeln!(f, "claim: {}", self.claim)?;
        for c in &self.conditions {
            let mark = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Unknown => "????",
            };
            write!(f, "  [{mark}] {}", c.name)?;
            if let Some(w) = &c.witness {
                write!(f, " -- {w}")?;
            }
            writeln!(f)?;
        }
        if let Some(b) = &self.oracle_bounds {
            writeln!(f, "oracle bounds: {b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PingPongError {
    #[error("projection to F(X) x F(Y) is undefined: some association has w != v")]
    ProjectionUndefined,
    #[error("map does not descend to the identity on F(X) x F(Y)")]
    NotIdentityOnProjection,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// The supports are non-empty, pairwise disjoint sets of stable letters and,
/// in strict mode, every generator uses only `Y ∪ T_t`.
pub fn support_check(specs: &[SubgroupSpec], p: &HnnPresentation, mode: SupportMode) -> Condition {
    let name = "supports are disjoint non-empty sets of stable letters";
    let alphabet = p.alphabet();
    let fail = |w: String| Condition::new(name, Status::Fail, Some(w));
    for s in specs {
        if s.support.is_empty() {
            return fail(format!("{}: empty support", s.label));
        }
        if let Some(g) = s
            .support
            .iter()
            .find(|g| g.class != GeneratorClass::Stable || !p.knows(**g))
        {
            return fail(format!("{}: {} is not a stable letter", s.label, alphabet.name(*g)));
        }
    }
    for (i, a) in specs.iter().enumerate() {
        for b in &specs[i + 1..] {
            if let Some(g) = a.support.intersection(&b.support).next() {
                return fail(format!("{} and {} share {}", a.label, b.label, alphabet.name(*g)));
            }
        }
    }
    if mode == SupportMode::Strict {
        for s in specs {
            for w in &s.generators {
                if let Some(l) = w
                    .iter()
                    .find(|l| !l.generator.is_base() && !s.support.contains(&l.generator))
                {
                    return fail(format!(
                        "{}: generator {} uses {} outside Y and its support",
                        s.label,
                        alphabet.format(w),
                        alphabet.name(l.generator)
                    ));
                }
            }
        }
    }
    Condition::pass(name)
}

/// `π∘m = π` on every generator of `p`, where `π = (π_X, π_Y)`.
pub fn descends_to_identity(m: &GeneratorMap, p: &HnnPresentation) -> Result<bool, PingPongError> {
    if !p.is_symmetric() {
        return Err(PingPongError::ProjectionUndefined);
    }
    for g in p.generators() {
        let Some(image) = m.image(g) else {
            return Err(MapError::MissingImage(g).into());
        };
        let gw = Word::letter(crate::words::Letter::pos(g));
        if image.project_stable() != gw.project_stable() || image.project_base() != gw.project_base() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For a map descending to the identity on `F(X) × F(Y)`, the subgroup
/// generated by the whole orbit `{m^k(w)}` meets `⟨Y⟩` trivially as soon as
/// `π_X(w) ≠ 1`.
pub fn orbit_intersection_certificate(m: &GeneratorMap, w: &Word, p: &HnnPresentation) -> Result<Certificate, PingPongError> {
    if !descends_to_identity(m, p)? {
        return Err(PingPongError::NotIdentityOnProjection);
    }
    let alphabet = p.alphabet();
    let px = w.project_stable();
    let cond = if px.is_empty() {
        Condition::new("pi_X(w) != 1", Status::Fail, Some(format!("pi_X({}) = 1", alphabet.format(w))))
    } else {
        Condition::new("pi_X(w) != 1", Status::Pass, Some(format!("pi_X = {}", alphabet.format(&px))))
    };
    Ok(Certificate::from_conditions(
        "orbit-avoids-base",
        format!("<m^k({}) : k in Z> meets <Y> trivially", alphabet.format(w)),
        vec![Condition::pass("map descends to the identity on F(X) x F(Y)"), cond],
        false,
    ))
}

/// Evidence that `A_t ∩ ⟨Y⟩ = 1` supplied alongside a subgroup.
#[derive(Debug, Clone)]
pub enum IntersectionEvidence {
    /// Every generator lies in the orbit of `word` under `map`.
    Orbit {
        map: GeneratorMap,
        inverse: Option<GeneratorMap>,
        word: Word,
    },
    /// Proved elsewhere; the certificate becomes conditional.
    External(String),
    /// A bounded probe result; the certificate becomes conditional.
    Probe(OracleReport),
}

fn orbit_exponent(
    target: &Word,
    map: &GeneratorMap,
    inverse: Option<&GeneratorMap>,
    word: &Word,
    rules: &RuleSet,
) -> Result<Option<i64>, PingPongError> {
    let goal = rules.normalize(target)?;
    let mut forward = word.free_reduce();
    let mut backward = forward.clone();
    for k in 0..=ORBIT_SEARCH_RADIUS {
        if k > 0 {
            forward = map.apply(&forward)?;
        }
        if rules.normalize(&forward)? == goal {
            return Ok(Some(k));
        }
        if let Some(inv) = inverse {
            if k > 0 {
                backward = inv.apply(&backward)?;
                if rules.normalize(&backward)? == goal {
                    return Ok(Some(-k));
                }
            }
        }
    }
    Ok(None)
}

fn intersection_condition(
    spec: &SubgroupSpec,
    evidence: Option<&IntersectionEvidence>,
    group: &HnnGroup,
    conditional: &mut bool,
) -> Condition {
    let name = format!("{} meets <Y> trivially", spec.label);
    let alphabet = group.alphabet();
    for g in &spec.generators {
        match group.rules.normalize(g) {
            Ok(nf) if !nf.is_empty() && nf.only_base() => {
                return Condition::new(name, Status::Fail, Some(format!("generator {} lies in <Y>", alphabet.format(g))));
            }
            Ok(_) => {}
            Err(e) => return Condition::new(name, Status::Unknown, Some(e.to_string())),
        }
    }
    match evidence {
        None => Condition::new(name, Status::Unknown, Some("no evidence supplied".into())),
        Some(IntersectionEvidence::External(why)) => {
            *conditional = true;
            Condition::new(name, Status::Pass, Some(format!("declared: {why}")))
        }
        Some(IntersectionEvidence::Probe(report)) => match report.verdict {
            OracleVerdict::Pass => {
                *conditional = true;
                Condition::new(name, Status::Pass, Some(format!("bounded probe, {} elements checked", report.checked)))
            }
            OracleVerdict::Fail => Condition::new(name, Status::Fail, report.witness.as_ref().map(|w| w.product.clone())),
            OracleVerdict::Inconclusive => Condition::new(name, Status::Unknown, report.note.clone()),
        },
        Some(IntersectionEvidence::Orbit { map, inverse, word }) => {
            let cert = match orbit_intersection_certificate(map, word, group.presentation()) {
                Ok(c) => c,
                Err(e) => return Condition::new(name, Status::Unknown, Some(e.to_string())),
            };
            if !cert.is_certified() {
                return Condition::new(
                    name,
                    Status::Unknown,
                    Some(format!("orbit evidence not applicable: pi_X({}) = 1", alphabet.format(word))),
                );
            }
            let mut exps = Vec::new();
            for g in &spec.generators {
                match orbit_exponent(g, map, inverse.as_ref(), word, &group.rules) {
                    Ok(Some(k)) => exps.push(k),
                    Ok(None) => {
                        return Condition::new(
                            name,
                            Status::Unknown,
                            Some(format!(
                                "{} not found in the orbit of {} within radius {ORBIT_SEARCH_RADIUS}",
                                alphabet.format(g),
                                alphabet.format(word)
                            )),
                        )
                    }
                    Err(e) => return Condition::new(name, Status::Unknown, Some(e.to_string())),
                }
            }
            Condition::new(
                name,
                Status::Pass,
                Some(format!("orbit of {}, exponents {:?}", alphabet.format(word), exps)),
            )
        }
    }
}

/// Ping-pong for the HNN-extension: disjoint supports plus `A_t ∩ ⟨Y⟩ = 1`
/// for every `t` give `A_1 ∗ … ∗ A_k ↪ G`.
pub fn theorem2_certificate(
    specs: &[SubgroupSpec],
    evidence: &[Option<IntersectionEvidence>],
    group: &HnnGroup,
    mode: SupportMode,
) -> Certificate {
    let mut conditional = mode == SupportMode::Lax;
    let mut conditions = vec![support_check(specs, group.presentation(), mode)];
    for (i, spec) in specs.iter().enumerate() {
        let ev = evidence.get(i).and_then(Option::as_ref);
        conditions.push(intersection_condition(spec, ev, group, &mut conditional));
    }
    let labels: Vec<&str> = specs.iter().map(|s| s.label.as_str()).collect();
    Certificate::from_conditions(
        "ping-pong",
        format!("the natural map {} -> G is injective", labels.join(" * ")),
        conditions,
        conditional,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleBounds {
    /// Maximum number of alternating factors.
    pub syllables: usize,
    /// Exponents range over `±1..=±exp_range`.
    pub exp_range: u32,
    /// Maximum generator syllables inside one factor.
    pub max_gen_word_uses: usize,
    /// Maximum number of products to test.
    pub budget: u64,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            syllables: 6,
            exp_range: 2,
            max_gen_word_uses: 2,
            budget: 50_000_000,
        }
    }
}

impl fmt::Display for OracleBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syllables <= {}, |exponent| <= {}, generator syllables per factor <= {}, budget {}",
            self.syllables, self.exp_range, self.max_gen_word_uses, self.budget
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProbeBounds {
    /// Maximum length of the reduced word in the subgroup generators.
    pub max_len: usize,
    pub budget: u64,
}

impl Default for ProbeBounds {
    fn default() -> Self {
        ProbeBounds {
            max_len: 6,
            budget: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl OracleVerdict {
    pub fn exit_code(self) -> i32 {
        match self {
            OracleVerdict::Pass => 0,
            OracleVerdict::Fail => 1,
            OracleVerdict::Inconclusive => 3,
        }
    }
}

impl fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleVerdict::Pass => "pass",
            OracleVerdict::Fail => "fail",
            OracleVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessFactor {
    pub label: String,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub factors: Vec<WitnessFactor>,
    /// The product spelled out, factors separated by ` · `.
    pub product: String,
    #[serde(skip)]
    pub words: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub verdict: OracleVerdict,
    pub checked: u64,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.verdict == OracleVerdict::Pass
    }
}

/// One building block of an enumerated product.
struct Item<E> {
    label: String,
    word: Word,
    element: E,
    weight: u64,
    class: usize,
}

type Key = (u64, Vec<usize>);

/// Enumerates sequences of items, level by level in length, testing each
/// full-length product with `is_failure`. Stops at the first level with a
/// failure and returns the minimal failing sequence by (weight, lex).
fn search<G, C, F>(
    group: &G,
    items: &[Item<G::Element>],
    compatible: C,
    is_failure: F,
    max_len: usize,
    budget: u64,
) -> OracleReport
where
    G: GroupOracle,
    C: Fn(&Item<G::Element>, &Item<G::Element>) -> bool + Sync,
    F: Fn(&G::Element) -> Result<bool, RewriteError> + Sync,
{
    let n = items.len();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| compatible(&items[i], &items[j])).collect())
        .collect();
    let mut counts: Vec<u128> = vec![1; n];
    let mut checked: u64 = 0;
    for level in 1..=max_len {
        if level > 1 {
            let mut next = vec![0u128; n];
            for i in 0..n {
                for &j in &adjacency[i] {
                    next[j] = next[j].saturating_add(counts[i]);
                }
            }
            counts = next;
        }
        let size: u128 = counts.iter().fold(0u128, |a, &c| a.saturating_add(c));
        if size == 0 {
            break;
        }
        if checked as u128 + size > budget as u128 {
            return OracleReport {
                verdict: OracleVerdict::Inconclusive,
                checked,
                witness: None,
                note: Some(format!("budget of {budget} products exhausted before length {level}")),
            };
        }
        let results: Vec<Result<Option<Key>, RewriteError>> = (0..n)
            .into_par_iter()
            .map(|first| {
                let mut best = None;
                let mut seq = vec![first];
                dfs(
                    group,
                    items,
                    &adjacency,
                    &is_failure,
                    &items[first].element,
                    items[first].weight,
                    level,
                    &mut seq,
                    &mut best,
                )?;
                Ok(best)
            })
            .collect();
        let mut best: Option<Key> = None;
        for r in results {
            match r {
                Ok(Some(k)) => {
                    if best.as_ref().is_none_or(|b| k < *b) {
                        best = Some(k);
                    }
                }
                Ok(None) => {}
                Err(e) => {
                    return OracleReport {
                        verdict: OracleVerdict::Inconclusive,
                        checked,
                        witness: None,
                        note: Some(e.to_string()),
                    }
                }
            }
        }
        checked += size as u64;
        if let Some((_, seq)) = best {
            let alphabet = group.alphabet();
            let factors: Vec<WitnessFactor> = seq
                .iter()
                .map(|&i| WitnessFactor {
                    label: items[i].label.clone(),
                    word: alphabet.format(&items[i].word),
                })
                .collect();
            let product = factors
                .iter()
                .map(|f| if seq.len() > 1 { format!("({})", f.word) } else { f.word.clone() })
                .collect::<Vec<_>>()
                .join(" · ");
            return OracleReport {
                verdict: OracleVerdict::Fail,
                checked,
                witness: Some(Witness {
                    factors,
                    product,
                    words: seq.iter().map(|&i| items[i].word.clone()).collect(),
                }),
                note: None,
            };
        }
    }
    OracleReport {
        verdict: OracleVerdict::Pass,
        checked,
        witness: None,
        note: None,
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs<G, F>(
    group: &G,
    items: &[Item<G::Element>],
    adjacency: &[Vec<usize>],
    is_failure: &F,
    prefix: &G::Element,
    weight: u64,
    level: usize,
    seq: &mut Vec<usize>,
    best: &mut Option<Key>,
) -> Result<(), RewriteError>
where
    G: GroupOracle,
    F: Fn(&G::Element) -> Result<bool, RewriteError>,
{
    if seq.len() == level {
        if is_failure(prefix)? {
            let key = (weight, seq.clone());
            if best.as_ref().is_none_or(|b| key < *b) {
                *best = Some(key);
            }
        }
        return Ok(());
    }
    let last = *seq.last().expect("non-empty");
    for &next in &adjacency[last] {
        let e = group.multiply(prefix, &items[next].element)?;
        seq.push(next);
        dfs(group, items, adjacency, is_failure, &e, weight + items[next].weight, level, seq, best)?;
        seq.pop();
    }
    Ok(())
}

/// `1, -1, 2, -2, …`
fn exponents(range: u32) -> impl Iterator<Item = i64> {
    (1..=range as i64).flat_map(|e| [e, -e])
}

fn word_power(w: &Word, e: i64) -> Word {
    let base = if e < 0 { w.inverse() } else { w.clone() };
    let mut out = Word::empty();
    for _ in 0..e.unsigned_abs() {
        out = out.concat(&base);
    }
    out
}

/// Nonempty reduced words in the generators of `spec`: at most `max_uses`
/// syllables `a_i^e`, adjacent syllables on different generators. Sorted by
/// total exponent, then syllable count, then generation order.
fn spec_factors(spec: &SubgroupSpec, bounds: &OracleBounds) -> Vec<(Word, u64)> {
    let m = spec.generators.len();
    let mut out: Vec<(usize, u64, usize, Word)> = Vec::new();
    let mut frontier: Vec<(Option<usize>, Word, u64)> = vec![(None, Word::empty(), 0)];
    for syll in 1..=bounds.max_gen_word_uses {
        let mut next = Vec::new();
        for (last, w, weight) in &frontier {
            for g in 0..m {
                if Some(g) == *last {
                    continue;
                }
                for e in exponents(bounds.exp_range) {
                    let word = w.concat(&word_power(&spec.generators[g], e));
                    let weight = weight + e.unsigned_abs();
                    out.push((out.len(), weight, syll, word.clone()));
                    next.push((Some(g), word, weight));
                }
            }
        }
        frontier = next;
    }
    out.sort_by_key(|(order, weight, syll, _)| (*weight, *syll, *order));
    out.into_iter().map(|(_, weight, _, w)| (w, weight)).collect()
}

/// Tests every alternating product `a_1 a_2 … a_r` (`r ≤ syllables`,
/// neighbours from different specs) of nonempty factors for triviality.
pub fn free_product_oracle<G: GroupOracle>(specs: &[SubgroupSpec], group: &G, bounds: &OracleBounds) -> OracleReport {
    let mut items = Vec::new();
    for (class, spec) in specs.iter().enumerate() {
        for (word, weight) in spec_factors(spec, bounds) {
            let element = match group.element(&word) {
                Ok(e) => e,
                Err(e) => {
                    return OracleReport {
                        verdict: OracleVerdict::Inconclusive,
                        checked: 0,
                        witness: None,
                        note: Some(e.to_string()),
                    }
                }
            };
            items.push(Item {
                label: spec.label.clone(),
                word,
                element,
                weight,
                class,
            });
        }
    }
    search(
        group,
        &items,
        |a, b| a.class != b.class,
        |e| group.is_identity(e),
        bounds.syllables,
        bounds.budget,
    )
}

/// Tests every nontrivial element given by a reduced word of length
/// `≤ max_len` in the generators of `spec` for membership in `⟨Y⟩`.
pub fn bounded_intersection_probe(spec: &SubgroupSpec, group: &HnnGroup, bounds: &ProbeBounds) -> OracleReport {
    let mut items = Vec::new();
    for (i, g) in spec.generators.iter().enumerate() {
        for (sign, word) in [(0, g.clone()), (1, g.inverse())] {
            let element = match group.element(&word) {
                Ok(e) => e,
                Err(e) => {
                    return OracleReport {
                        verdict: OracleVerdict::Inconclusive,
                        checked: 0,
                        witness: None,
                        note: Some(e.to_string()),
                    }
                }
            };
            items.push(Item {
                label: format!("{}{}", spec.label, if sign == 0 { "" } else { "^-1" }),
                word,
                element,
                weight: 1,
                class: 2 * i + sign,
            });
        }
    }
    search(
        group,
        &items,
        |a, b| a.class ^ 1 != b.class,
        |e: &Word| Ok(!e.is_empty() && e.only_base()),
        bounds.max_len,
        bounds.budget,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{gn, p2};
    use crate::words::Letter;

    fn y(i: u32) -> Letter {
        Letter::y(i)
    }
    fn x(i: u32) -> Letter {
        Letter::x(i)
    }
    fn w(ls: &[Letter]) -> Word {
        Word::new(ls.to_vec())
    }
    fn s(i: u32) -> GeneratorId {
        GeneratorId::stable(i)
    }

    #[test]
    fn base_membership() {
        let rules = RuleSet::compile(&gn(3).unwrap()).unwrap();
        assert!(in_base_subgroup(&w(&[y(1), x(2), x(2).inverse(), y(2)]), &rules).unwrap());
        assert!(!in_base_subgroup(&w(&[x(1)]), &rules).unwrap());
        assert!(!in_base_subgroup(&w(&[x(2), y(2).inverse(), y(1)]), &rules).unwrap());
    }

    #[test]
    fn support_checks() {
        let p = gn(3).unwrap();
        let a = SubgroupSpec::new("A1", vec![w(&[x(1)])], [s(1)]);
        let b = SubgroupSpec::new("A2", vec![w(&[x(2)])], [s(2)]);
        assert!(support_check(&[a.clone(), b], &p, SupportMode::Strict).passed());
        let c = SubgroupSpec::new("A2", vec![w(&[x(1)])], [s(1)]);
        let cond = support_check(&[a.clone(), c], &p, SupportMode::Strict);
        assert_eq!(cond.status, Status::Fail);
        assert!(cond.witness.unwrap().contains("share x1"));
        let bad = SubgroupSpec::new("A", vec![w(&[x(2), y(1)])], [s(1)]);
        assert_eq!(support_check(std::slice::from_ref(&bad), &p, SupportMode::Strict).status, Status::Fail);
        assert!(support_check(&[bad], &p, SupportMode::Lax).passed());
        let empty = SubgroupSpec::new("E", vec![], []);
        assert_eq!(support_check(&[empty], &p, SupportMode::Strict).status, Status::Fail);
    }

    #[test]
    fn descent_of_maps() {
        let ext = p2(3).unwrap();
        assert!(descends_to_identity(ext.phi(), ext.base()).unwrap());
        let p = gn(3).unwrap();
        assert!(descends_to_identity(&GeneratorMap::identity(p.generators()), &p).unwrap());
        let bent = GeneratorMap::identity(p.generators()).with(s(1), w(&[x(1), x(2)]));
        assert!(!descends_to_identity(&bent, &p).unwrap());
    }

    #[test]
    fn descent_needs_symmetric_presentation() {
        let mut p = crate::presentation::HnnPresentation::with_default_names(2, 1);
        p.add_association(
            s(1),
            crate::presentation::Association::new(GeneratorId::base(1), w(&[y(2)]), Word::empty()),
        );
        assert_eq!(
            descends_to_identity(&GeneratorMap::identity(p.generators()), &p),
            Err(PingPongError::ProjectionUndefined)
        );
    }

    #[test]
    fn orbit_certificates() {
        let ext = p2(3).unwrap();
        let cert = orbit_intersection_certificate(ext.phi(), &w(&[x(1)]), ext.base()).unwrap();
        assert!(cert.is_certified());
        let cert = orbit_intersection_certificate(ext.phi(), &w(&[y(1)]), ext.base()).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        let cert = orbit_intersection_certificate(ext.phi(), &w(&[x(1), y(2)]), ext.base()).unwrap();
        assert!(cert.is_certified());
    }

    fn orbit(ext: &crate::braid::SemidirectExtension, word: Word) -> Option<IntersectionEvidence> {
        Some(IntersectionEvidence::Orbit {
            map: ext.phi().clone(),
            inverse: Some(ext.phi_inverse().clone()),
            word,
        })
    }

    #[test]
    fn ping_pong_certificates() {
        let ext = p2(3).unwrap();
        let group = HnnGroup::new(ext.base()).unwrap();
        let a1 = SubgroupSpec::new("A1", vec![w(&[x(1)])], [s(1)]);
        let a2 = SubgroupSpec::new("A2", vec![w(&[y(1), x(2)])], [s(2)]);
        let ev = vec![orbit(&ext, w(&[x(1)])), orbit(&ext, w(&[y(1), x(2)]))];
        let cert = theorem2_certificate(&[a1.clone(), a2.clone()], &ev, &group, SupportMode::Strict);
        assert!(cert.is_certified(), "{cert}");
        assert!(!cert.conditional);

        let clash = SubgroupSpec::new("A2", vec![w(&[x(1), y(1)])], [s(1)]);
        let cert = theorem2_certificate(&[a1.clone(), clash], &ev, &group, SupportMode::Strict);
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert!(cert.failed().next().unwrap().witness.is_some());

        let cert = theorem2_certificate(&[a1.clone(), a2.clone()], &ev[..1], &group, SupportMode::Strict);
        assert_eq!(cert.verdict, Verdict::Inconclusive);

        let declared = vec![ev[0].clone(), Some(IntersectionEvidence::External("by hand".into()))];
        let cert = theorem2_certificate(&[a1, a2], &declared, &group, SupportMode::Strict);
        assert!(cert.is_certified());
        assert!(cert.conditional);
    }

    #[test]
    fn orbit_members_are_found_in_both_directions() {
        let ext = p2(3).unwrap();
        let group = HnnGroup::new(ext.base()).unwrap();
        let phi = ext.phi();
        let inv = ext.phi_inverse();
        let x1 = w(&[x(1)]);
        let gens = vec![phi.apply(&phi.apply(&x1).unwrap()).unwrap(), inv.apply(&x1).unwrap()];
        let spec = SubgroupSpec::new("A", gens, [s(1)]);
        let cert = theorem2_certificate(&[spec], &[orbit(&ext, x1)], &group, SupportMode::Strict);
        assert!(cert.is_certified(), "{cert}");
        assert!(cert.conditions[1].witness.as_ref().unwrap().contains("[2, -1]"));
    }

    #[test]
    fn generator_in_base_refutes() {
        let group = HnnGroup::new(&gn(3).unwrap()).unwrap();
        let spec = SubgroupSpec::new("A", vec![w(&[x(1), y(2), x(1).inverse()])], [s(1)]);
        let cert = theorem2_certificate(&[spec], &[Some(IntersectionEvidence::External("x".into()))], &group, SupportMode::Strict);
        assert_eq!(cert.verdict, Verdict::Refuted);
    }

    #[test]
    fn oracle_examples() {
        let group = HnnGroup::new(&gn(3).unwrap()).unwrap();
        let bounds = OracleBounds::default();
        let a1 = SubgroupSpec::new("A1", vec![w(&[x(1)])], [s(1)]);
        let a2 = SubgroupSpec::new("A2", vec![w(&[y(1), x(2)])], [s(2)]);
        let r = free_product_oracle(&[a1.clone(), a2], &group, &bounds);
        assert!(r.passed(), "{r:?}");
        assert!(r.checked > 0);

        let r = free_product_oracle(std::slice::from_ref(&a1), &group, &bounds);
        assert!(r.passed());
        assert_eq!(r.checked, 4);

        let twin = SubgroupSpec::new("B", vec![w(&[x(1)])], [s(1)]);
        let r = free_product_oracle(&[a1, twin], &group, &bounds);
        assert_eq!(r.verdict, OracleVerdict::Fail);
        let wit = r.witness.unwrap();
        assert_eq!(wit.words, vec![w(&[x(1)]), w(&[x(1).inverse()])]);
        assert_eq!(wit.product, "(x1) · (x1^-1)");
    }

    #[test]
    fn oracle_budget_is_inconclusive() {
        let group = HnnGroup::new(&gn(3).unwrap()).unwrap();
        let bounds = OracleBounds {
            budget: 10,
            ..OracleBounds::default()
        };
        let a1 = SubgroupSpec::new("A1", vec![w(&[x(1)])], [s(1)]);
        let a2 = SubgroupSpec::new("A2", vec![w(&[x(2)])], [s(2)]);
        let r = free_product_oracle(&[a1, a2], &group, &bounds);
        assert_eq!(r.verdict, OracleVerdict::Inconclusive);
    }

    #[test]
    fn probe_examples() {
        let group = HnnGroup::new(&gn(3).unwrap()).unwrap();
        let bounds = ProbeBounds::default();
        let spec = SubgroupSpec::new("A", vec![w(&[y(1), x(2)])], [s(2)]);
        assert!(bounded_intersection_probe(&spec, &group, &bounds).passed());

        let spec = SubgroupSpec::new("A", vec![w(&[y(1)])], []);
        let r = bounded_intersection_probe(&spec, &group, &bounds);
        assert_eq!(r.verdict, OracleVerdict::Fail);
        assert_eq!(r.witness.unwrap().words, vec![w(&[y(1)])]);

        let spec = SubgroupSpec::new("A", vec![Word::empty()], []);
        assert!(bounded_intersection_probe(&spec, &group, &bounds).passed());
    }

    #[test]
    fn conjugated_base_element_is_caught() {
        // x1 y2 x1^-1 = y2 in G_3
        let group = HnnGroup::new(&gn(3).unwrap()).unwrap();
        let spec = SubgroupSpec::new("A", vec![w(&[x(1)]), w(&[y(2)])], []);
        let r = bounded_intersection_probe(&spec, &group, &ProbeBounds::default());
        assert_eq!(r.verdict, OracleVerdict::Fail);
    }

    #[test]
    fn factor_enumeration_order() {
        let spec = SubgroupSpec::new("A", vec![w(&[x(1)]), w(&[x(2)])], []);
        let bounds = OracleBounds {
            exp_range: 1,
            max_gen_word_uses: 2,
            ..OracleBounds::default()
        };
        let f = spec_factors(&spec, &bounds);
        // 4 single syllables, then 4 * 2 two-syllable words
        assert_eq!(f.len(), 12);
        assert_eq!(f[0].0, w(&[x(1)]));
        assert_eq!(f[1].0, w(&[x(1).inverse()]));
        assert!(f[..4].iter().all(|(_, wt)| *wt == 1));
        assert!(f[4..].iter().all(|(_, wt)| *wt == 2));
    }
}
