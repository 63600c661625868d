//! The string rewriting engine for HNN presentations.
//!
//! Rules are literal substring patterns. The deterministic strategy rewrites
//! the leftmost redex, breaking ties by rule kind and then rule id. Every
//! application strictly decreases the [`NuVector`] of the word, which is
//! recorded in traces so termination can be audited step by step.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::presentation::{compile_rules, HnnPresentation, PresentationError, RewriteRule, RuleKind};
use crate::words::{GeneratorId, Letter, Sign, Word};

/// Hard limit on rule applications per normalization.
pub const STEP_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rewriting did not terminate within {0} steps")]
    StepCap(usize),
}

/// Lengths of the maximal base segments between stable (or outer) letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct NuVector(pub Vec<usize>);

impl NuVector {
    pub fn of(w: &Word) -> NuVector {
        let mut coords = vec![0];
        for l in w {
            if l.generator.is_separator() {
                coords.push(0);
            } else {
                *coords.last_mut().expect("non-empty") += 1;
            }
        }
        NuVector(coords)
    }

    /// Shorter vectors are smaller; equal lengths compare at the last
    /// differing coordinate.
    pub fn less(&self, other: &NuVector) -> bool {
        match self.0.len().cmp(&other.0.len()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self
                .0
                .iter()
                .zip(&other.0)
                .rev()
                .find(|(a, b)| a != b)
                .is_some_and(|(a, b)| a < b),
        }
    }
}

impl fmt::Display for NuVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn nu(w: &Word) -> NuVector {
    NuVector::of(w)
}

pub fn nu_less(a: &NuVector, b: &NuVector) -> bool {
    a.less(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Redex {
    pub position: usize,
    pub kind: RuleKind,
    pub rule_id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub position: usize,
    pub kind: RuleKind,
    pub rule_id: usize,
    pub before: Word,
    pub after: Word,
    pub nu_before: NuVector,
    pub nu_after: NuVector,
}

impl RewriteStep {
    pub fn decreases_nu(&self) -> bool {
        self.nu_after.less(&self.nu_before)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn chains(&self) -> bool {
        self.steps.windows(2).all(|p| p[0].after == p[1].before)
    }

    pub fn nu_decreasing(&self) -> bool {
        self.steps.iter().all(RewriteStep::decreases_nu)
    }
}

/// A compiled, indexed rule list.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<RewriteRule>,
    by_first: HashMap<Letter, Vec<usize>>,
    max_lhs: usize,
}

impl RuleSet {
    pub fn new(rules: Vec<RewriteRule>) -> Self {
        let mut by_first: HashMap<Letter, Vec<usize>> = HashMap::new();
        for (id, r) in rules.iter().enumerate() {
            if let Some(first) = r.lhs.first() {
                by_first.entry(first).or_default().push(id);
            }
        }
        for ids in by_first.values_mut() {
            ids.sort_by_key(|&id| (rules[id].kind, id));
        }
        let max_lhs = rules.iter().map(|r| r.lhs.len()).max().unwrap_or(1).max(1);
        RuleSet {
            rules,
            by_first,
            max_lhs,
        }
    }

    pub fn compile(p: &HnnPresentation) -> Result<Self, PresentationError> {
        Ok(RuleSet::new(compile_rules(p)?))
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &RewriteRule {
        &self.rules[id]
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn matches_at(&self, w: &[Letter], pos: usize, id: usize) -> bool {
        w[pos..].starts_with(self.rules[id].lhs.letters())
    }

    fn first_redex_from(&self, w: &[Letter], from: usize) -> Option<Redex> {
        for pos in from..w.len() {
            if let Some(ids) = self.by_first.get(&w[pos]) {
                if let Some(&id) = ids.iter().find(|&&id| self.matches_at(w, pos, id)) {
                    return Some(Redex {
                        position: pos,
                        kind: self.rules[id].kind,
                        rule_id: id,
                    });
                }
            }
        }
        None
    }

    /// All redexes in position order, ties by kind then rule id.
    pub fn find_redexes(&self, w: &Word) -> Vec<Redex> {
        let letters = w.letters();
        let mut out = Vec::new();
        for (pos, l) in letters.iter().enumerate() {
            let Some(ids) = self.by_first.get(l) else { continue };
            for &id in ids {
                if self.matches_at(letters, pos, id) {
                    out.push(Redex {
                        position: pos,
                        kind: self.rules[id].kind,
                        rule_id: id,
                    });
                }
            }
        }
        out
    }

    fn apply(&self, w: &mut Vec<Letter>, r: Redex) {
        let rule = &self.rules[r.rule_id];
        w.splice(
            r.position..r.position + rule.lhs.len(),
            rule.rhs.letters().iter().copied(),
        );
    }

    /// The word obtained by one application of `rule_id` at `position`.
    pub fn rewrite_at(&self, w: &Word, position: usize, rule_id: usize) -> Word {
        let mut letters = w.letters().to_vec();
        self.apply(
            &mut letters,
            Redex {
                position,
                kind: self.rules[rule_id].kind,
                rule_id,
            },
        );
        Word::new(letters)
    }

    /// Normal form under the deterministic strategy, with a full trace.
    pub fn normal_form(&self, w: &Word) -> Result<(Word, RewriteTrace), RewriteError> {
        let mut letters = w.letters().to_vec();
        let mut trace = RewriteTrace::default();
        let mut from = 0;
        while let Some(r) = self.first_redex_from(&letters, from) {
            if trace.steps.len() >= STEP_CAP {
                return Err(RewriteError::StepCap(STEP_CAP));
            }
            let before = Word::new(letters.clone());
            self.apply(&mut letters, r);
            let after = Word::new(letters.clone());
            trace.steps.push(RewriteStep {
                position: r.position,
                kind: r.kind,
                rule_id: r.rule_id,
                nu_before: NuVector::of(&before),
                nu_after: NuVector::of(&after),
                before,
                after,
            });
            from = r.position.saturating_sub(self.max_lhs - 1);
        }
        Ok((Word::new(letters), trace))
    }

    /// Normal form without recording a trace.
    pub fn normalize(&self, w: &Word) -> Result<Word, RewriteError> {
        self.normalize_capped(w.letters().to_vec(), 0, STEP_CAP)
    }

    /// Normal form of `prefix · suffix` where `prefix` is already normal.
    /// Scanning starts at the junction.
    pub fn normalize_extension(&self, prefix: &Word, suffix: &Word) -> Result<Word, RewriteError> {
        let from = prefix.len().saturating_sub(self.max_lhs - 1);
        self.normalize_capped(prefix.concat(suffix).into_letters(), from, STEP_CAP)
    }

    /// `from` must be a position before which no redex starts.
    fn normalize_capped(&self, mut letters: Vec<Letter>, mut from: usize, cap: usize) -> Result<Word, RewriteError> {
        let mut steps = 0;
        while let Some(r) = self.first_redex_from(&letters, from) {
            steps += 1;
            if steps > cap {
                return Err(RewriteError::StepCap(cap));
            }
            self.apply(&mut letters, r);
            from = r.position.saturating_sub(self.max_lhs - 1);
        }
        Ok(Word::new(letters))
    }

    /// Normal form choosing a uniformly random redex at every step.
    pub fn normal_form_random<R: Rng>(&self, w: &Word, rng: &mut R) -> Result<(Word, RewriteTrace), RewriteError> {
        let mut current = w.clone();
        let mut trace = RewriteTrace::default();
        loop {
            let redexes = self.find_redexes(&current);
            let Some(&r) = redexes.choose(rng) else {
                return Ok((current, trace));
            };
            if trace.steps.len() >= STEP_CAP {
                return Err(RewriteError::StepCap(STEP_CAP));
            }
            let mut letters = current.letters().to_vec();
            self.apply(&mut letters, r);
            let after = Word::new(letters);
            trace.steps.push(RewriteStep {
                position: r.position,
                kind: r.kind,
                rule_id: r.rule_id,
                nu_before: NuVector::of(&current),
                nu_after: NuVector::of(&after),
                before: current,
                after: after.clone(),
            });
            current = after;
        }
    }

    /// Reduced and free of every rule's left side.
    pub fn is_normal(&self, w: &Word) -> bool {
        w.is_reduced() && self.first_redex_from(w.letters(), 0).is_none()
    }

    pub fn equal(&self, u: &Word, v: &Word) -> Result<bool, RewriteError> {
        Ok(self.normalize(u)? == self.normalize(v)?)
    }

    /// Every overlap or inclusion of two left sides, with both one-step reducts.
    pub fn critical_pairs(&self) -> Vec<CriticalPair> {
        let mut out = Vec::new();
        for (i, r1) in self.rules.iter().enumerate() {
            let l1 = r1.lhs.letters();
            for (j, r2) in self.rules.iter().enumerate() {
                let l2 = r2.lhs.letters();
                // proper overlaps: suffix of l1 = prefix of l2
                for k in 1..l1.len().min(l2.len()) {
                    if l1[l1.len() - k..] == l2[..k] {
                        let peak = Word::new(l1.iter().chain(&l2[k..]).copied().collect());
                        let offset = l1.len() - k;
                        out.push(self.pair(peak, i, j, offset));
                    }
                }
                // inclusions: l2 inside l1
                if l2.len() <= l1.len() {
                    for p in 0..=l1.len() - l2.len() {
                        if (i != j || p != 0) && l1[p..p + l2.len()] == *l2 {
                            out.push(self.pair(r1.lhs.clone(), i, j, p));
                        }
                    }
                }
            }
        }
        out
    }

    fn pair(&self, peak: Word, left_rule: usize, right_rule: usize, offset: usize) -> CriticalPair {
        CriticalPair {
            left: self.rewrite_at(&peak, 0, left_rule),
            right: self.rewrite_at(&peak, offset, right_rule),
            peak,
            left_rule,
            right_rule,
            offset,
        }
    }

    /// Normalizes both reducts of every critical pair.
    pub fn check_local_confluence(&self) -> ConfluenceReport {
        self.check_local_confluence_capped(STEP_CAP)
    }

    pub fn check_local_confluence_capped(&self, cap: usize) -> ConfluenceReport {
        let pairs = self.critical_pairs();
        let mut failures = Vec::new();
        for pair in &pairs {
            let left_nf = self.normalize_capped(pair.left.letters().to_vec(), 0, cap).ok();
            let right_nf = self.normalize_capped(pair.right.letters().to_vec(), 0, cap).ok();
            let joined = matches!((&left_nf, &right_nf), (Some(a), Some(b)) if a == b);
            if !joined {
                failures.push(JoinFailure {
                    pair: pair.clone(),
                    left_nf,
                    right_nf,
                });
            }
        }
        ConfluenceReport {
            pairs_checked: pairs.len(),
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPair {
    pub peak: Word,
    pub left: Word,
    pub right: Word,
    pub left_rule: usize,
    pub right_rule: usize,
    /// Where the second rule applies in `peak`; the first applies at 0.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinFailure {
    pub pair: CriticalPair,
    /// `None` when normalization hit the step cap.
    pub left_nf: Option<Word>,
    pub right_nf: Option<Word>,
}

#[derive(Debug, Clone)]
pub struct ConfluenceReport {
    pub pairs_checked: usize,
    pub failures: Vec<JoinFailure>,
}

impl ConfluenceReport {
    pub fn is_confluent(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A word of length uniform in `0..=max_len` with uniformly random signed
/// letters over `gens`. Not reduced.
pub fn random_word<R: Rng>(gens: &[GeneratorId], max_len: usize, rng: &mut R) -> Word {
    if gens.is_empty() {
        return Word::empty();
    }
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            let g = gens[rng.gen_range(0..gens.len())];
            let sign = if rng.gen::<bool>() { Sign::Pos } else { Sign::Neg };
            Letter::new(g, sign)
        })
        .collect()
}

pub const PROBE_STRATEGIES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeFailure {
    Divergent { word: Word, normal_forms: Vec<Word> },
    NuNotDecreasing { word: Word, step: usize },
    StepCap { word: Word },
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub seed: u64,
    pub trials: usize,
    pub steps_checked: u64,
    pub failures: Vec<ProbeFailure>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Normalizes random words under the deterministic strategy and
/// [`PROBE_STRATEGIES`] random ones, checking that all agree and that every
/// step decreases ν.
pub fn random_confluence_probe(
    p: &HnnPresentation,
    seed: u64,
    trials: usize,
    max_len: usize,
) -> Result<ProbeReport, PresentationError> {
    let rules = RuleSet::compile(p)?;
    let gens = p.generators();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport {
        seed,
        trials,
        steps_checked: 0,
        failures: Vec::new(),
    };
    for _ in 0..trials {
        let word = random_word(&gens, max_len, &mut rng);
        let mut forms = Vec::with_capacity(PROBE_STRATEGIES + 1);
        let mut runs = Vec::with_capacity(PROBE_STRATEGIES + 1);
        runs.push(rules.normal_form(&word));
        for _ in 0..PROBE_STRATEGIES {
            runs.push(rules.normal_form_random(&word, &mut rng));
        }
        let mut ok = true;
        for run in runs {
            match run {
                Ok((nf, trace)) => {
                    report.steps_checked += trace.len() as u64;
                    if let Some(step) = trace.steps.iter().position(|s| !s.decreases_nu()) {
                        report.failures.push(ProbeFailure::NuNotDecreasing {
                            word: word.clone(),
                            step,
                        });
                        ok = false;
                    }
                    forms.push(nf);
                }
                Err(_) => {
                    report.failures.push(ProbeFailure::StepCap { word: word.clone() });
                    ok = false;
                }
            }
        }
        if ok && forms.windows(2).any(|p| p[0] != p[1]) {
            report.failures.push(ProbeFailure::Divergent {
                word,
                normal_forms: forms,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::gn;

    fn y(i: u32) -> Letter {
        Letter::y(i)
    }
    fn x(i: u32) -> Letter {
        Letter::x(i)
    }
    fn w(ls: &[Letter]) -> Word {
        Word::new(ls.to_vec())
    }
    fn gn_rules(n: u32) -> RuleSet {
        RuleSet::compile(&gn(n).unwrap()).unwrap()
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu(&w(&[y(1), x(1), y(2), y(2), x(2)])), NuVector(vec![1, 2, 0]));
        assert_eq!(nu(&Word::empty()), NuVector(vec![0]));
        assert_eq!(nu(&w(&[x(1), x(2)])), NuVector(vec![0, 0, 0]));
    }

    #[test]
    fn nu_order_examples() {
        assert!(nu_less(&NuVector(vec![1, 2]), &NuVector(vec![1, 2, 0])));
        assert!(nu_less(&NuVector(vec![5, 0]), &NuVector(vec![0, 1])));
        assert!(!nu_less(&NuVector(vec![1, 2, 0]), &NuVector(vec![1, 2, 0])));
        assert!(!nu_less(&NuVector(vec![0, 1]), &NuVector(vec![5, 0])));
    }

    #[test]
    fn redex_search() {
        let rules = gn_rules(3);
        let found = rules.find_redexes(&w(&[x(2), y(2).inverse(), y(1)]));
        assert_eq!(found.len(), 1);
        let r = found[0];
        assert_eq!(r.position, 0);
        let rule = rules.rule(r.rule_id);
        assert_eq!(rule.kind, RuleKind::PushForward);
        assert_eq!(rule.stable, Some(GeneratorId::stable(2)));
        assert_eq!(rule.lhs.last(), Some(y(1)));

        let found = rules.find_redexes(&w(&[x(1), x(1).inverse()]));
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].kind, RuleKind::StableCancel);
    }

    #[test]
    fn redexes_ordered_by_position_then_kind() {
        // x1 y2 y2^-1: push at 0, cancel at 1
        let rules = gn_rules(3);
        let found = rules.find_redexes(&w(&[x(1), y(2), y(2).inverse()]));
        let positions: Vec<_> = found.iter().map(|r| (r.position, r.kind)).collect();
        assert_eq!(positions, vec![(0, RuleKind::PushForward), (1, RuleKind::BaseCancel)]);
    }

    #[test]
    fn normal_form_examples() {
        let rules = gn_rules(3);
        let (nf, trace) = rules.normal_form(&w(&[x(1), y(2)])).unwrap();
        assert_eq!(nf, w(&[y(2), x(1)]));
        assert_eq!(trace.len(), 1);

        let (nf, trace) = rules.normal_form(&w(&[x(2), y(2).inverse(), y(1)])).unwrap();
        assert_eq!(nf, w(&[y(2).inverse(), y(1), y(2), x(2), y(2).inverse()]));
        assert_eq!(trace.len(), 1);
        assert!(rules.is_normal(&nf));
        assert!(trace.nu_decreasing());
    }

    #[test]
    fn is_normal_examples() {
        let rules = gn_rules(3);
        assert!(rules.is_normal(&w(&[y(2).inverse(), y(1), y(2), x(2), y(2).inverse()])));
        assert!(!rules.is_normal(&w(&[x(2), y(2).inverse(), y(1)])));
        assert!(rules.is_normal(&Word::empty()));
    }

    #[test]
    fn equality_examples() {
        let rules = gn_rules(3);
        assert!(rules.equal(&w(&[x(1), y(2)]), &w(&[y(2), x(1)])).unwrap());
        assert!(!rules.equal(&w(&[x(1), y(1)]), &w(&[y(1), x(1)])).unwrap());
    }

    #[test]
    fn signature_shrinks_to_subsequence() {
        let rules = gn_rules(3);
        let word = w(&[x(2), y(2).inverse(), y(1), x(2).inverse()]);
        let nf = rules.normalize(&word).unwrap();
        assert_eq!(word.stable_signature(), vec![x(2), x(2).inverse()]);
        // y2^-1 y1 y2 x2 y2^-1 x2^-1 keeps both stable letters
        assert_eq!(nf.stable_signature(), vec![x(2), x(2).inverse()]);
        assert_eq!(w(&[y(1), x(1), y(2), x(2).inverse()]).stable_signature(), vec![x(1), x(2).inverse()]);
        assert!(w(&[y(1), y(2)]).stable_signature().is_empty());
    }

    #[test]
    fn kind1_overlap_joins_immediately() {
        let rules = gn_rules(3);
        let pairs = rules.critical_pairs();
        let peak = w(&[y(1), y(1).inverse(), y(1)]);
        let p = pairs.iter().find(|p| p.peak == peak).unwrap();
        assert_eq!(p.left, w(&[y(1)]));
        assert_eq!(p.right, w(&[y(1)]));
    }

    #[test]
    fn stable_cancel_against_push_backward() {
        // x x^-1 w^-1 y: peak from kind 2 overlapping kind 4
        let rules = gn_rules(3);
        let peak = w(&[x(2), x(2).inverse(), y(2).inverse(), y(1)]);
        let pair = rules
            .critical_pairs()
            .into_iter()
            .find(|p| p.peak == peak)
            .unwrap();
        assert_eq!(pair.left, w(&[y(2).inverse(), y(1)]));
        assert_eq!(
            pair.right,
            w(&[x(2), y(2).inverse(), y(1), y(2), x(2).inverse(), y(2).inverse()])
        );
        assert_eq!(rules.normalize(&pair.right).unwrap(), pair.left);
    }

    #[test]
    fn stable_cancel_against_push_forward() {
        let rules = gn_rules(3);
        let peak = w(&[x(2).inverse(), x(2), y(2).inverse(), y(1)]);
        let pair = rules
            .critical_pairs()
            .into_iter()
            .find(|p| p.peak == peak)
            .unwrap();
        assert_eq!(pair.left, w(&[y(2).inverse(), y(1)]));
        assert_eq!(rules.normalize(&pair.right).unwrap(), w(&[y(2).inverse(), y(1)]));
    }

    #[test]
    fn confluence_of_small_presets() {
        for n in [2, 3, 5] {
            let report = gn_rules(n).check_local_confluence();
            assert!(report.is_confluent(), "gn({n}): {:?}", report.failures.first());
            assert!(report.pairs_checked > 0);
        }
    }

    #[test]
    fn truncated_rule_breaks_confluence() {
        let mut rules = compile_rules(&gn(3).unwrap()).unwrap();
        let idx = rules.iter().position(|r| r.kind == RuleKind::PushForward).unwrap();
        let rhs = rules[idx].rhs.letters();
        rules[idx].rhs = Word::new(rhs[..rhs.len() - 1].to_vec());
        let report = RuleSet::new(rules).check_local_confluence();
        assert!(!report.is_confluent());
    }

    #[test]
    fn random_probe_small() {
        let report = random_confluence_probe(&gn(4).unwrap(), 7, 50, 20).unwrap();
        assert!(report.passed(), "{:?}", report.failures.first());
        let report = random_confluence_probe(&gn(3).unwrap(), 1, 0, 20).unwrap();
        assert!(report.passed());
        assert_eq!(report.steps_checked, 0);
    }

    #[test]
    fn random_probe_is_deterministic() {
        let p = gn(3).unwrap();
        let a = random_confluence_probe(&p, 11, 30, 15).unwrap();
        let b = random_confluence_probe(&p, 11, 30, 15).unwrap();
        assert_eq!(a.steps_checked, b.steps_checked);
    }

    #[test]
    fn extension_normalization_matches_full() {
        let rules = gn_rules(4);
        let gens = gn(4).unwrap().generators();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = rules.normalize(&random_word(&gens, 12, &mut rng)).unwrap();
            let v = random_word(&gens, 12, &mut rng);
            assert_eq!(
                rules.normalize_extension(&u, &v).unwrap(),
                rules.normalize(&u.concat(&v)).unwrap()
            );
        }
    }
}
