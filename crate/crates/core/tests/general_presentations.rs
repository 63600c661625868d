use hnn_core::rewrite::RuleSet;
use hnn_core::parse_presentation;

fn load(src: &str) -> (hnn_core::HnnPresentation, RuleSet) {
    let p = parse_presentation(src).unwrap().presentation().clone();
    let rules = RuleSet::compile(&p).unwrap();
    (p, rules)
}

#[test]
fn general_presentation_is_confluent() {
    let (p, rules) = load(include_str!("../../../presentations/general.hnn"));
    assert!(!p.is_symmetric());
    let report = rules.check_local_confluence();
    assert!(report.is_confluent(), "{:?}", report.failures.first());
    assert!(report.pairs_checked > 0);
}

#[test]
fn nested_push_rules_are_not_confluent() {
    let (p, rules) = load(include_str!("../../../presentations/nested.hnn"));
    let report = rules.check_local_confluence();
    assert!(!report.is_confluent());
    // x^-1 y2 x = y1 y2 y1^-1 and [x, y1] = 1 give y1 x y2 = y2 y1 x, yet both are irreducible
    let a = p.alphabet();
    let u = a.parse_word("y1 x y2").unwrap();
    let v = a.parse_word("y2 y1 x").unwrap();
    assert!(rules.is_normal(&u) && rules.is_normal(&v));
    assert_ne!(u, v);
}
