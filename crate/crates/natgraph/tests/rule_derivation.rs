//! The derived connection rules against the written-out ones and against
//! the exact infinitesimal action.

use natgraph::rules::{derive_connection_rule, replace_connection};

#[test]
fn derived_rule_of_order_zero_matches_template() {
    let derived = derive_connection_rule(0, 4).unwrap();
    let written = replace_connection(0).unwrap();
    assert_eq!(derived.signature(), written.signature());
}

#[test]
fn derived_rule_of_order_one_matches_template() {
    let derived = derive_connection_rule(1, 6).unwrap();
    let written = replace_connection(1).unwrap();
    assert_eq!(derived.signature(), written.signature());
}

#[test]
fn derivation_below_stable_range_is_rejected() {
    assert!(derive_connection_rule(1, 5).is_err());
}

#[test]
fn derived_rules_of_higher_order_have_integer_coefficients() {
    for w in 2..=3 {
        let t = replace_connection(w).unwrap();
        assert!(t.check_boundary());
        assert!(!t.terms.is_empty());
        assert!(t.terms.iter().all(|x| x.coeff.is_integer()));
    }
}
