mod common;

use cf_synth::column::Column;
use cf_synth::predicates::{generate_predicates, PredicateConfig};
use proptest::prelude::*;

#[test]
fn predicates_are_strict_unique_and_faithful() {
    assert_eq!(common::predicate_violations(300, 11), 0);
}

#[test]
fn constant_column_has_no_predicates() {
    let c = Column::numbers(&[4.0; 9]).unwrap();
    assert_eq!(generate_predicates(&c, &PredicateConfig::default()).n_predicates(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn numeric_columns_keep_invariants(values in prop::collection::vec(-1000i32..1000, 1..60)) {
        let c = Column::numbers(&values.iter().map(|&v| v as f64 / 4.0).collect::<Vec<_>>()).unwrap();
        let m = generate_predicates(&c, &PredicateConfig::default());
        let mut seen = std::collections::BTreeSet::new();
        for j in 0..m.n_predicates() {
            let col = m.truth_column(j);
            prop_assert!(col.count_ones() > 0 && col.count_ones() < c.len());
            prop_assert!(seen.insert(col.to_bools()));
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let c = common::random_column(&mut r, 30);
        let a = generate_predicates(&c, &PredicateConfig::default());
        let b = generate_predicates(&c, &PredicateConfig::default());
        prop_assert_eq!(a.n_predicates(), b.n_predicates());
        for j in 0..a.n_predicates() {
            prop_assert_eq!(a.predicate(j), b.predicate(j));
        }
    }
}
