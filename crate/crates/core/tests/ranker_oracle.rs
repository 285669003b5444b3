mod common;

#[test]
fn best_first_top1_equals_exhaustive() {
    let (checked, bad) = common::ranker_oracle_mismatches(500, 41);
    assert_eq!(checked, 500);
    assert_eq!(bad, 0);
}

#[test]
fn gradient_matches_finite_differences() {
    let err = common::gradient_max_relative_error(20, 42);
    assert!(err < 1e-5, "max relative error {err}");
}
