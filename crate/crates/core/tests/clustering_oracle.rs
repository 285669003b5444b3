mod common;

use cf_synth::cluster::{cluster, ClusterConfig};
use cf_synth::column::soft_negatives;

#[test]
fn matches_straight_line_simulation() {
    assert_eq!(common::clustering_oracle_mismatches(300, 21), 0);
}

#[test]
fn pinned_cells_stay_and_iterations_are_bounded() {
    assert_eq!(common::clustering_constraint_violations(300, 22), 0);
}

#[test]
fn clustering_is_deterministic() {
    let mut r = common::rng(5);
    for _ in 0..50 {
        let (task, m) = common::random_cluster_instance(&mut r, 20, 6);
        let negs = soft_negatives(&task);
        let a = cluster(&task, &m, &negs, &ClusterConfig::default());
        let b = cluster(&task, &m, &negs, &ClusterConfig::default());
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.iterations, b.iterations);
    }
}
