mod common;

use std::collections::BTreeMap;

use cf_synth::column::{Column, Task};
use cf_synth::pipeline::{is_consistent, learn, Ablation, Engine, EngineConfig};
use cf_synth::rule::Rule;
use proptest::prelude::*;

fn engine() -> Engine {
    Engine::new(EngineConfig::default()).unwrap()
}

#[test]
fn suggestions_are_consistent_ranked_and_executable() {
    let engine = engine();
    for seed in 0..200 {
        let task = common::random_task(seed);
        let out = engine.learn(&task).unwrap();
        assert!(!out.suggestions.is_empty(), "seed {seed}");
        assert!(out.suggestions.len() <= engine.config().top_k);
        // Scores within 1e-9 are ties, broken by fewer literals.
        for w in out.suggestions.windows(2) {
            let tied = (w[0].score - w[1].score).abs() <= 1e-9;
            assert!(w[0].score > w[1].score || tied, "seed {seed}");
            if tied {
                assert!(w[0].rule.literal_count() <= w[1].rule.literal_count(), "seed {seed}");
            }
        }
        for s in &out.suggestions {
            assert!(is_consistent(&s.rule, &task), "seed {seed}: {}", s.rule);
            assert_eq!(s.per_cell_formats, s.rule.execute(&task.column));
            assert_eq!(s.features.len(), s.rule.branches().len());
        }
    }
}

#[test]
fn every_ablation_stays_consistent() {
    for a in Ablation::ALL {
        let engine = Engine::new(EngineConfig::default().with_ablation(a)).unwrap();
        for seed in 500..560 {
            let task = common::random_task(seed);
            let out = engine.learn(&task).unwrap();
            assert!(out.suggestions.iter().all(|s| is_consistent(&s.rule, &task)), "{}", a.name());
        }
    }
}

#[test]
fn learning_is_deterministic() {
    let engine = engine();
    for seed in 0..30 {
        let task = common::random_task(seed);
        let a: Vec<String> = engine.learn(&task).unwrap().suggestions.iter().map(|s| s.rule.to_string()).collect();
        let b: Vec<String> = engine.learn(&task).unwrap().suggestions.iter().map(|s| s.rule.to_string()).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn no_observed_examples_is_an_error() {
    let task = Task::new(Column::numbers(&[1.0, 2.0, 3.0]).unwrap(), BTreeMap::new(), None, None).unwrap();
    assert!(learn(&task, &EngineConfig::default()).is_err());
}

#[test]
fn config_round_trips_through_toml() {
    let mut config = EngineConfig::default().with_ablation(Ablation::NegativesHard);
    config.top_k = 3;
    config.max_iter = 7;
    assert_eq!(EngineConfig::from_toml(&config.to_toml()).unwrap(), config);
    assert!(EngineConfig::from_toml("no_such_key = 1").is_err());
}

#[test]
fn invalid_config_is_rejected() {
    let config = EngineConfig { top_k: 0, ..EngineConfig::default() };
    assert!(Engine::new(config).is_err());
}

#[test]
fn simplify_preserves_execution_on_learned_rules() {
    let engine = engine();
    for seed in 0..100 {
        let task = common::random_task(seed);
        for s in engine.learn(&task).unwrap().suggestions {
            let simple = engine.simplify(&s.rule, &task.column);
            assert_eq!(simple.execute(&task.column), s.rule.execute(&task.column));
            assert!(simple.literal_count() <= s.rule.literal_count());
        }
    }
}

#[test]
fn simplify_removes_injected_redundancy() {
    let column = Column::numbers(&[1.0, 5.0, 9.0, 12.0, 20.0]).unwrap();
    let rule = Rule::parse("IF greater(c, 4) AND greater(c, 2) THEN 1").unwrap();
    let simple = engine().simplify(&rule, &column);
    assert_eq!(simple.execute(&column), rule.execute(&column));
    assert_eq!(simple.literal_count(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn observed_examples_are_always_honoured(seed in any::<u64>()) {
        let task = common::random_task(seed);
        let out = engine().learn(&task).unwrap();
        for s in &out.suggestions {
            prop_assert!(is_consistent(&s.rule, &task));
        }
    }
}
