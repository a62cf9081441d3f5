mod common;

use common::plans::{check_fixtures, check_round_trip, mutation_corpus, random_valid_plan, ALL_RULES};
use deskclean::harness::{benchmark_scenario, DEFAULT_SCENARIO_COUNT};
use deskclean::plan::{parse_plan, serialize_plan};
use deskclean::planner::{scripted_strategy, ScriptedConfig};
use deskclean::scenegraph::{build_scene_graph, SceneParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn parse_inverts_serialize(seed in any::<u64>()) {
        check_round_trip(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn serialize_is_canonical_for_off_grid_numbers(seed in any::<u64>(), jitter in 0.0f64..1e-4) {
        let mut plan = random_valid_plan(&mut ChaCha8Rng::seed_from_u64(seed));
        for s in &mut plan.steps {
            if let Some(p) = &mut s.target_pose {
                p.x += jitter;
            }
            if let Some(r) = &mut s.region {
                r.x_max += jitter;
            }
        }
        let once = parse_plan(&serialize_plan(&plan)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let text = serialize_plan(&once);
        prop_assert_eq!(parse_plan(&text).unwrap(), once);
        prop_assert_eq!(serialize_plan(&parse_plan(&text).unwrap()), text);
    }
}

#[test]
fn scripted_plans_round_trip() {
    let params = SceneParams::default();
    let cfg = ScriptedConfig::default();
    for id in 0..DEFAULT_SCENARIO_COUNT {
        let scenario = benchmark_scenario(id).unwrap();
        for arms in [1, 2] {
            let world = scenario.world(arms);
            let mut rng = ChaCha8Rng::seed_from_u64(id as u64);
            let scene = build_scene_graph(&world, &params, &mut rng);
            let plan = scripted_strategy(&scene, &cfg);
            assert!(!plan.steps.is_empty());
            let text = serialize_plan(&plan);
            let back = parse_plan(&text).unwrap();
            assert_eq!(serialize_plan(&back), text);
            assert_eq!(parse_plan(&serialize_plan(&back)).unwrap(), back);
        }
    }
}

#[test]
fn mutation_corpus_is_fully_classified() {
    let corpus = mutation_corpus(1200, 0x6d75).unwrap_or_else(|e| panic!("{e}"));
    assert_eq!(corpus.rules_hit, ALL_RULES.into_iter().collect());
    assert!(corpus.rejected >= 1000, "{} rejections", corpus.rejected);
    assert!(corpus.accepted > 0);
}

#[test]
fn each_rule_has_a_fixture_breaking_only_that_rule() {
    check_fixtures().unwrap_or_else(|e| panic!("{e}"));
}
