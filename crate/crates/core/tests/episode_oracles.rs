use deskclean::geom::Rect;
use deskclean::harness::{
    benchmark_scenario, default_matrix, run_episode, EpisodeRun, RunConfig, ScenarioFile, DEFAULT_EPISODE_SEEDS,
    DEFAULT_SCENARIO_COUNT,
};
use deskclean::plan::Primitive;
use deskclean::planner::ScriptedPlanner;
use deskclean::world::{Category, WorldState};
use rayon::prelude::*;

const T_PRIM: f64 = 20.0;

fn inside(r: &Rect, x: f64, y: f64) -> bool {
    x >= r.x_min && x <= r.x_max && y >= r.y_min && y <= r.y_max
}

fn runs(configs: &[RunConfig], seeds: &[u64]) -> Vec<(RunConfig, ScenarioFile, EpisodeRun)> {
    let scenarios: Vec<ScenarioFile> = (0..DEFAULT_SCENARIO_COUNT).map(|i| benchmark_scenario(i).unwrap()).collect();
    let cells: Vec<(&RunConfig, &ScenarioFile, u64)> = configs
        .iter()
        .flat_map(|c| scenarios.iter().flat_map(move |s| seeds.iter().map(move |&e| (c, s, e))))
        .collect();
    cells
        .into_par_iter()
        .map(|(c, s, e)| (c.clone(), s.clone(), run_episode(s, e, c, &mut ScriptedPlanner::default())))
        .collect()
}

fn valuable_done(w: &WorldState, id: deskclean::world::ObjectId) -> bool {
    w.objects.iter().find(|o| o.id == id).is_some_and(|o| {
        o.held_by.is_none() && !o.damaged && !o.off_table && inside(&w.table.tray_zone, o.pose.x, o.pose.y)
    })
}

fn region_clear(w: &WorldState, r: &Rect) -> bool {
    w.particles.iter().all(|p| {
        !inside(r, p.pose.x, p.pose.y) || inside(&w.table.collection_zone, p.pose.x, p.pose.y)
    })
}

#[test]
fn benchmark_episodes_satisfy_accounting_oracles() {
    let all = runs(&default_matrix(), &DEFAULT_EPISODE_SEEDS);
    assert_eq!(all.len(), 153);
    for (cfg, sc, run) in &all {
        let r = &run.result;
        let tag = format!("{} scenario {} seed {}", r.config, r.scenario_id, r.episode_seed);

        assert_eq!(r.planning_time, 0.25 * (1 + r.replans) as f64, "{tag}");
        assert_eq!(run.trace.charges.len() as u32, 1 + r.replans, "{tag}");
        assert!(run.trace.charges.iter().all(|&c| c == 0.25), "{tag}");
        let busy: f64 = run.trace.segments.iter().map(|s| s.end - s.origin).sum();
        assert!((r.time - busy - r.planning_time).abs() < 1e-9, "{tag}");
        assert!(r.time <= sc.spec.time_limit + T_PRIM, "{tag}: {}", r.time);
        if !cfg.reflective {
            assert_eq!(r.replans, 0, "{tag}");
        }

        assert_eq!(r.failures as usize, run.trace.failures.len(), "{tag}");
        let failure_lines = run.trace.lines.iter().filter(|l| l.contains(" failure step=")).count();
        assert_eq!(failure_lines, run.trace.failures.len(), "{tag}");
        let recovered = run
            .trace
            .failures
            .iter()
            .filter(|e| {
                e.reflected
                    && match e.step.primitive {
                        Primitive::Pick | Primitive::Place => {
                            e.step.targets.iter().all(|&id| valuable_done(&run.world, id))
                        }
                        Primitive::Wipe | Primitive::Consolidate => {
                            e.step.region.as_ref().is_none_or(|reg| region_clear(&run.world, reg))
                        }
                        Primitive::Inspect => true,
                    }
            })
            .count() as u32;
        assert_eq!(r.recovered, recovered, "{tag}");
        assert!(r.recovered <= r.failures, "{tag}");

        let w = &run.world;
        let in_tray = w
            .objects
            .iter()
            .filter(|o| matches!(o.category, Category::Rigid | Category::Fragile))
            .all(|o| o.held_by.is_none() && inside(&w.table.tray_zone, o.pose.x, o.pose.y));
        let collected = w
            .particles
            .iter()
            .filter(|p| inside(&w.table.collection_zone, p.pose.x, p.pose.y))
            .count();
        let fraction = if w.particles.is_empty() { 1.0 } else { collected as f64 / w.particles.len() as f64 };
        let intact = w.objects.iter().all(|o| !o.damaged && !(o.category == Category::Fragile && o.off_table));
        assert_eq!(r.verdict.valuables_in_tray, in_tray, "{tag}");
        assert_eq!(r.verdict.debris_collected, fraction >= cfg.debris_threshold, "{tag}");
        assert_eq!(r.verdict.nothing_damaged, intact, "{tag}");
        assert_eq!(r.success, in_tray && fraction >= cfg.debris_threshold && intact, "{tag}");
        assert_eq!(r.success, r.abort_reason.is_none(), "{tag}");

        let last = run.trace.lines.last().unwrap();
        assert!(last.contains(&format!("end success={}", r.success)), "{tag}: {last}");
    }
}

#[test]
fn failure_free_dual_arm_episodes_all_succeed() {
    let all = runs(&[RunConfig::failure_free("scripted+dual", 2)], &DEFAULT_EPISODE_SEEDS);
    assert_eq!(all.len(), 51);
    for (_, _, run) in &all {
        let r = &run.result;
        assert!(r.success, "scenario {} seed {}: {:?}", r.scenario_id, r.episode_seed, r.abort_reason);
        assert_eq!((r.failures, r.replans), (0, 0));
        assert_eq!(r.planning_time, 0.25);
    }
}

#[test]
fn episodes_are_reproducible() {
    let cfg = RunConfig::benchmark("reflective+dual", true, 2);
    let sc = benchmark_scenario(7).unwrap();
    let a = run_episode(&sc, 3, &cfg, &mut ScriptedPlanner::default());
    let b = run_episode(&sc, 3, &cfg, &mut ScriptedPlanner::default());
    assert_eq!(a.trace.to_text(), b.trace.to_text());
    assert_eq!(a.result, b.result);
    let c = run_episode(&sc, 4, &cfg, &mut ScriptedPlanner::default());
    assert_ne!(a.trace.to_text(), c.trace.to_text());
}
