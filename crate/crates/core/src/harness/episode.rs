use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coordination::{assign_arms, build_timeline};
use crate::plan::{remaining_goals, validate_plan, Plan, PlanStep, Primitive, ValidationErrors};
use crate::planner::{FailureReport, MemoryBuffer, MemoryEntry, Planner, PlannerError, ReflectionContext, TASK_SPEC};
use crate::scenegraph::{build_scene_graph, serialize_scene, SceneGraph};
use crate::world::{evaluate_success, execute_primitive, FailureKind, ObjectId, StepOutcome, SuccessVerdict, WorldState};

use super::config::RunConfig;
use super::recovery::{compute_recovery, FailureEvent};
use super::scenario::ScenarioFile;

/// Why an episode ended without success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    TimeLimit,
    ReplanBudget,
    PlanExhausted,
    Unplannable,
    WorldError,
    InvalidPlan,
    PlannerError,
}

impl AbortReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AbortReason::TimeLimit => "time_limit",
            AbortReason::ReplanBudget => "replan_budget",
            AbortReason::PlanExhausted => "plan_exhausted",
            AbortReason::Unplannable => "unplannable",
            AbortReason::WorldError => "world_error",
            AbortReason::InvalidPlan => "invalid_plan",
            AbortReason::PlannerError => "planner_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub config: String,
    pub scenario_id: u32,
    pub episode_seed: u64,
    pub success: bool,
    /// Episode seconds including planning latency.
    pub time: f64,
    pub failures: u32,
    pub recovered: u32,
    pub replans: u32,
    pub planning_time: f64,
    pub verdict: SuccessVerdict,
    pub abort_reason: Option<AbortReason>,
}

/// One executed slice of a timeline, between two planning decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub origin: f64,
    pub end: f64,
}

/// Line-oriented event log plus the structured facts the metrics need.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub lines: Vec<String>,
    pub failures: Vec<FailureEvent>,
    /// Latency charged per planning call, in call order.
    pub charges: Vec<f64>,
    pub segments: Vec<Segment>,
}

impl Trace {
    fn log(&mut self, line: String) {
        self.lines.push(line);
    }

    pub fn to_text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub result: EpisodeResult,
    pub trace: Trace,
    pub world: WorldState,
}

/// Per-episode RNG on its own stream; the 32-byte seed is the scenario seed
/// followed by the episode seed, so distinct pairs never share a stream.
pub fn episode_rng(scenario_seed: u64, episode_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&scenario_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&episode_seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng
}

fn strip_deps(steps: Vec<PlanStep>) -> Vec<PlanStep> {
    let kept: BTreeSet<u32> = steps.iter().map(|s| s.id).collect();
    steps
        .into_iter()
        .map(|mut s| {
            s.depends_on.retain(|d| kept.contains(d));
            s
        })
        .collect()
}

/// Drops `failed` and every step that depends on one of them, directly or
/// transitively.
fn drop_dependents(steps: Vec<PlanStep>, failed: &BTreeSet<u32>) -> Vec<PlanStep> {
    let mut dead = failed.clone();
    let mut out = Vec::with_capacity(steps.len());
    for s in steps {
        if dead.contains(&s.id) || s.depends_on.iter().any(|d| dead.contains(d)) {
            dead.insert(s.id);
        } else {
            out.push(s);
        }
    }
    out
}

fn step_line(step: &PlanStep) -> String {
    match step.first_target() {
        Some(t) => format!("{} {}", step.primitive.as_str(), t),
        None => step.primitive.as_str().to_string(),
    }
}

struct Episode<'a> {
    cfg: &'a RunConfig,
    planner: &'a mut dyn Planner,
    world: WorldState,
    exec_rng: ChaCha8Rng,
    obs_rng: ChaCha8Rng,
    time_limit: f64,
    trace: Trace,
    memory: MemoryBuffer,
    replans: u32,
    object_failures: BTreeMap<ObjectId, u32>,
}

enum Flow {
    Continue(Plan),
    Stop(Option<AbortReason>),
}

impl<'a> Episode<'a> {
    fn observe(&mut self) -> SceneGraph {
        let scene = build_scene_graph(&self.world, &self.cfg.scene, &mut self.obs_rng);
        self.world.clear_inspected();
        scene
    }

    fn charge(&mut self, tag: &str, cycle: u32, plan: &Plan) {
        let c = self.cfg.planning_latency;
        self.world.clock += c;
        self.trace.charges.push(c);
        self.trace.log(format!(
            "t={:.4} {tag} cycle={cycle} id={} steps={} charge={c:.4}",
            self.world.clock,
            plan.plan_id,
            plan.steps.len()
        ));
    }

    fn check(&mut self, plan: &Plan) -> Result<(), AbortReason> {
        let v = validate_plan(plan);
        if v.is_empty() {
            return Ok(());
        }
        self.trace.log(format!("invalid plan {}:\n{}", plan.plan_id, ValidationErrors(v)));
        Err(AbortReason::InvalidPlan)
    }

    fn planner_abort(&mut self, e: PlannerError) -> AbortReason {
        self.trace.log(format!("planner error: {e}"));
        match e {
            PlannerError::Unplannable(_) => AbortReason::Unplannable,
            PlannerError::Adapter(_) => AbortReason::PlannerError,
        }
    }

    fn initial_plan(&mut self) -> Flow {
        let scene = self.observe();
        let plan = match self.planner.generate(&scene, TASK_SPEC, 0) {
            Ok(p) => p,
            Err(e) => return Flow::Stop(Some(self.planner_abort(e))),
        };
        if let Err(r) = self.check(&plan) {
            return Flow::Stop(Some(r));
        }
        self.charge("plan", 0, &plan);
        Flow::Continue(plan)
    }

    /// Executes one timeline built from `plan` and decides what comes next.
    fn segment(&mut self, plan: Plan) -> Flow {
        let motion = &self.cfg.sim.motion;
        let asg = assign_arms(&plan, &self.world, motion);
        let timeline = match build_timeline(&plan, &asg, &self.world, motion, &self.cfg.coordination) {
            Ok(t) => t,
            Err(e) => {
                self.trace.log(format!("schedule error: {e}"));
                return Flow::Stop(Some(AbortReason::WorldError));
            }
        };
        for line in timeline.dump().lines() {
            self.trace.log(format!("sched {line}"));
        }

        let origin = self.world.clock;
        let mut stop_at = f64::INFINITY;
        let mut hit_limit = false;
        let mut executed: BTreeSet<u32> = BTreeSet::new();
        let mut outcomes: Vec<StepOutcome> = Vec::new();
        let mut failed: Vec<(PlanStep, StepOutcome, f64)> = Vec::new();
        let mut end = origin;

        for entry in timeline.dispatch_order() {
            if entry.start >= stop_at {
                break;
            }
            if entry.start >= self.time_limit {
                hit_limit = true;
                break;
            }
            let ready = entry
                .assignment
                .arms()
                .iter()
                .filter_map(|a| self.world.arm(*a))
                .map(|a| a.busy_until)
                .fold(entry.start, f64::max);
            if ready > entry.start + 1e-9 {
                // execution drifted from the projection; rebuild the timeline
                break;
            }
            let step = plan.step(entry.step_id).expect("timeline entries come from the plan").clone();
            let out = match execute_primitive(
                &mut self.world,
                &step,
                entry.assignment,
                entry.start,
                &self.cfg.injection,
                &self.cfg.sim,
                &mut self.exec_rng,
            ) {
                Ok(o) => o,
                Err(e) => {
                    self.trace.log(format!("t={:.4} world error at step {}: {e}", entry.start, step.id));
                    return Flow::Stop(Some(AbortReason::WorldError));
                }
            };
            let step_end = entry.start + out.duration;
            self.trace.log(format!(
                "t={:.4} exec arm={} step={} prim={} status={} kind={} err={:.4} dur={:.4}",
                entry.start,
                entry.assignment.label(),
                step.id,
                step_line(&step),
                out.status.as_str(),
                out.failure_kind.map_or("-", |k| k.as_str()),
                out.measured_pose_error,
                out.duration
            ));
            end = end.max(step_end);
            executed.insert(step.id);
            if out.is_failure() {
                stop_at = stop_at.min(step_end);
                failed.push((step, out.clone(), step_end));
            }
            outcomes.push(out);
        }

        self.world.clock = end;
        self.trace.segments.push(Segment { origin, end });
        self.trace.log(format!("t={end:.4} segment origin={origin:.4} end={end:.4}"));

        let rest: Vec<PlanStep> = plan.steps.iter().filter(|s| !executed.contains(&s.id)).cloned().collect();

        if failed.is_empty() {
            if rest.is_empty() {
                return Flow::Stop(self.final_reason(AbortReason::PlanExhausted));
            }
            if hit_limit {
                return Flow::Stop(self.final_reason(AbortReason::TimeLimit));
            }
            return Flow::Continue(Plan {
                steps: strip_deps(rest),
                ..plan
            });
        }

        let first = self.trace.failures.len();
        for (step, out, at) in &failed {
            let kind = out.failure_kind.expect("failed outcomes carry a kind");
            self.trace.log(format!("t={at:.4} failure step={} kind={kind}", step.id));
            self.trace.failures.push(FailureEvent {
                step: step.clone(),
                kind,
                at: *at,
                reflected: false,
            });
            if matches!(step.primitive, Primitive::Pick | Primitive::Place) {
                for &t in &step.targets {
                    *self.object_failures.entry(t).or_default() += 1;
                }
            }
        }
        let (fstep, fout, _) = failed[0].clone();
        let fkind = fout.failure_kind.expect("failed outcomes carry a kind");
        self.memory.push(MemoryEntry {
            cycle: plan.created_at,
            plan: plan.clone(),
            outcomes: outcomes.clone(),
            failure: Some((fkind, fstep.id)),
            scene_digest: String::new(),
        });

        if !self.cfg.reflective {
            let ids: BTreeSet<u32> = failed.iter().map(|(s, _, _)| s.id).collect();
            let rest = drop_dependents(rest, &ids);
            if rest.is_empty() {
                return Flow::Stop(self.final_reason(AbortReason::PlanExhausted));
            }
            if hit_limit || self.world.clock >= self.time_limit {
                return Flow::Stop(self.final_reason(AbortReason::TimeLimit));
            }
            self.trace.log(format!("t={:.4} continue steps={}", self.world.clock, rest.len()));
            return Flow::Continue(Plan {
                steps: strip_deps(rest),
                ..plan
            });
        }

        if self.replans >= self.cfg.replan_budget {
            return Flow::Stop(self.final_reason(AbortReason::ReplanBudget));
        }
        if self.world.clock + self.cfg.planning_latency > self.time_limit {
            return Flow::Stop(self.final_reason(AbortReason::TimeLimit));
        }
        let cycle = self.replans + 1;
        let abandoned: BTreeSet<ObjectId> = self
            .object_failures
            .iter()
            .filter(|(_, &n)| n >= self.cfg.object_failure_cap)
            .map(|(&id, _)| id)
            .collect();
        let scene = self.observe();
        let scene_text = serialize_scene(&scene);
        let ctx = ReflectionContext {
            task_spec: TASK_SPEC.to_string(),
            remaining: remaining_goals(&plan, &outcomes, &scene),
            scene,
            scene_text,
            memory: self.memory.clone(),
            failure: FailureReport {
                kind: fkind,
                step: fstep,
                outcome: fout,
            },
            abandoned,
            cycle,
        };
        let next = match self.planner.reflect(&ctx) {
            Ok(p) => p,
            Err(e) => return Flow::Stop(Some(self.planner_abort(e))),
        };
        self.replans += 1;
        for ev in &mut self.trace.failures[first..] {
            ev.reflected = true;
        }
        self.charge("reflect", cycle, &next);
        if let Err(r) = self.check(&next) {
            return Flow::Stop(Some(r));
        }
        if next.is_empty() {
            return Flow::Stop(self.final_reason(AbortReason::PlanExhausted));
        }
        Flow::Continue(next)
    }

    /// `None` when the goals hold, otherwise `reason`.
    fn final_reason(&self, reason: AbortReason) -> Option<AbortReason> {
        (!evaluate_success(&self.world, self.cfg.debris_threshold).success()).then_some(reason)
    }
}

/// Runs one closed-loop episode: observe, plan, schedule, execute and, on a
/// detected failure, either reflect or carry on with what is left.
pub fn run_episode(scenario: &ScenarioFile, episode_seed: u64, cfg: &RunConfig, planner: &mut dyn Planner) -> EpisodeRun {
    let seed = scenario.spec.seed;
    let stream = cfg.injection.rng_stream.wrapping_mul(2);
    let mut ep = Episode {
        cfg,
        planner,
        world: scenario.world(cfg.arms),
        exec_rng: episode_rng(seed, episode_seed, stream),
        obs_rng: episode_rng(seed, episode_seed, stream + 1),
        time_limit: scenario.spec.time_limit,
        trace: Trace::default(),
        memory: MemoryBuffer::new(),
        replans: 0,
        object_failures: BTreeMap::new(),
    };
    ep.trace.log(format!(
        "episode config={} scenario={} seed={} arms={} reflective={}",
        cfg.label, scenario.spec.scenario_id, episode_seed, cfg.arms, cfg.reflective
    ));

    let mut flow = ep.initial_plan();
    let abort = loop {
        match flow {
            Flow::Continue(plan) => flow = ep.segment(plan),
            Flow::Stop(reason) => break reason,
        }
    };

    let verdict = evaluate_success(&ep.world, cfg.debris_threshold);
    let success = abort.is_none() && verdict.success();
    let abort_reason = if success { None } else { Some(abort.unwrap_or(AbortReason::PlanExhausted)) };
    let recovered = compute_recovery(&ep.trace.failures, &ep.world);
    let planning_time = ep.trace.charges.iter().sum();
    let result = EpisodeResult {
        config: cfg.label.clone(),
        scenario_id: scenario.spec.scenario_id,
        episode_seed,
        success,
        time: ep.world.clock,
        failures: ep.trace.failures.len() as u32,
        recovered,
        replans: ep.replans,
        planning_time,
        verdict,
        abort_reason,
    };
    ep.trace.log(format!(
        "t={:.4} end success={} failures={} recovered={} replans={} planning={:.4} abort={}",
        result.time,
        result.success,
        result.failures,
        result.recovered,
        result.replans,
        result.planning_time,
        result.abort_reason.map_or("-", |r| r.as_str())
    ));
    EpisodeRun {
        result,
        trace: ep.trace,
        world: ep.world,
    }
}

/// Failure events by kind, for summaries.
pub fn failure_histogram(events: &[FailureEvent]) -> BTreeMap<FailureKind, u32> {
    let mut m = BTreeMap::new();
    for e in events {
        *m.entry(e.kind).or_default() += 1;
    }
    m
}
