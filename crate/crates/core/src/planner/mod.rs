//! Plan generation and failure-triggered revision.

mod http;
mod memory;
mod prompt;
mod scripted;

use std::collections::BTreeSet;

use crate::plan::{GoalSummary, Plan, PlanStep};
use crate::scenegraph::{serialize_scene, SceneGraph};
use crate::world::{FailureKind, ObjectId, StepOutcome};

pub use http::{AdapterError, HttpPlanClient, PlanResponse, DEFAULT_TIMEOUT};
pub use memory::{MemoryBuffer, MemoryEntry, MEMORY_CAPACITY};
pub use prompt::{build_initial_prompt, build_prompt, TASK_SPEC};
pub use scripted::{scripted_reflect, scripted_strategy, tray_slots, ScriptedConfig};

/// The failed step and what was measured when it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    pub kind: FailureKind,
    pub step: PlanStep,
    pub outcome: StepOutcome,
}

/// Everything a planner sees when asked to revise.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionContext {
    pub task_spec: String,
    pub scene: SceneGraph,
    /// Canonical rendering of `scene`.
    pub scene_text: String,
    pub memory: MemoryBuffer,
    pub failure: FailureReport,
    pub remaining: GoalSummary,
    /// Objects that exhausted their retries.
    pub abandoned: BTreeSet<ObjectId>,
    pub cycle: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error("no plan can reach the goals: {0}")]
    Unplannable(String),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

pub trait Planner {
    fn name(&self) -> &str;

    /// Initial plan for a freshly observed scene.
    fn generate(&mut self, scene: &SceneGraph, task_spec: &str, cycle: u32) -> Result<Plan, PlannerError>;

    /// Revised plan after a failure, covering only what is still unmet.
    fn reflect(&mut self, ctx: &ReflectionContext) -> Result<Plan, PlannerError>;
}

/// The deterministic rule-based planner.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPlanner {
    pub config: ScriptedConfig,
}

impl Planner for ScriptedPlanner {
    fn name(&self) -> &str {
        "scripted"
    }

    fn generate(&mut self, scene: &SceneGraph, _task_spec: &str, cycle: u32) -> Result<Plan, PlannerError> {
        let mut plan = scripted_strategy(scene, &self.config);
        plan.created_at = cycle;
        plan.plan_id = format!("scripted-c{cycle}");
        Ok(plan)
    }

    fn reflect(&mut self, ctx: &ReflectionContext) -> Result<Plan, PlannerError> {
        Ok(scripted_reflect(ctx, &self.config))
    }
}

/// What the HTTP planner does when the service fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Abort,
    Scripted,
}

/// Planner backed by a remote service, optionally falling back to the
/// scripted planner when the adapter gives up.
#[derive(Debug, Clone)]
pub struct HttpPlanner {
    pub client: HttpPlanClient,
    pub fallback: Fallback,
    scripted: ScriptedPlanner,
    /// Adapter errors absorbed by the fallback.
    pub fallbacks_used: u32,
}

impl HttpPlanner {
    pub fn new(client: HttpPlanClient, fallback: Fallback) -> Self {
        Self {
            client,
            fallback,
            scripted: ScriptedPlanner::default(),
            fallbacks_used: 0,
        }
    }

    fn handle(&mut self, r: Result<PlanResponse, AdapterError>, alt: impl FnOnce(&mut ScriptedPlanner) -> Result<Plan, PlannerError>) -> Result<Plan, PlannerError> {
        match (r, self.fallback) {
            (Ok(resp), _) => Ok(resp.plan),
            (Err(_), Fallback::Scripted) => {
                self.fallbacks_used += 1;
                alt(&mut self.scripted)
            }
            (Err(e), Fallback::Abort) => Err(e.into()),
        }
    }
}

impl Planner for HttpPlanner {
    fn name(&self) -> &str {
        "http"
    }

    fn generate(&mut self, scene: &SceneGraph, task_spec: &str, cycle: u32) -> Result<Plan, PlannerError> {
        let prompt = build_initial_prompt(task_spec, &serialize_scene(scene));
        let r = self.client.request_plan(&prompt);
        self.handle(r, |s| s.generate(scene, task_spec, cycle))
    }

    fn reflect(&mut self, ctx: &ReflectionContext) -> Result<Plan, PlannerError> {
        let r = self.client.request_plan(&build_prompt(ctx));
        self.handle(r, |s| s.reflect(ctx))
    }
}
