//! Plan schema v1: parameterized primitive sequences exchanged with planners.

mod goals;
mod json;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{Pose2D, Rect, Vec2};
use crate::world::ObjectId;

pub use goals::{remaining_goals, step_goal_met, GoalSummary};
pub use json::{parse_plan, quantize, serialize_plan, SCHEMA_REFERENCE, SCHEMA_VERSION};
pub use validate::{validate_plan, Rule, ValidationErrors, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Pick,
    Place,
    Consolidate,
    Wipe,
    Inspect,
}

impl Primitive {
    pub const ALL: [Primitive; 5] = [
        Primitive::Pick,
        Primitive::Place,
        Primitive::Consolidate,
        Primitive::Wipe,
        Primitive::Inspect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Primitive::Pick => "pick",
            Primitive::Place => "place",
            Primitive::Consolidate => "consolidate",
            Primitive::Wipe => "wipe",
            Primitive::Inspect => "inspect",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }

    pub fn allows_bimanual(self) -> bool {
        matches!(self, Primitive::Consolidate | Primitive::Wipe)
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmHint {
    Left,
    Right,
    Any,
    Both,
}

impl ArmHint {
    pub const ALL: [ArmHint; 4] = [ArmHint::Left, ArmHint::Right, ArmHint::Any, ArmHint::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            ArmHint::Left => "left",
            ArmHint::Right => "right",
            ArmHint::Any => "any",
            ArmHint::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub id: u32,
    pub primitive: Primitive,
    pub arm: ArmHint,
    pub targets: Vec<ObjectId>,
    pub target_pose: Option<Pose2D>,
    pub region: Option<Rect>,
    /// Unit vector.
    pub direction: Option<Vec2>,
    pub gather_point: Option<Pose2D>,
    /// Newtons.
    pub force_threshold: Option<f64>,
    pub verify: bool,
    pub depends_on: Vec<u32>,
}

impl PlanStep {
    fn bare(id: u32, primitive: Primitive) -> Self {
        Self {
            id,
            primitive,
            arm: ArmHint::Any,
            targets: Vec::new(),
            target_pose: None,
            region: None,
            direction: None,
            gather_point: None,
            force_threshold: None,
            verify: false,
            depends_on: Vec::new(),
        }
    }

    pub fn pick(id: u32, target: ObjectId) -> Self {
        Self {
            targets: vec![target],
            ..Self::bare(id, Primitive::Pick)
        }
    }

    pub fn place(id: u32, target: ObjectId, pose: Pose2D) -> Self {
        Self {
            targets: vec![target],
            target_pose: Some(pose),
            verify: true,
            ..Self::bare(id, Primitive::Place)
        }
    }

    pub fn wipe(id: u32, region: Rect, direction: Vec2) -> Self {
        Self {
            region: Some(region),
            direction: Some(direction),
            ..Self::bare(id, Primitive::Wipe)
        }
    }

    pub fn consolidate(id: u32, region: Rect, gather: Pose2D) -> Self {
        Self {
            region: Some(region),
            gather_point: Some(gather),
            ..Self::bare(id, Primitive::Consolidate)
        }
    }

    pub fn inspect_objects(id: u32, targets: Vec<ObjectId>) -> Self {
        Self {
            targets,
            ..Self::bare(id, Primitive::Inspect)
        }
    }

    pub fn inspect_region(id: u32, region: Rect) -> Self {
        Self {
            region: Some(region),
            ..Self::bare(id, Primitive::Inspect)
        }
    }

    pub fn with_arm(mut self, arm: ArmHint) -> Self {
        self.arm = arm;
        self
    }

    pub fn with_verify(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn with_depends(mut self, deps: Vec<u32>) -> Self {
        self.depends_on = deps;
        self
    }

    pub fn with_force_threshold(mut self, newtons: f64) -> Self {
        self.force_threshold = Some(newtons);
        self
    }

    pub fn first_target(&self) -> Option<ObjectId> {
        self.targets.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub plan_id: String,
    pub steps: Vec<PlanStep>,
    /// Replanning cycle that produced this plan.
    pub created_at: u32,
}

impl Plan {
    pub fn empty(plan_id: impl Into<String>) -> Self {
        Self {
            plan_id: plan_id.into(),
            steps: Vec::new(),
            created_at: 0,
        }
    }

    pub fn step(&self, id: u32) -> Option<&PlanStep> {
        self.steps
            .binary_search_by_key(&id, |s| s.id)
            .ok()
            .map(|i| &self.steps[i])
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Helper that hands out increasing step ids while a plan is assembled.
#[derive(Debug, Default)]
pub struct PlanBuilder {
    steps: Vec<PlanStep>,
    next_id: u32,
}

impl PlanBuilder {
    pub fn new() -> Self {
        Self {
            steps: Vec::new(),
            next_id: 1,
        }
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    /// Appends a step, overwriting its id; returns the assigned id.
    pub fn push(&mut self, mut step: PlanStep) -> u32 {
        let id = self.next_id;
        step.id = id;
        self.steps.push(step);
        self.next_id += 1;
        id
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn build(self, plan_id: impl Into<String>, created_at: u32) -> Plan {
        Plan {
            plan_id: plan_id.into(),
            steps: self.steps,
            created_at,
        }
    }
}
