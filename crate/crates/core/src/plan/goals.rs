use serde::Serialize;

use crate::scenegraph::SceneGraph;
use crate::world::{ObjectId, StepOutcome};

use super::{Plan, PlanStep, Primitive};

/// Unmet part of the task as seen through the scene graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GoalSummary {
    /// Rigid and fragile objects not resting in the tray, by id.
    pub valuables: Vec<ObjectId>,
    /// Indices into the scene's debris clusters (all of them are uncollected).
    pub debris_clusters: Vec<usize>,
    /// Failed steps whose goal still does not hold.
    pub failed_steps: Vec<u32>,
}

impl GoalSummary {
    pub fn is_empty(&self) -> bool {
        self.valuables.is_empty() && self.debris_clusters.is_empty() && self.failed_steps.is_empty()
    }
}

/// Whether the goal a step works toward holds in `scene`.
pub fn step_goal_met(step: &PlanStep, scene: &SceneGraph) -> bool {
    match step.primitive {
        Primitive::Pick | Primitive::Place => step.targets.iter().all(|&id| object_in_tray(scene, id)),
        Primitive::Wipe | Primitive::Consolidate => match step.region {
            Some(region) => !scene
                .debris_clusters
                .iter()
                .flat_map(|c| c.members.iter())
                .any(|p| region.contains(p.pose.pos())),
            None => true,
        },
        Primitive::Inspect => true,
    }
}

fn object_in_tray(scene: &SceneGraph, id: ObjectId) -> bool {
    scene.holder_of(id).is_none() && scene.object(id).is_some_and(|o| scene.in_tray(o))
}

/// Valuables outside the tray, uncollected debris and failed steps whose
/// goal has not been re-achieved since.
pub fn remaining_goals(plan: &Plan, outcomes: &[StepOutcome], scene: &SceneGraph) -> GoalSummary {
    let mut valuables: Vec<ObjectId> = scene
        .objects
        .iter()
        .filter(|o| o.category.is_valuable() && !scene.in_tray(o))
        .map(|o| o.id)
        .collect();
    valuables.extend(
        scene
            .arms
            .iter()
            .filter_map(|a| a.holding.as_ref())
            .filter(|h| h.category.is_valuable())
            .map(|h| h.id),
    );
    valuables.sort();
    valuables.dedup();

    let mut failed_steps: Vec<u32> = outcomes
        .iter()
        .filter(|o| o.is_failure())
        .filter_map(|o| plan.step(o.step_id))
        .filter(|s| !step_goal_met(s, scene))
        .map(|s| s.id)
        .collect();
    failed_steps.sort();
    failed_steps.dedup();

    GoalSummary {
        valuables,
        debris_clusters: (0..scene.debris_clusters.len()).collect(),
        failed_steps,
    }
}
