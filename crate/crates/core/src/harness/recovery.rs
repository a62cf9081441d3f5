use serde::Serialize;

use crate::plan::{PlanStep, Primitive};
use crate::world::{object_goal_met, FailureKind, WorldState};

/// A detected failure as recorded in the episode trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEvent {
    pub step: PlanStep,
    pub kind: FailureKind,
    /// Episode time at which the failing step ended.
    pub at: f64,
    /// Whether a reflection was issued in response.
    pub reflected: bool,
}

/// Whether the goal of the failed step holds in the final world.
pub fn event_goal_met(step: &PlanStep, world: &WorldState) -> bool {
    match step.primitive {
        Primitive::Pick | Primitive::Place => step
            .targets
            .iter()
            .all(|&id| world.object(id).is_some_and(|o| object_goal_met(world, o))),
        Primitive::Wipe | Primitive::Consolidate => match step.region {
            Some(r) => !world
                .particles
                .iter()
                .any(|p| r.contains(p.pose.pos()) && !world.is_collected(p)),
            None => true,
        },
        Primitive::Inspect => true,
    }
}

/// Failure events that were answered by a reflection and whose goal holds
/// at the end of the episode.
pub fn compute_recovery(events: &[FailureEvent], world: &WorldState) -> u32 {
    events
        .iter()
        .filter(|e| e.reflected && event_goal_met(&e.step, world))
        .count() as u32
}
