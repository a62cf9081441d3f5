use crate::geom::Vec2;
use crate::plan::{ArmHint, Plan, PlanStep, Primitive};
use crate::world::kinematics::{plan_motion, KinematicView, MotionParams};
use crate::world::{Arm, WorldState};

use super::{ArmAssignment, ProjectedView};

/// Where the end-effector has to go first for `step`.
pub fn first_waypoint(step: &PlanStep, view: &impl KinematicView) -> Option<Vec2> {
    match step.primitive {
        Primitive::Pick => step.first_target().and_then(|id| view.object(id)).map(|(p, _)| p),
        Primitive::Place => match step.first_target().and_then(|id| view.object(id)) {
            Some((_, Some(_))) => step.target_pose.map(|p| p.pos()),
            Some((p, None)) => Some(p),
            None => step.target_pose.map(|p| p.pos()),
        },
        Primitive::Wipe | Primitive::Consolidate => step.region.map(|r| r.center()),
        Primitive::Inspect => {
            let pts: Vec<Vec2> = step
                .targets
                .iter()
                .filter_map(|&id| view.object(id).map(|(p, _)| p))
                .collect();
            if !pts.is_empty() {
                let n = pts.len() as f64;
                Some(pts.iter().fold(Vec2::default(), |acc, &p| acc + p) * (1.0 / n))
            } else {
                step.region.map(|r| r.center())
            }
        }
    }
}

fn nearest_arm(arms: &[Arm], view: &ProjectedView, target: Option<Vec2>) -> Arm {
    let Some(target) = target else { return arms[0] };
    let mut best = arms[0];
    let mut best_d = f64::INFINITY;
    for &arm in arms {
        let d = view.ee(arm).map_or(f64::INFINITY, |p| p.dist(target));
        // strict comparison keeps the left arm on ties
        if d < best_d - 1e-12 {
            best = arm;
            best_d = d;
        }
    }
    best
}

/// Resolves every step's arm hint against the arms present in `world`.
///
/// Explicit arms are honored (rewritten to the present arm in single-arm
/// mode); `any` goes to the arm whose projected pose is nearest the step's
/// first waypoint, ties to the left arm; a place always goes to the arm that
/// holds or will hold its object; a pick avoids an arm with a full gripper
/// when the other is free; `both` becomes sequential halves when only
/// one arm exists.
pub fn assign_arms(plan: &Plan, world: &WorldState, motion: &MotionParams) -> Vec<ArmAssignment> {
    let present = world.arm_ids();
    let single = present.len() == 1;
    let mut view = ProjectedView::of(world);
    let mut out = Vec::with_capacity(plan.steps.len());
    for step in &plan.steps {
        let resolve = |arm: Arm| if present.contains(&arm) { arm } else { present[0] };
        let assignment = match step.arm {
            ArmHint::Left => ArmAssignment::Single(resolve(Arm::Left)),
            ArmHint::Right => ArmAssignment::Single(resolve(Arm::Right)),
            ArmHint::Both if single => ArmAssignment::Sequential(present[0]),
            ArmHint::Both => ArmAssignment::Both,
            ArmHint::Any => {
                let holder = (step.primitive == Primitive::Place)
                    .then(|| step.first_target().and_then(|id| view.holder(id)))
                    .flatten()
                    .filter(|a| present.contains(a));
                let free: Vec<Arm> = present.iter().copied().filter(|&a| !view.is_holding(a)).collect();
                let pool = if step.primitive == Primitive::Pick && !free.is_empty() { &free } else { &present };
                let arm = holder.unwrap_or_else(|| nearest_arm(pool, &view, first_waypoint(step, &view)));
                ArmAssignment::Single(arm)
            }
        };
        if let Ok(m) = plan_motion(step, assignment, &view, motion) {
            view.advance(step, assignment, &m);
        }
        out.push(assignment);
    }
    out
}
