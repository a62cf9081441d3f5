use crate::geom::{Capsule, Shape};
use crate::plan::PlanStep;
use crate::world::kinematics::{plan_motion, ArmMotion, KinematicView, LegKind, MotionError, MotionParams};
use crate::world::Arm;

use super::ArmAssignment;

/// Space swept by one arm during one step.
pub type Corridor = Vec<Shape>;

/// Corridor of one leg: capsules around the travelled segments, plus, for
/// wipe and consolidate, the worked region grown to every stroke waypoint
/// and inflated by the radius.
pub fn leg_corridor(leg: &ArmMotion, radius: f64) -> Corridor {
    match leg.kind {
        LegKind::Dwell => vec![Shape::Capsule(Capsule::new(leg.start(), leg.start(), radius))],
        LegKind::Travel => leg
            .waypoints
            .windows(2)
            .map(|w| Shape::Capsule(Capsule::new(w[0], w[1], radius)))
            .collect(),
        LegKind::Region => {
            let mut shapes = Vec::with_capacity(2);
            if leg.waypoints.len() > 1 {
                shapes.push(Shape::Capsule(Capsule::new(leg.waypoints[0], leg.waypoints[1], radius)));
            }
            if let Some(region) = leg.region {
                let rect = leg.waypoints[1..].iter().fold(region, |r, p| r.expand_to(*p));
                shapes.push(Shape::RoundedRect { rect, radius });
            }
            shapes
        }
    }
}

/// Per-arm corridors of `step` when started from the arm poses in `view`.
pub fn corridor_of(
    step: &PlanStep,
    assignment: ArmAssignment,
    view: &impl KinematicView,
    motion: &MotionParams,
    radius: f64,
) -> Result<Vec<(Arm, Corridor)>, MotionError> {
    let m = plan_motion(step, assignment, view, motion)?;
    let mut out: Vec<(Arm, Corridor)> = Vec::new();
    for leg in &m.legs {
        let shapes = leg_corridor(leg, radius);
        match out.iter_mut().find(|(a, _)| *a == leg.arm) {
            Some((_, c)) => c.extend(shapes),
            None => out.push((leg.arm, shapes)),
        }
    }
    Ok(out)
}
