//! Arm assignment and conflict-free concurrent scheduling on a shared
//! occupancy map.

mod assign;
mod corridor;
mod grid;
mod timeline;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::world::kinematics::{KinematicView, Motion};
use crate::world::{Arm, ObjectId, WorldState};
use crate::plan::{PlanStep, Primitive};

pub use assign::{assign_arms, first_waypoint};
pub use corridor::{corridor_of, leg_corridor, Corridor};
pub use grid::OccupancyGrid;
pub use timeline::{build_timeline, Reservation, ScheduledStep, Timeline};

/// Which arm(s) execute a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArmAssignment {
    Single(Arm),
    /// Coordinated bimanual execution over two half regions.
    Both,
    /// Single-arm fallback for a bimanual step: the two halves back to back.
    Sequential(Arm),
}

impl ArmAssignment {
    pub fn arms(&self) -> Vec<Arm> {
        match *self {
            ArmAssignment::Single(a) | ArmAssignment::Sequential(a) => vec![a],
            ArmAssignment::Both => vec![Arm::Left, Arm::Right],
        }
    }

    pub fn label(&self) -> String {
        match self {
            ArmAssignment::Single(a) => a.to_string(),
            ArmAssignment::Both => "both".into(),
            ArmAssignment::Sequential(a) => format!("{a}x2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationParams {
    /// Reservation radius around swept end-effector paths.
    pub reservation_radius: f64,
    pub cell_size: f64,
}

impl Default for CoordinationParams {
    fn default() -> Self {
        Self {
            reservation_radius: 0.10,
            cell_size: 0.01,
        }
    }
}

/// World positions as they will be once earlier steps of a plan have run,
/// assuming those steps succeed.
#[derive(Debug, Clone)]
pub(crate) struct ProjectedView {
    ee: BTreeMap<Arm, Vec2>,
    objects: BTreeMap<ObjectId, (Vec2, Option<Arm>)>,
    height_offset: f64,
}

impl ProjectedView {
    pub(crate) fn of(world: &WorldState) -> Self {
        Self {
            ee: world.arms.iter().map(|a| (a.arm, a.ee_pose.pos())).collect(),
            objects: world
                .objects
                .iter()
                .map(|o| (o.id, (o.pose.pos(), o.held_by)))
                .collect(),
            height_offset: world.table.height_offset,
        }
    }

    pub(crate) fn is_holding(&self, arm: Arm) -> bool {
        self.objects.values().any(|(_, h)| *h == Some(arm))
    }

    pub(crate) fn holder(&self, id: ObjectId) -> Option<Arm> {
        self.objects.get(&id).and_then(|(_, h)| *h)
    }

    pub(crate) fn advance(&mut self, step: &PlanStep, assignment: ArmAssignment, motion: &Motion) {
        for arm in Arm::ALL {
            if let Some(end) = motion.end_pose(arm) {
                self.ee.insert(arm, end);
            }
        }
        let Some(id) = step.first_target() else { return };
        match (step.primitive, assignment) {
            (Primitive::Pick, ArmAssignment::Single(arm)) => {
                if let Some(entry) = self.objects.get_mut(&id) {
                    *entry = (entry.0, Some(arm));
                }
            }
            (Primitive::Place, _) => {
                if let (Some(entry), Some(pose)) = (self.objects.get_mut(&id), step.target_pose) {
                    *entry = (pose.pos(), None);
                }
            }
            _ => {}
        }
    }
}

impl KinematicView for ProjectedView {
    fn ee(&self, arm: Arm) -> Option<Vec2> {
        self.ee.get(&arm).copied()
    }

    fn object(&self, id: ObjectId) -> Option<(Vec2, Option<Arm>)> {
        self.objects.get(&id).copied()
    }

    fn height_offset(&self) -> f64 {
        self.height_offset
    }
}
