use serde::{Deserialize, Serialize};

use super::{Category, SceneObject, WorldState};

/// The three trial objectives, judged independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessVerdict {
    /// Every valuable rests in the tray.
    pub valuables_in_tray: bool,
    /// Collected debris fraction meets the threshold.
    pub debris_collected: bool,
    /// Nothing damaged, no fragile item off the table.
    pub nothing_damaged: bool,
}

impl SuccessVerdict {
    pub fn success(&self) -> bool {
        self.valuables_in_tray && self.debris_collected && self.nothing_damaged
    }
}

/// Goal predicate of a single valuable: resting in the tray, intact.
pub fn object_goal_met(world: &WorldState, obj: &SceneObject) -> bool {
    obj.held_by.is_none()
        && !obj.damaged
        && !obj.off_table
        && world.table.tray_zone.contains(obj.pose.pos())
}

pub fn evaluate_success(world: &WorldState, debris_threshold: f64) -> SuccessVerdict {
    let tray = world.table.tray_zone;
    let valuables_in_tray = world
        .objects
        .iter()
        .filter(|o| o.category.is_valuable())
        .all(|o| o.held_by.is_none() && tray.contains(o.pose.pos()));
    let debris_collected = world.collected_fraction() >= debris_threshold;
    let nothing_damaged = world
        .objects
        .iter()
        .all(|o| !o.damaged && !(o.category == Category::Fragile && o.off_table));
    SuccessVerdict {
        valuables_in_tray,
        debris_collected,
        nothing_damaged,
    }
}
