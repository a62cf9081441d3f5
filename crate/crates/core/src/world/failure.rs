use serde::{Deserialize, Serialize};

use crate::plan::PlanStep;

use super::{FailureKind, StepOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Pose error tolerance ε_pose, meters.
    pub eps_pose: f64,
    /// Per-primitive timeout, seconds.
    pub t_prim: f64,
    /// Force limit used when a step does not carry its own.
    pub default_force_threshold: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eps_pose: 0.02,
            t_prim: 20.0,
            default_force_threshold: 15.0,
        }
    }
}

/// Maps raw execution measurements onto the three detection channels
/// (force feedback, pose error, timeout).
///
/// A grasp slip has no channel of its own: it shows up as a pose error when
/// the object moved further than `eps_pose`, otherwise as a force spike.
pub fn detect_failure(outcome: &StepOutcome, step: &PlanStep, thresholds: &Thresholds) -> Option<FailureKind> {
    if outcome.slipped {
        return Some(if outcome.measured_pose_error > thresholds.eps_pose {
            FailureKind::PoseError
        } else {
            FailureKind::ForceExceeded
        });
    }
    let limit = step.force_threshold.unwrap_or(thresholds.default_force_threshold);
    if outcome.peak_force.is_some_and(|f| f > limit) {
        return Some(FailureKind::ForceExceeded);
    }
    if step.verify && outcome.measured_pose_error > thresholds.eps_pose {
        return Some(FailureKind::PoseError);
    }
    if outcome.duration > thresholds.t_prim {
        return Some(FailureKind::Timeout);
    }
    None
}
