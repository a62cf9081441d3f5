//! Kinematic motion model of the five primitives.
//!
//! The scheduler and the executor both derive durations and swept paths from
//! here, so a timeline built ahead of time agrees with what execution later
//! charges to the clock.

use crate::coordination::ArmAssignment;
use crate::geom::{Rect, Vec2};
use crate::plan::{PlanStep, Primitive};

use super::{Arm, ObjectId, WorldState};

#[derive(Debug, Clone, PartialEq)]
pub struct MotionParams {
    /// End-effector speed, m/s.
    pub arm_speed: f64,
    pub grasp_overhead: f64,
    pub release_overhead: f64,
    pub t_inspect: f64,
    /// Width of a wipe strip or consolidation rake.
    pub wipe_width: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            arm_speed: 0.25,
            grasp_overhead: 1.0,
            release_overhead: 0.5,
            t_inspect: 0.5,
            wipe_width: 0.08,
        }
    }
}

impl MotionParams {
    /// Fixed vertical approach charged to every moving primitive.
    pub fn approach_time(&self, height_offset: f64) -> f64 {
        height_offset / self.arm_speed
    }
}

/// What the motion model needs to know about the world.
pub trait KinematicView {
    fn ee(&self, arm: Arm) -> Option<Vec2>;
    /// Position and current holder of an object.
    fn object(&self, id: ObjectId) -> Option<(Vec2, Option<Arm>)>;
    fn height_offset(&self) -> f64;
}

impl KinematicView for WorldState {
    fn ee(&self, arm: Arm) -> Option<Vec2> {
        self.arm(arm).map(|a| a.ee_pose.pos())
    }

    fn object(&self, id: ObjectId) -> Option<(Vec2, Option<Arm>)> {
        self.object(id).map(|o| (o.pose.pos(), o.held_by))
    }

    fn height_offset(&self) -> f64 {
        self.table.height_offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegKind {
    Travel,
    Region,
    Dwell,
}

/// One arm's contribution to a primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmMotion {
    pub arm: Arm,
    pub kind: LegKind,
    /// Polyline starting at the arm's start pose.
    pub waypoints: Vec<Vec2>,
    /// Worked area for wipe/consolidate legs.
    pub region: Option<Rect>,
    pub end: Vec2,
    pub duration: f64,
}

impl ArmMotion {
    pub fn start(&self) -> Vec2 {
        self.waypoints[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub legs: Vec<ArmMotion>,
    /// Legs run concurrently (bimanual) rather than back to back.
    pub concurrent: bool,
    pub duration: f64,
}

impl Motion {
    pub fn end_pose(&self, arm: Arm) -> Option<Vec2> {
        self.legs.iter().rev().find(|l| l.arm == arm).map(|l| l.end)
    }

    /// Individual primitive executions, for per-primitive timeout checks.
    pub fn leg_durations(&self) -> Vec<f64> {
        self.legs.iter().map(|l| l.duration).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MotionError {
    #[error("target {0} does not exist")]
    MissingTarget(ObjectId),
    #[error("arm {0} is not present")]
    MissingArm(Arm),
    #[error("step {0} lacks a parameter required to move")]
    MissingParameter(u32),
}

fn polyline_length(points: &[Vec2]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

fn wipe_leg(arm: Arm, start: Vec2, region: Rect, dir: Vec2, p: &MotionParams, approach: f64) -> ArmMotion {
    let u = dir.perp();
    let (lo_d, hi_d) = region.project(dir);
    let (lo_u, hi_u) = region.project(u);
    let stroke = hi_d - lo_d;
    let span = hi_u - lo_u;
    let n = ((span / p.wipe_width) - 1e-9).ceil().max(1.0) as usize;
    let strip = span / n as f64;
    let at = |d: f64, k: usize| dir * d + u * (lo_u + strip * (k as f64 + 0.5));
    let mut waypoints = vec![start];
    for k in 0..n {
        waypoints.push(at(lo_d, k));
        waypoints.push(at(hi_d, k));
    }
    // Return strokes are lifted diagonals between strips.
    let path = start.dist(waypoints[1]) + n as f64 * stroke + (n as f64 - 1.0) * stroke.hypot(strip);
    let end = *waypoints.last().unwrap();
    ArmMotion {
        arm,
        kind: LegKind::Region,
        waypoints,
        region: Some(region),
        end,
        duration: path / p.arm_speed + approach,
    }
}

/// Rake direction for a consolidation: from the region center toward the
/// gather point, straight down when they coincide.
pub fn rake_direction(region: &Rect, gather: Vec2) -> Vec2 {
    (gather - region.center())
        .normalized()
        .unwrap_or(Vec2::new(0.0, -1.0))
}

fn consolidate_leg(arm: Arm, start: Vec2, region: Rect, gather: Vec2, p: &MotionParams, approach: f64) -> ArmMotion {
    let dir = rake_direction(&region, gather);
    let u = dir.perp();
    let (lo_d, _) = region.project(dir);
    let (lo_u, hi_u) = region.project(u);
    let span = hi_u - lo_u;
    let n = ((span / p.wipe_width) - 1e-9).ceil().max(1.0) as usize;
    let strip = span / n as f64;
    let mut waypoints = vec![start];
    let mut path = 0.0;
    for k in 0..n {
        let rake_start = dir * lo_d + u * (lo_u + strip * (k as f64 + 0.5));
        let prev = *waypoints.last().unwrap();
        path += prev.dist(rake_start) + rake_start.dist(gather);
        waypoints.push(rake_start);
        waypoints.push(gather);
    }
    ArmMotion {
        arm,
        kind: LegKind::Region,
        waypoints,
        region: Some(region),
        end: gather,
        duration: path / p.arm_speed + approach,
    }
}

fn region_leg(step: &PlanStep, arm: Arm, start: Vec2, region: Rect, p: &MotionParams, approach: f64) -> Result<ArmMotion, MotionError> {
    match step.primitive {
        Primitive::Wipe => {
            let dir = step.direction.ok_or(MotionError::MissingParameter(step.id))?;
            Ok(wipe_leg(arm, start, region, dir, p, approach))
        }
        Primitive::Consolidate => {
            let g = step.gather_point.ok_or(MotionError::MissingParameter(step.id))?;
            Ok(consolidate_leg(arm, start, region, g.pos(), p, approach))
        }
        _ => Err(MotionError::MissingParameter(step.id)),
    }
}

/// Axis along which a bimanual region primitive splits its region.
pub fn split_axis(step: &PlanStep) -> Vec2 {
    match (step.primitive, step.region) {
        (Primitive::Consolidate, Some(r)) => rake_direction(&r, step.gather_point.map(|g| g.pos()).unwrap_or(r.center())),
        _ => step.direction.unwrap_or(Vec2::new(0.0, -1.0)),
    }
}

fn single_leg(step: &PlanStep, arm: Arm, start: Vec2, view: &impl KinematicView, p: &MotionParams) -> Result<ArmMotion, MotionError> {
    let approach = p.approach_time(view.height_offset());
    match step.primitive {
        Primitive::Pick => {
            let id = step.first_target().ok_or(MotionError::MissingParameter(step.id))?;
            let (q, _) = view.object(id).ok_or(MotionError::MissingTarget(id))?;
            let waypoints = vec![start, q];
            Ok(ArmMotion {
                arm,
                kind: LegKind::Travel,
                duration: start.dist(q) / p.arm_speed + p.grasp_overhead + approach,
                waypoints,
                region: None,
                end: q,
            })
        }
        Primitive::Place => {
            let id = step.first_target().ok_or(MotionError::MissingParameter(step.id))?;
            let target = step.target_pose.ok_or(MotionError::MissingParameter(step.id))?.pos();
            let (q, holder) = view.object(id).ok_or(MotionError::MissingTarget(id))?;
            let (waypoints, overhead) = if holder == Some(arm) {
                (vec![start, target], p.release_overhead)
            } else {
                // resting object: regrasp then carry
                (vec![start, q, target], p.grasp_overhead + p.release_overhead)
            };
            Ok(ArmMotion {
                arm,
                kind: LegKind::Travel,
                duration: polyline_length(&waypoints) / p.arm_speed + overhead + approach,
                waypoints,
                region: None,
                end: target,
            })
        }
        Primitive::Inspect => Ok(ArmMotion {
            arm,
            kind: LegKind::Dwell,
            waypoints: vec![start],
            region: None,
            end: start,
            duration: p.t_inspect,
        }),
        Primitive::Wipe | Primitive::Consolidate => {
            let region = step.region.ok_or(MotionError::MissingParameter(step.id))?;
            region_leg(step, arm, start, region, p, approach)
        }
    }
}

/// Computes the motion of `step` under `assignment`, starting from the arm
/// poses reported by `view`.
pub fn plan_motion(
    step: &PlanStep,
    assignment: ArmAssignment,
    view: &impl KinematicView,
    p: &MotionParams,
) -> Result<Motion, MotionError> {
    let ee = |arm: Arm| view.ee(arm).ok_or(MotionError::MissingArm(arm));
    match assignment {
        ArmAssignment::Single(arm) => {
            let leg = single_leg(step, arm, ee(arm)?, view, p)?;
            Ok(Motion {
                duration: leg.duration,
                legs: vec![leg],
                concurrent: false,
            })
        }
        ArmAssignment::Both | ArmAssignment::Sequential(_) if !step.primitive.allows_bimanual() => {
            // non-region primitives cannot be split; run on the first arm
            let arm = match assignment {
                ArmAssignment::Sequential(a) => a,
                _ => Arm::Left,
            };
            plan_motion(step, ArmAssignment::Single(arm), view, p)
        }
        ArmAssignment::Both => {
            let region = step.region.ok_or(MotionError::MissingParameter(step.id))?;
            let (a, b) = region.split_across(split_axis(step));
            let approach = p.approach_time(view.height_offset());
            let left = region_leg(step, Arm::Left, ee(Arm::Left)?, a, p, approach)?;
            let right = region_leg(step, Arm::Right, ee(Arm::Right)?, b, p, approach)?;
            Ok(Motion {
                duration: left.duration.max(right.duration),
                legs: vec![left, right],
                concurrent: true,
            })
        }
        ArmAssignment::Sequential(arm) => {
            let region = step.region.ok_or(MotionError::MissingParameter(step.id))?;
            let (a, b) = region.split_across(split_axis(step));
            let start = ee(arm)?;
            let (first, second) = if start.dist(a.center()) <= start.dist(b.center()) {
                (a, b)
            } else {
                (b, a)
            };
            let approach = p.approach_time(view.height_offset());
            let l1 = region_leg(step, arm, start, first, p, approach)?;
            let l2 = region_leg(step, arm, l1.end, second, p, approach)?;
            Ok(Motion {
                duration: l1.duration + l2.duration,
                legs: vec![l1, l2],
                concurrent: false,
            })
        }
    }
}
