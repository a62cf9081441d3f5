//! Authoritative simulated tabletop and kinematic execution of primitives.

mod exec;
mod failure;
pub mod kinematics;
mod success;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{Pose2D, Rect, Vec2};

pub use exec::{execute_primitive, SimParams, WorldError};
pub use failure::{detect_failure, Thresholds};
pub use kinematics::{ArmMotion, LegKind, Motion, MotionParams};
pub use success::{evaluate_success, object_goal_met, SuccessVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

impl std::str::FromStr for ObjectId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('o')
            .and_then(|n| n.parse::<u32>().ok())
            .filter(|_| !s[1..].starts_with('+'))
            .map(ObjectId)
            .ok_or_else(|| format!("object id must look like o<number>, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const ALL: [Arm; 2] = [Arm::Left, Arm::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Left => "left",
            Arm::Right => "right",
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Rigid,
    Fragile,
    DebrisCluster,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Rigid => "rigid",
            Category::Fragile => "fragile",
            Category::DebrisCluster => "debris-cluster",
        }
    }

    /// Rigid and fragile items must end up in the tray.
    pub fn is_valuable(self) -> bool {
        matches!(self, Category::Rigid | Category::Fragile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size2 {
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub label: String,
    pub category: Category,
    pub pose: Pose2D,
    pub size: Size2,
    pub damaged: bool,
    pub held_by: Option<Arm>,
    /// Set when a displacement pushed the center past the table edge.
    pub off_table: bool,
}

impl SceneObject {
    pub fn footprint(&self) -> Rect {
        Rect::centered(self.pose.pos(), self.size.w, self.size.h)
    }

    pub fn mark_damaged(&mut self) {
        self.damaged = true;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Crumb,
    Shred,
}

impl SizeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SizeClass::Crumb => "crumb",
            SizeClass::Shred => "shred",
        }
    }

    /// Admissible diameter range in meters.
    pub fn diameter_range(self) -> (f64, f64) {
        match self {
            SizeClass::Crumb => (0.001, 0.003),
            SizeClass::Shred => (0.015, 0.020),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebrisParticle {
    pub id: u32,
    pub pose: Pose2D,
    pub size_class: SizeClass,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmState {
    pub arm: Arm,
    pub ee_pose: Pose2D,
    pub home_pose: Pose2D,
    pub holding: Option<ObjectId>,
    pub busy_until: f64,
}

impl ArmState {
    pub fn at_home(arm: Arm, home: Pose2D) -> Self {
        Self {
            arm,
            ee_pose: home,
            home_pose: home,
            holding: None,
            busy_until: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub width: f64,
    pub depth: f64,
    pub height_offset: f64,
    pub tray_zone: Rect,
    pub collection_zone: Rect,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self {
            width: 0.9,
            depth: 0.6,
            height_offset: 0.0,
            tray_zone: Rect::new(0.15, 0.48, 0.75, 0.60),
            collection_zone: Rect::new(0.0, 0.0, 0.9, 0.06),
        }
    }
}

impl TableSpec {
    pub fn bounds(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.depth)
    }

    pub fn default_home(&self, arm: Arm) -> Pose2D {
        match arm {
            Arm::Left => Pose2D::at(0.05, self.depth / 2.0),
            Arm::Right => Pose2D::at(self.width - 0.05, self.depth / 2.0),
        }
    }
}

/// Seeded stochastic perturbations standing in for contact physics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureInjectionConfig {
    pub p_slip_rigid: f64,
    pub p_slip_fragile: f64,
    pub p_force_exceed: f64,
    pub place_noise_sigma: f64,
    pub wipe_residual_p: f64,
    pub rng_stream: u64,
}

impl FailureInjectionConfig {
    /// Failure-free world.
    pub fn none() -> Self {
        Self {
            p_slip_rigid: 0.0,
            p_slip_fragile: 0.0,
            p_force_exceed: 0.0,
            place_noise_sigma: 0.0,
            wipe_residual_p: 0.0,
            rng_stream: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let probs = [
            ("p_slip_rigid", self.p_slip_rigid),
            ("p_slip_fragile", self.p_slip_fragile),
            ("p_force_exceed", self.p_force_exceed),
            ("wipe_residual_p", self.wipe_residual_p),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must be in [0,1], got {p}"));
            }
        }
        if self.place_noise_sigma.is_nan() || self.place_noise_sigma < 0.0 {
            return Err(format!(
                "place_noise_sigma must be >= 0, got {}",
                self.place_noise_sigma
            ));
        }
        Ok(())
    }
}

impl Default for FailureInjectionConfig {
    fn default() -> Self {
        Self::none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    ForceExceeded,
    PoseError,
    Timeout,
    GraspSlip,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::ForceExceeded => "force_exceeded",
            FailureKind::PoseError => "pose_error",
            FailureKind::Timeout => "timeout",
            FailureKind::GraspSlip => "grasp_slip",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Success,
    Failure,
    Timeout,
}

impl StepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StepStatus::Success => "success",
            StepStatus::Failure => "failure",
            StepStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub step_id: u32,
    pub status: StepStatus,
    /// Detected (planner-visible) failure kind; never `GraspSlip`.
    pub failure_kind: Option<FailureKind>,
    pub measured_pose_error: f64,
    pub duration: f64,
    /// Peak of an injected force event, if one occurred.
    pub peak_force: Option<f64>,
    pub slipped: bool,
}

impl StepOutcome {
    pub fn success(step_id: u32, duration: f64) -> Self {
        Self {
            step_id,
            status: StepStatus::Success,
            failure_kind: None,
            measured_pose_error: 0.0,
            duration,
            peak_force: None,
            slipped: false,
        }
    }

    /// Raw kind injected by the simulator, before mapping to a detection channel.
    pub fn injected_kind(&self) -> Option<FailureKind> {
        if self.slipped {
            Some(FailureKind::GraspSlip)
        } else if self.peak_force.is_some() {
            Some(FailureKind::ForceExceeded)
        } else {
            None
        }
    }

    pub fn is_failure(&self) -> bool {
        self.failure_kind.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub table: TableSpec,
    /// Sorted by id.
    pub objects: Vec<SceneObject>,
    /// Sorted by id.
    pub particles: Vec<DebrisParticle>,
    pub arms: Vec<ArmState>,
    pub clock: f64,
    /// Objects observed up close since the last scene snapshot.
    pub inspected: BTreeSet<ObjectId>,
}

impl WorldState {
    pub fn new(table: TableSpec, mut objects: Vec<SceneObject>, mut particles: Vec<DebrisParticle>, arm_count: usize) -> Self {
        objects.sort_by_key(|o| o.id);
        particles.sort_by_key(|p| p.id);
        let arms = Arm::ALL
            .iter()
            .take(arm_count.clamp(1, 2))
            .map(|&a| ArmState::at_home(a, table.default_home(a)))
            .collect();
        Self {
            table,
            objects,
            particles,
            arms,
            clock: 0.0,
            inspected: BTreeSet::new(),
        }
    }

    pub fn empty(table: TableSpec, arm_count: usize) -> Self {
        Self::new(table, Vec::new(), Vec::new(), arm_count)
    }

    /// Keeps only the first `n` arms (1 or 2).
    pub fn with_arm_count(mut self, n: usize) -> Self {
        self.arms.truncate(n.clamp(1, 2));
        self
    }

    pub fn object(&self, id: ObjectId) -> Option<&SceneObject> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn object_mut(&mut self, id: ObjectId) -> Option<&mut SceneObject> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(move |i| &mut self.objects[i])
    }

    pub fn arm(&self, arm: Arm) -> Option<&ArmState> {
        self.arms.iter().find(|a| a.arm == arm)
    }

    pub fn arm_mut(&mut self, arm: Arm) -> Option<&mut ArmState> {
        self.arms.iter_mut().find(|a| a.arm == arm)
    }

    pub fn arm_ids(&self) -> Vec<Arm> {
        self.arms.iter().map(|a| a.arm).collect()
    }

    pub fn is_collected(&self, p: &DebrisParticle) -> bool {
        self.table.collection_zone.contains(p.pose.pos())
    }

    pub fn collected_fraction(&self) -> f64 {
        if self.particles.is_empty() {
            return 1.0;
        }
        let n = self.particles.iter().filter(|p| self.is_collected(p)).count();
        n as f64 / self.particles.len() as f64
    }

    /// Clamps a displaced position to the table plus apron; reports whether
    /// the result lies off the table proper.
    pub fn clamp_displacement(&self, p: Vec2, apron: f64) -> (Vec2, bool) {
        let clamped = self.table.bounds().inflate(apron).clamp_point(p);
        let off = !self.table.bounds().contains(clamped);
        (clamped, off)
    }

    pub fn clear_inspected(&mut self) {
        self.inspected.clear();
    }

    /// Canonical JSON snapshot; byte-stable for identical states.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("world state is always serializable")
    }
}
