use rand::Rng;
use rand_distr::StandardNormal;

use crate::coordination::ArmAssignment;
use crate::geom::{Rect, Vec2};
use crate::plan::{PlanStep, Primitive};

use super::kinematics::{plan_motion, Motion, MotionError, MotionParams};
use super::{
    detect_failure, Arm, Category, FailureInjectionConfig, FailureKind, ObjectId, StepOutcome,
    StepStatus, Thresholds, WorldState,
};

/// Simulator constants beyond the motion model.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub motion: MotionParams,
    pub thresholds: Thresholds,
    /// Upper bound of the displacement a slipping grasp imparts.
    pub slip_max_displacement: f64,
    /// Slack beyond the table edge before displacements are clamped.
    pub apron: f64,
    /// Range of peak forces drawn for an injected force event, newtons.
    pub force_peak_range: (f64, f64),
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            motion: MotionParams::default(),
            thresholds: Thresholds::default(),
            slip_max_displacement: 0.03,
            apron: 0.05,
            force_peak_range: (20.0, 40.0),
        }
    }
}

/// Errors that abort an episode; these are never shown to the planner.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("target {0} does not exist")]
    TargetMissing(ObjectId),
    #[error("arm {arm} is busy until {until:.4}s (step starts at {at:.4}s)")]
    ArmBusy { arm: Arm, until: f64, at: f64 },
    #[error("arm {0} is not present")]
    ArmMissing(Arm),
    #[error("{object} is held by arm {arm}")]
    HeldByOther { object: ObjectId, arm: Arm },
    #[error("arm {arm} already holds {object}")]
    GripperOccupied { arm: Arm, object: ObjectId },
    #[error("step {0} is missing a required parameter")]
    MissingParameter(u32),
}

impl From<MotionError> for WorldError {
    fn from(e: MotionError) -> Self {
        match e {
            MotionError::MissingTarget(id) => WorldError::TargetMissing(id),
            MotionError::MissingArm(a) => WorldError::ArmMissing(a),
            MotionError::MissingParameter(s) => WorldError::MissingParameter(s),
        }
    }
}

struct ForceEvent {
    peak: Option<f64>,
}

fn draw_force_event<R: Rng + ?Sized>(rng: &mut R, cfg: &FailureInjectionConfig, params: &SimParams) -> ForceEvent {
    let u: f64 = rng.random();
    let (lo, hi) = params.force_peak_range;
    let magnitude = lo + (hi - lo) * rng.random::<f64>();
    ForceEvent {
        peak: (u < cfg.p_force_exceed).then_some(magnitude),
    }
}

/// Executes one plan step starting at `start` (absolute episode seconds).
///
/// The world is mutated according to the primitive's kinematic semantics,
/// the involved arms become busy until `start + duration`, and the clock
/// moves forward to `start` if it lags behind.
pub fn execute_primitive<R: Rng + ?Sized>(
    world: &mut WorldState,
    step: &PlanStep,
    assignment: ArmAssignment,
    start: f64,
    cfg: &FailureInjectionConfig,
    params: &SimParams,
    rng: &mut R,
) -> Result<StepOutcome, WorldError> {
    let arms = assignment.arms();
    for &arm in &arms {
        let state = world.arm(arm).ok_or(WorldError::ArmMissing(arm))?;
        if state.busy_until > start + 1e-9 {
            return Err(WorldError::ArmBusy {
                arm,
                until: state.busy_until,
                at: start,
            });
        }
    }
    check_preconditions(world, step, assignment)?;
    let motion = plan_motion(step, assignment, world, &params.motion)?;

    let mut outcome = StepOutcome::success(step.id, motion.duration);
    match step.primitive {
        Primitive::Pick => apply_pick(world, step, assignment, cfg, params, rng, &mut outcome)?,
        Primitive::Place => apply_place(world, step, assignment, cfg, params, rng, &mut outcome)?,
        Primitive::Wipe => apply_wipe(world, step, cfg, params, rng, &mut outcome)?,
        Primitive::Consolidate => apply_consolidate(world, step, cfg, params, rng, &mut outcome)?,
        Primitive::Inspect => apply_inspect(world, step),
    }

    finish_arms(world, &motion, start);
    world.clock = world.clock.max(start);

    outcome.failure_kind = detect_failure(&outcome, step, &params.thresholds);
    outcome.status = match outcome.failure_kind {
        None => StepStatus::Success,
        Some(FailureKind::Timeout) => StepStatus::Timeout,
        Some(_) => StepStatus::Failure,
    };
    Ok(outcome)
}

fn check_preconditions(world: &WorldState, step: &PlanStep, assignment: ArmAssignment) -> Result<(), WorldError> {
    for &id in &step.targets {
        let obj = world.object(id).ok_or(WorldError::TargetMissing(id))?;
        if let Some(holder) = obj.held_by {
            let allowed = step.primitive == Primitive::Place && assignment.arms().contains(&holder);
            if !allowed && step.primitive != Primitive::Inspect {
                return Err(WorldError::HeldByOther { object: id, arm: holder });
            }
        }
    }
    if step.primitive == Primitive::Pick {
        if let ArmAssignment::Single(arm) = assignment {
            if let Some(held) = world.arm(arm).and_then(|a| a.holding) {
                return Err(WorldError::GripperOccupied { arm, object: held });
            }
        }
    }
    Ok(())
}

fn finish_arms(world: &mut WorldState, motion: &Motion, start: f64) {
    for leg_arm in Arm::ALL {
        if let Some(end) = motion.end_pose(leg_arm) {
            if let Some(a) = world.arm_mut(leg_arm) {
                a.ee_pose = a.ee_pose.with_pos(end);
                a.busy_until = start + motion.duration;
            }
        }
    }
}

fn single_arm(step: &PlanStep, assignment: ArmAssignment) -> Result<Arm, WorldError> {
    match assignment {
        ArmAssignment::Single(a) | ArmAssignment::Sequential(a) => Ok(a),
        ArmAssignment::Both => Err(WorldError::MissingParameter(step.id)),
    }
}

fn apply_pick<R: Rng + ?Sized>(
    world: &mut WorldState,
    step: &PlanStep,
    assignment: ArmAssignment,
    cfg: &FailureInjectionConfig,
    params: &SimParams,
    rng: &mut R,
    outcome: &mut StepOutcome,
) -> Result<(), WorldError> {
    let arm = single_arm(step, assignment)?;
    let id = step.first_target().ok_or(WorldError::MissingParameter(step.id))?;
    let force = draw_force_event(rng, cfg, params);
    let u_slip: f64 = rng.random();
    let angle = rng.random::<f64>() * std::f64::consts::TAU;
    let magnitude = rng.random::<f64>() * params.slip_max_displacement;

    let obj = world.object(id).ok_or(WorldError::TargetMissing(id))?;
    let p_slip = match obj.category {
        Category::Fragile => cfg.p_slip_fragile,
        _ => cfg.p_slip_rigid,
    };
    let limit = step.force_threshold.unwrap_or(params.thresholds.default_force_threshold);
    outcome.peak_force = force.peak;

    if force.peak.is_some_and(|f| f > limit) {
        // controller backs off before closing the gripper
        return Ok(());
    }
    if u_slip < p_slip {
        let origin = obj.pose.pos();
        let target = origin + Vec2::new(angle.cos(), angle.sin()) * magnitude;
        let (pos, off) = world.clamp_displacement(target, params.apron);
        let obj = world.object_mut(id).expect("checked above");
        obj.pose = obj.pose.with_pos(pos);
        obj.off_table |= off;
        outcome.slipped = true;
        outcome.measured_pose_error = origin.dist(pos);
        return Ok(());
    }
    world.object_mut(id).expect("checked above").held_by = Some(arm);
    world.arm_mut(arm).expect("checked above").holding = Some(id);
    Ok(())
}

fn apply_place<R: Rng + ?Sized>(
    world: &mut WorldState,
    step: &PlanStep,
    assignment: ArmAssignment,
    cfg: &FailureInjectionConfig,
    params: &SimParams,
    rng: &mut R,
    outcome: &mut StepOutcome,
) -> Result<(), WorldError> {
    let arm = single_arm(step, assignment)?;
    let id = step.first_target().ok_or(WorldError::MissingParameter(step.id))?;
    let target = step.target_pose.ok_or(WorldError::MissingParameter(step.id))?;
    let force = draw_force_event(rng, cfg, params);
    let nx: f64 = rng.sample(StandardNormal);
    let ny: f64 = rng.sample(StandardNormal);
    let sigma = cfg.place_noise_sigma;
    let noisy = target.pos() + Vec2::new(nx, ny) * sigma;
    let (pos, off) = world.clamp_displacement(noisy, params.apron);
    let limit = step.force_threshold.unwrap_or(params.thresholds.default_force_threshold);
    let exceeded = force.peak.is_some_and(|f| f > limit);

    let obj = world.object_mut(id).ok_or(WorldError::TargetMissing(id))?;
    obj.pose = target.with_pos(pos);
    obj.pose.theta = crate::geom::normalize_angle(obj.pose.theta);
    obj.held_by = None;
    obj.off_table = off;
    if exceeded && obj.category == Category::Fragile {
        obj.mark_damaged();
    }
    if let Some(a) = world.arm_mut(arm) {
        if a.holding == Some(id) {
            a.holding = None;
        }
    }
    outcome.peak_force = force.peak;
    outcome.measured_pose_error = target.pos().dist(pos);
    Ok(())
}

fn apply_wipe<R: Rng + ?Sized>(
    world: &mut WorldState,
    step: &PlanStep,
    cfg: &FailureInjectionConfig,
    params: &SimParams,
    rng: &mut R,
    outcome: &mut StepOutcome,
) -> Result<(), WorldError> {
    let region = step.region.ok_or(WorldError::MissingParameter(step.id))?;
    let dir = step.direction.ok_or(WorldError::MissingParameter(step.id))?;
    let force = draw_force_event(rng, cfg, params);
    outcome.peak_force = force.peak;
    let limit = step.force_threshold.unwrap_or(params.thresholds.default_force_threshold);
    if force.peak.is_some_and(|f| f > limit) {
        return Ok(());
    }
    let collection = world.table.collection_zone;
    let mut worst_residual: f64 = 0.0;
    for p in world.particles.iter_mut() {
        let pos = p.pose.pos();
        if !region.contains(pos) {
            continue;
        }
        let stays = rng.random::<f64>() < cfg.wipe_residual_p;
        let travel = region.exit_distance(pos, dir);
        if stays {
            if !collection.contains(pos) {
                worst_residual = worst_residual.max(travel);
            }
            continue;
        }
        let shift = (travel - p.diameter / 2.0).max(0.0);
        p.pose = p.pose.with_pos(pos + dir * shift);
    }
    outcome.measured_pose_error = worst_residual;
    Ok(())
}

/// Position along `from → to` where a disc of radius `r` first touches any of
/// the `placed` discs, as a fraction of the segment. `None` if it never does.
fn first_contact(from: Vec2, to: Vec2, r: f64, placed: &[(Vec2, f64)]) -> Option<f64> {
    let d = to - from;
    let a = d.dot(d);
    let mut best: Option<f64> = None;
    for &(c, rc) in placed {
        let reach = r + rc;
        let f = from - c;
        let cc = f.dot(f) - reach * reach;
        if cc <= 0.0 {
            return Some(0.0);
        }
        if a < 1e-18 {
            continue;
        }
        let b = 2.0 * f.dot(d);
        let disc = b * b - 4.0 * a * cc;
        if disc < 0.0 {
            continue;
        }
        let t = (-b - disc.sqrt()) / (2.0 * a);
        if (0.0..=1.0).contains(&t) && best.is_none_or(|bt| t < bt) {
            best = Some(t);
        }
    }
    best
}

/// Sequential radial packing: in particle-id order, each particle slides
/// toward the gather point and stops at first contact with material already
/// gathered during this step.
pub(crate) fn pack_toward(particles: &mut [super::DebrisParticle], selected: &[usize], gather: Vec2) {
    let mut placed: Vec<(Vec2, f64)> = Vec::with_capacity(selected.len());
    for &i in selected {
        let p = &mut particles[i];
        let from = p.pose.pos();
        let r = p.diameter / 2.0;
        let end = match first_contact(from, gather, r, &placed) {
            Some(t) => from + (gather - from) * t,
            None => gather,
        };
        p.pose = p.pose.with_pos(end);
        placed.push((end, r));
    }
}

fn apply_consolidate<R: Rng + ?Sized>(
    world: &mut WorldState,
    step: &PlanStep,
    cfg: &FailureInjectionConfig,
    params: &SimParams,
    rng: &mut R,
    outcome: &mut StepOutcome,
) -> Result<(), WorldError> {
    let region: Rect = step.region.ok_or(WorldError::MissingParameter(step.id))?;
    let gather = step.gather_point.ok_or(WorldError::MissingParameter(step.id))?.pos();
    let force = draw_force_event(rng, cfg, params);
    outcome.peak_force = force.peak;
    let limit = step.force_threshold.unwrap_or(params.thresholds.default_force_threshold);
    if force.peak.is_some_and(|f| f > limit) {
        return Ok(());
    }
    let collection = world.table.collection_zone;
    let selected: Vec<usize> = world
        .particles
        .iter()
        .enumerate()
        .filter(|(_, p)| region.contains(p.pose.pos()) && !collection.contains(p.pose.pos()))
        .map(|(i, _)| i)
        .collect();
    pack_toward(&mut world.particles, &selected, gather);
    Ok(())
}

fn apply_inspect(world: &mut WorldState, step: &PlanStep) {
    let mut seen: Vec<ObjectId> = step.targets.clone();
    if let Some(region) = step.region {
        seen.extend(
            world
                .objects
                .iter()
                .filter(|o| o.held_by.is_none() && region.contains(o.pose.pos()))
                .map(|o| o.id),
        );
    }
    world.inspected.extend(seen);
}
