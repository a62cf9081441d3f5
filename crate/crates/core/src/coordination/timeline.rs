use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::plan::Plan;
use crate::world::kinematics::{plan_motion, MotionError, MotionParams};
use crate::world::{Arm, WorldState};

use super::corridor::{leg_corridor, Corridor};
use super::{ArmAssignment, CoordinationParams, OccupancyGrid, ProjectedView};

/// Space-time claim of one arm for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservation {
    pub arm: Arm,
    pub step_id: u32,
    pub corridor: Corridor,
    pub t_start: f64,
    pub t_end: f64,
}

impl Reservation {
    pub fn overlaps_in_time(&self, start: f64, end: f64) -> bool {
        self.t_start < end && start < self.t_end
    }

    pub fn overlaps_in_space(&self, corridor: &Corridor) -> bool {
        self.corridor
            .iter()
            .any(|a| corridor.iter().any(|b| a.overlaps(b)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledStep {
    pub step_id: u32,
    pub assignment: ArmAssignment,
    pub start: f64,
    pub end: f64,
    pub reservations: Vec<Reservation>,
    /// Static obstacle cells under this step's corridors.
    pub obstacle_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    /// In plan order.
    pub scheduled: Vec<ScheduledStep>,
    pub origin: f64,
    pub makespan: f64,
}

impl Timeline {
    pub fn reservations(&self) -> impl Iterator<Item = &Reservation> {
        self.scheduled.iter().flat_map(|s| s.reservations.iter())
    }

    /// Entries in dispatch order: by start time, then step id.
    pub fn dispatch_order(&self) -> Vec<&ScheduledStep> {
        let mut v: Vec<&ScheduledStep> = self.scheduled.iter().collect();
        v.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.step_id.cmp(&b.step_id)));
        v
    }

    /// One line per step: `step=<id> arm=<arms> start=<s> end=<e>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.scheduled {
            let _ = writeln!(
                out,
                "step={} arm={} start={:.4} end={:.4}",
                s.step_id,
                s.assignment.label(),
                s.start,
                s.end
            );
        }
        out
    }
}

/// Greedy list scheduling in plan order.
///
/// A step starts at the earliest time not before its dependencies, its
/// arm(s)' previous step and the current clock, such that none of its
/// corridors meets a corridor the other arm holds over an overlapping
/// interval. Conflicts are resolved by delaying the later step.
pub fn build_timeline(
    plan: &Plan,
    assignment: &[ArmAssignment],
    world: &WorldState,
    motion: &MotionParams,
    params: &CoordinationParams,
) -> Result<Timeline, MotionError> {
    let origin = world.clock;
    let grid = OccupancyGrid::from_world(world, params.cell_size);
    let mut view = ProjectedView::of(world);
    let mut arm_free: BTreeMap<Arm, f64> = world
        .arms
        .iter()
        .map(|a| (a.arm, a.busy_until.max(origin)))
        .collect();
    let mut ends: BTreeMap<u32, f64> = BTreeMap::new();
    let mut accepted: Vec<Reservation> = Vec::new();
    let mut scheduled = Vec::with_capacity(plan.steps.len());

    for (step, &asg) in plan.steps.iter().zip(assignment) {
        let m = plan_motion(step, asg, &view, motion)?;
        let arms = asg.arms();
        let mut ready = origin;
        for d in &step.depends_on {
            if let Some(&e) = ends.get(d) {
                ready = ready.max(e);
            }
        }
        for a in &arms {
            ready = ready.max(arm_free.get(a).copied().unwrap_or(origin));
        }

        let mut corridors: Vec<(Arm, Corridor)> = Vec::new();
        for leg in &m.legs {
            let shapes = leg_corridor(leg, params.reservation_radius);
            match corridors.iter_mut().find(|(a, _)| *a == leg.arm) {
                Some((_, c)) => c.extend(shapes),
                None => corridors.push((leg.arm, shapes)),
            }
        }

        let duration = m.duration;
        let mut t = ready;
        if duration > 0.0 {
            loop {
                let blocking = accepted
                    .iter()
                    .filter(|r| !arms.contains(&r.arm) && r.overlaps_in_time(t, t + duration))
                    .filter(|r| corridors.iter().any(|(_, c)| r.overlaps_in_space(c)))
                    .map(|r| r.t_end)
                    .fold(f64::NEG_INFINITY, f64::max);
                if blocking == f64::NEG_INFINITY {
                    break;
                }
                t = blocking;
            }
        }
        let end = t + duration;

        let reservations: Vec<Reservation> = if duration > 0.0 {
            corridors
                .iter()
                .map(|(arm, c)| Reservation {
                    arm: *arm,
                    step_id: step.id,
                    corridor: c.clone(),
                    t_start: t,
                    t_end: end,
                })
                .collect()
        } else {
            Vec::new()
        };
        let obstacle_cells = corridors
            .iter()
            .flat_map(|(_, c)| c.iter())
            .map(|s| grid.obstacle_cells_under(s))
            .sum();
        accepted.extend(reservations.iter().cloned());
        for a in &arms {
            arm_free.insert(*a, end);
        }
        ends.insert(step.id, end);
        view.advance(step, asg, &m);
        scheduled.push(ScheduledStep {
            step_id: step.id,
            assignment: asg,
            start: t,
            end,
            reservations,
            obstacle_cells,
        });
    }

    let makespan = scheduled.iter().map(|s| s.end).fold(origin, f64::max);
    Ok(Timeline {
        scheduled,
        origin,
        makespan,
    })
}
