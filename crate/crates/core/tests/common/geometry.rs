use deskclean::coordination::{assign_arms, build_timeline, CoordinationParams, Reservation};
use deskclean::geom::{Capsule, Pose2D, Rect, Shape, Vec2};
use deskclean::harness::{generate_scenario, ScenarioParams};
use deskclean::plan::{validate_plan, ArmHint, Plan, PlanStep};
use deskclean::world::{MotionParams, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

fn point_rect(p: (f64, f64), r: &Rect) -> f64 {
    let dx = (r.x_min - p.0).max(0.0).max(p.0 - r.x_max);
    let dy = (r.y_min - p.1).max(0.0).max(p.1 - r.y_max);
    (dx * dx + dy * dy).sqrt()
}

fn xy(v: Vec2) -> (f64, f64) {
    (v.x, v.y)
}

const SAMPLES: usize = 400;

fn samples(a: (f64, f64), b: (f64, f64)) -> impl Iterator<Item = (f64, f64)> {
    (0..=SAMPLES).map(move |i| {
        let t = i as f64 / SAMPLES as f64;
        (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
    })
}

/// Upper bound on the core distance of two shapes from dense sampling.
fn sampled_core_distance(s: &Shape, o: &Shape) -> f64 {
    match (s, o) {
        (Shape::Capsule(a), Shape::Capsule(b)) => {
            let (a0, a1, b0, b1) = (xy(a.seg.a), xy(a.seg.b), xy(b.seg.a), xy(b.seg.b));
            let ab = samples(a0, a1).map(|p| point_segment(p, b0, b1)).fold(f64::INFINITY, f64::min);
            let ba = samples(b0, b1).map(|p| point_segment(p, a0, a1)).fold(f64::INFINITY, f64::min);
            ab.min(ba)
        }
        (Shape::Capsule(c), Shape::RoundedRect { rect, .. }) | (Shape::RoundedRect { rect, .. }, Shape::Capsule(c)) => {
            samples(xy(c.seg.a), xy(c.seg.b)).map(|p| point_rect(p, rect)).fold(f64::INFINITY, f64::min)
        }
        (Shape::RoundedRect { rect: a, .. }, Shape::RoundedRect { rect: b, .. }) => {
            let dx = (a.x_min - b.x_max).max(b.x_min - a.x_max).max(0.0);
            let dy = (a.y_min - b.y_max).max(b.y_min - a.y_max).max(0.0);
            (dx * dx + dy * dy).sqrt()
        }
    }
}

fn radius(s: &Shape) -> f64 {
    match s {
        Shape::Capsule(c) => c.radius,
        Shape::RoundedRect { radius, .. } => *radius,
    }
}

pub fn cross_arm_conflicts(res: &[&Reservation]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, a) in res.iter().enumerate() {
        for b in &res[i + 1..] {
            if a.arm == b.arm || a.step_id == b.step_id {
                continue;
            }
            if a.t_start.max(b.t_start) >= a.t_end.min(b.t_end) - 1e-9 {
                continue;
            }
            for sa in &a.corridor {
                for sb in &b.corridor {
                    let d = sampled_core_distance(sa, sb);
                    if d < radius(sa) + radius(sb) - 1e-6 {
                        out.push(format!(
                            "step {} ({}) [{:.3},{:.3}] vs step {} ({}) [{:.3},{:.3}] core distance {d:.4}",
                            a.step_id, a.arm, a.t_start, a.t_end, b.step_id, b.arm, b.t_start, b.t_end
                        ));
                    }
                }
            }
        }
    }
    out
}

fn random_region(rng: &mut ChaCha8Rng, bounds: &Rect) -> Rect {
    let w = rng.random_range(0.05..0.35);
    let h = rng.random_range(0.04..0.25);
    let x = rng.random_range(bounds.x_min..bounds.x_max - w);
    let y = rng.random_range(bounds.y_min..bounds.y_max - h);
    Rect::new(x, y, x + w, y + h)
}

fn random_hint(rng: &mut ChaCha8Rng, bimanual: bool) -> ArmHint {
    let hints: &[ArmHint] = if bimanual {
        &[ArmHint::Left, ArmHint::Right, ArmHint::Any, ArmHint::Both]
    } else {
        &[ArmHint::Left, ArmHint::Right, ArmHint::Any]
    };
    hints[rng.random_range(0..hints.len())]
}

pub fn random_plan(rng: &mut ChaCha8Rng, world: &WorldState) -> Plan {
    let bounds = world.table.bounds();
    let mut steps: Vec<PlanStep> = Vec::new();
    let mut next = 1u32;
    let mut objects: Vec<_> = world.objects.iter().map(|o| o.id).collect();
    let n = rng.random_range(4..14);
    for _ in 0..n {
        let mut deps = Vec::new();
        if next > 1 && rng.random_bool(0.3) {
            deps.push(rng.random_range(1..next));
        }
        match rng.random_range(0..5) {
            0 | 1 if !objects.is_empty() => {
                let o = objects.swap_remove(rng.random_range(0..objects.len()));
                let pick = PlanStep::pick(next, o).with_arm(random_hint(rng, false)).with_depends(deps);
                let pose = Pose2D::at(
                    rng.random_range(bounds.x_min + 0.05..bounds.x_max - 0.05),
                    rng.random_range(bounds.y_min + 0.05..bounds.y_max - 0.05),
                );
                let place = PlanStep::place(next + 1, o, pose).with_depends(vec![next]);
                steps.push(pick);
                steps.push(place);
                next += 2;
                continue;
            }
            2 => {
                let angle: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                let dir = Vec2::new(angle.cos(), angle.sin());
                steps.push(
                    PlanStep::wipe(next, random_region(rng, &bounds), dir)
                        .with_arm(random_hint(rng, true))
                        .with_depends(deps),
                );
            }
            3 => {
                let region = random_region(rng, &bounds);
                let g = Pose2D::at(
                    rng.random_range(region.x_min..region.x_max),
                    rng.random_range(region.y_min..region.y_max),
                );
                steps.push(
                    PlanStep::consolidate(next, region, g)
                        .with_arm(random_hint(rng, true))
                        .with_depends(deps),
                );
            }
            _ => {
                steps.push(
                    PlanStep::inspect_region(next, random_region(rng, &bounds))
                        .with_arm(random_hint(rng, false))
                        .with_depends(deps),
                );
            }
        }
        next += 1;
    }
    Plan {
        plan_id: "random".into(),
        steps,
        created_at: 0,
    }
}

pub fn exact_segment_distance(a0: (f64, f64), a1: (f64, f64), b0: (f64, f64), b1: (f64, f64)) -> f64 {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (d1, d2) = (orient(a0, a1, b0), orient(a0, a1, b1));
    let (d3, d4) = (orient(b0, b1, a0), orient(b0, b1, a1));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    point_segment(a0, b0, b1)
        .min(point_segment(a1, b0, b1))
        .min(point_segment(b0, a0, a1))
        .min(point_segment(b1, a0, a1))
}

/// Overlap decided on a 1 mm grid of sample points.
pub fn raster_overlap(a: &Capsule, b: &Capsule) -> bool {
    const CELL: f64 = 0.001;
    let bound = |c: &Capsule| {
        (
            c.seg.a.x.min(c.seg.b.x) - c.radius,
            c.seg.a.y.min(c.seg.b.y) - c.radius,
            c.seg.a.x.max(c.seg.b.x) + c.radius,
            c.seg.a.y.max(c.seg.b.y) + c.radius,
        )
    };
    let (ba, bb) = (bound(a), bound(b));
    let (x0, y0, x1, y1) = (ba.0.max(bb.0), ba.1.max(bb.1), ba.2.min(bb.2), ba.3.min(bb.3));
    if x0 > x1 || y0 > y1 {
        return false;
    }
    let inside = |c: &Capsule, p: (f64, f64)| point_segment(p, xy(c.seg.a), xy(c.seg.b)) <= c.radius;
    let nx = ((x1 - x0) / CELL).ceil() as usize;
    let ny = ((y1 - y0) / CELL).ceil() as usize;
    (0..nx).any(|i| {
        (0..ny).any(|j| {
            let p = (x0 + (i as f64 + 0.5) * CELL, y0 + (j as f64 + 0.5) * CELL);
            inside(a, p) && inside(b, p)
        })
    })
}


pub struct SafetySweep {
    pub accepted: usize,
    pub concurrent_pairs: usize,
}

/// Random plans over generated worlds, each accepted timeline checked pair by
/// pair for cross-arm overlap.
pub fn safety_sweep(plans: u64, seed: u64) -> Result<SafetySweep, String> {
    let motion = MotionParams::default();
    let params = CoordinationParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sweep = SafetySweep {
        accepted: 0,
        concurrent_pairs: 0,
    };
    for i in 0..plans {
        let scenario = generate_scenario(i as u32, seed.wrapping_add(i), &ScenarioParams::default())
            .map_err(|e| e.to_string())?;
        let world = scenario.world(2);
        let plan = random_plan(&mut rng, &world);
        if !validate_plan(&plan).is_empty() {
            return Err(format!("generator produced an invalid plan: {plan:?}"));
        }
        let asg = assign_arms(&plan, &world, &motion);
        let Ok(timeline) = build_timeline(&plan, &asg, &world, &motion, &params) else {
            continue;
        };
        sweep.accepted += 1;
        let res: Vec<&Reservation> = timeline.reservations().collect();
        for (k, a) in res.iter().enumerate() {
            for b in &res[k + 1..] {
                if a.arm != b.arm && a.t_start.max(b.t_start) < a.t_end.min(b.t_end) {
                    sweep.concurrent_pairs += 1;
                }
            }
        }
        let conflicts = cross_arm_conflicts(&res);
        if !conflicts.is_empty() {
            return Err(format!("plan {i}: {conflicts:#?}"));
        }
    }
    Ok(sweep)
}

/// Compares capsule overlap with the 1 mm raster on `pairs` random pairs
/// away from tangency; returns how many overlapped.
pub fn capsule_raster_sweep(pairs: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut overlapping) = (0, 0);
    let point = |rng: &mut ChaCha8Rng| Vec2::new(rng.random_range(0.0..0.2), rng.random_range(0.0..0.2));
    while checked < pairs {
        let a = Capsule::new(point(&mut rng), point(&mut rng), rng.random_range(0.005..0.04));
        let b = Capsule::new(point(&mut rng), point(&mut rng), rng.random_range(0.005..0.04));
        let clearance =
            exact_segment_distance(xy(a.seg.a), xy(a.seg.b), xy(b.seg.a), xy(b.seg.b)) - a.radius - b.radius;
        // Within two cells of tangency the grid cannot decide.
        if clearance.abs() < 0.002 {
            continue;
        }
        let expected = raster_overlap(&a, &b);
        if Shape::Capsule(a).overlaps(&Shape::Capsule(b)) != expected {
            return Err(format!("capsules {a:?} {b:?} clearance {clearance}"));
        }
        checked += 1;
        overlapping += expected as usize;
    }
    Ok(overlapping)
}
