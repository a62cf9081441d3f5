//! Deterministic rule-based planner and its failure-revision ladder.

use std::collections::BTreeSet;

use crate::geom::{Pose2D, Rect, Vec2};
use crate::plan::{step_goal_met, ArmHint, Plan, PlanBuilder, PlanStep, Primitive};
use crate::scenegraph::{DebrisCluster, SceneGraph};
use crate::coordination::ArmAssignment;
use crate::world::kinematics::{plan_motion, split_axis, KinematicView, MotionParams};
use crate::world::{Arm, Category, FailureKind, ObjectId, TableSpec};

use super::ReflectionContext;

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedConfig {
    /// Width of the x-bands that each get one wipe.
    pub band_width: f64,
    /// Smallest cluster worth a consolidation pass.
    pub min_consolidate: usize,
    /// Clearance added around debris when sizing regions.
    pub region_pad: f64,
    /// Height of the gather point above the collection zone's back edge.
    pub gather_offset: f64,
    /// Distance wipes stop short of the collection zone's front edge.
    pub wipe_inset: f64,
    pub slot_margin: f64,
    pub slot_pitch: f64,
    /// Region steps estimated longer than this are split before planning.
    pub step_budget: f64,
    pub motion: MotionParams,
}

impl Default for ScriptedConfig {
    fn default() -> Self {
        Self {
            band_width: 0.20,
            min_consolidate: 3,
            region_pad: 0.01,
            gather_offset: 0.03,
            wipe_inset: 0.01,
            slot_margin: 0.025,
            slot_pitch: 0.05,
            step_budget: 15.0,
            motion: MotionParams::default(),
        }
    }
}

/// Both arms parked at one point; enough to size a region step.
struct ParkedView {
    at: Vec2,
    height_offset: f64,
}

impl KinematicView for ParkedView {
    fn ee(&self, _arm: Arm) -> Option<Vec2> {
        Some(self.at)
    }

    fn object(&self, _id: ObjectId) -> Option<(Vec2, Option<Arm>)> {
        None
    }

    fn height_offset(&self) -> f64 {
        self.height_offset
    }
}

const MAX_SPLIT_DEPTH: u32 = 4;

/// Grid of drop positions inside the tray, row-major from the front-left.
pub fn tray_slots(table: &TableSpec, cfg: &ScriptedConfig) -> Vec<Vec2> {
    let t = table.tray_zone;
    let mut slots = Vec::new();
    let mut y = t.y_min + cfg.slot_margin;
    while y <= t.y_max - cfg.slot_margin + 1e-9 {
        let mut x = t.x_min + cfg.slot_margin;
        while x <= t.x_max - cfg.slot_margin + 1e-9 {
            slots.push(Vec2::new(x, y));
            x += cfg.slot_pitch;
        }
        y += cfg.slot_pitch;
    }
    slots
}

/// Free/used bookkeeping over the tray slots.
struct SlotBook {
    slots: Vec<Vec2>,
    used: Vec<bool>,
    fallback: Vec2,
}

impl SlotBook {
    fn new(scene: &SceneGraph, cfg: &ScriptedConfig) -> Self {
        let slots = tray_slots(&scene.table, cfg);
        let mut book = Self {
            used: vec![false; slots.len()],
            slots,
            fallback: scene.table.tray_zone.center(),
        };
        for o in scene.objects.iter().filter(|o| scene.in_tray(o)) {
            if let Some(i) = book.nearest(o.observed_pose.pos(), true) {
                book.used[i] = true;
            }
        }
        book
    }

    fn nearest(&self, p: Vec2, include_used: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in self.slots.iter().enumerate() {
            if self.used[i] && !include_used {
                continue;
            }
            let d = s.dist(p);
            if best.is_none_or(|(_, bd)| d < bd - 1e-12) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }

    fn take(&mut self, near: Vec2) -> Vec2 {
        match self.nearest(near, false) {
            Some(i) => {
                self.used[i] = true;
                self.slots[i]
            }
            None => self.fallback,
        }
    }
}

struct Ctx<'a> {
    scene: &'a SceneGraph,
    cfg: &'a ScriptedConfig,
    slots: SlotBook,
    b: PlanBuilder,
    arm_pos: Vec<(Arm, Vec2)>,
}

impl<'a> Ctx<'a> {
    fn new(scene: &'a SceneGraph, cfg: &'a ScriptedConfig) -> Self {
        Self {
            scene,
            cfg,
            slots: SlotBook::new(scene, cfg),
            b: PlanBuilder::new(),
            arm_pos: scene.arms.iter().map(|a| (a.arm, a.ee)).collect(),
        }
    }

    fn move_arm(&mut self, arm: Arm, to: Vec2) {
        if let Some(e) = self.arm_pos.iter_mut().find(|(a, _)| *a == arm) {
            e.1 = to;
        }
    }

    fn nearest_arm(&self, p: Vec2) -> Option<Arm> {
        let mut best: Option<(Arm, f64)> = None;
        for &(arm, q) in &self.arm_pos {
            let d = q.dist(p);
            if best.is_none_or(|(_, bd)| d < bd - 1e-12) {
                best = Some((arm, d));
            }
        }
        best.map(|(a, _)| a)
    }

    /// Places whatever the grippers currently hold, with the holding arm.
    fn place_held(&mut self) {
        let held: Vec<(Arm, ObjectId)> = self
            .scene
            .arms
            .iter()
            .filter_map(|a| a.holding.as_ref().map(|h| (a.arm, h.id)))
            .collect();
        for (arm, id) in held {
            let from = self.arm_pos.iter().find(|(a, _)| *a == arm).map(|e| e.1).unwrap_or_default();
            let slot = self.slots.take(from);
            let hint = match arm {
                Arm::Left => ArmHint::Left,
                Arm::Right => ArmHint::Right,
            };
            self.b.push(PlanStep::place(0, id, Pose2D::at(slot.x, slot.y)).with_arm(hint));
            self.move_arm(arm, slot);
        }
    }

    fn pick_and_place(&mut self, id: ObjectId, at: Vec2) {
        let slot = self.slots.take(at);
        let pick = self.b.push(PlanStep::pick(0, id));
        self.b.push(PlanStep::place(0, id, Pose2D::at(slot.x, slot.y)).with_depends(vec![pick]));
        if let Some(arm) = self.nearest_arm(at) {
            self.move_arm(arm, slot);
        }
    }

    /// Greedy nearest (arm, object) pairing; ties go to the smaller object
    /// id, then to the left arm.
    fn relocate(&mut self, mut todo: Vec<(ObjectId, Vec2)>) {
        todo.sort_by_key(|(id, _)| *id);
        while !todo.is_empty() {
            let mut best: Option<(usize, f64)> = None;
            for (i, &(_, p)) in todo.iter().enumerate() {
                for &(_, q) in &self.arm_pos {
                    let d = q.dist(p);
                    if best.is_none_or(|(_, bd)| d < bd - 1e-12) {
                        best = Some((i, d));
                    }
                }
            }
            let Some((i, _)) = best else { break };
            let (id, p) = todo.remove(i);
            self.pick_and_place(id, p);
        }
    }

    fn needs_relocation(&self, skip: &BTreeSet<ObjectId>) -> Vec<(ObjectId, Vec2, Category)> {
        self.scene
            .objects
            .iter()
            .filter(|o| o.category.is_valuable() && !self.scene.in_tray(o) && !skip.contains(&o.id))
            .map(|o| (o.id, o.observed_pose.pos(), o.category))
            .collect()
    }

    fn objects(&mut self, skip: &BTreeSet<ObjectId>) {
        let todo = self.needs_relocation(skip);
        let fragile: Vec<(ObjectId, Vec2)> = todo
            .iter()
            .filter(|t| t.2 == Category::Fragile)
            .map(|t| (t.0, t.1))
            .collect();
        let rigid: Vec<(ObjectId, Vec2)> = todo
            .iter()
            .filter(|t| t.2 != Category::Fragile)
            .map(|t| (t.0, t.1))
            .collect();
        if !fragile.is_empty() {
            let ids = {
                let mut v: Vec<ObjectId> = fragile.iter().map(|f| f.0).collect();
                v.sort();
                v
            };
            self.b.push(PlanStep::inspect_objects(0, ids));
        }
        self.relocate(fragile);
        self.relocate(rigid);
    }

    /// Estimated duration of a region step started from its region center.
    fn region_estimate(&self, step: &PlanStep) -> f64 {
        let Some(region) = step.region else { return 0.0 };
        let view = ParkedView {
            at: region.center(),
            height_offset: self.scene.table.height_offset,
        };
        let asg = match self.scene.arms.as_slice() {
            [a] => ArmAssignment::Sequential(a.arm),
            _ => ArmAssignment::Both,
        };
        plan_motion(step, asg, &view, &self.cfg.motion).map_or(0.0, |m| m.duration)
    }

    /// Pushes a region step, halving it until each piece fits the budget.
    fn push_region(&mut self, step: PlanStep) -> Vec<u32> {
        let mut out = Vec::new();
        self.push_region_at(step, 0, &mut out);
        out
    }

    fn push_region_at(&mut self, step: PlanStep, depth: u32, out: &mut Vec<u32>) {
        if depth < MAX_SPLIT_DEPTH && self.region_estimate(&step) > self.cfg.step_budget {
            if let Some(region) = step.region {
                let (a, b) = region.split_across(split_axis(&step));
                for half in [a, b] {
                    let mut s = step.clone();
                    s.region = Some(half);
                    self.push_region_at(s, depth + 1, out);
                }
                return;
            }
        }
        out.push(self.b.push(step));
    }

    fn debris_region(&self, c: &DebrisCluster) -> Rect {
        let reach = c.radius + c.max_diameter() / 2.0 + self.cfg.region_pad;
        Rect::centered(c.centroid, 2.0 * reach, 2.0 * reach)
    }

    fn gather_point(&self, c: &DebrisCluster) -> Vec2 {
        let t = &self.scene.table;
        let x = c.centroid.x.clamp(0.05, t.width - 0.05);
        Vec2::new(x, t.collection_zone.y_max + self.cfg.gather_offset)
    }

    /// Consolidation of large clusters, then one bimanual wipe per x-band.
    /// Clusters with every member inside a `settled` region are skipped;
    /// those inside a `no_consolidate` region are only wiped.
    fn debris(&mut self, settled: &[Rect], no_consolidate: &[Rect], extra_deps: &[u32]) {
        let table = self.scene.table.bounds();
        let inside = |c: &DebrisCluster, rs: &[Rect]| {
            rs.iter().any(|r| c.members.iter().all(|p| r.contains(p.pose.pos())))
        };
        let clusters: Vec<&DebrisCluster> = self
            .scene
            .debris_clusters
            .iter()
            .filter(|c| !inside(c, settled))
            .collect();
        if clusters.is_empty() {
            return;
        }
        let band_of = |c: &DebrisCluster| (c.centroid.x / self.cfg.band_width).floor().max(0.0) as usize;
        let mut bands: Vec<(usize, Option<Rect>, Vec<u32>)> = Vec::new();
        for c in &clusters {
            let band = band_of(c);
            let disc = self.debris_region(c);
            let mut cover = disc;
            let mut deps = Vec::new();
            if c.count >= self.cfg.min_consolidate && !inside(c, no_consolidate) {
                let members = c
                    .members
                    .iter()
                    .fold(Rect::new(c.centroid.x, c.centroid.y, c.centroid.x, c.centroid.y), |r, p| r.expand_to(p.pose.pos()));
                let region = members
                    .inflate(c.max_diameter() / 2.0 + self.cfg.region_pad)
                    .intersection(&table)
                    .unwrap_or(disc);
                let gather = self.gather_point(c);
                let ids =
                    self.push_region(PlanStep::consolidate(0, region, Pose2D::at(gather.x, gather.y)).with_arm(ArmHint::Both));
                deps.extend(ids);
                cover = cover.expand_to(gather);
            }
            match bands.iter_mut().find(|(b, _, _)| *b == band) {
                Some((_, r, d)) => {
                    *r = Some(r.map_or(cover, |r| r.union(&cover)));
                    d.extend(deps);
                }
                None => bands.push((band, Some(cover), deps)),
            }
        }
        bands.sort_by_key(|(b, _, _)| *b);
        let floor = self.scene.table.collection_zone.y_min + self.cfg.wipe_inset;
        for (_, cover, mut deps) in bands {
            let Some(cover) = cover else { continue };
            let region = Rect::new(cover.x_min, floor, cover.x_max, cover.y_max.max(floor + 0.01));
            let region = region.intersection(&table).unwrap_or(region);
            deps.extend_from_slice(extra_deps);
            deps.sort();
            deps.dedup();
            self.push_region(
                PlanStep::wipe(0, region, Vec2::new(0.0, -1.0))
                    .with_arm(ArmHint::Both)
                    .with_verify(true)
                    .with_depends(deps),
            );
        }
    }

    fn finish(self, plan_id: String, cycle: u32) -> Plan {
        self.b.build(plan_id, cycle)
    }
}

/// The fixed-priority plan for a scene: place held items, inspect fragile
/// items, relocate fragile then rigid items, consolidate, wipe.
pub fn scripted_strategy(scene: &SceneGraph, cfg: &ScriptedConfig) -> Plan {
    plan_for(scene, cfg, 0, &BTreeSet::new())
}

fn plan_for(scene: &SceneGraph, cfg: &ScriptedConfig, cycle: u32, skip: &BTreeSet<ObjectId>) -> Plan {
    let mut c = Ctx::new(scene, cfg);
    c.place_held();
    c.objects(skip);
    c.debris(&[], &[], &[]);
    c.finish(format!("scripted-c{cycle}"), cycle)
}

/// Revised plan after a failure: a ladder prefix addressing the failed step,
/// then the fixed strategy over whatever else is still unmet.
///
/// Objects in `ctx.abandoned` are never targeted again.
pub fn scripted_reflect(ctx: &ReflectionContext, cfg: &ScriptedConfig) -> Plan {
    let scene = &ctx.scene;
    let step = &ctx.failure.step;
    let mut c = Ctx::new(scene, cfg);
    c.place_held();

    let mut skip: BTreeSet<ObjectId> = ctx.abandoned.iter().copied().collect();
    let mut settled = Vec::new();
    let mut no_consolidate = Vec::new();
    let mut extra_deps = Vec::new();

    match step.primitive {
        Primitive::Pick | Primitive::Place => {
            if let Some(id) = step.first_target() {
                let needs_work = !ctx.abandoned.contains(&id)
                    && scene.holder_of(id).is_none()
                    && scene.object(id).is_some_and(|o| !scene.in_tray(o));
                if needs_work {
                    let at = scene.object(id).map(|o| o.observed_pose.pos()).unwrap_or_default();
                    c.b.push(PlanStep::inspect_objects(0, vec![id]));
                    if step.primitive == Primitive::Pick {
                        c.pick_and_place(id, at);
                    } else {
                        let slot = c.slots.take(at);
                        c.b.push(PlanStep::place(0, id, Pose2D::at(slot.x, slot.y)));
                        if let Some(arm) = c.nearest_arm(at) {
                            c.move_arm(arm, slot);
                        }
                    }
                }
                skip.insert(id);
            }
        }
        Primitive::Wipe | Primitive::Consolidate => {
            if ctx.failure.kind == FailureKind::Timeout && !step_goal_met(step, scene) {
                if let Some(region) = step.region {
                    let (a, b) = region.split_across(split_axis(step));
                    for half in [a, b] {
                        let mut s = step.clone();
                        s.region = Some(half);
                        s.depends_on = Vec::new();
                        extra_deps.extend(c.push_region(s));
                    }
                    if step.primitive == Primitive::Wipe {
                        settled.push(region);
                        extra_deps.clear();
                    } else {
                        no_consolidate.push(region);
                    }
                }
            }
        }
        Primitive::Inspect => {}
    }

    c.objects(&skip);
    c.debris(&settled, &no_consolidate, &extra_deps);
    c.finish(format!("scripted-c{}", ctx.cycle), ctx.cycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pose2D;
    use crate::plan::validate_plan;
    use crate::scenegraph::{cluster_debris, ArmObservation, ObservedObject};
    use crate::world::{DebrisParticle, SizeClass};

    fn observed(id: u32, cat: Category, x: f64, y: f64) -> ObservedObject {
        let pose = Pose2D::at(x, y);
        ObservedObject {
            id: ObjectId(id),
            label: "thing".into(),
            category: cat,
            observed_pose: pose,
            footprint: Rect::centered(pose.pos(), 0.04, 0.04),
            bounding_box: Rect::centered(pose.pos(), 0.04, 0.04),
        }
    }

    fn scene() -> SceneGraph {
        let table = TableSpec::default();
        let mut g = SceneGraph::empty(table.clone());
        g.arms = Arm::ALL
            .iter()
            .map(|&a| ArmObservation {
                arm: a,
                ee: table.default_home(a).pos(),
                holding: None,
            })
            .collect();
        g
    }

    fn crumbs(n: u32, x: f64, y: f64) -> Vec<DebrisParticle> {
        (0..n)
            .map(|i| DebrisParticle {
                id: 100 + i,
                pose: Pose2D::at(x + 0.005 * i as f64, y),
                size_class: SizeClass::Crumb,
                diameter: 0.002,
            })
            .collect()
    }

    fn prims(p: &Plan) -> Vec<Primitive> {
        p.steps.iter().map(|s| s.primitive).collect()
    }

    #[test]
    fn empty_scene_gives_empty_plan() {
        assert!(scripted_strategy(&scene(), &ScriptedConfig::default()).is_empty());
    }

    #[test]
    fn priority_order_is_fixed() {
        let mut g = scene();
        g.objects = vec![observed(1, Category::Rigid, 0.3, 0.3), observed(2, Category::Fragile, 0.6, 0.3)];
        g.debris_clusters = cluster_debris(&crumbs(5, 0.4, 0.2), 0.04);
        let p = scripted_strategy(&g, &ScriptedConfig::default());
        use Primitive::*;
        assert_eq!(prims(&p), vec![Inspect, Pick, Place, Pick, Place, Consolidate, Wipe]);
        assert_eq!(p.steps[1].targets, vec![ObjectId(2)]);
        assert!(validate_plan(&p).is_empty());
        let wipe = p.steps.last().unwrap();
        assert_eq!(wipe.arm, ArmHint::Both);
        assert_eq!(wipe.depends_on, vec![6]);
    }

    #[test]
    fn debris_only_scene_has_no_object_steps() {
        let mut g = scene();
        g.debris_clusters = cluster_debris(&crumbs(2, 0.4, 0.2), 0.04);
        let p = scripted_strategy(&g, &ScriptedConfig::default());
        assert!(p.steps.iter().all(|s| matches!(s.primitive, Primitive::Wipe | Primitive::Consolidate | Primitive::Inspect)));
        assert_eq!(prims(&p), vec![Primitive::Wipe]);
    }

    #[test]
    fn equidistant_objects_go_smaller_id_first() {
        let mut g = scene();
        g.arms.truncate(1);
        // both 0.2 m from the left home at (0.05, 0.30)
        g.objects = vec![observed(7, Category::Rigid, 0.05, 0.10), observed(3, Category::Rigid, 0.25, 0.30)];
        g.objects.sort_by_key(|o| o.id);
        let p = scripted_strategy(&g, &ScriptedConfig::default());
        assert_eq!(p.steps[0].targets, vec![ObjectId(3)]);
    }

    #[test]
    fn slots_fill_the_tray() {
        let s = tray_slots(&TableSpec::default(), &ScriptedConfig::default());
        assert_eq!(s.len(), 24);
        let tray = TableSpec::default().tray_zone;
        assert!(s.iter().all(|p| tray.contains(*p)));
    }
}
