//! Planner-facing observation: noisy object snapshots, debris clusters,
//! spatial relations and a canonical text rendering.

mod cluster;
mod relations;
mod text;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geom::{Pose2D, Rect, Vec2};
use crate::world::{Arm, Category, DebrisParticle, ObjectId, TableSpec, WorldState};

pub use cluster::{cluster_debris, DebrisCluster};
pub use relations::{capability, derive_relations, Capability, Relation, RelationKind, RelationThresholds};
pub use text::serialize_scene;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationNoise {
    /// Per-axis position noise, meters.
    pub pose_sigma: f64,
    /// Relative noise on observed box dimensions, clamped to `dims_clamp`.
    pub dims_sigma: f64,
    pub dims_clamp: f64,
}

impl Default for ObservationNoise {
    fn default() -> Self {
        Self {
            pose_sigma: 0.005,
            dims_sigma: 0.05,
            dims_clamp: 0.20,
        }
    }
}

impl ObservationNoise {
    pub fn none() -> Self {
        Self {
            pose_sigma: 0.0,
            dims_sigma: 0.0,
            dims_clamp: 0.20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedObject {
    pub id: ObjectId,
    pub label: String,
    pub category: Category,
    pub observed_pose: Pose2D,
    /// True extent placed at the observed pose.
    pub footprint: Rect,
    /// Detector box: observed pose with perturbed extent.
    pub bounding_box: Rect,
}

/// What the planner sees of one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmObservation {
    pub arm: Arm,
    pub ee: Vec2,
    pub holding: Option<HeldObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldObject {
    pub id: ObjectId,
    pub label: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub objects: Vec<ObservedObject>,
    pub particles: Vec<DebrisParticle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub table: TableSpec,
    /// Sorted by id.
    pub objects: Vec<ObservedObject>,
    pub debris_clusters: Vec<DebrisCluster>,
    pub relations: Vec<Relation>,
    pub arms: Vec<ArmObservation>,
    pub timestamp: f64,
}

impl SceneGraph {
    pub fn empty(table: TableSpec) -> Self {
        Self {
            table,
            objects: Vec::new(),
            debris_clusters: Vec::new(),
            relations: Vec::new(),
            arms: Vec::new(),
            timestamp: 0.0,
        }
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObservedObject> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn holder_of(&self, id: ObjectId) -> Option<Arm> {
        self.arms
            .iter()
            .find(|a| a.holding.as_ref().is_some_and(|h| h.id == id))
            .map(|a| a.arm)
    }

    pub fn in_tray(&self, o: &ObservedObject) -> bool {
        self.table.tray_zone.contains(o.observed_pose.pos())
    }
}

/// Snapshot of every un-held object and the raw particle list.
///
/// Pose noise is skipped for objects inspected since the last snapshot.
/// Draws exactly three normals per object in id order.
pub fn observe<R: Rng + ?Sized>(world: &WorldState, noise: &ObservationNoise, rng: &mut R) -> Observation {
    let objects = world
        .objects
        .iter()
        .filter(|o| o.held_by.is_none())
        .map(|o| {
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            let nd: f64 = rng.sample(StandardNormal);
            let exact = world.inspected.contains(&o.id);
            let sigma = if exact { 0.0 } else { noise.pose_sigma };
            let pose = Pose2D::new(o.pose.x + nx * sigma, o.pose.y + ny * sigma, o.pose.theta);
            let scale = 1.0 + (nd * noise.dims_sigma).clamp(-noise.dims_clamp, noise.dims_clamp);
            ObservedObject {
                id: o.id,
                label: o.label.clone(),
                category: o.category,
                observed_pose: pose,
                footprint: Rect::centered(pose.pos(), o.size.w, o.size.h),
                bounding_box: Rect::centered(pose.pos(), o.size.w * scale, o.size.h * scale),
            }
        })
        .collect();
    Observation {
        objects,
        particles: world.particles.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub noise: ObservationNoise,
    pub relations: RelationThresholds,
    pub linkage_radius: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            noise: ObservationNoise::default(),
            relations: RelationThresholds::default(),
            linkage_radius: 0.04,
        }
    }
}

/// Full perception pass: observe, cluster the debris still outside the
/// collection zone, derive relations.
pub fn build_scene_graph<R: Rng + ?Sized>(world: &WorldState, params: &SceneParams, rng: &mut R) -> SceneGraph {
    let obs = observe(world, &params.noise, rng);
    let loose: Vec<DebrisParticle> = obs
        .particles
        .into_iter()
        .filter(|p| !world.is_collected(p))
        .collect();
    let debris_clusters = cluster_debris(&loose, params.linkage_radius);
    let relations = derive_relations(&obs.objects, &params.relations);
    let arms = world
        .arms
        .iter()
        .map(|a| ArmObservation {
            arm: a.arm,
            ee: a.ee_pose.pos(),
            holding: a.holding.and_then(|id| world.object(id)).map(|o| HeldObject {
                id: o.id,
                label: o.label.clone(),
                category: o.category,
            }),
        })
        .collect();
    SceneGraph {
        table: world.table.clone(),
        objects: obs.objects,
        debris_clusters,
        relations,
        arms,
        timestamp: world.clock,
    }
}
