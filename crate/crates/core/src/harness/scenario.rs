use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geom::{Pose2D, Rect, Vec2};
use crate::world::{Category, DebrisParticle, ObjectId, SceneObject, Size2, SizeClass, TableSpec, WorldState};

pub const DEFAULT_TIME_LIMIT: f64 = 180.0;
pub const DEFAULT_SCENARIO_COUNT: u32 = 17;

/// (label, min side, max side) in meters.
const RIGID: &[(&str, f64, f64)] = &[
    ("pen", 0.015, 0.030),
    ("stapler", 0.035, 0.060),
    ("mug", 0.070, 0.090),
    ("notebook", 0.070, 0.100),
    ("phone", 0.060, 0.080),
    ("tape", 0.040, 0.060),
    ("scissors", 0.040, 0.070),
    ("mouse", 0.050, 0.065),
    ("eraser", 0.020, 0.035),
    ("bottle", 0.060, 0.075),
    ("remote", 0.040, 0.060),
    ("calculator", 0.065, 0.085),
    ("cup", 0.060, 0.080),
    ("box", 0.060, 0.090),
];

const FRAGILE: &[(&str, f64, f64)] = &[
    ("wine_glass", 0.060, 0.075),
    ("vase", 0.070, 0.090),
    ("lightbulb", 0.050, 0.065),
    ("eyeglasses", 0.045, 0.060),
    ("ornament", 0.040, 0.060),
    ("ceramic_bowl", 0.075, 0.090),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub rigid_range: (u32, u32),
    pub fragile_range: (u32, u32),
    pub crumb_clusters: (u32, u32),
    pub crumbs_per_cluster: (u32, u32),
    pub shreds: (u32, u32),
    /// Spread of crumbs around their cluster center, meters.
    pub crumb_spread: f64,
    pub height_offset: (f64, f64),
    /// Where objects may be placed initially.
    pub object_area: Rect,
    /// Where loose debris may lie initially.
    pub debris_area: Rect,
    /// Free space kept between object footprints.
    pub min_gap: f64,
    pub max_attempts: u32,
    pub time_limit: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            rigid_range: (6, 15),
            fragile_range: (3, 5),
            crumb_clusters: (2, 4),
            crumbs_per_cluster: (30, 80),
            shreds: (10, 30),
            crumb_spread: 0.05,
            height_offset: (0.0, 0.1),
            object_area: Rect::new(0.12, 0.10, 0.78, 0.46),
            debris_area: Rect::new(0.04, 0.09, 0.86, 0.46),
            min_gap: 0.01,
            max_attempts: 10_000,
            time_limit: DEFAULT_TIME_LIMIT,
        }
    }
}

/// Description of one benchmark scene; the layout is fully determined by
/// `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario_id: u32,
    pub seed: u64,
    pub table: TableSpec,
    pub rigid_count: u32,
    pub fragile_count: u32,
    pub crumb_cluster_sizes: Vec<u32>,
    pub shred_count: u32,
    pub time_limit: f64,
}

/// A scenario as stored on disk: its `ScenarioSpec` plus the initial layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub spec: ScenarioSpec,
    pub objects: Vec<SceneObject>,
    pub particles: Vec<DebrisParticle>,
}

impl ScenarioFile {
    pub fn world(&self, arms: usize) -> WorldState {
        WorldState::new(self.spec.table.clone(), self.objects.clone(), self.particles.clone(), arms)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("could not place object {index} without overlap after {attempts} attempts")]
    PlacementFailed { index: usize, attempts: u32 },
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),
}

/// Layout seed of benchmark scenario `id`.
pub fn scenario_seed(id: u32) -> u64 {
    0x5CE0_0000 + id as u64
}

fn draw_range<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (u32, u32)) -> u32 {
    rng.random_range(lo..=hi)
}

fn draw_f<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn validate(p: &ScenarioParams) -> Result<(), ScenarioError> {
    let ranges = [
        ("rigid_range", p.rigid_range),
        ("fragile_range", p.fragile_range),
        ("crumb_clusters", p.crumb_clusters),
        ("crumbs_per_cluster", p.crumbs_per_cluster),
        ("shreds", p.shreds),
    ];
    for (name, (lo, hi)) in ranges {
        if lo > hi {
            return Err(ScenarioError::InvalidParams(format!("{name}: {lo} > {hi}")));
        }
    }
    if p.height_offset.0 < 0.0 || p.height_offset.0 > p.height_offset.1 {
        return Err(ScenarioError::InvalidParams("height_offset range".into()));
    }
    if p.crumb_spread.is_nan() || p.crumb_spread < 0.0 || p.object_area.area() <= 0.0 || p.debris_area.area() <= 0.0 {
        return Err(ScenarioError::InvalidParams("areas and spread must be positive".into()));
    }
    Ok(())
}

/// Seeded scene: counts drawn uniformly from the configured ranges, objects
/// rejection-sampled without footprint overlap, debris as crumb clusters
/// plus scattered shreds.
pub fn generate_scenario(scenario_id: u32, seed: u64, params: &ScenarioParams) -> Result<ScenarioFile, ScenarioError> {
    validate(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = TableSpec {
        height_offset: draw_f(&mut rng, params.height_offset.0, params.height_offset.1),
        ..TableSpec::default()
    };

    let rigid_count = draw_range(&mut rng, params.rigid_range);
    let fragile_count = draw_range(&mut rng, params.fragile_range);
    let mut kinds: Vec<Category> = std::iter::repeat_n(Category::Rigid, rigid_count as usize)
        .chain(std::iter::repeat_n(Category::Fragile, fragile_count as usize))
        .collect();
    kinds.shuffle(&mut rng);

    let drawn: Vec<(Category, &str, f64, f64)> = kinds
        .iter()
        .map(|&cat| {
            let catalog = if cat == Category::Fragile { FRAGILE } else { RIGID };
            let (label, lo, hi) = catalog[rng.random_range(0..catalog.len())];
            (cat, label, draw_f(&mut rng, lo, hi), draw_f(&mut rng, lo, hi))
        })
        .collect();
    // large footprints first so crowded scenes still fit
    let mut order: Vec<usize> = (0..drawn.len()).collect();
    order.sort_by(|&a, &b| (drawn[b].2 * drawn[b].3).total_cmp(&(drawn[a].2 * drawn[a].3)).then(a.cmp(&b)));

    let mut objects: Vec<SceneObject> = Vec::with_capacity(kinds.len());
    for i in order {
        let (cat, label, w, h) = drawn[i];
        let area = params.object_area;
        let mut placed = None;
        for _ in 0..params.max_attempts {
            let x = draw_f(&mut rng, area.x_min + w / 2.0, area.x_max - w / 2.0);
            let y = draw_f(&mut rng, area.y_min + h / 2.0, area.y_max - h / 2.0);
            let fp = Rect::centered(Vec2::new(x, y), w, h).inflate(params.min_gap / 2.0);
            if objects.iter().all(|o| !o.footprint().inflate(params.min_gap / 2.0).overlaps(&fp)) {
                placed = Some((x, y));
                break;
            }
        }
        let (x, y) = placed.ok_or(ScenarioError::PlacementFailed {
            index: i,
            attempts: params.max_attempts,
        })?;
        objects.push(SceneObject {
            id: ObjectId(i as u32 + 1),
            label: label.to_string(),
            category: cat,
            pose: Pose2D::at(x, y),
            size: Size2 { w, h },
            damaged: false,
            held_by: None,
            off_table: false,
        });
    }
    objects.sort_by_key(|o| o.id);

    let d = params.debris_area;
    let mut particles = Vec::new();
    let mut next_id = 1u32;
    let n_clusters = draw_range(&mut rng, params.crumb_clusters);
    let mut crumb_cluster_sizes = Vec::with_capacity(n_clusters as usize);
    let spread = Normal::new(0.0, params.crumb_spread).map_err(|e| ScenarioError::InvalidParams(e.to_string()))?;
    let (c_lo, c_hi) = SizeClass::Crumb.diameter_range();
    for _ in 0..n_clusters {
        let margin = 2.0 * params.crumb_spread;
        let cx = draw_f(&mut rng, d.x_min + margin, d.x_max - margin);
        let cy = draw_f(&mut rng, d.y_min + margin, d.y_max - margin);
        let n = draw_range(&mut rng, params.crumbs_per_cluster);
        crumb_cluster_sizes.push(n);
        for _ in 0..n {
            let p = d.clamp_point(Vec2::new(cx + spread.sample(&mut rng), cy + spread.sample(&mut rng)));
            particles.push(DebrisParticle {
                id: next_id,
                pose: Pose2D::at(p.x, p.y),
                size_class: SizeClass::Crumb,
                diameter: draw_f(&mut rng, c_lo, c_hi),
            });
            next_id += 1;
        }
    }
    let shred_count = draw_range(&mut rng, params.shreds);
    let (s_lo, s_hi) = SizeClass::Shred.diameter_range();
    for _ in 0..shred_count {
        let x = draw_f(&mut rng, d.x_min, d.x_max);
        let y = draw_f(&mut rng, d.y_min, d.y_max);
        particles.push(DebrisParticle {
            id: next_id,
            pose: Pose2D::at(x, y),
            size_class: SizeClass::Shred,
            diameter: draw_f(&mut rng, s_lo, s_hi),
        });
        next_id += 1;
    }

    Ok(ScenarioFile {
        spec: ScenarioSpec {
            scenario_id,
            seed,
            table,
            rigid_count,
            fragile_count,
            crumb_cluster_sizes,
            shred_count,
            time_limit: params.time_limit,
        },
        objects,
        particles,
    })
}

/// Benchmark scenario `id` with default parameters.
pub fn benchmark_scenario(id: u32) -> Result<ScenarioFile, ScenarioError> {
    generate_scenario(id, scenario_seed(id), &ScenarioParams::default())
}
