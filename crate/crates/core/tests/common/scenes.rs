use std::collections::{BTreeSet, VecDeque};

use deskclean::geom::{Pose2D, Rect};
use deskclean::scenegraph::{cluster_debris, derive_relations, ObservedObject, Relation, RelationKind, RelationThresholds};
use deskclean::world::{Category, DebrisParticle, ObjectId, SizeClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONTAINERS: &[&str] = &["mug", "bowl", "box", "tray"];
const SUPPORTERS: &[&str] = &["book", "box", "tray", "plate"];
const LABELS: &[&str] = &["mug", "bowl", "box", "tray", "book", "plate", "pen", "stapler", "phone"];

pub fn random_scene(seed: u64) -> Vec<ObservedObject> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..=20);
    let mut ids: Vec<u32> = (1..=n as u32).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    let mut out: Vec<ObservedObject> = Vec::with_capacity(n);
    for id in ids {
        let label = LABELS[rng.random_range(0..LABELS.len())];
        // Nest some objects inside or on top of earlier ones.
        let (x, y, w, h) = if !out.is_empty() && rng.random_bool(0.4) {
            let host = out[rng.random_range(0..out.len())].footprint;
            let w = host.width() * rng.random_range(0.2..1.1);
            let h = host.height() * rng.random_range(0.2..1.1);
            let x = rng.random_range(host.x_min - 0.3 * w..host.x_max - 0.7 * w);
            let y = rng.random_range(host.y_min - 0.3 * h..host.y_max - 0.7 * h);
            (x, y, w, h)
        } else {
            let (w, h) = (rng.random_range(0.01..0.25), rng.random_range(0.01..0.25));
            (rng.random_range(0.0..0.3), rng.random_range(0.0..0.3), w, h)
        };
        let footprint = Rect::new(x, y, x + w, y + h);
        let pose = Pose2D::at(x + w / 2.0, y + h / 2.0);
        out.push(ObservedObject {
            id: ObjectId(id),
            label: label.into(),
            category: Category::Rigid,
            observed_pose: pose,
            footprint,
            bounding_box: footprint,
        });
    }
    out
}

pub fn oracle_relations(objs: &[ObservedObject]) -> BTreeSet<(RelationKind, u32, u32)> {
    let inside = |i: &Rect, o: &Rect| {
        i.x_min >= o.x_min
            && i.y_min >= o.y_min
            && i.x_max <= o.x_max
            && i.y_max <= o.y_max
            && (i.x_min, i.y_min, i.x_max, i.y_max) != (o.x_min, o.y_min, o.x_max, o.y_max)
    };
    let area = |r: &Rect| (r.x_max - r.x_min) * (r.y_max - r.y_min);
    let overlap = |a: &Rect, b: &Rect| {
        let w = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
        let h = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
        w * h
    };
    let contains = |inner: &ObservedObject, outer: &ObservedObject| {
        CONTAINERS.contains(&outer.label.as_str()) && inside(&inner.footprint, &outer.footprint)
    };
    let on = |top: &ObservedObject, base: &ObservedObject| {
        let a = area(&top.footprint);
        SUPPORTERS.contains(&base.label.as_str())
            && a < area(&base.footprint)
            && overlap(&top.footprint, &base.footprint) >= 0.5 * a
    };
    let mut out = BTreeSet::new();
    for a in objs {
        for b in objs {
            if a.id.0 >= b.id.0 {
                continue;
            }
            let rel = if contains(a, b) {
                Some((RelationKind::Containment, a.id.0, b.id.0))
            } else if contains(b, a) {
                Some((RelationKind::Containment, b.id.0, a.id.0))
            } else if on(a, b) {
                Some((RelationKind::Support, a.id.0, b.id.0))
            } else if on(b, a) {
                Some((RelationKind::Support, b.id.0, a.id.0))
            } else {
                let (p, q) = (a.observed_pose, b.observed_pose);
                ((p.x - q.x).hypot(p.y - q.y) < 0.05).then_some((RelationKind::Proximity, a.id.0, b.id.0))
            };
            out.extend(rel);
        }
    }
    out
}

pub fn random_particles(seed: u64) -> (Vec<DebrisParticle>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..=200);
    let span = rng.random_range(0.05..0.4);
    let particles = (0..n)
        .map(|i| {
            let size_class = if rng.random_bool(0.7) { SizeClass::Crumb } else { SizeClass::Shred };
            DebrisParticle {
                id: 1000 - 3 * i as u32,
                pose: Pose2D::at(rng.random_range(0.0..span), rng.random_range(0.0..span)),
                size_class,
                diameter: 0.002,
            }
        })
        .collect();
    (particles, rng.random_range(0.005..0.03))
}

/// Breadth-first connected components, as sorted id lists ordered by first id.
pub fn oracle_components(ps: &[DebrisParticle], r: f64) -> Vec<Vec<u32>> {
    let mut seen = vec![false; ps.len()];
    let mut comps = Vec::new();
    for start in 0..ps.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![ps[start].id];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in 0..ps.len() {
                let (a, b) = (ps[i].pose, ps[j].pose);
                if !seen[j] && ps[i].size_class == ps[j].size_class && (a.x - b.x).hypot(a.y - b.y) <= r {
                    seen[j] = true;
                    comp.push(ps[j].id);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort();
    comps
}

pub fn check_relations(seed: u64) -> Result<(), String> {
    let objs = random_scene(seed);
    let got = derive_relations(&objs, &RelationThresholds::default());
    let mut sorted = got.clone();
    sorted.sort();
    if got != sorted {
        return Err(format!("relations not sorted: {got:?}"));
    }
    let as_set: BTreeSet<_> = got.iter().map(|r: &Relation| (r.kind, r.subject.0, r.object.0)).collect();
    if as_set.len() != got.len() {
        return Err(format!("duplicate relations: {got:?}"));
    }
    let expected = oracle_relations(&objs);
    if as_set != expected {
        return Err(format!("seed {seed}: got {as_set:?}, oracle {expected:?}"));
    }
    Ok(())
}

pub fn check_clusters(seed: u64) -> Result<(), String> {
    let (ps, r) = random_particles(seed);
    let clusters = cluster_debris(&ps, r);
    let ids: Vec<Vec<u32>> = clusters.iter().map(|c| c.member_ids()).collect();
    let expected = oracle_components(&ps, r);
    if ids != expected {
        return Err(format!("seed {seed}: partition {ids:?}, oracle {expected:?}"));
    }
    for c in &clusters {
        let n = c.members.len() as f64;
        let cx = c.members.iter().map(|p| p.pose.x).sum::<f64>() / n;
        let cy = c.members.iter().map(|p| p.pose.y).sum::<f64>() / n;
        let radius = c.members.iter().map(|p| (p.pose.x - cx).hypot(p.pose.y - cy)).fold(0.0, f64::max);
        let ok = c.members.iter().all(|p| p.size_class == c.size_class)
            && c.count == c.members.len()
            && (c.centroid.x - cx).abs() < 1e-12
            && (c.centroid.y - cy).abs() < 1e-12
            && (c.radius - radius).abs() < 1e-12;
        if !ok {
            return Err(format!("seed {seed}: cluster summary mismatch {c:?}"));
        }
    }
    Ok(())
}
