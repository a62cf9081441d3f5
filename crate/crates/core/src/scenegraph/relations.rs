use std::fmt;

use serde::{Deserialize, Serialize};

use crate::world::ObjectId;

use super::ObservedObject;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Containment,
    Support,
    Proximity,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Containment => "containment",
            RelationKind::Support => "support",
            RelationKind::Proximity => "proximity",
        }
    }
}

/// `kind(subject, object)`: subject is inside / resting on / near object.
/// Proximity is stored once, with the smaller id as subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub subject: ObjectId,
    pub object: ObjectId,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.kind.as_str(), self.subject, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationThresholds {
    /// Center distance below which two objects are near, meters.
    pub near_distance: f64,
    /// Share of the subject's footprint that must rest on the supporter.
    pub support_overlap: f64,
}

impl Default for RelationThresholds {
    fn default() -> Self {
        Self {
            near_distance: 0.05,
            support_overlap: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capability {
    pub container: bool,
    pub supporter: bool,
}

const CAPABILITIES: &[(&str, bool, bool)] = &[
    ("basket", true, false),
    ("bowl", true, false),
    ("box", true, true),
    ("cup", true, false),
    ("drawer_organizer", true, false),
    ("mug", true, false),
    ("pencil_cup", true, false),
    ("tray", true, true),
    ("vase", true, false),
    ("board", false, true),
    ("book", false, true),
    ("coaster", false, true),
    ("folder", false, true),
    ("laptop", false, true),
    ("mousepad", false, true),
    ("notebook", false, true),
    ("plate", false, true),
];

/// Label-driven capability; unknown labels have none.
pub fn capability(label: &str) -> Capability {
    CAPABILITIES
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|&(_, container, supporter)| Capability { container, supporter })
        .unwrap_or_default()
}

fn contains(inner: &ObservedObject, outer: &ObservedObject) -> bool {
    capability(&outer.label).container && inner.footprint.is_strictly_within(&outer.footprint)
}

fn supports(top: &ObservedObject, base: &ObservedObject, t: &RelationThresholds) -> bool {
    let a = top.footprint.area();
    capability(&base.label).supporter
        && a < base.footprint.area()
        && top.footprint.overlap_area(&base.footprint) >= t.support_overlap * a
}

/// Pairwise relations with priority containment > support > proximity,
/// sorted by kind, subject, object.
pub fn derive_relations(objects: &[ObservedObject], t: &RelationThresholds) -> Vec<Relation> {
    let mut out = Vec::new();
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            if a.id == b.id {
                continue;
            }
            let rel = |kind, s: &ObservedObject, o: &ObservedObject| Relation {
                kind,
                subject: s.id,
                object: o.id,
            };
            if contains(a, b) {
                out.push(rel(RelationKind::Containment, a, b));
            } else if contains(b, a) {
                out.push(rel(RelationKind::Containment, b, a));
            } else if supports(a, b, t) {
                out.push(rel(RelationKind::Support, a, b));
            } else if supports(b, a, t) {
                out.push(rel(RelationKind::Support, b, a));
            } else if a.observed_pose.pos().dist(b.observed_pose.pos()) < t.near_distance {
                let (s, o) = if a.id < b.id { (a, b) } else { (b, a) };
                out.push(rel(RelationKind::Proximity, s, o));
            }
        }
    }
    out.sort();
    out
}
