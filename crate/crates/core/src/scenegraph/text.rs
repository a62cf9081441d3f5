use std::fmt::Write as _;

use crate::geom::{Rect, Vec2};

use super::SceneGraph;

fn pt(p: Vec2) -> String {
    format!("({:.3},{:.3})", p.x + 0.0, p.y + 0.0)
}

fn rect(r: &Rect) -> String {
    format!("[{:.3},{:.3},{:.3},{:.3}]", r.x_min, r.y_min, r.x_max, r.y_max)
}

/// Canonical line-oriented rendering, independent of input ordering.
///
/// Lines: header, arms, objects by id, debris clusters by smallest particle
/// id, relations in lexicographic order. Coordinates use three decimals.
pub fn serialize_scene(graph: &SceneGraph) -> String {
    let t = &graph.table;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "table {:.3}x{:.3} height {:.3} tray {} collection {} t={:.3}",
        t.width,
        t.depth,
        t.height_offset,
        rect(&t.tray_zone),
        rect(&t.collection_zone),
        graph.timestamp
    );

    let mut arms: Vec<_> = graph.arms.iter().collect();
    arms.sort_by_key(|a| a.arm);
    for a in arms {
        let holding = match &a.holding {
            Some(h) => format!("{} {} [{}]", h.id, h.label, h.category.as_str()),
            None => "nothing".to_string(),
        };
        let _ = writeln!(out, "arm {} at {} holding {}", a.arm, pt(a.ee), holding);
    }

    let mut objects: Vec<_> = graph.objects.iter().collect();
    objects.sort_by_key(|o| o.id);
    for o in objects {
        let _ = writeln!(
            out,
            "{}: {} [{}] at {} size {:.3}x{:.3}",
            o.id,
            o.label,
            o.category.as_str(),
            pt(o.observed_pose.pos()),
            o.footprint.width(),
            o.footprint.height()
        );
    }

    let mut clusters: Vec<_> = graph.debris_clusters.iter().collect();
    clusters.sort_by_key(|c| c.smallest_id());
    for (i, c) in clusters.iter().enumerate() {
        let _ = writeln!(
            out,
            "debris d{}: {} x{} at {} radius {:.3}",
            i + 1,
            c.size_class.as_str(),
            c.count,
            pt(c.centroid),
            c.radius
        );
    }

    let mut rels: Vec<String> = graph.relations.iter().map(|r| r.to_string()).collect();
    rels.sort();
    rels.dedup();
    for r in rels {
        let _ = writeln!(out, "{r}");
    }
    out
}
