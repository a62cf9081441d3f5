use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::world::{DebrisParticle, SizeClass};

/// Connected group of same-class particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebrisCluster {
    pub size_class: SizeClass,
    pub centroid: Vec2,
    pub count: usize,
    /// Largest member-center distance from the centroid.
    pub radius: f64,
    /// Sorted by particle id.
    pub members: Vec<DebrisParticle>,
}

impl DebrisCluster {
    pub fn smallest_id(&self) -> u32 {
        self.members[0].id
    }

    pub fn member_ids(&self) -> Vec<u32> {
        self.members.iter().map(|p| p.id).collect()
    }

    pub fn max_diameter(&self) -> f64 {
        self.members.iter().map(|p| p.diameter).fold(0.0, f64::max)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index becomes the root so roots are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Single-linkage components (distance ≤ `linkage_radius`) within each size
/// class, ordered by smallest member id.
pub fn cluster_debris(particles: &[DebrisParticle], linkage_radius: f64) -> Vec<DebrisCluster> {
    assert!(linkage_radius > 0.0, "linkage radius must be positive");
    let mut sorted: Vec<DebrisParticle> = particles.to_vec();
    sorted.sort_by_key(|p| p.id);
    let n = sorted.len();
    let mut ds = DisjointSet::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if sorted[i].size_class == sorted[j].size_class
                && sorted[i].pose.pos().dist(sorted[j].pose.pos()) <= linkage_radius
            {
                ds.union(i, j);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<DebrisParticle>)> = Vec::new();
    for (i, p) in sorted.iter().enumerate() {
        let root = ds.find(i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(*p),
            None => groups.push((root, vec![*p])),
        }
    }
    // first appearance in id order == smallest member id order
    groups
        .into_iter()
        .map(|(_, members)| {
            let count = members.len();
            let sum = members
                .iter()
                .fold(Vec2::new(0.0, 0.0), |acc, p| acc + p.pose.pos());
            let centroid = sum * (1.0 / count as f64);
            let radius = members
                .iter()
                .map(|p| p.pose.pos().dist(centroid))
                .fold(0.0, f64::max);
            DebrisCluster {
                size_class: members[0].size_class,
                centroid,
                count,
                radius,
                members,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pose2D;

    fn crumb(id: u32, x: f64, y: f64) -> DebrisParticle {
        DebrisParticle {
            id,
            pose: Pose2D::at(x, y),
            size_class: SizeClass::Crumb,
            diameter: 0.002,
        }
    }

    #[test]
    fn pairwise_close_particles_form_one_cluster() {
        let ps = [crumb(1, 0.1, 0.1), crumb(2, 0.12, 0.1), crumb(3, 0.11, 0.12)];
        let c = cluster_debris(&ps, 0.04);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].count, 3);
    }

    #[test]
    fn far_particles_stay_apart() {
        let r = 0.04;
        let ps = [crumb(1, 0.1, 0.1), crumb(2, 0.1 + 2.0 * r + 1e-6, 0.1)];
        let c = cluster_debris(&ps, r);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|k| k.count == 1 && k.radius == 0.0));
    }

    #[test]
    fn size_classes_never_mix() {
        let mut shred = crumb(2, 0.1, 0.1);
        shred.size_class = SizeClass::Shred;
        let c = cluster_debris(&[crumb(1, 0.1, 0.1), shred], 0.04);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn chains_link_transitively_and_order_by_smallest_id() {
        let ps = [
            crumb(9, 0.50, 0.5),
            crumb(4, 0.10, 0.1),
            crumb(7, 0.13, 0.1),
            crumb(2, 0.16, 0.1),
        ];
        let c = cluster_debris(&ps, 0.035);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].member_ids(), vec![2, 4, 7]);
        assert_eq!(c[1].member_ids(), vec![9]);
    }
}
