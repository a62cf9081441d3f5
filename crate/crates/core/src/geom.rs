//! Planar geometry shared by the simulator, the scene graph and the scheduler.
//!
//! Everything lives in the table plane, in meters, with the origin at the
//! front-left corner of the desk.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 1e-12 {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = (theta + PI).rem_euclid(two_pi) - PI;
    // rem_euclid can land exactly on 2π for tiny negative inputs
    if t >= PI {
        t -= two_pi;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0)
    }

    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn with_pos(&self, p: Vec2) -> Self {
        Self {
            x: p.x,
            y: p.y,
            theta: self.theta,
        }
    }
}

/// Axis-aligned rectangle, `min <= max` on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min: x_min.min(x_max),
            y_min: y_min.min(y_max),
            x_max: x_max.max(x_min),
            y_max: y_max.max(y_min),
        }
    }

    pub fn centered(c: Vec2, w: f64, h: f64) -> Self {
        Self::new(c.x - w / 2.0, c.y - h / 2.0, c.x + w / 2.0, c.y + h / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// `self ⊆ other`.
    pub fn is_within(&self, other: &Rect) -> bool {
        self.x_min >= other.x_min
            && self.x_max <= other.x_max
            && self.y_min >= other.y_min
            && self.y_max <= other.y_max
    }

    /// Proper subset: contained and not identical.
    pub fn is_strictly_within(&self, other: &Rect) -> bool {
        self.is_within(other) && self != other
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x_min.max(other.x_min);
        let y0 = self.y_min.max(other.y_min);
        let x1 = self.x_max.min(other.x_max);
        let y1 = self.y_max.min(other.y_max);
        (x0 < x1 && y0 < y1).then(|| Rect::new(x0, y0, x1, y1))
    }

    pub fn overlap_area(&self, other: &Rect) -> f64 {
        self.intersection(other).map_or(0.0, |r| r.area())
    }

    /// Interiors overlap (touching edges do not count).
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.intersection(other).is_some()
    }

    pub fn inflate(&self, d: f64) -> Rect {
        Rect::new(
            self.x_min - d,
            self.y_min - d,
            self.x_max + d,
            self.y_max + d,
        )
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x_min.min(other.x_min),
            self.y_min.min(other.y_min),
            self.x_max.max(other.x_max),
            self.y_max.max(other.y_max),
        )
    }

    pub fn expand_to(&self, p: Vec2) -> Rect {
        Rect::new(
            self.x_min.min(p.x),
            self.y_min.min(p.y),
            self.x_max.max(p.x),
            self.y_max.max(p.y),
        )
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.x_min, self.y_min),
            Vec2::new(self.x_max, self.y_min),
            Vec2::new(self.x_max, self.y_max),
            Vec2::new(self.x_min, self.y_max),
        ]
    }

    pub fn edges(&self) -> [Segment; 4] {
        let c = self.corners();
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }

    pub fn clamp_point(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
        )
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        p.dist(self.clamp_point(p))
    }

    pub fn distance_to_rect(&self, other: &Rect) -> f64 {
        let dx = (other.x_min - self.x_max).max(self.x_min - other.x_max).max(0.0);
        let dy = (other.y_min - self.y_max).max(self.y_min - other.y_max).max(0.0);
        dx.hypot(dy)
    }

    pub fn distance_to_segment(&self, s: &Segment) -> f64 {
        if self.contains(s.a) || self.contains(s.b) {
            return 0.0;
        }
        self.edges()
            .iter()
            .map(|e| e.distance_to_segment(s))
            .fold(f64::INFINITY, f64::min)
    }

    /// Projected extents of the rectangle onto a unit axis, as `(min, max)`.
    pub fn project(&self, axis: Vec2) -> (f64, f64) {
        self.corners()
            .iter()
            .map(|c| c.dot(axis))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Distance travelled from `p` along unit `dir` until leaving the
    /// rectangle. `p` is assumed inside.
    pub fn exit_distance(&self, p: Vec2, dir: Vec2) -> f64 {
        let mut t = f64::INFINITY;
        if dir.x > 1e-12 {
            t = t.min((self.x_max - p.x) / dir.x);
        } else if dir.x < -1e-12 {
            t = t.min((self.x_min - p.x) / dir.x);
        }
        if dir.y > 1e-12 {
            t = t.min((self.y_max - p.y) / dir.y);
        } else if dir.y < -1e-12 {
            t = t.min((self.y_min - p.y) / dir.y);
        }
        t.max(0.0)
    }

    /// Splits the rectangle in two halves across the axis perpendicular to
    /// `dir`, so both halves share the same far edge along `dir`. The half
    /// with the smaller x (then smaller y) center comes first.
    pub fn split_across(&self, dir: Vec2) -> (Rect, Rect) {
        let (a, b) = if dir.x.abs() >= dir.y.abs() {
            let ym = (self.y_min + self.y_max) / 2.0;
            (
                Rect::new(self.x_min, self.y_min, self.x_max, ym),
                Rect::new(self.x_min, ym, self.x_max, self.y_max),
            )
        } else {
            let xm = (self.x_min + self.x_max) / 2.0;
            (
                Rect::new(self.x_min, self.y_min, xm, self.y_max),
                Rect::new(xm, self.y_min, self.x_max, self.y_max),
            )
        };
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let d = self.b - self.a;
        let len2 = d.dot(d);
        if len2 < 1e-18 {
            return self.a;
        }
        let t = ((p - self.a).dot(d) / len2).clamp(0.0, 1.0);
        self.a + d * t
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        p.dist(self.closest_point(p))
    }

    fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    }

    fn on_segment(p: Vec2, q: Vec2, r: Vec2) -> bool {
        q.x <= p.x.max(r.x) && q.x >= p.x.min(r.x) && q.y <= p.y.max(r.y) && q.y >= p.y.min(r.y)
    }

    pub fn intersects(&self, other: &Segment) -> bool {
        let (p1, q1, p2, q2) = (self.a, self.b, other.a, other.b);
        let d1 = Self::cross(p2, q2, p1);
        let d2 = Self::cross(p2, q2, q1);
        let d3 = Self::cross(p1, q1, p2);
        let d4 = Self::cross(p1, q1, q2);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        (d1 == 0.0 && Self::on_segment(p2, p1, q2))
            || (d2 == 0.0 && Self::on_segment(p2, q1, q2))
            || (d3 == 0.0 && Self::on_segment(p1, p2, q1))
            || (d4 == 0.0 && Self::on_segment(p1, q2, q1))
    }

    pub fn distance_to_segment(&self, other: &Segment) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        self.distance_to_point(other.a)
            .min(self.distance_to_point(other.b))
            .min(other.distance_to_point(self.a))
            .min(other.distance_to_point(self.b))
    }
}

/// Swept region of a moving end-effector: a segment thickened by a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub seg: Segment,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Vec2, b: Vec2, radius: f64) -> Self {
        Self {
            seg: Segment::new(a, b),
            radius,
        }
    }

    pub fn length(&self) -> f64 {
        self.seg.length()
    }
}

/// A corridor component: either a capsule or a rectangle inflated by a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Capsule(Capsule),
    RoundedRect { rect: Rect, radius: f64 },
}

impl Shape {
    pub fn radius(&self) -> f64 {
        match self {
            Shape::Capsule(c) => c.radius,
            Shape::RoundedRect { radius, .. } => *radius,
        }
    }

    /// Distance between the cores (segment or rectangle) of two shapes.
    fn core_distance(&self, other: &Shape) -> f64 {
        match (self, other) {
            (Shape::Capsule(a), Shape::Capsule(b)) => a.seg.distance_to_segment(&b.seg),
            (Shape::Capsule(c), Shape::RoundedRect { rect, .. })
            | (Shape::RoundedRect { rect, .. }, Shape::Capsule(c)) => {
                rect.distance_to_segment(&c.seg)
            }
            (Shape::RoundedRect { rect: a, .. }, Shape::RoundedRect { rect: b, .. }) => {
                a.distance_to_rect(b)
            }
        }
    }

    /// Clearance between the two shapes' boundaries; negative when they overlap.
    pub fn clearance(&self, other: &Shape) -> f64 {
        self.core_distance(other) - self.radius() - other.radius()
    }

    pub fn overlaps(&self, other: &Shape) -> bool {
        self.clearance(other) < 0.0
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Shape::Capsule(c) => c.seg.distance_to_point(p) <= c.radius,
            Shape::RoundedRect { rect, radius } => rect.distance_to_point(p) <= *radius,
        }
    }

    pub fn bounds(&self) -> Rect {
        match self {
            Shape::Capsule(c) => Rect::new(c.seg.a.x, c.seg.a.y, c.seg.b.x, c.seg.b.y)
                .inflate(c.radius),
            Shape::RoundedRect { rect, radius } => rect.inflate(*radius),
        }
    }
}
