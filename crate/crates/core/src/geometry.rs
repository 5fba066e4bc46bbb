//! Small 2D vector and oriented-rectangle helpers shared by the planner,
//! the world simulator and the metrics.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector pointing along `heading` radians.
    pub fn from_heading(heading: f64) -> Self {
        Vec2::new(heading.cos(), heading.sin())
    }

    /// Rotate counter-clockwise by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Normalize an angle to (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(std::f64::consts::TAU);
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// An oriented rectangle: center, heading of the long axis, full extents.
#[derive(Debug, Clone, Copy)]
pub struct OrientedRect {
    pub center: Vec2,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedRect {
    pub fn new(center: Vec2, heading: f64, length: f64, width: f64) -> Self {
        OrientedRect {
            center,
            heading,
            length,
            width,
        }
    }

    /// The four corners in counter-clockwise order.
    pub fn corners(&self) -> [Vec2; 4] {
        let fwd = Vec2::from_heading(self.heading) * (self.length * 0.5);
        let left = Vec2::from_heading(self.heading + std::f64::consts::FRAC_PI_2)
            * (self.width * 0.5);
        [
            self.center + fwd + left,
            self.center - fwd + left,
            self.center - fwd - left,
            self.center + fwd - left,
        ]
    }

    fn axes(&self) -> [Vec2; 2] {
        [
            Vec2::from_heading(self.heading),
            Vec2::from_heading(self.heading + std::f64::consts::FRAC_PI_2),
        ]
    }

    fn project(&self, axis: Vec2) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for corner in self.corners() {
            let p = corner.dot(axis);
            min = min.min(p);
            max = max.max(p);
        }
        (min, max)
    }

    /// Separating-axis overlap test over the four rectangle axes.
    /// Touching rectangles count as overlapping.
    pub fn overlaps(&self, other: &OrientedRect) -> bool {
        self.separation_gap(other) <= 0.0
    }

    /// Largest projection gap over the four candidate axes. Positive means
    /// the rectangles are disjoint by at least that much along some axis;
    /// zero or negative means no separating axis exists.
    pub fn separation_gap(&self, other: &OrientedRect) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for axis in self.axes().into_iter().chain(other.axes()) {
            let (min_a, max_a) = self.project(axis);
            let (min_b, max_b) = other.project(axis);
            let gap = (min_b - max_a).max(min_a - max_b);
            best = best.max(gap);
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(0.3) - 0.3).abs() < 1e-12);
        assert!((wrap_angle(-0.3) + 0.3).abs() < 1e-12);
    }

    #[test]
    fn rotate_quarter_turn() {
        let v = Vec2::new(1.0, 0.0).rotate(std::f64::consts::FRAC_PI_2);
        assert!(v.x.abs() < 1e-12);
        assert!((v.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_rects_overlap() {
        let r = OrientedRect::new(Vec2::new(1.0, 2.0), 0.4, 4.0, 1.8);
        assert!(r.overlaps(&r));
    }

    #[test]
    fn distant_rects_disjoint() {
        let a = OrientedRect::new(Vec2::ZERO, 0.0, 4.0, 1.8);
        let b = OrientedRect::new(Vec2::new(100.0, 0.0), 0.0, 4.0, 1.8);
        assert!(!a.overlaps(&b));
        assert!(a.separation_gap(&b) > 90.0);
    }

    #[test]
    fn lateral_offset_threshold() {
        let a = OrientedRect::new(Vec2::ZERO, 0.0, 4.0, 1.8);
        let near = OrientedRect::new(Vec2::new(0.0, 1.7), 0.0, 4.0, 1.8);
        let far = OrientedRect::new(Vec2::new(0.0, 1.9), 0.0, 4.0, 1.8);
        assert!(a.overlaps(&near));
        assert!(!a.overlaps(&far));
        assert!((a.separation_gap(&far) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rotated_cross_overlap() {
        // Two long thin rectangles crossing at right angles through the origin.
        let a = OrientedRect::new(Vec2::ZERO, 0.0, 6.0, 0.5);
        let b = OrientedRect::new(Vec2::ZERO, std::f64::consts::FRAC_PI_2, 6.0, 0.5);
        assert!(a.overlaps(&b));
    }
}
