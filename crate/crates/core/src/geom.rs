//! Planar vector type and the analytic ray / distance queries used by the
//! simulator and the range sensor.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Point or displacement in the plane, serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T> From<[T; 2]> for Vec2<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl<T> From<Vec2<T>> for [T; 2] {
    fn from(v: Vec2<T>) -> Self {
        [v.x, v.y]
    }
}

impl<T: Real> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2::new(-self.x, -self.y)
    }
}

/// Smallest strictly positive ray parameter at which `origin + t * dir`
/// meets the circle. `dir` must be unit length.
pub fn ray_circle<T: Real>(origin: Vec2<T>, dir: Vec2<T>, center: Vec2<T>, radius: T) -> Option<T> {
    let oc = origin - center;
    let b = oc.dot(dir);
    let c = oc.dot(oc) - radius * radius;
    let disc = b * b - c;
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    let near = -b - sq;
    if near > T::zero() {
        return Some(near);
    }
    let far = -b + sq;
    (far > T::zero()).then_some(far)
}

/// Smallest strictly positive ray parameter at which `origin + t * dir`
/// meets the closed segment `[a, b]`. Parallel rays never hit.
pub fn ray_segment<T: Real>(origin: Vec2<T>, dir: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> Option<T> {
    let edge = b - a;
    let denom = dir.cross(edge);
    if denom == T::zero() {
        return None;
    }
    let ao = a - origin;
    let t = ao.cross(edge) / denom;
    let s = ao.cross(dir) / denom;
    (t > T::zero() && s >= T::zero() && s <= T::one()).then_some(t)
}

/// Distance from `p` to the closed axis-aligned box; zero inside.
pub fn point_rect_distance<T: Real>(p: Vec2<T>, min: Vec2<T>, max: Vec2<T>) -> T {
    let cx = p.x.max(min.x).min(max.x);
    let cy = p.y.max(min.y).min(max.y);
    p.distance(Vec2::new(cx, cy))
}

/// The four edges of an axis-aligned box.
pub fn rect_edges<T: Real>(min: Vec2<T>, max: Vec2<T>) -> [(Vec2<T>, Vec2<T>); 4] {
    let a = min;
    let b = Vec2::new(max.x, min.y);
    let c = max;
    let d = Vec2::new(min.x, max.y);
    [(a, b), (b, c), (c, d), (d, a)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_hits_circle_front_face() {
        let t = ray_circle(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), 0.5);
        assert_eq!(t, Some(1.5));
    }

    #[test]
    fn ray_misses_circle_behind_or_aside() {
        let o = Vec2::new(0.0, 0.0);
        assert_eq!(ray_circle(o, Vec2::new(1.0, 0.0), Vec2::new(-2.0, 0.0), 0.5), None);
        assert_eq!(ray_circle(o, Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0), 0.5), None);
    }

    #[test]
    fn ray_from_inside_circle_exits() {
        let t = ray_circle(Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(0.0, 0.0), 2.0);
        assert_eq!(t, Some(2.0));
    }

    #[test]
    fn ray_segment_cases() {
        let o = Vec2::new(0.0, 0.0);
        let dir = Vec2::new(1.0, 0.0);
        assert_eq!(ray_segment(o, dir, Vec2::new(3.0, -1.0), Vec2::new(3.0, 1.0)), Some(3.0));
        // endpoint inclusive
        assert_eq!(ray_segment(o, dir, Vec2::new(3.0, 0.0), Vec2::new(3.0, 1.0)), Some(3.0));
        // parallel
        assert_eq!(ray_segment(o, dir, Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)), None);
        // behind
        assert_eq!(ray_segment(o, dir, Vec2::new(-3.0, -1.0), Vec2::new(-3.0, 1.0)), None);
    }

    #[test]
    fn rect_distance_outside_and_inside() {
        let min = Vec2::new(0.0, 0.0);
        let max = Vec2::new(2.0, 1.0);
        assert_eq!(point_rect_distance(Vec2::new(1.0, 0.5), min, max), 0.0);
        assert_eq!(point_rect_distance(Vec2::new(5.0, 5.0), min, max), 5.0);
        assert_eq!(point_rect_distance(Vec2::new(-1.5, 0.5), min, max), 1.5);
    }

    #[test]
    fn vec2_serializes_as_pair() {
        let v = Vec2::new(1.5_f64, -2.0);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let back: Vec2<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
