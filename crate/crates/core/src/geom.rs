//! Minimal 3-space vector geometry.

use crate::num::Real;

/// Point (or vector) in 3-space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<R> {
    pub x: R,
    pub y: R,
    pub z: R,
}

impl<R: Real> Point3<R> {
    pub fn new(x: R, y: R, z: R) -> Self {
        Point3 { x, y, z }
    }

    pub fn add(self, other: Self) -> Self {
        Point3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(self, other: Self) -> Self {
        Point3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn scale(self, s: R) -> Self {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, other: Self) -> R {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> R {
        self.dot(self).sqrt()
    }

    /// Euclidean distance to another point.
    pub fn dist(self, other: Self) -> R {
        self.sub(other).norm()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > R::zero() {
            Some(self.scale(R::one() / n))
        } else {
            None
        }
    }

    /// Linear interpolation between `self` (t = 0) and `other` (t = 1).
    pub fn lerp(self, other: Self, t: R) -> Self {
        self.add(other.sub(self).scale(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_is_euclidean() {
        let a: Point3<f64> = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(3.0, 4.0, 0.0);
        assert_eq!(a.dist(b), 5.0);
    }

    #[test]
    fn zero_vector_has_no_direction() {
        let z: Point3<f64> = Point3::new(0.0, 0.0, 0.0);
        assert!(z.normalized().is_none());
        let u = Point3::new(0.0, 2.0, 0.0).normalized().unwrap();
        assert_eq!(u, Point3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn lerp_hits_endpoints_and_midpoint() {
        let a: Point3<f64> = Point3::new(1.0, 0.0, -1.0);
        let b = Point3::new(3.0, 2.0, 1.0);
        assert_eq!(a.lerp(b, 0.0), a);
        assert_eq!(a.lerp(b, 1.0), b);
        assert_eq!(a.lerp(b, 0.5), Point3::new(2.0, 1.0, 0.0));
    }
}
