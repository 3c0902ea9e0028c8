use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Real;

/// A point (or vector) of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Point<R> {
    pub fn new(x: R, y: R) -> Self {
        Point { x, y }
    }

    pub fn zero() -> Self {
        Point {
            x: R::zero(),
            y: R::zero(),
        }
    }

    pub fn dot(self, other: Self) -> R {
        self.x * other.x + self.y * other.y
    }

    /// 2-D cross product (signed parallelogram area of the two vectors).
    pub fn cross(self, other: Self) -> R {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> R {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> R {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Distance from `self` to the closed segment `[a, b]`.
    pub fn distance_to_segment(self, a: Self, b: Self) -> R {
        let ab = b - a;
        let len2 = ab.dot(ab);
        if len2 == R::zero() {
            return self.distance(a);
        }
        let t = ((self - a).dot(ab) / len2).max(R::zero()).min(R::one());
        self.distance(a + ab * t)
    }
}

impl<R: Real> Add for Point<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<R: Real> Sub for Point<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<R: Real> Mul<R> for Point<R> {
    type Output = Self;
    fn mul(self, rhs: R) -> Self {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl<R: Real> Neg for Point<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Point::new(-self.x, -self.y)
    }
}
