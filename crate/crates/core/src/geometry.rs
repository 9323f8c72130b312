//! Planar primitives shared by the scene sampler and the ray tracer.
//!
//! Polygons are convex and stored counter-clockwise, so the interior lies to
//! the left of every directed edge. Containment is closed: points on an edge
//! count as inside.

use core::ops::{Add, Mul, Neg, Sub};

/// A point or vector in world coordinates (meters).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Direction of this vector in radians, in (-π, π].
    pub fn angle(self) -> f64 {
        libm::atan2(self.y, self.x)
    }

    /// Rounds both coordinates to the nearest multiple of `step`.
    pub fn snapped(self, step: f64) -> Self {
        Self {
            x: libm::round(self.x / step) * step,
            y: libm::round(self.y / step) * step,
        }
    }

    /// Mirror image of this point across the infinite line through `a` and `b`.
    pub fn reflect_across(self, a: Point, b: Point) -> Point {
        let dir = b - a;
        let t = (self - a).dot(dir) / dir.dot(dir);
        let foot = a + dir * t;
        foot * 2.0 - self
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Iterates the directed edges `(v[i], v[i+1])` of a closed polygon.
pub fn edges(poly: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = poly.len();
    (0..n).map(move |i| (poly[i], poly[(i + 1) % n]))
}

/// Shoelace area, positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point]) -> f64 {
    edges(poly).map(|(a, b)| a.cross(b)).sum::<f64>() * 0.5
}

/// True when every turn is a left turn by more than `tol` (cross-product units).
pub fn is_strictly_convex_ccw(poly: &[Point], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        (b - a).cross(c - b) > tol
    }) && signed_area(poly) > 0.0
}

/// Closed point-in-convex-polygon test for a counter-clockwise polygon.
pub fn contains_closed(poly: &[Point], p: Point) -> bool {
    edges(poly).all(|(a, b)| (b - a).cross(p - a) >= 0.0)
}

/// Clips the closed segment `p + t (q - p)`, `t ∈ [0, 1]`, against a convex
/// counter-clockwise polygon. Returns the parameter interval inside the
/// closed polygon, if any.
pub fn clip_segment(poly: &[Point], p: Point, q: Point) -> Option<(f64, f64)> {
    let d = q - p;
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    for (a, b) in edges(poly) {
        let e = b - a;
        let num = e.cross(p - a);
        let den = e.cross(d);
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let t = -num / den;
        if den > 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Separating-axis test for two convex polygons. Touching polygons overlap.
pub fn convex_polygons_overlap(a: &[Point], b: &[Point]) -> bool {
    fn separated_by_edges_of(a: &[Point], b: &[Point]) -> bool {
        edges(a).any(|(p, q)| {
            let e = q - p;
            // b lies strictly on the exterior (right) side of this edge of a.
            b.iter().all(|&v| e.cross(v - p) < 0.0)
        })
    }
    !(separated_by_edges_of(a, b) || separated_by_edges_of(b, a))
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    let mut t = libm::fmod(theta, TAU);
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}
