//! Planar primitives: points, segments, distances and the first-contact
//! time of two points moving at constant velocity.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Relative speeds with a squared magnitude below this are treated as zero.
pub const LINEAR_MOTION_EPS: f64 = 1e-18;

/// Slack allowed on the squared-distance residual when accepting a grazing
/// (double or near-double) root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;

/// A position or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Displacements and velocities share the point representation.
pub type Vector = Point;

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Chebyshev (max) norm; squares centered at the origin are its balls.
    pub fn chebyshev(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, rhs: Point) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A closed segment; `a == b` is a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }
}

/// Minimum Euclidean distance from `p` to any point of `s`.
pub fn point_segment_distance(p: Point, s: Segment) -> f64 {
    point_segment_distance_sq(p, s).sqrt()
}

pub(crate) fn point_segment_distance_sq(p: Point, s: Segment) -> f64 {
    let ab = s.b - s.a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (p - s.a).norm_sq();
    }
    let t = ((p - s.a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (p - (s.a + ab * t)).norm_sq()
}

/// Distance from `p` to a polyline given by its vertices. A single vertex is
/// a point; an empty polyline is infinitely far away.
pub fn point_polyline_distance(p: Point, vertices: &[Point]) -> f64 {
    match vertices {
        [] => f64::INFINITY,
        [only] => p.distance(*only),
        _ => vertices
            .windows(2)
            .map(|w| point_segment_distance_sq(p, Segment::new(w[0], w[1])))
            .fold(f64::INFINITY, f64::min)
            .sqrt(),
    }
}

/// Total length of a polyline.
pub fn polyline_length(vertices: &[Point]) -> f64 {
    vertices.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Earliest `t` in `[0, horizon]` at which `p0 + u t` and `q0 + w t` are at
/// distance at most `r`, or `None`.
///
/// Solves `|d0 + (u - w) t|^2 = r^2`. Contact is non-strict, so a pair that
/// starts at exactly distance `r` reports `t = 0`, and a grazing pass whose
/// closest approach is within the residual tolerance counts as contact.
pub fn first_contact_time(
    p0: Point,
    u: Vector,
    q0: Point,
    w: Vector,
    r: f64,
    horizon: f64,
) -> Option<f64> {
    debug_assert!(r > 0.0 && horizon >= 0.0);
    let d0 = p0 - q0;
    let r_sq = r * r;
    let c = d0.norm_sq() - r_sq;
    if c <= 0.0 {
        return Some(0.0);
    }
    let dv = u - w;
    let a = dv.norm_sq();
    let b = 2.0 * d0.dot(dv);
    if b >= 0.0 {
        // Not closing in; the gap is non-decreasing on [0, inf).
        return None;
    }
    if a < LINEAR_MOTION_EPS {
        let t = -c / b;
        return (t <= horizon).then_some(t);
    }
    let disc = b * b - 4.0 * a * c;
    let t = if disc >= 0.0 {
        // Stable form: the smaller root of a t^2 + b t + c with b < 0, c > 0.
        let q = 0.5 * (-b + disc.sqrt());
        c / q
    } else {
        let t_closest = -b / (2.0 * a);
        let residual = c - b * b / (4.0 * a);
        if residual > ROOT_RESIDUAL_TOL * r_sq.max(1.0) {
            return None;
        }
        t_closest
    };
    (t <= horizon).then_some(t)
}
