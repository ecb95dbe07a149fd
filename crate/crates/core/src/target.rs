//! Target motion: inert targets, scripted waypoints, and the adversaries used
//! by the lower-bound arguments.
//!
//! A strategy is a finite list of timed breakpoints with straight-line motion
//! between them. After the last breakpoint the target stays put.

use serde::Serialize;
use thiserror::Error;

use crate::coverage::Raster;
use crate::geometry::{Point, Vector};

/// Relative and absolute slack on per-segment speed checks.
pub const SPEED_TOL: f64 = 1e-9;

/// Default per-annulus grid resolution for witness search.
pub const DEFAULT_PLACEMENT_GRID: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TargetError {
    #[error("a strategy needs at least one waypoint")]
    Empty,
    #[error("got {points} points but {times} times")]
    LengthMismatch { points: usize, times: usize },
    #[error("first waypoint time must be 0, got {0}")]
    NonZeroStart(f64),
    #[error("waypoint times must be strictly increasing (segment {segment}: {from} -> {to})")]
    NonIncreasing { segment: usize, from: f64, to: f64 },
    #[error("waypoint {0} is not finite")]
    NonFinite(usize),
    #[error("speed bound must be finite and nonnegative, got {0}")]
    BadSpeedBound(f64),
    #[error("segment {segment} moves at speed {speed} which exceeds the bound {bound}")]
    SpeedViolation {
        segment: usize,
        speed: f64,
        bound: f64,
    },
    #[error("flee start coincides with the origin; direction undefined")]
    FleeFromOrigin,
    #[error("freeze time must be finite and nonnegative, got {0}")]
    BadFreezeTime(f64),
    #[error("waypoint file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Piecewise-linear target motion with a declared speed bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetStrategy {
    times: Vec<f64>,
    points: Vec<Point>,
    speed_bound: f64,
}

/// A maximal time interval on which the target moves at constant velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPiece {
    pub start_time: f64,
    /// `f64::INFINITY` for the terminal inert piece.
    pub end_time: f64,
    pub start: Point,
    pub velocity: Vector,
}

impl MotionPiece {
    pub fn position_at(&self, t: f64) -> Point {
        if self.velocity == Vector::ORIGIN {
            self.start
        } else {
            self.start + self.velocity * (t - self.start_time)
        }
    }
}

impl TargetStrategy {
    fn build(times: Vec<f64>, points: Vec<Point>, speed_bound: f64) -> Result<Self, TargetError> {
        let s = Self {
            times,
            points,
            speed_bound,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks every structural invariant and the speed bound on each segment.
    pub fn validate(&self) -> Result<(), TargetError> {
        if self.points.is_empty() {
            return Err(TargetError::Empty);
        }
        if self.points.len() != self.times.len() {
            return Err(TargetError::LengthMismatch {
                points: self.points.len(),
                times: self.times.len(),
            });
        }
        if !(self.speed_bound.is_finite() && self.speed_bound >= 0.0) {
            return Err(TargetError::BadSpeedBound(self.speed_bound));
        }
        for (idx, (p, t)) in self.points.iter().zip(&self.times).enumerate() {
            if !p.is_finite() || !t.is_finite() {
                return Err(TargetError::NonFinite(idx));
            }
        }
        if self.times[0] != 0.0 {
            return Err(TargetError::NonZeroStart(self.times[0]));
        }
        for segment in 0..self.points.len() - 1 {
            let (from, to) = (self.times[segment], self.times[segment + 1]);
            if to <= from {
                return Err(TargetError::NonIncreasing { segment, from, to });
            }
            let speed = self.points[segment].distance(self.points[segment + 1]) / (to - from);
            if speed > self.speed_bound * (1.0 + SPEED_TOL) + SPEED_TOL {
                return Err(TargetError::SpeedViolation {
                    segment,
                    speed,
                    bound: self.speed_bound,
                });
            }
        }
        Ok(())
    }

    pub fn speed_bound(&self) -> f64 {
        self.speed_bound
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.points
    }

    pub fn initial_position(&self) -> Point {
        self.points[0]
    }

    pub fn is_inert(&self) -> bool {
        self.points.windows(2).all(|w| w[0] == w[1])
    }

    /// Index of the motion piece containing `t` (pieces are half-open on the
    /// right; the last piece is the inert tail).
    pub fn piece_index(&self, t: f64) -> usize {
        self.times.partition_point(|&b| b <= t).saturating_sub(1)
    }

    pub fn piece(&self, idx: usize) -> MotionPiece {
        let last = self.points.len() - 1;
        if idx >= last {
            return MotionPiece {
                start_time: self.times[last],
                end_time: f64::INFINITY,
                start: self.points[last],
                velocity: Vector::ORIGIN,
            };
        }
        let (t0, t1) = (self.times[idx], self.times[idx + 1]);
        MotionPiece {
            start_time: t0,
            end_time: t1,
            start: self.points[idx],
            velocity: (self.points[idx + 1] - self.points[idx]) * (1.0 / (t1 - t0)),
        }
    }

    pub fn position_at(&self, t: f64) -> Point {
        if t <= 0.0 {
            return self.points[0];
        }
        self.piece(self.piece_index(t)).position_at(t)
    }
}

/// A target that never moves.
pub fn inert(p: Point) -> TargetStrategy {
    TargetStrategy {
        times: vec![0.0],
        points: vec![p],
        speed_bound: 0.0,
    }
}

/// Flee from `origin` along the ray through `start` at speed `v` until
/// `t_freeze`, then stay inert.
pub fn radial_flee(
    origin: Point,
    start: Point,
    v: f64,
    t_freeze: f64,
) -> Result<TargetStrategy, TargetError> {
    let away = start - origin;
    let dist = away.norm();
    if dist == 0.0 {
        return Err(TargetError::FleeFromOrigin);
    }
    if !(v.is_finite() && v >= 0.0) {
        return Err(TargetError::BadSpeedBound(v));
    }
    if !(t_freeze.is_finite() && t_freeze >= 0.0) {
        return Err(TargetError::BadFreezeTime(t_freeze));
    }
    if t_freeze == 0.0 || v == 0.0 {
        return TargetStrategy::build(vec![0.0], vec![start], v);
    }
    let frozen = start + away * (v * t_freeze / dist);
    TargetStrategy::build(vec![0.0, t_freeze], vec![start, frozen], v)
}

/// Piecewise-linear motion through `points` at `times`, inert afterwards.
pub fn waypoints(
    points: Vec<Point>,
    times: Vec<f64>,
    v: f64,
) -> Result<TargetStrategy, TargetError> {
    TargetStrategy::build(times, points, v)
}

/// Parses a waypoint script: a `v <bound>` header, then one `t x y` line per
/// waypoint. Blank lines and `#` comments are ignored.
pub fn parse_waypoints(text: &str) -> Result<TargetStrategy, TargetError> {
    let mut bound = None;
    let mut times = Vec::new();
    let mut points = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| TargetError::Parse {
                line: line_no,
                message: format!("`{s}`: {e}"),
            })
        };
        match (bound, fields.as_slice()) {
            (None, ["v", b]) => bound = Some(num(b)?),
            (None, _) => {
                return Err(TargetError::Parse {
                    line: line_no,
                    message: "expected header `v <bound>`".into(),
                })
            }
            (Some(_), [t, x, y]) => {
                times.push(num(t)?);
                points.push(Point::new(num(x)?, num(y)?));
            }
            (Some(_), _) => {
                return Err(TargetError::Parse {
                    line: line_no,
                    message: format!("expected `t x y`, got {} fields", fields.len()),
                })
            }
        }
    }
    let Some(bound) = bound else {
        return Err(TargetError::Parse {
            line: 0,
            message: "missing header `v <bound>`".into(),
        });
    };
    waypoints(points, times, bound)
}

/// Renders a strategy in the waypoint script format.
pub fn format_waypoints(strategy: &TargetStrategy) -> String {
    let mut out = format!("v {}\n", strategy.speed_bound);
    for (t, p) in strategy.times.iter().zip(&strategy.points) {
        out.push_str(&format!("{} {} {}\n", t, p.x, p.y));
    }
    out
}

/// Side of the square `Q(2^j)`, i.e. `D_j = 2^j`.
pub fn annulus_outer(j: u32) -> f64 {
    (j as f64).exp2()
}

/// Sensing radius of the `j`-th hiding couple for horizon `i`:
/// `r_j = 2^(-2(i-j+1))`.
pub fn annulus_radius(i: u32, j: u32) -> f64 {
    (-2.0 * (i as f64 - j as f64 + 1.0)).exp2()
}

/// Area of `R_1 = Q(2)` or `R_j = Q(2^j) \ Q(2^(j-1))`.
pub fn annulus_area(j: u32) -> f64 {
    let outer = annulus_outer(j);
    if j <= 1 {
        outer * outer
    } else {
        let inner = annulus_outer(j - 1);
        outer * outer - inner * inner
    }
}

/// Membership in `R_j` for a point given relative to the agent start, using
/// the square (Chebyshev) norm.
pub fn in_annulus(p: Point, j: u32) -> bool {
    let twice = 2.0 * p.chebyshev();
    if j <= 1 {
        twice <= annulus_outer(1)
    } else {
        annulus_outer(j - 1) < twice && twice <= annulus_outer(j)
    }
}

/// Longest trajectory length `x` with `2 r_j x + π r_j² <= area(R_j) / 2`
/// for every `j` in `1..=i`.
pub fn placement_length_limit(i: u32) -> f64 {
    (1..=i)
        .map(|j| {
            let r = annulus_radius(i, j);
            (annulus_area(j) / 2.0 - std::f64::consts::PI * r * r) / (2.0 * r)
        })
        .fold(f64::INFINITY, f64::min)
}

/// One hiding couple `(D_j, r_j)` and, if any grid point of `R_j` is more
/// than `r_j` from the trajectory, such a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacementWitness {
    pub j: u32,
    pub d_j: f64,
    pub r_j: f64,
    pub point: Option<Point>,
}

/// For each `j` in `1..=i`, looks for a point of `R_j` that the trajectory
/// (vertices relative to the agent start) never senses at radius `r_j`.
///
/// The search scans the cell centers of a `grid_res x grid_res` grid over
/// `Q(2^j)` in row-major order and returns the first uncovered one in `R_j`.
pub fn adversarial_static_placement(
    trajectory: &[Point],
    i: u32,
    grid_res: usize,
) -> Vec<PlacementWitness> {
    assert!(i >= 1, "horizon i must be at least 1");
    assert!(grid_res >= 16, "grid resolution must be at least 16");
    (1..=i)
        .map(|j| {
            let d_j = annulus_outer(j);
            let r_j = annulus_radius(i, j);
            let half = d_j / 2.0;
            let mut raster = Raster::new(Point::new(-half, -half), d_j, d_j, grid_res, grid_res);
            raster.stamp_polyline(trajectory, r_j);
            let point = raster
                .cell_centers()
                .find(|&(idx, c)| !raster.is_marked(idx) && in_annulus(c, j))
                .map(|(_, c)| c);
            PlacementWitness { j, d_j, r_j, point }
        })
        .collect()
}
