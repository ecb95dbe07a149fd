//! The search trajectories: square spirals `S(k, j)`, their out-and-back
//! closures `Π(k, j)`, the diagonals `Δ[i]` and the infinite schedule
//! `Δ[1] Δ[2] Δ[3] …`.
//!
//! Everything is produced lazily. `Δ[12]` alone holds about 2^26 legs, so
//! nothing here ever collects a diagonal into memory.

use std::iter::FusedIterator;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("spiral parameters must be positive, got k={k}, j={j}")]
    InvalidSpiral { k: u64, j: u32 },
    #[error("diagonal index must be at least 1")]
    ZeroDiagonal,
    #[error("diagonal index {0} is too large for 64-bit spiral round counts")]
    DiagonalTooLarge(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::N => Direction::S,
            Direction::E => Direction::W,
            Direction::S => Direction::N,
            Direction::W => Direction::E,
        }
    }

    pub fn unit(self) -> Vector {
        match self {
            Direction::N => Vector::new(0.0, 1.0),
            Direction::E => Vector::new(1.0, 0.0),
            Direction::S => Vector::new(0.0, -1.0),
            Direction::W => Vector::new(-1.0, 0.0),
        }
    }
}

/// One leg: go `direction` for `distance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveInstruction {
    pub direction: Direction,
    pub distance: f64,
}

impl MoveInstruction {
    pub fn new(direction: Direction, distance: f64) -> Self {
        debug_assert!(distance > 0.0);
        Self {
            direction,
            distance,
        }
    }

    pub fn reversed(self) -> Self {
        Self::new(self.direction.opposite(), self.distance)
    }

    pub fn displacement(self) -> Vector {
        self.direction.unit() * self.distance
    }
}

/// Parameters of the spiral `S(k, j)`: `k` rounds at step `2^-j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpiralParams {
    k: u64,
    j: u32,
}

impl SpiralParams {
    pub fn new(k: u64, j: u32) -> Result<Self, TrajectoryError> {
        if k == 0 || j == 0 {
            return Err(TrajectoryError::InvalidSpiral { k, j });
        }
        Ok(Self { k, j })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    /// The step `2^-j`.
    pub fn step(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    /// Number of legs of the spiral, `4(k + 1)`.
    pub fn spiral_len(&self) -> u64 {
        4 * (self.k + 1)
    }

    /// Closed-form length of `S(k, j)`: `(2k + 2)(2k + 3) 2^-j`.
    pub fn spiral_length(&self) -> f64 {
        let k = self.k as f64;
        (2.0 * k + 2.0) * (2.0 * k + 3.0) * self.step()
    }

    /// Closed-form length of `Π(k, j)`: `2(2k + 2)(2k + 3) 2^-j`.
    pub fn pi_length(&self) -> f64 {
        2.0 * self.spiral_length()
    }

    /// Where `S(k, j)` ends relative to its start.
    pub fn spiral_endpoint(&self) -> Vector {
        let reach = (self.k + 1) as f64 * self.step();
        Vector::new(-reach, reach)
    }

    /// Half the side of the square `Q(2k 2^-j)` the spiral covers.
    pub fn covered_half_side(&self) -> f64 {
        self.k as f64 * self.step()
    }

    /// The `idx`-th leg of `S(k, j)`. Round `m = idx / 4 + 1` is
    /// `(E, 2m-1) (S, 2m-1) (W, 2m) (N, 2m)` in units of the step.
    fn spiral_leg(&self, idx: u64) -> MoveInstruction {
        let m = idx / 4 + 1;
        let (direction, units) = match idx % 4 {
            0 => (Direction::E, 2 * m - 1),
            1 => (Direction::S, 2 * m - 1),
            2 => (Direction::W, 2 * m),
            _ => (Direction::N, 2 * m),
        };
        MoveInstruction::new(direction, units as f64 * self.step())
    }
}

/// Lazily emits the legs of `S(k, j)`.
#[derive(Debug, Clone)]
pub struct SpiralIter {
    params: SpiralParams,
    next: u64,
}

impl Iterator for SpiralIter {
    type Item = MoveInstruction;

    fn next(&mut self) -> Option<MoveInstruction> {
        if self.next >= self.params.spiral_len() {
            return None;
        }
        let leg = self.params.spiral_leg(self.next);
        self.next += 1;
        Some(leg)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.params.spiral_len() - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for SpiralIter {}
impl FusedIterator for SpiralIter {}

/// Lazily emits the legs of `Π(k, j)`: the spiral, then its reverse.
#[derive(Debug, Clone)]
pub struct PiIter {
    params: SpiralParams,
    next: u64,
}

impl Iterator for PiIter {
    type Item = MoveInstruction;

    fn next(&mut self) -> Option<MoveInstruction> {
        let n = self.params.spiral_len();
        if self.next >= 2 * n {
            return None;
        }
        let idx = self.next;
        self.next += 1;
        Some(if idx < n {
            self.params.spiral_leg(idx)
        } else {
            self.params.spiral_leg(2 * n - 1 - idx).reversed()
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (2 * self.params.spiral_len() - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PiIter {}
impl FusedIterator for PiIter {}

pub fn spiral_instructions(params: SpiralParams) -> SpiralIter {
    SpiralIter { params, next: 0 }
}

pub fn pi_instructions(params: SpiralParams) -> PiIter {
    PiIter { params, next: 0 }
}

/// Index of a diagonal of the matrix `A(i, j) = Π(2^(i+j), j)` (columns
/// even). Diagonal `i` holds the terms with `i' + j/2 - 1 = i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DiagonalIndex(u32);

impl DiagonalIndex {
    /// Largest index whose leg counts `8(2^(2i+1) + 1)` fit in a `u64`.
    pub const MAX: u32 = 29;

    pub fn new(i: u32) -> Result<Self, TrajectoryError> {
        match i {
            0 => Err(TrajectoryError::ZeroDiagonal),
            i if i > Self::MAX => Err(TrajectoryError::DiagonalTooLarge(i)),
            i => Ok(Self(i)),
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn next(self) -> Option<Self> {
        Self::new(self.0 + 1).ok()
    }
}

/// The terms of `Δ[i]`: term `t = 1..=i` is `Π(2^(i+1+t), 2t)`.
pub fn diagonal_terms(i: DiagonalIndex) -> impl ExactSizeIterator<Item = SpiralParams> + Clone {
    let i = i.get();
    (1..i + 1).map(move |t| SpiralParams {
        k: 1u64 << (i + 1 + t),
        j: 2 * t,
    })
}

/// Exact length of `Δ[i]` from the closed-form `Π` lengths.
pub fn diagonal_length(i: DiagonalIndex) -> f64 {
    diagonal_terms(i).map(|p| p.pi_length()).sum()
}

/// Closed-form length of `Δ[i]` for any `i >= 1`, including indices too
/// large to stream.
pub fn diagonal_length_closed_form(i: u32) -> f64 {
    (1..=i)
        .map(|t| {
            let k = (i as f64 + 1.0 + t as f64).exp2();
            2.0 * (2.0 * k + 2.0) * (2.0 * k + 3.0) * (-2.0 * t as f64).exp2()
        })
        .sum()
}

/// Number of legs in `Δ[i]`.
pub fn diagonal_leg_count(i: DiagonalIndex) -> u64 {
    diagonal_terms(i).map(|p| 2 * p.spiral_len()).sum()
}

/// Lazily emits the legs of `Δ[i]`.
pub fn diagonal_instructions(i: DiagonalIndex) -> impl Iterator<Item = MoveInstruction> + Clone {
    diagonal_terms(i).flat_map(pi_instructions)
}

/// The infinite schedule `Δ[1] Δ[2] …`, each leg tagged with its diagonal.
///
/// The stream ends only after `Δ[DiagonalIndex::MAX]`, which no simulation
/// can reach.
#[derive(Debug, Clone)]
pub struct FullSchedule {
    diagonal: Option<DiagonalIndex>,
    term: u32,
    current: Option<PiIter>,
}

impl Iterator for FullSchedule {
    type Item = (DiagonalIndex, MoveInstruction);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let diag = self.diagonal?;
            if let Some(leg) = self.current.as_mut().and_then(Iterator::next) {
                return Some((diag, leg));
            }
            let i = diag.get();
            if self.term < i {
                self.term += 1;
                let t = self.term;
                self.current = Some(pi_instructions(SpiralParams {
                    k: 1u64 << (i + 1 + t),
                    j: 2 * t,
                }));
            } else {
                self.diagonal = diag.next();
                self.term = 0;
                self.current = None;
            }
        }
    }
}

impl FusedIterator for FullSchedule {}

pub fn full_schedule() -> FullSchedule {
    FullSchedule {
        diagonal: Some(DiagonalIndex(1)),
        term: 0,
        current: None,
    }
}

/// Vertices of the polyline traced by following `legs` from `start`.
pub fn polyline<I>(start: Point, legs: I) -> Vec<Point>
where
    I: IntoIterator<Item = MoveInstruction>,
{
    let mut at = start;
    let mut out = vec![start];
    for leg in legs {
        at += leg.displacement();
        out.push(at);
    }
    out
}

/// Vertices of the schedule from `start`, cut after `length` of arc.
pub fn schedule_prefix(start: Point, length: f64) -> Vec<Point> {
    let mut at = start;
    let mut out = vec![start];
    let mut left = length;
    for (_, leg) in full_schedule() {
        if left <= 0.0 {
            break;
        }
        let step = leg.distance.min(left);
        at += leg.direction.unit() * step;
        out.push(at);
        left -= step;
    }
    out
}

/// Smallest integer `a` with `2^a >= x`, for `x > 0`.
pub fn ceil_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut a = x.log2().ceil() as i32;
    while (a as f64 - 1.0).exp2() >= x {
        a -= 1;
    }
    while (a as f64).exp2() < x {
        a += 1;
    }
    a
}

/// Smallest even integer, at least 2, that is `>= ceil(log2(1/r))`.
pub fn resolution_column(r: f64) -> i32 {
    let need = ceil_log2(1.0 / r);
    let even = need + need.rem_euclid(2);
    even.max(2)
}

/// Upper bound on the cost of finishing `Δ[1] … Δ[y]`: `80 y 2^(2y+2)`.
pub fn cumulative_cost_bound(y: u32) -> f64 {
    80.0 * y as f64 * (2.0 * y as f64 + 2.0).exp2()
}

/// Which diagonal a static target is guaranteed to be caught on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatchPrediction {
    /// `ceil(log2 D)`.
    pub a: i32,
    /// Column (resolution exponent), even and at least 2.
    pub b: i32,
    /// Predicted catch diagonal.
    pub y: u32,
    /// `80 y 2^(2y+2)`.
    pub cost_bound: f64,
}

/// Predicted catch diagonal of the static algorithm for a target within `d`
/// and sensing radius `r`.
///
/// The row index is clamped to at least 1 so that `Δ[y]` really contains
/// `Π(2^(a+b), b)`, the spiral that covers `Q(2^(a+1))` at resolution
/// `2^-b <= r`.
pub fn predict_static(d: f64, r: f64) -> CatchPrediction {
    let a = ceil_log2(d);
    let b = resolution_column(r);
    let y = (a.max(1) + b / 2 - 1) as u32;
    CatchPrediction {
        a,
        b,
        y,
        cost_bound: cumulative_cost_bound(y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp(k: u64, j: u32) -> SpiralParams {
        SpiralParams::new(k, j).unwrap()
    }

    fn di(i: u32) -> DiagonalIndex {
        DiagonalIndex::new(i).unwrap()
    }

    use Direction::{E, N, S, W};

    #[test]
    fn schedule_prefix_cuts_mid_leg() {
        let pts = schedule_prefix(Point::ORIGIN, 0.625);
        assert_eq!(
            pts,
            vec![
                Point::ORIGIN,
                Point::new(0.25, 0.0),
                Point::new(0.25, -0.25),
                Point::new(0.125, -0.25)
            ]
        );
        let whole = schedule_prefix(Point::ORIGIN, 171.0);
        assert_eq!(whole.len(), 73);
        assert_relative_eq!(whole[72].x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(
            crate::geometry::polyline_length(&whole),
            171.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn spiral_k1_j2_matches_definition() {
        let legs: Vec<_> = spiral_instructions(sp(1, 2))
            .map(|m| (m.direction, m.distance))
            .collect();
        assert_eq!(
            legs,
            vec![
                (E, 0.25),
                (S, 0.25),
                (W, 0.5),
                (N, 0.5),
                (E, 0.75),
                (S, 0.75),
                (W, 1.0),
                (N, 1.0)
            ]
        );
    }

    #[test]
    fn spiral_endpoint_matches_displacement_sum() {
        for k in [1, 2, 3, 7, 16] {
            for j in [1, 2, 4] {
                let p = sp(k, j);
                let end = polyline(Point::ORIGIN, spiral_instructions(p));
                assert_eq!(*end.last().unwrap(), p.spiral_endpoint());
                assert_eq!(spiral_instructions(p).len() as u64, 4 * (k + 1));
            }
        }
        assert_eq!(sp(1, 2).spiral_endpoint(), Point::new(-0.5, 0.5));
    }

    #[test]
    fn rejects_zero_parameters() {
        assert!(SpiralParams::new(0, 2).is_err());
        assert!(SpiralParams::new(3, 0).is_err());
        assert_eq!(DiagonalIndex::new(0), Err(TrajectoryError::ZeroDiagonal));
    }

    #[test]
    fn pi_reverses_the_spiral() {
        let legs: Vec<_> = pi_instructions(sp(1, 2)).collect();
        assert_eq!(legs.len(), 16);
        assert_eq!(*legs.last().unwrap(), MoveInstruction::new(W, 0.25));
        assert_eq!(legs[8], MoveInstruction::new(S, 1.0));
        let total: f64 = legs.iter().map(|m| m.distance).sum();
        assert_eq!(total, 10.0);
        assert_eq!(sp(1, 2).pi_length(), 10.0);
        let trace = polyline(Point::new(3.0, -1.0), legs);
        assert_eq!(*trace.last().unwrap(), Point::new(3.0, -1.0));
    }

    #[test]
    fn diagonal_terms_examples() {
        let t = |i| {
            diagonal_terms(di(i))
                .map(|p| (p.k(), p.j()))
                .collect::<Vec<_>>()
        };
        assert_eq!(t(1), vec![(8, 2)]);
        assert_eq!(t(2), vec![(16, 2), (32, 4)]);
        assert_eq!(t(3), vec![(32, 2), (64, 4), (128, 6)]);
    }

    #[test]
    fn diagonal_terms_lie_on_their_diagonal() {
        for i in 1..=20 {
            for p in diagonal_terms(di(i)) {
                let row = p.k().trailing_zeros() as i64 - p.j() as i64;
                assert!(row >= 1);
                assert_eq!(row + p.j() as i64 / 2 - 1, i as i64);
            }
        }
    }

    #[test]
    fn diagonal_lengths() {
        assert_eq!(diagonal_length(di(1)), 171.0);
        assert_eq!(diagonal_length(di(2)), 1147.75);
        for i in 1..=DiagonalIndex::MAX {
            assert_eq!(diagonal_length_closed_form(i), diagonal_length(di(i)));
        }
        let summed: f64 = diagonal_instructions(di(1)).map(|m| m.distance).sum();
        assert_eq!(summed, 171.0);
        for i in 1..=20 {
            let len = diagonal_length(di(i));
            assert!(len <= 40.0 * i as f64 * (2.0 * i as f64 + 2.0).exp2());
            if i < 20 {
                assert!(diagonal_length(di(i + 1)) > len);
            }
        }
    }

    #[test]
    fn schedule_prefix_lengths() {
        let mut s = full_schedule();
        assert_eq!(s.next(), Some((di(1), MoveInstruction::new(E, 0.25))));
        let first: Vec<_> = full_schedule().take_while(|(d, _)| d.get() == 1).collect();
        assert_eq!(first.len(), 72);
        assert_eq!(diagonal_leg_count(di(1)), 72);
        let cost: f64 = full_schedule()
            .take_while(|(d, _)| d.get() <= 2)
            .map(|(_, m)| m.distance)
            .sum();
        assert_eq!(cost, 1318.75);
        let (d, m) = full_schedule().nth(72).unwrap();
        assert_eq!((d.get(), m), (2, MoveInstruction::new(E, 0.25)));
    }

    #[test]
    fn schedule_matches_diagonal_streams() {
        let expect: Vec<_> = (1..=3)
            .flat_map(|i| diagonal_instructions(di(i)).map(move |m| (di(i), m)))
            .collect();
        let got: Vec<_> = full_schedule().take(expect.len()).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn log_helpers() {
        assert_eq!(ceil_log2(4.0), 2);
        assert_eq!(ceil_log2(5.0), 3);
        assert_eq!(ceil_log2(1.0), 0);
        assert_eq!(ceil_log2(0.3), -1);
        assert_eq!(ceil_log2(10.0), 4);
        assert_eq!(resolution_column(1.0 / 16.0), 4);
        assert_eq!(resolution_column(0.1), 4);
        assert_eq!(resolution_column(0.5), 2);
        assert_eq!(resolution_column(2.0), 2);
        assert_eq!(resolution_column(1.0 / 32.0), 6);
    }

    #[test]
    fn static_predictions() {
        let p = predict_static(4.0, 1.0 / 16.0);
        assert_eq!((p.a, p.b, p.y), (2, 4, 3));
        assert_eq!(p.cost_bound, 61440.0);

        let p = predict_static(1.0, 0.5);
        assert_eq!((p.a, p.b, p.y), (0, 2, 1));

        let p = predict_static(8.0, 0.1);
        assert_eq!((p.a, p.b, p.y), (3, 4, 4));
    }

    #[test]
    fn predicted_diagonal_contains_covering_spiral() {
        for d in [0.3, 1.0, 2.0, 3.0, 16.0] {
            for r in [0.9, 0.25, 0.05, 1.0 / 256.0] {
                let p = predict_static(d, r);
                let term = diagonal_terms(di(p.y))
                    .find(|t| t.j() as i32 == p.b)
                    .expect("column b present on the predicted diagonal");
                assert!(term.covered_half_side() >= d);
                assert!(term.step() <= r);
            }
        }
    }

    #[test]
    fn pi_length_closed_form_small() {
        for k in 1..=64 {
            for j in [2, 4, 6] {
                let p = sp(k, j);
                let summed: f64 = pi_instructions(p).map(|m| m.distance).sum();
                assert_relative_eq!(summed, p.pi_length(), max_relative = 1e-12);
            }
        }
    }
}
