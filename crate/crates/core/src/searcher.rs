//! The two search algorithms: the shared schedule with a per-diagonal speed.
//!
//! `Static` walks the schedule at unit speed, so its elapsed time equals its
//! cost. `Dynamic` walks `Δ[i]` at speed `2^(5i)`, which makes the total time
//! over all diagonals converge to a finite constant `q`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::trajectory::{
    ceil_log2, cumulative_cost_bound, diagonal_length, diagonal_length_closed_form, full_schedule,
    resolution_column, DiagonalIndex, FullSchedule,
};

/// Diagonals from which `t_i <= 2^(-2i)` is guaranteed.
pub const TAIL_FROM: u32 = 11;

/// Partial-sum depth used for the published `q` bound.
pub const Q_DEPTH: u32 = 40;

/// Largest diagonal a dynamic prediction may name.
pub const MAX_PREDICTED_DIAGONAL: u32 = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Static,
    Dynamic,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Static => "static",
            Algorithm::Dynamic => "dynamic",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Algorithm::Static),
            "dynamic" => Ok(Algorithm::Dynamic),
            other => Err(format!(
                "unknown algorithm `{other}` (expected static or dynamic)"
            )),
        }
    }
}

/// A searcher: the schedule `Δ[1] Δ[2] …` plus a speed for each diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearcherPlan {
    algorithm: Algorithm,
}

pub fn static_plan() -> SearcherPlan {
    SearcherPlan {
        algorithm: Algorithm::Static,
    }
}

pub fn dynamic_plan() -> SearcherPlan {
    SearcherPlan {
        algorithm: Algorithm::Dynamic,
    }
}

impl SearcherPlan {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        SearcherPlan { algorithm }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn schedule(&self) -> FullSchedule {
        full_schedule()
    }

    pub fn speed_of_diagonal(&self, i: DiagonalIndex) -> f64 {
        match self.algorithm {
            Algorithm::Static => 1.0,
            Algorithm::Dynamic => (5.0 * i.get() as f64).exp2(),
        }
    }

    /// Time `t_i` spent on `Δ[i]`.
    pub fn traversal_time(&self, i: DiagonalIndex) -> f64 {
        diagonal_length(i) / self.speed_of_diagonal(i)
    }

    pub fn timing_table(&self, upto: u32) -> TimingTable {
        let mut cumulative = 0.0;
        let rows = (1..=upto)
            .map_while(|i| DiagonalIndex::new(i).ok())
            .map(|i| {
                let t = self.traversal_time(i);
                cumulative += t;
                TimingRow {
                    diagonal: i.get(),
                    length: diagonal_length(i),
                    speed: self.speed_of_diagonal(i),
                    time: t,
                    cumulative_time: cumulative,
                }
            })
            .collect();
        TimingTable {
            rows,
            q: (self.algorithm == Algorithm::Dynamic).then(dynamic_q_bound),
        }
    }

    /// Elapsed time when the agent has covered `arc` length of the schedule.
    pub fn time_at_cost(&self, arc: f64) -> f64 {
        let mut spent = 0.0;
        let mut elapsed = 0.0;
        let mut i = DiagonalIndex::new(1).expect("1 is a valid diagonal");
        loop {
            let len = diagonal_length(i);
            let speed = self.speed_of_diagonal(i);
            if spent + len >= arc {
                return elapsed + (arc - spent).max(0.0) / speed;
            }
            spent += len;
            elapsed += len / speed;
            match i.next() {
                Some(n) => i = n,
                None => return elapsed,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingRow {
    pub diagonal: u32,
    pub length: f64,
    pub speed: f64,
    pub time: f64,
    pub cumulative_time: f64,
}

/// Per-diagonal traversal times of a plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
    /// Certified bound on the total time of the dynamic schedule.
    pub q: Option<f64>,
}

/// `t_i` of the dynamic plan for any `i >= 1`, from the closed form.
pub fn dynamic_traversal_time(i: u32) -> f64 {
    diagonal_length_closed_form(i) / (5.0 * i as f64).exp2()
}

/// Certified upper bound on `q = sum_i t_i` for the dynamic plan.
///
/// Exact `t_i` are summed through `max(upto, 10)`; the rest is bounded by the
/// geometric tail `sum_{i>m} 4^-i = 4^-m / 3`, valid since `t_i <= 4^-i` for
/// `i >= 11`.
pub fn dynamic_q(upto: u32) -> f64 {
    let m = upto.clamp(TAIL_FROM - 1, MAX_PREDICTED_DIAGONAL);
    let partial: f64 = (1..=m).map(dynamic_traversal_time).sum();
    partial + (-2.0 * m as f64).exp2() / 3.0
}

/// `dynamic_q(Q_DEPTH)`, computed once.
pub fn dynamic_q_bound() -> f64 {
    static Q: OnceLock<f64> = OnceLock::new();
    *Q.get_or_init(|| dynamic_q(Q_DEPTH))
}

/// Catch prediction for the dynamic algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicPrediction {
    pub a: i32,
    pub b: i32,
    /// `ceil(q v)`.
    pub c: i64,
    /// `max(a, c) + 1`.
    pub a_prime: i64,
    pub q: f64,
    /// `a' + b/2 - 1`, before any raise.
    pub y_formula: u32,
    /// Least diagonal `>= y_formula` with `t_y <= 1 / (v 2^(b+1))`.
    pub y: u32,
    /// Whether the timing condition already held at `y_formula`.
    pub condition_at_formula: bool,
    /// `80 y 2^(2y+2)`.
    pub cost_bound: f64,
}

/// Whether `t_y <= 1 / (v 2^(b+1))`, i.e. `Δ[y]` is swept faster than the
/// target can move `2^-(b+1)`.
pub fn dynamic_condition_holds(y: u32, v: f64, b: i32) -> bool {
    if v == 0.0 {
        return true;
    }
    dynamic_traversal_time(y) * v * (b as f64 + 1.0).exp2() <= 1.0
}

/// Predicted catch diagonal for a target initially within `d`, moving at
/// speed at most `v`, sensed at `r`. `v = 0` is allowed (inert target).
pub fn predict_dynamic(d: f64, v: f64, r: f64) -> DynamicPrediction {
    let q = dynamic_q_bound();
    let a = ceil_log2(d);
    let b = resolution_column(r);
    let c = (q * v).ceil() as i64;
    let a_prime = (a as i64).max(c) + 1;
    let y_formula = (a_prime + b as i64 / 2 - 1).max(1) as u32;
    let condition_at_formula = dynamic_condition_holds(y_formula, v, b);
    let mut y = y_formula;
    while !dynamic_condition_holds(y, v, b) && y < MAX_PREDICTED_DIAGONAL {
        y += 1;
    }
    DynamicPrediction {
        a,
        b,
        c,
        a_prime,
        q,
        y_formula,
        y,
        condition_at_formula,
        cost_bound: cumulative_cost_bound(y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::diagonal_instructions;
    use approx::assert_relative_eq;

    fn di(i: u32) -> DiagonalIndex {
        DiagonalIndex::new(i).unwrap()
    }

    #[test]
    fn static_speeds_and_times() {
        let p = static_plan();
        assert_eq!(p.speed_of_diagonal(di(1)), 1.0);
        assert_eq!(p.traversal_time(di(1)), 171.0);
        assert_eq!(p.time_at_cost(37.5), 37.5);
        assert_eq!(p.time_at_cost(500.0), 500.0);
    }

    #[test]
    fn dynamic_speeds_and_times() {
        let p = dynamic_plan();
        assert_eq!(p.speed_of_diagonal(di(3)), 32768.0);
        assert_eq!(p.traversal_time(di(1)), 5.34375);
        for i in 11..=20 {
            assert!(p.traversal_time(di(i)) <= (-2.0 * i as f64).exp2());
        }
        // t0: half a unit of arc on Δ[1] at speed 32.
        assert_eq!(p.time_at_cost(0.5), 1.0 / 64.0);
        assert_relative_eq!(p.time_at_cost(171.0 + 1147.75), 5.34375 + 1147.75 / 1024.0);
    }

    #[test]
    fn tail_bound_holds_from_eleven() {
        for i in TAIL_FROM..=MAX_PREDICTED_DIAGONAL {
            let len = diagonal_length_closed_form(i);
            assert!(len <= (3.0 * i as f64).exp2(), "i = {i}");
        }
    }

    #[test]
    fn closed_form_times_match_summed_legs() {
        let p = dynamic_plan();
        for i in 1..=8 {
            let summed: f64 = diagonal_instructions(di(i)).map(|m| m.distance).sum();
            let t = summed / p.speed_of_diagonal(di(i));
            assert_relative_eq!(t, p.traversal_time(di(i)), max_relative = 1e-12);
        }
    }

    #[test]
    fn q_partial_sums() {
        let p_time = |i| dynamic_plan().traversal_time(di(i));
        let t1 = 5.34375;
        let t2 = 1147.75 / 1024.0;
        let t3 = 6427.9375 / 32768.0;
        assert_relative_eq!(dynamic_plan().traversal_time(di(3)), t3);
        assert!(dynamic_q(1) >= t1);
        assert!(dynamic_q(3) >= t1 + t2 + t3);
        let (q30, q40) = (dynamic_q(30), dynamic_q(40));
        assert!(q30.is_finite());
        assert!((q30 - q40).abs() <= 1e-9);
        let mut prev = dynamic_q(10);
        assert_eq!(dynamic_traversal_time(7), p_time(7));
        for upto in 11..=60 {
            let q = dynamic_q(upto);
            assert!(q <= prev);
            prev = q;
        }
        let table = dynamic_plan().timing_table(DiagonalIndex::MAX);
        for row in &table.rows {
            assert!(row.cumulative_time <= dynamic_q_bound());
        }
    }

    #[test]
    fn inert_dynamic_prediction() {
        let p = predict_dynamic(4.0, 0.0, 1.0 / 16.0);
        assert_eq!(p.a_prime, 3);
        assert_eq!(p.y, 4);
        assert!(p.condition_at_formula);
    }

    #[test]
    fn unit_speed_dynamic_prediction() {
        let p = predict_dynamic(1.0, 1.0, 1.0 / 16.0);
        let c = dynamic_q_bound().ceil() as i64;
        assert_eq!(p.c, c);
        assert_eq!(p.y as i64, (c + 1) + 1);
        assert!(dynamic_condition_holds(p.y, 1.0, p.b));
    }

    #[test]
    fn raised_prediction_satisfies_condition() {
        for v in [0.01, 0.5, 1.0, 4.0, 16.0, 20.0] {
            for r in [0.5, 0.25, 1.0 / 16.0, 1.0 / 256.0] {
                let p = predict_dynamic(2.0, v, r);
                assert!(p.y >= p.y_formula);
                assert!(dynamic_condition_holds(p.y, v, p.b));
                if p.y > p.y_formula {
                    assert!(!p.condition_at_formula);
                }
            }
        }
    }
}
