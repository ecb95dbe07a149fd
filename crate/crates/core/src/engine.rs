//! Continuous-time simulation of a searcher plan against a target strategy.
//!
//! The agent moves at constant velocity along each leg, and the target moves
//! at constant velocity between its breakpoints. Each leg is cut at the
//! target's breakpoints, and every resulting interval is an exact quadratic
//! contact problem. Intervals are parameterized by the agent's arc length,
//! so inert targets give bit-identical costs under any speed profile.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{first_contact_time, Point};
use crate::searcher::SearcherPlan;
use crate::target::{TargetError, TargetStrategy};
use crate::trajectory::DiagonalIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("sensing radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("cost budget must be positive, got {0}")]
    BadCostBudget(f64),
    #[error("diagonal budget must be in 1..={max}, got {got}")]
    BadDiagonalBudget { got: u32, max: u32 },
    #[error("agent start must be finite")]
    BadStart,
    #[error("oracle step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("invalid target strategy: {0}")]
    Strategy(#[from] TargetError),
}

/// Simulation limits and the sensing radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub agent_start: Point,
    pub r: f64,
    /// Arc-length budget; `f64::INFINITY` for none.
    pub max_cost: f64,
    /// Last diagonal the agent may traverse.
    pub max_diagonal: u32,
}

impl SimConfig {
    /// Start at the origin with no cost budget and the largest diagonal budget.
    pub fn new(r: f64) -> Self {
        Self {
            agent_start: Point::ORIGIN,
            r,
            max_cost: f64::INFINITY,
            max_diagonal: DiagonalIndex::MAX,
        }
    }

    pub fn with_start(mut self, p: Point) -> Self {
        self.agent_start = p;
        self
    }

    pub fn with_max_cost(mut self, c: f64) -> Self {
        self.max_cost = c;
        self
    }

    pub fn with_max_diagonal(mut self, d: u32) -> Self {
        self.max_diagonal = d;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(SimError::BadRadius(self.r));
        }
        if self.max_cost.is_nan() || self.max_cost <= 0.0 {
            return Err(SimError::BadCostBudget(self.max_cost));
        }
        if !(1..=DiagonalIndex::MAX).contains(&self.max_diagonal) {
            return Err(SimError::BadDiagonalBudget {
                got: self.max_diagonal,
                max: DiagonalIndex::MAX,
            });
        }
        if !self.agent_start.is_finite() {
            return Err(SimError::BadStart);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Sensed,
    CostBudget,
    DiagonalBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOutcome {
    pub sensed: bool,
    pub stop: StopReason,
    pub time: f64,
    /// Arc length traversed by the agent.
    pub cost: f64,
    pub agent_pos: Point,
    pub target_pos: Point,
    pub diagonal: u32,
    pub legs_processed: u64,
}

impl std::fmt::Display for SimOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "sensed={} stop={} time={} cost={} agent={},{} target={},{} diagonal={} legs={}",
            self.sensed,
            match self.stop {
                StopReason::Sensed => "sensed",
                StopReason::CostBudget => "cost_budget",
                StopReason::DiagonalBudget => "diagonal_budget",
            },
            self.time,
            self.cost,
            self.agent_pos.x,
            self.agent_pos.y,
            self.target_pos.x,
            self.target_pos.y,
            self.diagonal,
            self.legs_processed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Start,
    LegEnd,
    Sensed,
    CostBudget,
    DiagonalBudget,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Start => "start",
            TraceKind::LegEnd => "leg_end",
            TraceKind::Sensed => "sensed",
            TraceKind::CostBudget => "cost_budget",
            TraceKind::DiagonalBudget => "diagonal_budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEvent {
    pub t: f64,
    pub cost: f64,
    pub agent: Point,
    pub target: Point,
    pub kind: TraceKind,
}

/// Receives simulation events. `wants_legs` gates the per-leg events, which
/// dominate the event count.
pub trait Observer {
    fn wants_legs(&self) -> bool {
        true
    }
    fn event(&mut self, event: &TraceEvent);
}

/// Discards everything.
pub struct NoTrace;

impl Observer for NoTrace {
    fn wants_legs(&self) -> bool {
        false
    }
    fn event(&mut self, _: &TraceEvent) {}
}

/// Collects the agent's traversed polyline (start, leg ends, stop point).
#[derive(Debug, Default, Clone)]
pub struct PathRecorder {
    pub agent: Vec<Point>,
    pub target: Vec<Point>,
}

impl Observer for PathRecorder {
    fn event(&mut self, e: &TraceEvent) {
        if self.agent.last() != Some(&e.agent) {
            self.agent.push(e.agent);
        }
        if self.target.last() != Some(&e.target) {
            self.target.push(e.target);
        }
    }
}

/// Header line of the trace format.
pub const TRACE_HEADER: &str = "# t cost ax ay tx ty event";

/// Writes one whitespace-separated `t cost ax ay tx ty event` record per
/// event, after a `#` header line. The first I/O error is kept and further
/// writes are skipped.
pub struct TraceWriter<W: Write> {
    out: W,
    error: Option<io::Error>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W) -> Self {
        let error = writeln!(out, "{TRACE_HEADER}").err();
        Self { out, error }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Observer for TraceWriter<W> {
    fn event(&mut self, e: &TraceEvent) {
        if self.error.is_some() {
            return;
        }
        if let Err(err) = writeln!(
            self.out,
            "{} {} {} {} {} {} {}",
            e.t,
            e.cost,
            e.agent.x,
            e.agent.y,
            e.target.x,
            e.target.y,
            e.kind.as_str()
        ) {
            self.error = Some(err);
        }
    }
}

/// Parses a trace line back into an event; `None` for the header or blanks.
pub fn parse_trace_line(line: &str) -> Option<TraceEvent> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return None;
    }
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 7 {
        return None;
    }
    let n = |i: usize| f[i].parse::<f64>().ok();
    let kind = match f[6] {
        "start" => TraceKind::Start,
        "leg_end" => TraceKind::LegEnd,
        "sensed" => TraceKind::Sensed,
        "cost_budget" => TraceKind::CostBudget,
        "diagonal_budget" => TraceKind::DiagonalBudget,
        _ => return None,
    };
    Some(TraceEvent {
        t: n(0)?,
        cost: n(1)?,
        agent: Point::new(n(2)?, n(3)?),
        target: Point::new(n(4)?, n(5)?),
        kind,
    })
}

pub fn simulate(
    plan: &SearcherPlan,
    strategy: &TargetStrategy,
    cfg: &SimConfig,
) -> Result<SimOutcome, SimError> {
    simulate_observed(plan, strategy, cfg, &mut NoTrace)
}

struct Run<'a, O: Observer> {
    strategy: &'a TargetStrategy,
    obs: &'a mut O,
    agent: Point,
    time: f64,
    cost: f64,
    legs: u64,
}

impl<O: Observer> Run<'_, O> {
    fn finish(
        &mut self,
        stop: StopReason,
        agent_pos: Point,
        target_pos: Point,
        diagonal: u32,
    ) -> SimOutcome {
        let kind = match stop {
            StopReason::Sensed => TraceKind::Sensed,
            StopReason::CostBudget => TraceKind::CostBudget,
            StopReason::DiagonalBudget => TraceKind::DiagonalBudget,
        };
        self.obs.event(&TraceEvent {
            t: self.time,
            cost: self.cost,
            agent: agent_pos,
            target: target_pos,
            kind,
        });
        SimOutcome {
            sensed: stop == StopReason::Sensed,
            stop,
            time: self.time,
            cost: self.cost,
            agent_pos,
            target_pos,
            diagonal,
            legs_processed: self.legs,
        }
    }

    fn target_now(&self) -> Point {
        self.strategy.position_at(self.time)
    }
}

/// Runs the plan until sensing or a budget runs out, reporting events to
/// `obs`.
pub fn simulate_observed<O: Observer>(
    plan: &SearcherPlan,
    strategy: &TargetStrategy,
    cfg: &SimConfig,
    obs: &mut O,
) -> Result<SimOutcome, SimError> {
    cfg.validate()?;
    strategy.validate()?;
    let r = cfg.r;
    let legs_wanted = obs.wants_legs();
    let mut run = Run {
        strategy,
        obs,
        agent: cfg.agent_start,
        time: 0.0,
        cost: 0.0,
        legs: 0,
    };
    let target0 = strategy.initial_position();
    run.obs.event(&TraceEvent {
        t: 0.0,
        cost: 0.0,
        agent: run.agent,
        target: target0,
        kind: TraceKind::Start,
    });
    if run.agent.distance(target0) <= r {
        return Ok(run.finish(StopReason::Sensed, run.agent, target0, 1));
    }

    let mut piece_idx = 0;
    let mut piece = strategy.piece(0);

    for (diag, leg) in plan.schedule() {
        let d = diag.get();
        if d > cfg.max_diagonal {
            let (a, t) = (run.agent, run.target_now());
            return Ok(run.finish(StopReason::DiagonalBudget, a, t, cfg.max_diagonal));
        }
        let remaining = cfg.max_cost - run.cost;
        if remaining <= 0.0 {
            let (a, t) = (run.agent, run.target_now());
            return Ok(run.finish(StopReason::CostBudget, a, t, d));
        }
        let speed = plan.speed_of_diagonal(diag);
        let dir = leg.direction.unit();
        let truncated = leg.distance > remaining;
        let len = if truncated { remaining } else { leg.distance };

        // Walk the leg interval by interval in arc length `s`.
        let mut s = 0.0;
        loop {
            let t_now = run.time + s / speed;
            while piece.end_time <= t_now {
                piece_idx += 1;
                piece = strategy.piece(piece_idx);
            }
            let s_end = if piece.end_time.is_finite() {
                ((piece.end_time - run.time) * speed).min(len)
            } else {
                len
            };
            if s_end <= s && s_end < len {
                // Rounding put the breakpoint at or behind us; move past it.
                piece_idx += 1;
                piece = strategy.piece(piece_idx);
                continue;
            }
            let a0 = run.agent + dir * s;
            let q0 = piece.position_at(t_now);
            let w = piece.velocity * (1.0 / speed);
            if let Some(ds) = first_contact_time(a0, dir, q0, w, r, s_end - s) {
                let s_hit = s + ds;
                let agent_pos = run.agent + dir * s_hit;
                run.time += s_hit / speed;
                run.cost += s_hit;
                let target_pos = piece.position_at(run.time);
                return Ok(run.finish(StopReason::Sensed, agent_pos, target_pos, d));
            }
            if s_end >= len {
                break;
            }
            s = s_end;
        }

        run.agent += dir * len;
        run.cost += len;
        run.time += len / speed;
        run.legs += 1;
        if legs_wanted {
            let target = run.target_now();
            run.obs.event(&TraceEvent {
                t: run.time,
                cost: run.cost,
                agent: run.agent,
                target,
                kind: TraceKind::LegEnd,
            });
        }
        if truncated {
            let (a, t) = (run.agent, run.target_now());
            return Ok(run.finish(StopReason::CostBudget, a, t, d));
        }
    }
    // The schedule only ends after the largest representable diagonal.
    let (a, t) = (run.agent, run.target_now());
    Ok(run.finish(StopReason::DiagonalBudget, a, t, DiagonalIndex::MAX))
}

/// Fixed-step reference: advance `step` of arc length at a time and test the
/// distance at each sample. Converges to [`simulate`] from above as
/// `step -> 0`.
pub fn brute_force_oracle(
    plan: &SearcherPlan,
    strategy: &TargetStrategy,
    cfg: &SimConfig,
    step: f64,
) -> Result<SimOutcome, SimError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(SimError::BadStep(step));
    }
    cfg.validate()?;
    strategy.validate()?;
    let r = cfg.r;
    let mut agent = cfg.agent_start;
    let mut time = 0.0;
    let mut cost = 0.0;
    let mut legs = 0;
    let outcome = |stop, time, cost, agent_pos, target_pos, diagonal, legs| SimOutcome {
        sensed: stop == StopReason::Sensed,
        stop,
        time,
        cost,
        agent_pos,
        target_pos,
        diagonal,
        legs_processed: legs,
    };
    for (diag, leg) in plan.schedule() {
        let d = diag.get();
        if d > cfg.max_diagonal {
            let t = strategy.position_at(time);
            return Ok(outcome(
                StopReason::DiagonalBudget,
                time,
                cost,
                agent,
                t,
                cfg.max_diagonal,
                legs,
            ));
        }
        let remaining = cfg.max_cost - cost;
        if remaining <= 0.0 {
            let t = strategy.position_at(time);
            return Ok(outcome(
                StopReason::CostBudget,
                time,
                cost,
                agent,
                t,
                d,
                legs,
            ));
        }
        let speed = plan.speed_of_diagonal(diag);
        let dir = leg.direction.unit();
        let truncated = leg.distance > remaining;
        let len = if truncated { remaining } else { leg.distance };
        let mut n = 0u64;
        loop {
            let s = (n as f64 * step).min(len);
            let pos = agent + dir * s;
            let t = time + s / speed;
            let tp = strategy.position_at(t);
            if pos.distance(tp) <= r {
                return Ok(outcome(StopReason::Sensed, t, cost + s, pos, tp, d, legs));
            }
            if s >= len {
                break;
            }
            n += 1;
        }
        agent += dir * len;
        cost += len;
        time += len / speed;
        legs += 1;
        if truncated {
            let t = strategy.position_at(time);
            return Ok(outcome(
                StopReason::CostBudget,
                time,
                cost,
                agent,
                t,
                d,
                legs,
            ));
        }
    }
    let t = strategy.position_at(time);
    Ok(outcome(
        StopReason::DiagonalBudget,
        time,
        cost,
        agent,
        t,
        DiagonalIndex::MAX,
        legs,
    ))
}
