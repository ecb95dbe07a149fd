//! Reaching a static or moving target in the plane with no prior
//! information.
//!
//! The agent knows nothing about the initial distance `D`, the sensing
//! radius `r`, or the target's speed bound `v`. The library builds the
//! square-spiral search schedule, simulates it exactly against piecewise
//! linear targets, and evaluates the matching lower-bound constructions.
//!
//! - [`geometry`]: points, distances, first-contact times.
//! - [`trajectory`]: lazy spiral / out-and-back / diagonal streams.
//! - [`searcher`]: the static (unit speed) and dynamic (`2^(5i)`) plans.
//! - [`target`]: target strategies and hidden-target witnesses.
//! - [`engine`]: event-driven simulation and a fixed-step oracle.
//! - [`coverage`]: tube areas and lower-bound certifiers.
//! - [`experiments`]: seeded sweeps, tables, CSV/JSONL/SVG output.

pub mod coverage;
pub mod engine;
pub mod experiments;
pub mod geometry;
pub mod searcher;
pub mod target;
pub mod trajectory;

pub use engine::{simulate, SimConfig, SimOutcome, StopReason};
pub use geometry::{Point, Segment, Vector};
pub use searcher::{dynamic_plan, static_plan, Algorithm, SearcherPlan};
pub use target::TargetStrategy;
