//! Seeded parameter sweeps, the impossibility table, and report writers.
//!
//! Every row owns a seed derived from the sweep seed and the row's
//! parameters, so rows are reproducible on their own and independent of how
//! the sweep is scheduled across workers.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::{poly_speed_certificate, CoverageError, PolySpeedCertificate};
use crate::engine::{simulate, simulate_observed, Observer, SimConfig, SimError, SimOutcome};
use crate::geometry::Point;
use crate::searcher::{
    dynamic_plan, dynamic_q_bound, predict_dynamic, static_plan, Algorithm, SearcherPlan,
};
use crate::target::{inert, radial_flee, TargetStrategy};
use crate::trajectory::predict_static;

pub mod svg;

pub use svg::{export_svg, render_svg, Annotation};

/// Largest initial distance the sweeps accept.
pub const MAX_SWEEP_D: f64 = 16.0;
/// Smallest sensing radius the sweeps accept.
pub const MIN_SWEEP_R: f64 = 1.0 / 256.0;
/// Largest target speed the dynamic sweep accepts.
pub const MAX_SWEEP_V: f64 = 16.0;
/// Diagonal budget cap for dynamic runs.
pub const DYNAMIC_DIAGONAL_CAP: u32 = 10;

/// Header of the CSV results, in `SweepRow` field order.
pub const CSV_HEADER: &str =
    "run_id,D,r,v,algorithm,sensed,cost,time,diagonal,predicted_y,cost_bound,ratio,seed";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{name} = {value} is outside the sweep range {range}")]
    OutOfGuard {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("{0} must not be empty")]
    EmptySet(&'static str),
    #[error("samples must be at least 1")]
    NoSamples,
    #[error("impossibility table needs c >= 2 and m_max >= 4, got c={c}, m_max={m_max}")]
    BadTable { c: u32, m_max: u32 },
    #[error(transparent)]
    Certificate(#[from] CoverageError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// The parameters of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub d: f64,
    pub r: f64,
    pub v: f64,
}

impl ProblemParams {
    /// Scale of the dynamic bound, `max(D, v)`.
    pub fn m(&self) -> f64 {
        self.d.max(self.v)
    }

    /// `(log2 S + log2 1/r) S² / r` for scale `S = max(D, v)` (or `D` when
    /// `v = 0`).
    pub fn cost_scale(&self) -> f64 {
        let m = self.m();
        (m.log2() - self.r.log2()) * m * m / self.r
    }
}

/// One simulated run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub run_id: u64,
    #[serde(rename = "D")]
    pub d: f64,
    pub r: f64,
    pub v: f64,
    pub algorithm: Algorithm,
    pub sensed: bool,
    pub cost: f64,
    pub time: f64,
    pub diagonal: u32,
    pub predicted_y: u32,
    pub cost_bound: f64,
    /// `cost / ((log2 M + log2 1/r) M² / r)`, `M = max(D, v)`.
    pub ratio: f64,
    pub seed: u64,
}

impl SweepRow {
    /// The target started within sensing range, so the run cost nothing.
    pub fn initially_within_range(&self) -> bool {
        self.sensed && self.cost == 0.0
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one sample. Independent of `v` and of the algorithm, so inert
/// dynamic rows replay the static rows' targets.
pub fn row_seed(seed: u64, d: f64, r: f64, sample: u64) -> u64 {
    [d.to_bits(), r.to_bits(), sample]
        .into_iter()
        .fold(splitmix64(seed), |h, x| splitmix64(h ^ x))
}

/// Uniform point in the disc of radius `d` around the origin.
fn sample_disc(rng: &mut ChaCha8Rng, d: f64) -> Point {
    let rho = d * rng.gen::<f64>().sqrt();
    let theta = TAU * rng.gen::<f64>();
    Point::new(rho * theta.cos(), rho * theta.sin())
}

fn check_set(name: &'static str, values: &[f64]) -> Result<(), SweepError> {
    if values.is_empty() {
        Err(SweepError::EmptySet(name))
    } else {
        Ok(())
    }
}

fn guard(name: &'static str, value: f64, ok: bool, range: &'static str) -> Result<(), SweepError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(SweepError::OutOfGuard { name, value, range })
    }
}

fn guard_d(d: f64) -> Result<(), SweepError> {
    guard("D", d, d > 0.0 && d <= MAX_SWEEP_D, "(0, 16]")
}

fn guard_r(r: f64) -> Result<(), SweepError> {
    guard("r", r, (MIN_SWEEP_R..1.0).contains(&r), "[2^-8, 1)")
}

fn guard_v(v: f64) -> Result<(), SweepError> {
    guard("v", v, (0.0..=MAX_SWEEP_V).contains(&v), "[0, 16]")
}

/// Fans `jobs` out over the current rayon pool, keeping input order.
fn run_jobs<J, F>(jobs: Vec<J>, f: F) -> Result<Vec<SweepRow>, SweepError>
where
    J: Send,
    F: Fn(u64, J) -> Result<SweepRow, SweepError> + Sync,
{
    jobs.into_par_iter()
        .enumerate()
        .map(|(id, job)| f(id as u64, job))
        .collect()
}

/// Inert targets uniform in the disc of radius `D`, caught by the static
/// algorithm.
pub fn sweep_static(
    ds: &[f64],
    rs: &[f64],
    samples: u32,
    seed: u64,
) -> Result<Vec<SweepRow>, SweepError> {
    sweep_static_observed(ds, rs, samples, seed, |_| crate::engine::NoTrace, |_, _| {})
}

/// Like [`sweep_static`], but builds an observer per row and hands it back
/// with the row when the run finishes.
pub fn sweep_static_observed<O, M, S>(
    ds: &[f64],
    rs: &[f64],
    samples: u32,
    seed: u64,
    make: M,
    sink: S,
) -> Result<Vec<SweepRow>, SweepError>
where
    O: Observer,
    M: Fn(&TargetStrategy) -> O + Sync,
    S: Fn(&SweepRow, O) + Sync,
{
    check_set("D", ds)?;
    check_set("r", rs)?;
    if samples == 0 {
        return Err(SweepError::NoSamples);
    }
    ds.iter().try_for_each(|&d| guard_d(d))?;
    rs.iter().try_for_each(|&r| guard_r(r))?;
    let jobs: Vec<(f64, f64, u64)> = ds
        .iter()
        .flat_map(|&d| {
            rs.iter()
                .flat_map(move |&r| (0..samples as u64).map(move |s| (d, r, s)))
        })
        .collect();
    let plan = static_plan();
    run_jobs(jobs, |run_id, (d, r, sample)| {
        let seed = row_seed(seed, d, r, sample);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = inert(sample_disc(&mut rng, d));
        let pred = predict_static(d, r);
        let cfg = SimConfig::new(r).with_max_diagonal(pred.y + 1);
        let params = ProblemParams { d, r, v: 0.0 };
        let mut obs = make(&target);
        let out = simulate_observed(&plan, &target, &cfg, &mut obs)?;
        let row = row_from(
            run_id,
            params,
            Algorithm::Static,
            &out,
            pred.y,
            pred.cost_bound,
            seed,
        );
        sink(&row, obs);
        Ok(row)
    })
}

fn row_from(
    run_id: u64,
    p: ProblemParams,
    algorithm: Algorithm,
    out: &SimOutcome,
    predicted_y: u32,
    cost_bound: f64,
    seed: u64,
) -> SweepRow {
    SweepRow {
        run_id,
        d: p.d,
        r: p.r,
        v: p.v,
        algorithm,
        sensed: out.sensed,
        cost: out.cost,
        time: out.time,
        diagonal: out.diagonal,
        predicted_y,
        cost_bound,
        ratio: out.cost / p.cost_scale(),
        seed,
    }
}

/// How long a dynamic-sweep target flees before freezing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FreezePolicy {
    /// The time at which the plan has covered arc length 1/2.
    HalfUnitOfArc,
    /// Uniform in `[0, q]`.
    Uniform,
    /// `q`: the whole schedule fits in this time, so the target never stops.
    Never,
}

impl FreezePolicy {
    /// Policy used for a given sample index.
    pub fn for_sample(sample: u64) -> Self {
        match sample % 3 {
            0 => FreezePolicy::HalfUnitOfArc,
            1 => FreezePolicy::Uniform,
            _ => FreezePolicy::Never,
        }
    }

    pub fn freeze_time(self, plan: &SearcherPlan, rng: &mut ChaCha8Rng) -> f64 {
        let q = dynamic_q_bound();
        match self {
            FreezePolicy::HalfUnitOfArc => plan.time_at_cost(0.5),
            FreezePolicy::Uniform => q * rng.gen::<f64>(),
            FreezePolicy::Never => q,
        }
    }
}

/// The target a dynamic-sweep sample flees with.
pub fn dynamic_sample_target(seed: u64, d: f64, v: f64, sample: u64) -> TargetStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = sample_disc(&mut rng, d);
    let t_freeze = FreezePolicy::for_sample(sample).freeze_time(&dynamic_plan(), &mut rng);
    if v == 0.0 || start == Point::ORIGIN {
        return inert(start);
    }
    radial_flee(Point::ORIGIN, start, v, t_freeze).expect("start differs from origin")
}

/// Radially fleeing targets caught by the dynamic algorithm.
pub fn sweep_dynamic(
    vs: &[f64],
    rs: &[f64],
    d: f64,
    samples: u32,
    seed: u64,
) -> Result<Vec<SweepRow>, SweepError> {
    check_set("v", vs)?;
    check_set("r", rs)?;
    if samples == 0 {
        return Err(SweepError::NoSamples);
    }
    guard_d(d)?;
    vs.iter().try_for_each(|&v| guard_v(v))?;
    rs.iter().try_for_each(|&r| guard_r(r))?;
    let jobs: Vec<(f64, f64, u64)> = vs
        .iter()
        .flat_map(|&v| {
            rs.iter()
                .flat_map(move |&r| (0..samples as u64).map(move |s| (v, r, s)))
        })
        .collect();
    let plan = dynamic_plan();
    run_jobs(jobs, |run_id, (v, r, sample)| {
        let seed = row_seed(seed, d, r, sample);
        let target = dynamic_sample_target(seed, d, v, sample);
        let pred = predict_dynamic(d, v, r);
        let cfg = SimConfig::new(r).with_max_diagonal(pred.y.min(DYNAMIC_DIAGONAL_CAP));
        let out = simulate(&plan, &target, &cfg)?;
        let params = ProblemParams { d, r, v };
        Ok(row_from(
            run_id,
            params,
            Algorithm::Dynamic,
            &out,
            pred.y,
            pred.cost_bound,
            seed,
        ))
    })
}

/// One row per `m`: the certificate for `v = 2^m`, `r = 2^-m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpossibilityTable {
    pub c: u32,
    pub d: f64,
    pub rows: Vec<(u32, PolySpeedCertificate)>,
    /// Least `m` from which every remaining row exceeds the optimal cost.
    pub crossover: Option<u32>,
    /// Least-squares slope of `ln min_cost` on `ln(v²/r)` over the last four
    /// rows.
    pub slope: f64,
    pub beta: f64,
}

pub fn impossibility_report(c: u32, d: f64, m_max: u32) -> Result<ImpossibilityTable, SweepError> {
    if c < 2 || m_max < 4 {
        return Err(SweepError::BadTable { c, m_max });
    }
    let rows = (1..=m_max)
        .map(|m| {
            let v = (m as f64).exp2();
            poly_speed_certificate(c, v, 1.0 / v, d).map(|cert| (m, cert))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let crossover = rows
        .iter()
        .rposition(|(_, cert)| !cert.exceeds)
        .map_or(Some(0), |last_fail| Some(last_fail + 1))
        .filter(|&idx| idx < rows.len())
        .map(|idx| rows[idx].0);
    let tail = &rows[rows.len() - 4..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|(_, c)| ((c.v * c.v / c.r).ln(), c.min_cost.ln()))
        .collect();
    Ok(ImpossibilityTable {
        c,
        d,
        beta: rows[0].1.beta,
        rows,
        crossover,
        slope: fit_slope(&pts),
    })
}

/// Ordinary least-squares slope.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

impl ImpossibilityTable {
    /// Plain-text table; the crossover row is marked with `*`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# polynomial speed t^{} with d = {}", self.c, self.d);
        let _ = writeln!(
            out,
            "{:>1} {:>3} {:>8} {:>12} {:>14} {:>14} {:>14} {:>7}",
            "", "m", "v", "r", "min_time", "min_cost", "optimal_cost", "exceeds"
        );
        for (m, cert) in &self.rows {
            let mark = if Some(*m) == self.crossover { "*" } else { " " };
            let _ = writeln!(
                out,
                "{:>1} {:>3} {:>8} {:>12.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>7}",
                mark,
                m,
                cert.v,
                cert.r,
                cert.min_catch_time,
                cert.min_cost,
                cert.optimal_cost,
                cert.exceeds
            );
        }
        match self.crossover {
            Some(m) => {
                let _ = writeln!(out, "crossover m = {m}");
            }
            None => {
                let _ = writeln!(out, "crossover none");
            }
        }
        let _ = writeln!(out, "slope {:.6} (beta = {:.6})", self.slope, self.beta);
        out
    }
}

/// Writes rows as CSV with [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| SweepError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>, SweepError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(SweepError::from))
        .collect()
}

/// Writes rows as line-delimited JSON, one object per row.
pub fn write_jsonl<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    let file = std::fs::File::create(path).map_err(|source| SweepError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn write_jsonl_file(rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    let io_err = |source| SweepError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    write_jsonl(rows, std::io::BufWriter::new(file)).map_err(io_err)
}

/// Largest ratio among sensed rows that cost something.
pub fn max_ratio(rows: &[SweepRow]) -> f64 {
    rows.iter()
        .filter(|r| r.sensed && !r.initially_within_range())
        .map(|r| r.ratio)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_reproducible() {
        let a = sweep_static(&[1.0, 2.0], &[0.25], 4, 11).unwrap();
        let b = sweep_static(&[1.0, 2.0], &[0.25], 4, 11).unwrap();
        assert_eq!(a, b);
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        write_csv(&a, &mut ca).unwrap();
        write_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.len(), 8);
        assert_eq!(
            a.iter().map(|r| r.run_id).collect::<Vec<_>>(),
            (0..8).collect::<Vec<_>>()
        );
    }

    #[test]
    fn different_seeds_differ() {
        let a = sweep_static(&[2.0], &[0.25], 3, 1).unwrap();
        let b = sweep_static(&[2.0], &[0.25], 3, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn guards_reject_out_of_range() {
        assert!(matches!(
            sweep_static(&[32.0], &[0.25], 1, 0),
            Err(SweepError::OutOfGuard { name: "D", .. })
        ));
        assert!(matches!(
            sweep_static(&[1.0], &[1e-3], 1, 0),
            Err(SweepError::OutOfGuard { name: "r", .. })
        ));
        assert!(matches!(
            sweep_static(&[1.0], &[0.25], 0, 0),
            Err(SweepError::NoSamples)
        ));
        assert!(matches!(
            sweep_static(&[], &[0.25], 1, 0),
            Err(SweepError::EmptySet("D"))
        ));
        assert!(matches!(
            sweep_dynamic(&[100.0], &[0.25], 1.0, 1, 0),
            Err(SweepError::OutOfGuard { name: "v", .. })
        ));
    }

    #[test]
    fn csv_header_and_round_trip() {
        let rows = sweep_static(&[1.0], &[0.25], 3, 5).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next(), Some(CSV_HEADER));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn jsonl_one_object_per_line() {
        let rows = sweep_static(&[1.0], &[0.25], 2, 5).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<SweepRow> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(parsed, rows);
        assert!(text.contains("\"D\":1.0"));
    }

    #[test]
    fn cost_zero_rows_are_flagged() {
        // D tiny relative to r: every target starts in range.
        let rows = sweep_static(&[0.1], &[0.25], 5, 3).unwrap();
        assert!(rows.iter().all(SweepRow::initially_within_range));
        assert!(rows.iter().all(|r| r.ratio == 0.0));
    }

    #[test]
    fn inert_dynamic_rows_match_static_rows() {
        let s = sweep_static(&[1.0], &[0.25, 0.0625], 6, 9).unwrap();
        let d = sweep_dynamic(&[0.0], &[0.25, 0.0625], 1.0, 6, 9).unwrap();
        for (a, b) in s.iter().zip(&d) {
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.cost, b.cost);
            assert_eq!(a.diagonal, b.diagonal);
            assert_eq!(a.sensed, b.sensed);
        }
    }

    #[test]
    fn freeze_policies() {
        let plan = dynamic_plan();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            FreezePolicy::HalfUnitOfArc.freeze_time(&plan, &mut rng),
            1.0 / 64.0
        );
        assert_eq!(
            FreezePolicy::Never.freeze_time(&plan, &mut rng),
            dynamic_q_bound()
        );
        let u = FreezePolicy::Uniform.freeze_time(&plan, &mut rng);
        assert!((0.0..=dynamic_q_bound()).contains(&u));
        assert_eq!(FreezePolicy::for_sample(4), FreezePolicy::Uniform);
    }

    #[test]
    fn impossibility_table_c3_row() {
        let t = impossibility_report(3, 1.0, 6).unwrap();
        let (_, first) = t.rows[0];
        assert_eq!((first.v, first.r), (2.0, 0.5));
        assert!((first.min_cost - 64.0).abs() < 1e-9);
        assert!((t.slope - 2.0).abs() < 1e-9);
    }

    #[test]
    fn impossibility_table_c2() {
        let t = impossibility_report(2, 1.0, 12).unwrap();
        let m = t.crossover.expect("crossover exists");
        let ratios: Vec<f64> = t
            .rows
            .iter()
            .filter(|(k, _)| *k >= m)
            .map(|(_, c)| c.cost_ratio())
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
        assert!((t.slope - 3.0).abs() <= 0.05);
        let text = t.render();
        assert!(text.lines().any(|l| l.starts_with('*')));
        assert!(impossibility_report(1, 1.0, 12).is_err());
        assert!(impossibility_report(2, 1.0, 3).is_err());
    }

    #[test]
    fn crossover_absent_when_never_exceeding() {
        // A huge d keeps the optimal cost above the polynomial bound.
        let t = impossibility_report(2, 1e300, 4).unwrap();
        assert_eq!(t.crossover, None);
    }

    #[test]
    fn slope_fit() {
        let pts = [(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)];
        assert!((fit_slope(&pts) - 2.0).abs() < 1e-12);
    }
}
