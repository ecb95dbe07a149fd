//! Command-line front end for the search simulator.
//!
//! Exit status is 0 on success, 2 when an argument or parameter is rejected,
//! and 1 when a run fails at runtime (I/O). Diagnostics are one line on
//! stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blindsearch::coverage::tube_area;
use blindsearch::engine::{simulate_observed, NoTrace, Observer, PathRecorder, TraceWriter};
use blindsearch::experiments::svg::{export_svg, Annotation, MarkerKind};
use blindsearch::experiments::{
    impossibility_report, max_ratio, sweep_dynamic, sweep_static, write_csv, write_jsonl_file,
    SweepError, SweepRow,
};
use blindsearch::searcher::dynamic_q_bound;
use blindsearch::target::{
    adversarial_static_placement, inert, parse_waypoints, placement_length_limit, radial_flee,
    DEFAULT_PLACEMENT_GRID,
};
use blindsearch::trajectory::schedule_prefix;
use blindsearch::{Algorithm, Point, SearcherPlan, SimConfig, SimOutcome, TargetStrategy};

#[derive(Parser)]
#[command(
    name = "blindsearch",
    version,
    about = "Search for a static or moving target in the plane with no prior information"
)]
#[command(
    after_help = "All lengths are in abstract length units; times in the same units divided by agent speed 1."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one search and print the outcome.
    Simulate(RunArgs),
    /// Static algorithm against inert targets uniform in the disc of radius D.
    SweepStatic(StaticSweepArgs),
    /// Dynamic algorithm against radially fleeing targets.
    SweepDynamic(DynamicSweepArgs),
    /// Hidden-target witnesses for a short prefix of the schedule, plus its tube areas.
    Adversary(AdversaryArgs),
    /// Cost certificates against searchers with polynomial speed t^c.
    Impossibility(ImpossibilityArgs),
    /// Run one search and draw the agent and target paths as SVG.
    ExportSvg(SvgArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    /// Searcher: static (unit speed) or dynamic (speed 2^(5i) on diagonal i).
    #[arg(long, default_value = "static")]
    algo: Algorithm,
    /// Initial target position x,y (length units).
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, required_unless_present = "waypoints")]
    target: Option<Point>,
    /// Sensing radius (length units, > 0).
    #[arg(long)]
    r: f64,
    /// Agent start x,y (length units).
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0")]
    start: Point,
    /// Target speed (length units per time unit); the target flees radially from the agent start.
    #[arg(long, default_value_t = 0.0, conflicts_with = "waypoints")]
    v: f64,
    /// Time at which a fleeing target stops (time units) [default: q, the dynamic schedule's total time].
    #[arg(long, conflicts_with = "waypoints")]
    freeze: Option<f64>,
    /// Waypoint script (path): a `v <bound>` line, then `t x y` lines (time units, length units).
    #[arg(long, conflicts_with = "target")]
    waypoints: Option<PathBuf>,
    /// Arc-length budget (length units) [default: unlimited].
    #[arg(long)]
    max_cost: Option<f64>,
    /// Last diagonal the agent may traverse (index, 1..=29) [default: 29].
    #[arg(long)]
    max_diagonal: Option<u32>,
    /// Write per-event records `t cost ax ay tx ty event` to this file (path).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct StaticSweepArgs {
    /// Initial target distances (comma-separated, length units, 0 < D <= 16).
    #[arg(long = "D", value_delimiter = ',', required = true)]
    d: Vec<f64>,
    /// Sensing radii (comma-separated, length units, 1/256 <= r < 1).
    #[arg(long, value_delimiter = ',', required = true)]
    r: Vec<f64>,
    #[command(flatten)]
    common: SweepCommon,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct DynamicSweepArgs {
    /// Target speed bounds (comma-separated, length units per time unit, 0 <= v <= 16).
    #[arg(long, value_delimiter = ',', required = true)]
    v: Vec<f64>,
    /// Sensing radii (comma-separated, length units, 1/256 <= r < 1).
    #[arg(long, value_delimiter = ',', required = true)]
    r: Vec<f64>,
    /// Initial target distance bound (length units, 0 < D <= 16).
    #[arg(long = "D", default_value_t = 1.0)]
    d: f64,
    #[command(flatten)]
    common: SweepCommon,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepCommon {
    /// Targets per parameter combination (count, >= 1).
    #[arg(long, default_value_t = 50)]
    samples: u32,
    /// Base RNG seed (integer; required for reproducibility).
    #[arg(long)]
    seed: u64,
    /// CSV output file (path) [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the rows as JSON lines to this file (path).
    #[arg(long)]
    jsonl: Option<PathBuf>,
    /// Worker threads (count; 0 uses all cores). Row order does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct AdversaryArgs {
    /// Horizon i: hiding couples j = 1..=i with D_j = 2^j, r_j = 2^(-2(i-j+1)) (index, >= 1).
    #[arg(long)]
    i: u32,
    /// Grid cells per side when searching each square Q(2^j) and rasterizing tubes (count, >= 32).
    #[arg(long, default_value_t = DEFAULT_PLACEMENT_GRID)]
    grid_res: usize,
    /// Length of the static schedule prefix to test (length units) [default: the largest x with 2 r_j x + pi r_j^2 <= area(R_j)/2 for all j].
    #[arg(long)]
    max_cost: Option<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ImpossibilityArgs {
    /// Speed exponent: the searcher moves at speed t^c (integer, >= 2).
    #[arg(long, default_value_t = 2)]
    c: u32,
    /// Cost constant d of the optimal-cost bound d (log2 v + log2 1/r) v^2 / r (dimensionless, > 0).
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Rows m = 1..=m_max with v = 2^m, r = 2^-m (count, >= 4).
    #[arg(long, default_value_t = 12)]
    m_max: u32,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SvgArgs {
    #[command(flatten)]
    run: RunArgs,
    /// SVG output file (path).
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Invalid(String),
    Runtime(String),
}

impl CliError {
    fn io(path: &Path, e: io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Io { .. } | SweepError::Csv(_) => CliError::Runtime(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    Ok(Point::new(num(x)?, num(y)?))
}

fn strategy_of(args: &RunArgs) -> Result<TargetStrategy, CliError> {
    if let Some(path) = &args.waypoints {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return parse_waypoints(&text).map_err(|e| CliError::Invalid(e.to_string()));
    }
    let p = args
        .target
        .expect("clap requires --target without --waypoints");
    if args.v == 0.0 {
        return Ok(inert(p));
    }
    let freeze = args.freeze.unwrap_or_else(dynamic_q_bound);
    radial_flee(args.start, p, args.v, freeze).map_err(|e| CliError::Invalid(e.to_string()))
}

fn config_of(args: &RunArgs) -> SimConfig {
    let mut cfg = SimConfig::new(args.r).with_start(args.start);
    if let Some(c) = args.max_cost {
        cfg = cfg.with_max_cost(c);
    }
    if let Some(d) = args.max_diagonal {
        cfg = cfg.with_max_diagonal(d);
    }
    cfg
}

fn run_once<O: Observer>(
    args: &RunArgs,
    obs: &mut O,
) -> Result<(TargetStrategy, SimOutcome), CliError> {
    let strategy = strategy_of(args)?;
    let plan = SearcherPlan::for_algorithm(args.algo);
    let out = simulate_observed(&plan, &strategy, &config_of(args), obs)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok((strategy, out))
}

fn simulate_cmd(args: RunArgs) -> Result<(), CliError> {
    let out = match &args.trace {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut writer = TraceWriter::new(BufWriter::new(file));
            let (_, out) = run_once(&args, &mut writer)?;
            writer.finish().map_err(|e| CliError::io(path, e))?;
            out
        }
        None => run_once(&args, &mut NoTrace)?.1,
    };
    println!("{out}");
    Ok(())
}

fn with_jobs<T>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn emit_rows(rows: &[SweepRow], common: &SweepCommon) -> Result<(), CliError> {
    match &common.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            write_csv(rows, BufWriter::new(file))?;
        }
        None => write_csv(rows, io::stdout().lock())?,
    }
    if let Some(path) = &common.jsonl {
        write_jsonl_file(rows, path)?;
    }
    if common.out.is_some() {
        let sensed = rows.iter().filter(|r| r.sensed).count();
        println!(
            "rows={} sensed={} max_ratio={}",
            rows.len(),
            sensed,
            max_ratio(rows)
        );
    }
    Ok(())
}

fn sweep_static_cmd(args: StaticSweepArgs) -> Result<(), CliError> {
    let c = &args.common;
    let rows = with_jobs(c.jobs, || sweep_static(&args.d, &args.r, c.samples, c.seed))??;
    emit_rows(&rows, c)
}

fn sweep_dynamic_cmd(args: DynamicSweepArgs) -> Result<(), CliError> {
    let c = &args.common;
    let rows = with_jobs(c.jobs, || {
        sweep_dynamic(&args.v, &args.r, args.d, c.samples, c.seed)
    })??;
    emit_rows(&rows, c)
}

fn adversary_cmd(args: AdversaryArgs) -> Result<(), CliError> {
    if args.i == 0 {
        return Err(CliError::Invalid("horizon i must be at least 1".into()));
    }
    if args.grid_res < 32 {
        return Err(CliError::Invalid(format!(
            "grid resolution must be at least 32, got {}",
            args.grid_res
        )));
    }
    let x = args
        .max_cost
        .unwrap_or_else(|| placement_length_limit(args.i));
    if !(x.is_finite() && x >= 0.0) {
        return Err(CliError::Invalid(format!(
            "prefix length must be finite and nonnegative, got {x}"
        )));
    }
    let prefix = schedule_prefix(Point::ORIGIN, x);
    println!(
        "# static schedule prefix of length {x} ({} vertices), horizon i = {}",
        prefix.len(),
        args.i
    );
    for w in adversarial_static_placement(&prefix, args.i, args.grid_res) {
        let tube = tube_area(&prefix, w.r_j, args.grid_res);
        let witness = match w.point {
            Some(p) => format!("{},{}", p.x, p.y),
            None => "none".to_string(),
        };
        println!(
            "j={} D_j={} r_j={} witness={} tube_area={} bound={} slack={} within={}",
            w.j,
            w.d_j,
            w.r_j,
            witness,
            tube.estimated_area,
            tube.analytic_bound,
            tube.slack,
            tube.within_bound()
        );
    }
    Ok(())
}

fn impossibility_cmd(args: ImpossibilityArgs) -> Result<(), CliError> {
    let table = impossibility_report(args.c, args.d, args.m_max)?;
    print!("{}", table.render());
    Ok(())
}

fn export_svg_cmd(args: SvgArgs) -> Result<(), CliError> {
    let mut rec = PathRecorder::default();
    let (strategy, out) = run_once(&args.run, &mut rec)?;
    let mut events = vec![
        Annotation::new("agent start", args.run.start, MarkerKind::Start),
        Annotation::new(
            "target start",
            strategy.initial_position(),
            MarkerKind::Other,
        ),
    ];
    if out.sensed {
        events.push(Annotation::new(
            format!("sensed at t={} cost={}", out.time, out.cost),
            out.agent_pos,
            MarkerKind::Sensing,
        ));
    }
    let target_path = (!strategy.is_inert()).then_some(rec.target.as_slice());
    export_svg(&rec.agent, &events, target_path, &args.out)?;
    println!("{out}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::SweepStatic(a) => sweep_static_cmd(a),
        Command::SweepDynamic(a) => sweep_dynamic_cmd(a),
        Command::Adversary(a) => adversary_cmd(a),
        Command::Impossibility(a) => impossibility_cmd(a),
        Command::ExportSvg(a) => export_svg_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    let result = run(cli);
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
