use std::path::Path;
use std::process::{Command, Output};

use blindsearch::engine::{parse_trace_line, TraceKind};
use blindsearch::experiments::{impossibility_report, sweep_dynamic, sweep_static, write_csv};
use blindsearch::target::{
    adversarial_static_placement, inert, parse_waypoints, placement_length_limit,
};
use blindsearch::trajectory::schedule_prefix;
use blindsearch::{simulate, static_plan, Point, SimConfig};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blindsearch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_of(rows: &[blindsearch::experiments::SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_hand_traced_case() {
    let o = bin(&[
        "simulate", "--algo", "static", "--target", "1,0", "--r", "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let lib = simulate(
        &static_plan(),
        &inert(Point::new(1.0, 0.0)),
        &SimConfig::new(0.5),
    )
    .unwrap();
    assert_eq!(stdout(&o), format!("{lib}\n"));
    assert!(stdout(&o).starts_with("sensed=true"));
    assert!(stdout(&o).contains(" cost=2.5 "));
}

#[test]
fn simulate_waypoints_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    let script = "v 1\n0 0.9 0.2\n0.5 1.2 0.4\n# stop\n2 1.2 1.0\n";
    std::fs::write(&file, script).unwrap();
    let o = bin(&[
        "simulate",
        "--algo",
        "dynamic",
        "--waypoints",
        p(&file),
        "--r",
        "0.125",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let strategy = parse_waypoints(script).unwrap();
    let lib = simulate(
        &blindsearch::dynamic_plan(),
        &strategy,
        &SimConfig::new(0.125),
    )
    .unwrap();
    assert_eq!(stdout(&o), format!("{lib}\n"));
}

#[test]
fn trace_file_ends_with_sensing() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("trace.txt");
    let o = bin(&[
        "simulate",
        "--target",
        "-0.7,0.4",
        "--r",
        "0.25",
        "--trace",
        p(&file),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# t cost ax ay tx ty event"));
    let events: Vec<_> = lines
        .map(|l| parse_trace_line(l).expect("parses"))
        .collect();
    assert_eq!(events.first().unwrap().kind, TraceKind::Start);
    assert_eq!(events.last().unwrap().kind, TraceKind::Sensed);
    assert!(events.windows(2).all(|w| w[0].cost <= w[1].cost));
}

#[test]
fn sweep_static_file_is_library_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let o = bin(&[
        "sweep-static",
        "--D",
        "1,2,4",
        "--r",
        "0.25,0.0625",
        "--samples",
        "5",
        "--seed",
        "7",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 31);
    let rows = sweep_static(&[1.0, 2.0, 4.0], &[0.25, 0.0625], 5, 7).unwrap();
    assert_eq!(text, csv_of(&rows));
    assert!(stdout(&o).starts_with("rows=30 sensed=30 "));
}

#[test]
fn sweep_output_does_not_depend_on_jobs() {
    let args = |jobs: &'static str| {
        bin(&[
            "sweep-static",
            "--D",
            "2,8",
            "--r",
            "0.25",
            "--samples",
            "4",
            "--seed",
            "11",
            "--jobs",
            jobs,
        ])
    };
    let one = args("1");
    let four = args("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&four));
}

#[test]
fn sweep_dynamic_stdout_is_library_csv() {
    let o = bin(&[
        "sweep-dynamic",
        "--v",
        "0,1,2",
        "--r",
        "0.25",
        "--samples",
        "3",
        "--seed",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = sweep_dynamic(&[0.0, 1.0, 2.0], &[0.25], 1.0, 3, 5).unwrap();
    assert_eq!(stdout(&o), csv_of(&rows));
}

#[test]
fn sweep_jsonl_has_one_object_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, jsonl) = (dir.path().join("a.csv"), dir.path().join("a.jsonl"));
    let o = bin(&[
        "sweep-static",
        "--D",
        "1",
        "--r",
        "0.25",
        "--samples",
        "3",
        "--seed",
        "1",
        "--out",
        p(&csv),
        "--jsonl",
        p(&jsonl),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&jsonl).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .all(|l| l.starts_with('{') && l.contains("\"D\":1.0")));
}

#[test]
fn impossibility_table_marks_crossover() {
    let o = bin(&["impossibility", "--c", "2", "--d", "1", "--m-max", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let lib = impossibility_report(2, 1.0, 12).unwrap();
    assert_eq!(stdout(&o), lib.render());
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with('*')).count(), 1);
}

#[test]
fn adversary_reports_witness_per_couple() {
    let o = bin(&["adversary", "--i", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("j=")).collect();
    assert_eq!(lines.len(), 3);
    let prefix = schedule_prefix(Point::ORIGIN, placement_length_limit(3));
    let lib = adversarial_static_placement(&prefix, 3, 256);
    for (line, w) in lines.iter().zip(&lib) {
        let pt = w.point.expect("short prefix leaves a witness");
        assert!(
            line.contains(&format!("witness={},{}", pt.x, pt.y)),
            "{line}"
        );
        assert!(line.ends_with("within=true"), "{line}");
    }
}

#[test]
fn export_svg_writes_drawing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.svg");
    let o = bin(&[
        "export-svg",
        "--algo",
        "dynamic",
        "--target",
        "0.8,0.3",
        "--r",
        "0.25",
        "--v",
        "1",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let svg = std::fs::read_to_string(&out).unwrap();
    assert_eq!(svg.matches("<path").count(), 1);
    assert!(svg.contains(r#"<circle class="sensing""#));
    assert!(svg.contains("<polyline"));
}

#[test]
fn validation_errors_exit_2_with_one_line() {
    let cases: &[&[&str]] = &[
        &["simulate", "--target", "1,0", "--r", "-1"],
        &["simulate", "--target", "1,0", "--r", "0.5", "--bogus"],
        &["simulate", "--target", "1;0", "--r", "0.5"],
        &[
            "simulate",
            "--target",
            "1,0",
            "--r",
            "0.5",
            "--max-diagonal",
            "40",
        ],
        &["sweep-static", "--D", "1", "--r", "0.25"],
        &["sweep-static", "--D", "32", "--r", "0.25", "--seed", "1"],
        &["sweep-dynamic", "--v", "17", "--r", "0.25", "--seed", "1"],
        &["impossibility", "--c", "1"],
        &["adversary", "--i", "0"],
    ];
    for args in cases {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error:"), "{err}");
    }
}

#[test]
fn io_errors_exit_1() {
    let o = bin(&[
        "sweep-static",
        "--D",
        "1",
        "--r",
        "0.25",
        "--seed",
        "1",
        "--out",
        "/nonexistent/dir/rows.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);
    let o = bin(&[
        "simulate",
        "--waypoints",
        "/nonexistent/w.txt",
        "--r",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_units() {
    for sub in [
        "simulate",
        "sweep-static",
        "sweep-dynamic",
        "adversary",
        "impossibility",
        "export-svg",
    ] {
        let o = bin(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for line in text
            .lines()
            .filter(|l| l.trim_start().starts_with("--") && !l.contains("--help"))
        {
            assert!(line.contains('('), "{sub}: flag without units: {line}");
        }
    }
}
