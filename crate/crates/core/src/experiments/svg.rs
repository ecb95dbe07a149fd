//! Standalone SVG drawings of a trajectory prefix.
//!
//! The agent's path is a single `<path>` made of one `M` and one `L` per
//! segment. The target's path, when present, is a `<polyline>`. Markers are
//! circles with a `<title>` holding their label. World coordinates are
//! scaled uniformly onto a fixed square canvas with north up.

use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::Point;

use super::SweepError;

pub const CANVAS: f64 = 800.0;
pub const MARGIN: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    Start,
    Sensing,
    Other,
}

impl MarkerKind {
    fn class(self) -> &'static str {
        match self {
            MarkerKind::Start => "start",
            MarkerKind::Sensing => "sensing",
            MarkerKind::Other => "event",
        }
    }

    fn fill(self) -> &'static str {
        match self {
            MarkerKind::Start => "#2a9d8f",
            MarkerKind::Sensing => "#e63946",
            MarkerKind::Other => "#f4a261",
        }
    }
}

/// A labelled point drawn as a marker.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub label: String,
    pub point: Point,
    pub kind: MarkerKind,
}

impl Annotation {
    pub fn new(label: impl Into<String>, point: Point, kind: MarkerKind) -> Self {
        Self {
            label: label.into(),
            point,
            kind,
        }
    }
}

/// World-to-canvas transform.
#[derive(Debug, Clone, Copy)]
pub struct CanvasMap {
    min: Point,
    scale: f64,
}

impl CanvasMap {
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.is_finite() {
            lo = Point::ORIGIN;
            hi = Point::ORIGIN;
        }
        let extent = (hi.x - lo.x).max(hi.y - lo.y);
        let scale = if extent > 0.0 {
            (CANVAS - 2.0 * MARGIN) / extent
        } else {
            1.0
        };
        Self { min: lo, scale }
    }

    pub fn to_canvas(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            CANVAS - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the drawing. `prefix` must be nonempty.
pub fn render_svg(
    prefix: &[Point],
    events: &[Annotation],
    target_path: Option<&[Point]>,
) -> String {
    assert!(!prefix.is_empty(), "trajectory prefix must be nonempty");
    let map = CanvasMap::fit(
        prefix
            .iter()
            .chain(events.iter().map(|e| &e.point))
            .chain(target_path.unwrap_or(&[])),
    );
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let mut d = String::new();
    for (i, p) in prefix.iter().enumerate() {
        let (x, y) = map.to_canvas(*p);
        let cmd = if i == 0 { "M" } else { " L" };
        let _ = write!(d, "{cmd}{x:.3} {y:.3}");
    }
    let _ = writeln!(
        out,
        r##"<path class="agent" d="{d}" fill="none" stroke="#264653" stroke-width="0.6"/>"##
    );

    if let Some(tp) = target_path.filter(|tp| !tp.is_empty()) {
        let pts: Vec<String> = tp
            .iter()
            .map(|p| {
                let (x, y) = map.to_canvas(*p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline class="target" points="{}" fill="none" stroke="#e76f51" stroke-width="1.2" stroke-dasharray="4 2"/>"##,
            pts.join(" ")
        );
    }

    for e in events {
        let (x, y) = map.to_canvas(e.point);
        let _ = writeln!(
            out,
            r#"<circle class="{}" cx="{x:.3}" cy="{y:.3}" r="4" fill="{}"><title>{}</title></circle>"#,
            e.kind.class(),
            e.kind.fill(),
            escape(&e.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes [`render_svg`] output to `path`.
pub fn export_svg(
    prefix: &[Point],
    events: &[Annotation],
    target_path: Option<&[Point]>,
    path: &Path,
) -> Result<(), SweepError> {
    std::fs::write(path, render_svg(prefix, events, target_path)).map_err(|source| SweepError::Io {
        path: path.display().to_string(),
        source,
    })
}
