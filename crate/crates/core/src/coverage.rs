//! Lower-bound machinery.
//!
//! A curve of length `x` senses at most `2 r x + π r²` of area at radius `r`.
//! This module measures that area on a raster, evaluates the closed-form
//! lower bounds for inert and fleeing targets, and certifies that a
//! polynomially accelerating agent cannot match the optimal pursuit cost.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{point_segment_distance_sq, polyline_length, Point, Segment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error(
        "log2({scale_name}) + log2(1/r) = {value} is not positive; outside the bound's regime"
    )]
    OutsideRegime {
        scale_name: &'static str,
        value: f64,
    },
    #[error("speed exponent c must be at least 2, got {0}")]
    ExponentTooSmall(u32),
    #[error("certificate needs v >= 1 and 0 < r < 1, got v={v}, r={r}")]
    CertificateDomain { v: f64, r: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, CoverageError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CoverageError::NonPositive { name, value })
    }
}

/// A boolean grid over an axis-aligned rectangle, addressed by cell centers.
#[derive(Debug, Clone)]
pub struct Raster {
    origin: Point,
    cell_w: f64,
    cell_h: f64,
    nx: usize,
    ny: usize,
    marked: Vec<bool>,
}

impl Raster {
    pub fn new(origin: Point, width: f64, height: f64, nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0);
        Self {
            origin,
            cell_w: width / nx as f64,
            cell_h: height / ny as f64,
            nx,
            ny,
            marked: vec![false; nx * ny],
        }
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_w * self.cell_h
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.cell_w.hypot(self.cell_h)
    }

    pub fn center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell_w,
            self.origin.y + (iy as f64 + 0.5) * self.cell_h,
        )
    }

    /// Cell indices whose centers fall in `[lo, hi]` along one axis.
    fn span(lo: f64, hi: f64, origin: f64, cell: f64, n: usize) -> Option<(usize, usize)> {
        let first = ((lo - origin) / cell - 0.5).ceil().max(0.0);
        let last = ((hi - origin) / cell - 0.5).floor().min(n as f64 - 1.0);
        (first <= last).then_some((first as usize, last as usize))
    }

    /// Marks every cell whose center is within `r` of `seg`.
    pub fn stamp_segment(&mut self, seg: Segment, r: f64) {
        let r_sq = r * r;
        let (x0, x1) = (seg.a.x.min(seg.b.x) - r, seg.a.x.max(seg.b.x) + r);
        let (y0, y1) = (seg.a.y.min(seg.b.y) - r, seg.a.y.max(seg.b.y) + r);
        let Some((ix0, ix1)) = Self::span(x0, x1, self.origin.x, self.cell_w, self.nx) else {
            return;
        };
        let Some((iy0, iy1)) = Self::span(y0, y1, self.origin.y, self.cell_h, self.ny) else {
            return;
        };
        for iy in iy0..=iy1 {
            let row = iy * self.nx;
            for ix in ix0..=ix1 {
                if self.marked[row + ix] {
                    continue;
                }
                if point_segment_distance_sq(self.center(ix, iy), seg) <= r_sq {
                    self.marked[row + ix] = true;
                }
            }
        }
    }

    /// Marks the `r`-neighbourhood of a polyline. A single vertex marks a disc.
    pub fn stamp_polyline(&mut self, vertices: &[Point], r: f64) {
        match vertices {
            [] => {}
            [p] => self.stamp_segment(Segment::new(*p, *p), r),
            _ => {
                for w in vertices.windows(2) {
                    self.stamp_segment(Segment::new(w[0], w[1]), r);
                }
            }
        }
    }

    pub fn is_marked(&self, idx: usize) -> bool {
        self.marked[idx]
    }

    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    pub fn marked_area(&self) -> f64 {
        self.marked_count() as f64 * self.cell_area()
    }

    /// Row-major iterator over `(flat index, cell center)`.
    pub fn cell_centers(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        (0..self.ny).flat_map(move |iy| {
            (0..self.nx).map(move |ix| (iy * self.nx + ix, self.center(ix, iy)))
        })
    }
}

/// Measured and analytic area of a trajectory's sensing tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageReport {
    pub trajectory_length: f64,
    pub r: f64,
    pub estimated_area: f64,
    /// `2 r x + π r²`.
    pub analytic_bound: f64,
    pub grid_res: usize,
    pub cell_diagonal: f64,
    /// Allowed rasterization overshoot, `diag (4x + 2πr)`.
    pub slack: f64,
}

impl CoverageReport {
    pub fn within_bound(&self) -> bool {
        self.estimated_area <= self.analytic_bound + self.slack
    }
}

/// `2 r x + π r²`.
pub fn area_bound(length: f64, r: f64) -> f64 {
    2.0 * r * length + PI * r * r
}

/// Rasterizes the `r`-tube of a polyline over its bounding box inflated by
/// `r`, with `grid_res` cells per side.
pub fn tube_area(vertices: &[Point], r: f64, grid_res: usize) -> CoverageReport {
    assert!(r > 0.0, "sensing radius must be positive");
    assert!(grid_res >= 32, "grid resolution must be at least 32");
    let length = polyline_length(vertices);
    let analytic_bound = area_bound(length, r);
    if vertices.is_empty() {
        return CoverageReport {
            trajectory_length: 0.0,
            r,
            estimated_area: 0.0,
            analytic_bound,
            grid_res,
            cell_diagonal: 0.0,
            slack: 0.0,
        };
    }
    let (mut lo, mut hi) = (vertices[0], vertices[0]);
    for p in vertices {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let origin = Point::new(lo.x - r, lo.y - r);
    let mut raster = Raster::new(
        origin,
        hi.x - lo.x + 2.0 * r,
        hi.y - lo.y + 2.0 * r,
        grid_res,
        grid_res,
    );
    raster.stamp_polyline(vertices, r);
    let diag = raster.cell_diagonal();
    CoverageReport {
        trajectory_length: length,
        r,
        estimated_area: raster.marked_area(),
        analytic_bound,
        grid_res,
        cell_diagonal: diag,
        slack: diag * (4.0 * length + 2.0 * PI * r),
    }
}

/// `(1/16)(log2 D + log2 1/r) D² / r`: the static lower bound.
pub fn static_lb(d: f64, r: f64) -> Result<f64, CoverageError> {
    let d = positive("D", d)?;
    let r = positive("r", r)?;
    let logs = d.log2() - r.log2();
    if logs <= 0.0 {
        return Err(CoverageError::OutsideRegime {
            scale_name: "D",
            value: logs,
        });
    }
    Ok(logs * d * d / r / 16.0)
}

/// `(t0² / 128)(log2 v + log2 1/r) v² / r`: the flee-then-freeze bound.
pub fn dynamic_lb(v: f64, r: f64, t0: f64) -> Result<f64, CoverageError> {
    let v = positive("v", v)?;
    let r = positive("r", r)?;
    let t0 = positive("t0", t0)?;
    let logs = v.log2() - r.log2();
    if logs <= 0.0 {
        return Err(CoverageError::OutsideRegime {
            scale_name: "v",
            value: logs,
        });
    }
    Ok(t0 * t0 / 128.0 * logs * v * v / r)
}

/// Arithmetic of the polynomial-speed impossibility argument for one
/// parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolySpeedCertificate {
    pub c: u32,
    pub v: f64,
    pub r: f64,
    pub d: f64,
    /// `((c+1) v² / 2r)^(1/(c-1))`.
    pub min_catch_time: f64,
    /// `(1/(c+1)) ((c+1) v² / 2r)^((c+1)/(c-1))`.
    pub min_cost: f64,
    /// `d (log2 v + log2 1/r) v² / r`.
    pub optimal_cost: f64,
    pub exceeds: bool,
    /// `min_cost = alpha (v²/r)^beta`.
    pub alpha: f64,
    pub beta: f64,
}

impl PolySpeedCertificate {
    pub fn cost_ratio(&self) -> f64 {
        self.min_cost / self.optimal_cost
    }
}

pub fn poly_speed_certificate(
    c: u32,
    v: f64,
    r: f64,
    d: f64,
) -> Result<PolySpeedCertificate, CoverageError> {
    if c < 2 {
        return Err(CoverageError::ExponentTooSmall(c));
    }
    let d = positive("d", d)?;
    if !(v.is_finite() && v >= 1.0 && r > 0.0 && r < 1.0) {
        return Err(CoverageError::CertificateDomain { v, r });
    }
    let cf = c as f64;
    let base = (cf + 1.0) * v * v / (2.0 * r);
    let beta = (cf + 1.0) / (cf - 1.0);
    let min_catch_time = base.powf(1.0 / (cf - 1.0));
    let min_cost = base.powf(beta) / (cf + 1.0);
    let optimal_cost = d * (v.log2() - r.log2()) * v * v / r;
    Ok(PolySpeedCertificate {
        c,
        v,
        r,
        d,
        min_catch_time,
        min_cost,
        optimal_cost,
        exceeds: min_cost > optimal_cost,
        alpha: ((cf + 1.0) / 2.0).powf(beta) / (cf + 1.0),
        beta,
    })
}
