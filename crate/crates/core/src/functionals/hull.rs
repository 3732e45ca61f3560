//! Convex hulls of planar samples and their intrinsic-volume deficits.
//!
//! For a body `A` and a sample `X ⊂ A`, the statistics are the number of
//! vertices `f0`, and `s (V_j(A) - V_j(conv X))` for `j = 1, 2`, where `V_2` is
//! the area and `V_1` half the perimeter.
//!
//! Per-point scores of the deficits (for a disk `A` centred at `c`) split each
//! hull edge `[a, b]` into the cone it spans from `c`: the edge contributes
//! `s (theta R^2 / 2 - (a - c) x (b - c) / 2)` to the area deficit and
//! `s (theta R - |b - a|) / 2` to the half-perimeter deficit, where `theta` is
//! the signed angle of the cone; each endpoint receives half. The scores sum
//! to the deficits exactly when `c` is interior to the hull; otherwise the
//! deficit is still reported (computed directly) and the event is flagged.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;


use super::{Scaling, ScoreFunctional};
use crate::error::{invalid, Error, Result};
use crate::geometry::{cross, orient2d, polygon_area, polygon_perimeter, seg_len};
use crate::processes::Configuration;
use crate::spaces::Body;

/// Indices of the hull vertices in counter-clockwise order, starting from the
/// lexicographically smallest point. Collinear points are not vertices;
/// among coincident points the first in order is used.
pub fn convex_hull_indices(config: &Configuration) -> Vec<usize> {
    let n = config.len();
    let p = |i: usize| [config.point(i).x(), config.point(i).y()];
    // Configurations are sorted lexicographically already; skip duplicates.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if order.last().is_none_or(|&j| p(j) != p(i)) {
            order.push(i);
        }
    }
    if order.len() < 3 {
        return order;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &order {
        while lower.len() >= 2 && orient2d(p(lower[lower.len() - 2]), p(lower[lower.len() - 1]), p(i)) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        while upper.len() >= 2 && orient2d(p(upper[upper.len() - 2]), p(upper[upper.len() - 1]), p(i)) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Hull statistics of a planar configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct HullStatistics {
    /// Hull vertices (indices into the configuration), counter-clockwise.
    pub vertices: Vec<usize>,
    /// Number of vertices.
    pub f0: usize,
    /// Number of edges (`f0` for a polygon, 1 for a segment, 0 for a point).
    pub f1: usize,
    /// Area of the hull.
    pub area: f64,
    /// Half perimeter of the hull.
    pub half_perimeter: f64,
    /// `s (V_1(A) - V_1(hull))`.
    pub v1_deficit: f64,
    /// `s (V_2(A) - V_2(hull))`.
    pub v2_deficit: f64,
    /// Fewer than three affinely independent points.
    pub degenerate: bool,
    /// The reference centre of `A` is not interior to the hull.
    pub origin_outside: bool,
}

fn body_center(body: &Body) -> [f64; 2] {
    match body {
        Body::Disk { center, .. } => *center,
        Body::Polygon { vertices } => {
            let n = vertices.len() as f64;
            [vertices.iter().map(|v| v[0]).sum::<f64>() / n, vertices.iter().map(|v| v[1]).sum::<f64>() / n]
        }
    }
}

fn check_planar(config: &Configuration) -> Result<()> {
    if config.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }
    if config.dim() != Some(2) {
        return Err(Error::DimensionMismatch { expected: 2, found: config.dim().unwrap_or(0) });
    }
    Ok(())
}

/// Hull statistics of `config` relative to body `body` at scale `s`.
pub fn hull_statistics_2d(config: &Configuration, body: &Body, s: f64) -> Result<HullStatistics> {
    check_planar(config)?;
    body.validate()?;
    let vertices = convex_hull_indices(config);
    let coords: Vec<[f64; 2]> = vertices.iter().map(|&i| [config.point(i).x(), config.point(i).y()]).collect();
    let f0 = vertices.len();
    let area = polygon_area(&coords);
    let half_perimeter = match f0 {
        0 | 1 => 0.0,
        2 => seg_len(coords[0], coords[1]),
        _ => 0.5 * polygon_perimeter(&coords),
    };
    let c = body_center(body);
    let origin_outside = f0 < 3 || (0..f0).any(|i| orient2d(coords[i], coords[(i + 1) % f0], c) <= 0.0);
    Ok(HullStatistics {
        f0,
        f1: match f0 {
            0 | 1 => 0,
            2 => 1,
            k => k,
        },
        area,
        half_perimeter,
        v1_deficit: s * (0.5 * body.perimeter() - half_perimeter),
        v2_deficit: s * (body.area() - area),
        degenerate: f0 < 3,
        origin_outside,
        vertices,
    })
}

/// Which hull statistic a functional reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HullKind {
    /// Number of vertices.
    F0,
    /// Scaled half-perimeter deficit.
    V1,
    /// Scaled area deficit.
    V2,
}

/// Convex-hull functional.
#[derive(Debug, Clone)]
pub struct Hull {
    pub kind: HullKind,
    pub body: Body,
    pub scale: f64,
    pub gamma: f64,
}

impl Hull {
    /// Hull functional relative to `body` at scale `scale`. The deficit
    /// scores need a disk body.
    pub fn new(kind: HullKind, body: Body, scale: f64, gamma: f64) -> Result<Self> {
        body.validate()?;
        if kind != HullKind::F0 && !matches!(body, Body::Disk { .. }) {
            return Err(Error::Unsupported(String::from("deficit scores are defined for disk bodies")));
        }
        if !(scale > 0.0) {
            return Err(invalid("scale must be positive"));
        }
        Ok(Self { kind, body, scale, gamma })
    }

    fn edge_value(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let (c, r) = match self.body {
            Body::Disk { center, radius } => (center, radius),
            Body::Polygon { .. } => unreachable!("checked in constructor"),
        };
        let u = [a[0] - c[0], a[1] - c[1]];
        let v = [b[0] - c[0], b[1] - c[1]];
        let cr = cross(u, v);
        let theta = cr.atan2(u[0] * v[0] + u[1] * v[1]);
        match self.kind {
            HullKind::V2 => self.scale * 0.5 * (theta * r * r - cr),
            HullKind::V1 => self.scale * 0.5 * (theta * r - seg_len(a, b)),
            HullKind::F0 => 0.0,
        }
    }

    fn all_scores(&self, config: &Configuration) -> Result<Vec<f64>> {
        check_planar(config)?;
        let hull = convex_hull_indices(config);
        let mut out = vec![0.0; config.len()];
        let k = hull.len();
        if self.kind == HullKind::F0 {
            for &i in &hull {
                out[i] = 1.0;
            }
            return Ok(out);
        }
        if k < 2 {
            return Ok(out);
        }
        let p = |i: usize| [config.point(i).x(), config.point(i).y()];
        for e in 0..k {
            let (i, j) = (hull[e], hull[(e + 1) % k]);
            let w = self.edge_value(p(i), p(j));
            out[i] += 0.5 * w;
            out[j] += 0.5 * w;
        }
        Ok(out)
    }
}

impl ScoreFunctional for Hull {
    fn id(&self) -> &'static str {
        match self.kind {
            HullKind::F0 => "hull-f0",
            HullKind::V1 => "hull-v1",
            HullKind::V2 => "hull-v2",
        }
    }

    fn score(&self, config: &Configuration, i: usize) -> Result<f64> {
        Ok(self.all_scores(config)?[i])
    }

    fn scores(&self, config: &Configuration) -> Result<Vec<f64>> {
        self.all_scores(config)
    }

    /// The statistic itself: `f0`, or the deficit computed directly (which
    /// equals the sum of scores unless the centre is outside the hull).
    fn total(&self, config: &Configuration) -> Result<f64> {
        let st = hull_statistics_2d(config, &self.body, self.scale)?;
        Ok(match self.kind {
            HullKind::F0 => st.f0 as f64,
            HullKind::V1 => st.v1_deficit,
            HullKind::V2 => st.v2_deficit,
        })
    }

    fn scaling(&self) -> Scaling {
        Scaling { gamma: self.gamma, q: 0.0 }
    }
}
