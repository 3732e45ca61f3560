//! Voronoi approximation of a set `A` inside the unit square.
//!
//! `A(X)` is the union of the Voronoi cells (clipped to the unit square) of
//! the points of `X` lying in `A`. Per-point scores:
//!
//! * `nu_minus(x) = Vol(C(x) \ A)` if `x in A`, else `-Vol(C(x) ∩ A)`, so that
//!   `Vol(A(X)) = Vol(A) + sum nu_minus`;
//! * `nu_plus(x)  = Vol(C(x) \ A)` if `x in A`, else `Vol(C(x) ∩ A)`, so that
//!   `Vol(A Δ A(X)) = sum nu_plus`;
//! * `alpha(x)` = length of the edges of `C(x)` on the boundary of `A(X)` for
//!   `x in A` (edges shared with cells of points outside `A`, and edges on the
//!   frame), zero otherwise.
//!
//! Cells are built by half-plane clipping; candidate neighbours are visited in
//! rings of a bucket grid and clipping stops once no farther point can cut the
//! cell.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;


use super::{Scaling, ScoreFunctional};
use crate::error::{Error, Result};
use crate::geometry::{polygon_area, seg_len, Point};
use crate::processes::Configuration;
use crate::spaces::Body;

/// Origin of a cell edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    /// Edge on the boundary of the unit square.
    Frame,
    /// Edge shared with the cell of the given point.
    Neighbor(usize),
}

/// A convex Voronoi cell; `labels[i]` labels the edge from vertex `i` to `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub vertices: Vec<[f64; 2]>,
    pub labels: Vec<EdgeLabel>,
}

impl Cell {
    fn frame() -> Self {
        Cell {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            labels: vec![EdgeLabel::Frame; 4],
        }
    }

    /// Area of the cell.
    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    /// Keeps the part closer to `x` than to `y`.
    fn clip(&mut self, x: [f64; 2], y: [f64; 2], label: EdgeLabel) {
        let n = [y[0] - x[0], y[1] - x[1]];
        let m = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
        let f = |p: [f64; 2]| (p[0] - m[0]) * n[0] + (p[1] - m[1]) * n[1];
        let k = self.vertices.len();
        let vals: Vec<f64> = self.vertices.iter().map(|&p| f(p)).collect();
        if vals.iter().all(|v| *v <= 0.0) {
            return;
        }
        let mut verts = Vec::with_capacity(k + 1);
        let mut labels = Vec::with_capacity(k + 1);
        for i in 0..k {
            let j = (i + 1) % k;
            let (p, q) = (self.vertices[i], self.vertices[j]);
            let (fp, fq) = (vals[i], vals[j]);
            let cut = |fp: f64, fq: f64| {
                let t = fp / (fp - fq);
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
            };
            if fp <= 0.0 {
                if fq > 0.0 {
                    if fp == 0.0 {
                        verts.push(p);
                        labels.push(label);
                    } else {
                        verts.push(p);
                        labels.push(self.labels[i]);
                        verts.push(cut(fp, fq));
                        labels.push(label);
                    }
                } else {
                    verts.push(p);
                    labels.push(self.labels[i]);
                }
            } else if fq < 0.0 {
                verts.push(cut(fp, fq));
                labels.push(self.labels[i]);
            }
        }
        // Drop zero-length edges.
        let mut i = 0;
        while verts.len() > 1 && i < verts.len() {
            let j = (i + 1) % verts.len();
            if verts[i] == verts[j] {
                verts.remove(i);
                labels.remove(i);
            } else {
                i += 1;
            }
        }
        self.vertices = verts;
        self.labels = labels;
    }
}

/// Bucket grid over the unit square.
struct Grid {
    g: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn new(pts: &[[f64; 2]]) -> Self {
        let g = ((pts.len() as f64 / 2.0).sqrt().floor() as usize).max(1);
        let mut counts = vec![0u32; g * g + 1];
        let cells: Vec<usize> = pts.iter().map(|p| Self::bucket_of(g, *p)).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 0..g * g {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; pts.len()];
        for (i, &c) in cells.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Grid { g, start: counts, items }
    }

    fn coord(g: usize, v: f64) -> usize {
        ((v * g as f64).floor().max(0.0) as usize).min(g - 1)
    }

    fn bucket_of(g: usize, p: [f64; 2]) -> usize {
        Self::coord(g, p[1]) * g + Self::coord(g, p[0])
    }

    fn bucket(&self, bx: usize, by: usize) -> &[u32] {
        let c = by * self.g + bx;
        &self.items[self.start[c] as usize..self.start[c + 1] as usize]
    }
}

fn compute_cell(pts: &[[f64; 2]], grid: &Grid, i: usize) -> Cell {
    let x = pts[i];
    let mut cell = Cell::frame();
    let g = grid.g as isize;
    let h = 1.0 / grid.g as f64;
    let bx = Grid::coord(grid.g, x[0]) as isize;
    let by = Grid::coord(grid.g, x[1]) as isize;
    let max_ring = g;
    for r in 0..=max_ring {
        for dy in -r..=r {
            let yy = by + dy;
            if yy < 0 || yy >= g {
                continue;
            }
            let edge_row = dy == -r || dy == r;
            let step = if edge_row || r == 0 { 1 } else { 2 * r };
            let mut dx = -r;
            while dx <= r {
                let xx = bx + dx;
                if xx >= 0 && xx < g {
                    for &j in grid.bucket(xx as usize, yy as usize) {
                        let j = j as usize;
                        if j != i && pts[j] != x {
                            cell.clip(x, pts[j], EdgeLabel::Neighbor(j));
                        }
                    }
                }
                dx += step.max(1);
            }
        }
        let reach2 = cell
            .vertices
            .iter()
            .map(|v| (v[0] - x[0]).powi(2) + (v[1] - x[1]).powi(2))
            .fold(0.0, f64::max);
        let safe = r as f64 * h;
        if safe * safe >= 4.0 * reach2 {
            break;
        }
    }
    cell
}

fn planar(config: &Configuration) -> Result<Vec<[f64; 2]>> {
    if config.dim().is_some_and(|d| d != 2) {
        return Err(Error::DimensionMismatch { expected: 2, found: config.dim().unwrap_or(0) });
    }
    let pts: Vec<[f64; 2]> = config.items().iter().map(|m| [m.point.x(), m.point.y()]).collect();
    if pts.iter().any(|p| !(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0)) {
        return Err(Error::OutsideSpace(String::from("unit square")));
    }
    Ok(pts)
}

/// Voronoi cells of all points, clipped to the unit square.
pub fn voronoi_cells(config: &Configuration) -> Result<Vec<Cell>> {
    let pts = planar(config)?;
    let grid = Grid::new(&pts);
    Ok((0..pts.len()).map(|i| compute_cell(&pts, &grid, i)).collect())
}

/// Voronoi cell of point `i`, clipped to the unit square.
pub fn voronoi_cell(config: &Configuration, i: usize) -> Result<Cell> {
    let pts = planar(config)?;
    let grid = Grid::new(&pts);
    Ok(compute_cell(&pts, &grid, i))
}

/// Per-point scores of the three Voronoi functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct PointScores {
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub alpha: f64,
}

fn cell_scores(cell: &Cell, x_in_a: bool, in_a: &dyn Fn(usize) -> bool, body: &Body) -> PointScores {
    let area = cell.area();
    let inside = body.intersection_area(&cell.vertices).min(area);
    if x_in_a {
        let k = cell.vertices.len();
        let alpha = crate::numeric::sum((0..k).filter_map(|e| {
            let on_boundary = match cell.labels[e] {
                EdgeLabel::Frame => true,
                EdgeLabel::Neighbor(j) => !in_a(j),
            };
            on_boundary.then(|| seg_len(cell.vertices[e], cell.vertices[(e + 1) % k]))
        }));
        let outside = area - inside;
        PointScores { nu_minus: outside, nu_plus: outside, alpha }
    } else {
        PointScores { nu_minus: -inside, nu_plus: inside, alpha: 0.0 }
    }
}

fn check_body(body: &Body) -> Result<()> {
    body.validate()?;
    let (lo, hi) = body.bounding_box();
    if lo[0] < -1e-12 || lo[1] < -1e-12 || hi[0] > 1.0 + 1e-12 || hi[1] > 1.0 + 1e-12 {
        return Err(Error::OutsideSpace(String::from("unit square (target set)")));
    }
    Ok(())
}

/// Scores of every point.
pub fn voronoi_scores(config: &Configuration, body: &Body) -> Result<Vec<PointScores>> {
    check_body(body)?;
    let cells = voronoi_cells(config)?;
    let flags: Vec<bool> = config.items().iter().map(|m| body.contains([m.point.x(), m.point.y()])).collect();
    let in_a = |j: usize| flags[j];
    Ok(cells.iter().zip(&flags).map(|(c, &f)| cell_scores(c, f, &in_a, body)).collect())
}

/// `Vol(A(X))`, `Vol(A Δ A(X))` and the boundary length of `A(X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiSummary {
    pub vol: f64,
    pub symdiff: f64,
    pub boundary: f64,
}

/// Summary statistics of the Voronoi approximation; `config` must be non-empty.
pub fn voronoi_approximation(config: &Configuration, body: &Body) -> Result<VoronoiSummary> {
    if config.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }
    let s = voronoi_scores(config, body)?;
    Ok(VoronoiSummary {
        vol: body.area() + crate::numeric::sum(s.iter().map(|p| p.nu_minus)),
        symdiff: crate::numeric::sum(s.iter().map(|p| p.nu_plus)),
        boundary: crate::numeric::sum(s.iter().map(|p| p.alpha)),
    })
}

/// Which Voronoi statistic a functional reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoronoiKind {
    /// `Vol(A(X))` (scores `nu_minus`, offset `Vol(A)`).
    Vol,
    /// `Vol(A Δ A(X))` (scores `nu_plus`).
    SymDiff,
    /// Boundary length of `A(X)` (scores `alpha`).
    Boundary,
}

/// Voronoi approximation functional.
#[derive(Debug, Clone)]
pub struct Voronoi {
    pub kind: VoronoiKind,
    pub body: Body,
}

impl Voronoi {
    /// Functional for target set `body` (contained in the unit square).
    pub fn new(kind: VoronoiKind, body: Body) -> Result<Self> {
        check_body(&body)?;
        Ok(Self { kind, body })
    }

    fn pick(&self, s: &PointScores) -> f64 {
        match self.kind {
            VoronoiKind::Vol => s.nu_minus,
            VoronoiKind::SymDiff => s.nu_plus,
            VoronoiKind::Boundary => s.alpha,
        }
    }
}

impl ScoreFunctional for Voronoi {
    fn id(&self) -> &'static str {
        match self.kind {
            VoronoiKind::Vol => "voronoi-vol",
            VoronoiKind::SymDiff => "voronoi-symdiff",
            VoronoiKind::Boundary => "voronoi-boundary",
        }
    }

    fn score(&self, config: &Configuration, i: usize) -> Result<f64> {
        let cell = voronoi_cell(config, i)?;
        let body = &self.body;
        let at = |j: usize| {
            let p: &Point = config.point(j);
            body.contains([p.x(), p.y()])
        };
        Ok(self.pick(&cell_scores(&cell, at(i), &at, body)))
    }

    fn scores(&self, config: &Configuration) -> Result<Vec<f64>> {
        Ok(voronoi_scores(config, &self.body)?.iter().map(|s| self.pick(s)).collect())
    }

    fn offset(&self) -> f64 {
        match self.kind {
            VoronoiKind::Vol => self.body.area(),
            _ => 0.0,
        }
    }

    fn scaling(&self) -> Scaling {
        Scaling { gamma: 2.0, q: 0.0 }
    }
}
