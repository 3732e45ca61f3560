//! Points in `R^d` (`d <= 5`) and planar geometric kernels.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 5;

/// A point of `R^d`, `1 <= d <= MAX_DIM`, stored inline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Point {
    c: [f64; MAX_DIM],
    dim: u8,
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords().to_vec()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(&v)
    }
}

impl Point {
    /// Point with the given coordinates; rejects empty, too long or
    /// non-finite input.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::DimensionMismatch { expected: MAX_DIM.min(coords.len().max(1)), found: coords.len() });
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::invalid("coordinates must be finite"));
        }
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self { c, dim: coords.len() as u8 })
    }

    /// Planar point.
    pub fn xy(x: f64, y: f64) -> Self {
        let mut c = [0.0; MAX_DIM];
        c[0] = x;
        c[1] = y;
        Self { c, dim: 2 }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Coordinates as a slice of length [`Point::dim`].
    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim as usize]
    }

    /// First coordinate.
    pub fn x(&self) -> f64 {
        self.c[0]
    }

    /// Second coordinate (zero in dimension one).
    pub fn y(&self) -> f64 {
        self.c[1]
    }

    /// Squared Euclidean distance.
    pub fn dist2(&self, other: &Point) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            let d = self.c[i] - other.c[i];
            s += d * d;
        }
        s
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Lexicographic total order on coordinates.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for i in 0..self.dim().min(other.dim()) {
            match self.c[i].total_cmp(&other.c[i]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.dim.cmp(&other.dim)
    }
}

/// Exact sign of the orientation of `(a, b, c)`: positive if counter-clockwise.
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(
        robust::Coord { x: a[0], y: a[1] },
        robust::Coord { x: b[0], y: b[1] },
        robust::Coord { x: c[0], y: c[1] },
    )
}

/// Cross product of planar vectors.
pub fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Signed (counter-clockwise positive) area of a simple polygon.
pub fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    // Shoelace relative to the first vertex to limit cancellation.
    let o = v[0];
    let rel = |p: [f64; 2]| [p[0] - o[0], p[1] - o[1]];
    0.5 * crate::numeric::sum((1..n - 1).map(|i| cross(rel(v[i]), rel(v[i + 1]))))
}

/// Perimeter of a closed polygon.
pub fn polygon_perimeter(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    crate::numeric::sum((0..n).map(|i| seg_len(v[i], v[(i + 1) % n])))
}

/// Length of the segment `ab`.
pub fn seg_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Area of the intersection of a polygon (either orientation) with the disk
/// of radius `r` centred at `c`.
pub fn polygon_disk_area(v: &[[f64; 2]], c: [f64; 2], r: f64) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let s = crate::numeric::sum((0..n).map(|i| {
        let a = [v[i][0] - c[0], v[i][1] - c[1]];
        let b = [v[(i + 1) % n][0] - c[0], v[(i + 1) % n][1] - c[1]];
        triangle_disk_area(a, b, r)
    }));
    s.abs()
}

/// Signed area of `triangle(0, a, b) ∩ B(0, r)`.
fn triangle_disk_area(a: [f64; 2], b: [f64; 2], r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
    let qc = a[0] * a[0] + a[1] * a[1] - r * r;
    let mut ts = [0.0, 1.0, 1.0, 1.0];
    let mut m = 1;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                ts[m] = t;
                m += 1;
            }
        }
    }
    ts[m] = 1.0;
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    let mut total = 0.0;
    for i in 0..m {
        let p = at(ts[i]);
        let q = at(ts[i + 1]);
        let mid = at(0.5 * (ts[i] + ts[i + 1]));
        if mid[0] * mid[0] + mid[1] * mid[1] <= r * r {
            total += 0.5 * cross(p, q);
        } else {
            let ang = cross(p, q).atan2(p[0] * q[0] + p[1] * q[1]);
            total += 0.5 * r * r * ang;
        }
    }
    total
}

/// Angle reduced to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Length of the part of the circle `|z - c| = rho` lying in the rectangle
/// `[lo[0], hi[0]] x [lo[1], hi[1]]`.
pub fn arc_length_in_rect(c: [f64; 2], rho: f64, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let mut angles: Vec<f64> = Vec::with_capacity(9);
    angles.push(0.0);
    for axis in 0..2 {
        for bound in [lo[axis], hi[axis]] {
            let t = (bound - c[axis]) / rho;
            if t.abs() < 1.0 {
                let base = t.acos();
                let (a1, a2) = if axis == 0 { (base, -base) } else { (PI / 2.0 - base, PI / 2.0 + base) };
                for a in [a1, a2] {
                    angles.push(wrap_angle(a));
                }
            }
        }
    }
    angles.sort_by(|a, b| a.total_cmp(b));
    angles.push(TAU);
    let mut inside = 0.0;
    for w in angles.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let p = [c[0] + rho * mid.cos(), c[1] + rho * mid.sin()];
        if p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1] {
            inside += w[1] - w[0];
        }
    }
    inside * rho
}
