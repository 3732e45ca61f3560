//! Metric probability spaces `(X, d, Q)` with a declared growth exponent
//! `gamma` (so that `Q(B(x, r)) <= kappa r^gamma`) and an optional set `K`
//! with a closed-form distance `d(x, K)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, Point};
use crate::rng::{RandomStream, Sampler};

const CONTAINS_TOL: f64 = 1e-9;

/// Volume of the unit Euclidean ball of `R^d`, `1 <= d <= 5`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        _ => f64::NAN,
    }
}

/// Planar body used as the target set of set approximation or as `K = ∂A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Body {
    /// Closed disk.
    Disk { center: [f64; 2], radius: f64 },
    /// Closed convex polygon with counter-clockwise vertices.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Body {
    /// Axis-parallel rectangle `[lo, hi]`.
    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Body::Polygon { vertices: vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]] }
    }

    /// Checks radius positivity, or convexity and orientation of a polygon.
    pub fn validate(&self) -> Result<()> {
        match self {
            Body::Disk { center, radius } => {
                if !(*radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(invalid("disk radius must be positive"));
                }
            }
            Body::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(invalid("polygon needs at least three vertices"));
                }
                for i in 0..n {
                    let o = geometry::orient2d(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    if o < 0.0 {
                        return Err(invalid("polygon must be convex and counter-clockwise"));
                    }
                }
                if !(geometry::polygon_area(vertices) > 0.0) {
                    return Err(invalid("polygon must have positive area"));
                }
            }
        }
        Ok(())
    }

    /// Closed membership test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Body::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Body::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| geometry::orient2d(vertices[i], vertices[(i + 1) % n], p) >= 0.0)
            }
        }
    }

    /// Area.
    pub fn area(&self) -> f64 {
        match self {
            Body::Disk { radius, .. } => PI * radius * radius,
            Body::Polygon { vertices } => geometry::polygon_area(vertices),
        }
    }

    /// Boundary length.
    pub fn perimeter(&self) -> f64 {
        match self {
            Body::Disk { radius, .. } => 2.0 * PI * radius,
            Body::Polygon { vertices } => geometry::polygon_perimeter(vertices),
        }
    }

    /// Euclidean distance from `p` to the boundary of the body.
    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        match self {
            Body::Disk { center, radius } => ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs(),
            Body::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Area of `polygon ∩ body` for a convex polygon.
    pub fn intersection_area(&self, poly: &[[f64; 2]]) -> f64 {
        match self {
            Body::Disk { center, radius } => geometry::polygon_disk_area(poly, *center, *radius),
            Body::Polygon { vertices } => {
                let mut cur: Vec<[f64; 2]> = poly.to_vec();
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    cur = clip_left_of(&cur, a, b);
                    if cur.len() < 3 {
                        return 0.0;
                    }
                }
                geometry::polygon_area(&cur).abs()
            }
        }
    }

    /// Bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Body::Disk { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            Body::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Sutherland-Hodgman step: keeps the part of a convex polygon to the left of
/// the directed line `a -> b`.
fn clip_left_of(poly: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    let side = |p: [f64; 2]| geometry::cross([b[0] - a[0], b[1] - a[1]], [p[0] - a[0], p[1] - a[1]]);
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Underlying set, metric and probability measure of a space.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    /// `[0, 1]^d` with the Euclidean metric and Lebesgue measure.
    UnitCube { dim: usize },
    /// Euclidean ball with the uniform distribution.
    Ball { dim: usize, radius: f64, center: Vec<f64> },
    /// `{x in [0, inf)^d : F(x) <= 1}` with `F(x) = offset + <weights, x>` and
    /// the uniform distribution.
    TriangleUnderF { dim: usize, weights: Vec<f64>, offset: f64 },
    /// Unit circle (`m = 1`) or unit sphere (`m = 2`) with geodesic distance and
    /// normalized surface measure.
    GeodesicSphere { m: usize },
    /// Unit ball of `R^d` with the uniform distribution and the semimetric
    /// `d_max(x, y) = max(|x - y|, sqrt(|d(x, A^c) - d(y, A^c)|))`.
    ConvexBodyDMax { dim: usize },
}

/// The set `K` towards which scores decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KSpec {
    /// `K = X`.
    FullSpace,
    /// Boundary of the space itself.
    BoundaryOfBody,
    /// Level set `{F = 1}` of a `TriangleUnderF` space.
    LevelSetF,
    /// Boundary of a planar body inside a Euclidean space.
    BoundaryOf { body: Body },
}

/// Distance functions used by the functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Euclidean distance of the ambient coordinates.
    Euclidean,
    /// Great-circle distance on the unit sphere.
    Geodesic,
    /// `d_max` of the unit ball centred at the origin.
    DMax,
}

impl Metric {
    /// Distance between two points (no containment checks).
    pub fn dist(self, x: &Point, y: &Point) -> f64 {
        match self {
            Metric::Euclidean => x.dist(y),
            Metric::Geodesic => 2.0 * (0.5 * x.dist(y)).min(1.0).asin(),
            Metric::DMax => {
                let e = x.dist(y);
                let dx = (1.0 - x.norm()).max(0.0);
                let dy = (1.0 - y.norm()).max(0.0);
                e.max((dx - dy).abs().sqrt())
            }
        }
    }

    /// Whether ranking by ambient Euclidean distance equals ranking by this
    /// metric (so a Euclidean k-d tree can answer nearest-neighbour queries).
    pub fn euclidean_ranked(self) -> bool {
        matches!(self, Metric::Euclidean | Metric::Geodesic)
    }

    /// A Euclidean radius whose ball contains the metric ball of radius `r`.
    pub fn euclidean_cover(self, r: f64) -> f64 {
        match self {
            Metric::Euclidean | Metric::DMax => r,
            Metric::Geodesic => {
                if r >= PI {
                    2.0
                } else {
                    2.0 * (0.5 * r).sin() * (1.0 + 1e-12) + 1e-15
                }
            }
        }
    }
}

/// A space together with its growth exponent and decay set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SpaceRecord", try_from = "SpaceRecord")]
pub struct SpaceDescriptor {
    pub kind: SpaceKind,
    pub k_spec: KSpec,
}

/// Serialized form `{kind, dim, gamma, k_spec, params}`; on input `gamma`
/// is optional (checked when present) and `k_spec` defaults to the
/// kind's natural decay set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceRecord {
    kind: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_spec: Option<KSpec>,
    #[serde(default)]
    params: SpaceParams,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
}

impl From<SpaceDescriptor> for SpaceRecord {
    fn from(s: SpaceDescriptor) -> Self {
        let gamma = s.gamma();
        let dim = s.dim();
        let mut params = SpaceParams::default();
        let kind = match s.kind {
            SpaceKind::UnitCube { .. } => "unit_cube",
            SpaceKind::Ball { radius, center, .. } => {
                params.radius = Some(radius);
                params.center = Some(center);
                "ball"
            }
            SpaceKind::TriangleUnderF { weights, offset, .. } => {
                params.weights = Some(weights);
                params.offset = Some(offset);
                "triangle_under_f"
            }
            SpaceKind::GeodesicSphere { .. } => "geodesic_sphere",
            SpaceKind::ConvexBodyDMax { .. } => "convex_body_dmax",
        };
        SpaceRecord { kind: kind.to_string(), dim, gamma: Some(gamma), k_spec: Some(s.k_spec), params }
    }
}

impl TryFrom<SpaceRecord> for SpaceDescriptor {
    type Error = Error;
    fn try_from(r: SpaceRecord) -> Result<Self> {
        let dim = r.dim;
        let kind = match r.kind.as_str() {
            "unit_cube" => SpaceKind::UnitCube { dim },
            "ball" => SpaceKind::Ball {
                dim,
                radius: r.params.radius.unwrap_or(1.0),
                center: r.params.center.unwrap_or_else(|| vec![0.0; dim]),
            },
            "triangle_under_f" => SpaceKind::TriangleUnderF {
                dim,
                weights: r.params.weights.unwrap_or_else(|| vec![1.0; dim]),
                offset: r.params.offset.unwrap_or(0.0),
            },
            "geodesic_sphere" => SpaceKind::GeodesicSphere { m: dim },
            "convex_body_dmax" => SpaceKind::ConvexBodyDMax { dim },
            other => return Err(Error::InvalidParameter(format!("unknown space kind `{other}`"))),
        };
        let k_spec = r.k_spec.unwrap_or(match kind {
            SpaceKind::TriangleUnderF { .. } => KSpec::LevelSetF,
            SpaceKind::ConvexBodyDMax { .. } => KSpec::BoundaryOfBody,
            _ => KSpec::FullSpace,
        });
        let space = SpaceDescriptor { kind, k_spec };
        space.validate()?;
        if let Some(g) = r.gamma.filter(|g| (space.gamma() - g).abs() > 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "gamma {g} does not match the space (expected {})",
                space.gamma()
            )));
        }
        Ok(space)
    }
}

/// Result of [`SpaceDescriptor::growth_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Declared constant `kappa`, if the space has one.
    pub kappa: Option<f64>,
    /// Largest observed `Q(B(x, r)) / r^gamma`.
    pub sup_ratio: f64,
    /// Monte Carlo standard error of that ratio.
    pub sup_ratio_se: f64,
    /// Radius at which the supremum was attained.
    pub r_at_sup: f64,
    /// Whether the supremum exceeds `kappa` by more than three standard errors.
    pub violation: bool,
}

impl SpaceDescriptor {
    /// `[0, 1]^d` with `K = X`.
    pub fn unit_cube(dim: usize) -> Self {
        Self { kind: SpaceKind::UnitCube { dim }, k_spec: KSpec::FullSpace }
    }

    /// Ball of radius `radius` centred at `center`, `K = X`.
    pub fn ball(radius: f64, center: &[f64]) -> Self {
        Self {
            kind: SpaceKind::Ball { dim: center.len(), radius, center: center.to_vec() },
            k_spec: KSpec::FullSpace,
        }
    }

    /// Unit simplex `{x >= 0 : sum x_i <= 1}` with `K = {F = 1}`.
    pub fn simplex(dim: usize) -> Self {
        Self::triangle_under_f(vec![1.0; dim], 0.0)
    }

    /// `{x >= 0 : offset + <weights, x> <= 1}` with `K = {F = 1}`.
    pub fn triangle_under_f(weights: Vec<f64>, offset: f64) -> Self {
        Self {
            kind: SpaceKind::TriangleUnderF { dim: weights.len(), weights, offset },
            k_spec: KSpec::LevelSetF,
        }
    }

    /// Unit circle (`m = 1`) or sphere (`m = 2`) with geodesic distance.
    pub fn geodesic_sphere(m: usize) -> Self {
        Self { kind: SpaceKind::GeodesicSphere { m }, k_spec: KSpec::FullSpace }
    }

    /// Unit disk with `d_max` and `K` its boundary.
    pub fn dmax_disk() -> Self {
        Self { kind: SpaceKind::ConvexBodyDMax { dim: 2 }, k_spec: KSpec::BoundaryOfBody }
    }

    /// Same space with another decay set.
    pub fn with_k(mut self, k_spec: KSpec) -> Self {
        self.k_spec = k_spec;
        self
    }

    /// Checks the parameters of the space and its `K`.
    pub fn validate(&self) -> Result<()> {
        let dim_ok = |d: usize| (1..=geometry::MAX_DIM).contains(&d);
        match &self.kind {
            SpaceKind::UnitCube { dim } | SpaceKind::ConvexBodyDMax { dim } => {
                if !dim_ok(*dim) {
                    return Err(invalid("dimension must be between 1 and 5"));
                }
            }
            SpaceKind::Ball { dim, radius, center } => {
                if !dim_ok(*dim) || center.len() != *dim {
                    return Err(invalid("ball centre must match the dimension (1..=5)"));
                }
                if !(*radius > 0.0) {
                    return Err(invalid("ball radius must be positive"));
                }
            }
            SpaceKind::TriangleUnderF { dim, weights, offset } => {
                if !dim_ok(*dim) || weights.len() != *dim {
                    return Err(invalid("weights must match the dimension (1..=5)"));
                }
                // F(0) < 1 and partial derivatives bounded away from 0 and infinity.
                if !(*offset < 1.0) || !offset.is_finite() {
                    return Err(invalid("F(0) must be below 1"));
                }
                if weights.iter().any(|w| !(*w > 1e-9 && *w < 1e9)) {
                    return Err(invalid("partial derivatives of F must lie in (1e-9, 1e9)"));
                }
            }
            SpaceKind::GeodesicSphere { m } => {
                if !(1..=2).contains(m) {
                    return Err(invalid("geodesic sphere dimension must be 1 or 2"));
                }
            }
        }
        match (&self.k_spec, &self.kind) {
            (KSpec::LevelSetF, SpaceKind::TriangleUnderF { .. }) | (KSpec::FullSpace, _) => Ok(()),
            (KSpec::LevelSetF, _) => Err(invalid("K = {F = 1} needs a TriangleUnderF space")),
            (KSpec::BoundaryOfBody, SpaceKind::GeodesicSphere { .. }) => {
                Err(invalid("a sphere has no boundary"))
            }
            (KSpec::BoundaryOfBody, _) => Ok(()),
            (KSpec::BoundaryOf { body }, kind) => {
                if self.ambient_dim() != 2
                    || matches!(kind, SpaceKind::GeodesicSphere { .. } | SpaceKind::ConvexBodyDMax { .. })
                {
                    return Err(invalid("K = boundary of a planar body needs a Euclidean planar space"));
                }
                body.validate()
            }
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            SpaceKind::UnitCube { dim }
            | SpaceKind::Ball { dim, .. }
            | SpaceKind::TriangleUnderF { dim, .. }
            | SpaceKind::ConvexBodyDMax { dim } => *dim,
            SpaceKind::GeodesicSphere { m } => *m,
        }
    }

    /// Dimension of the coordinates of points of the space.
    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            SpaceKind::GeodesicSphere { m } => m + 1,
            _ => self.dim(),
        }
    }

    /// Growth exponent `gamma`.
    pub fn gamma(&self) -> f64 {
        match &self.kind {
            SpaceKind::ConvexBodyDMax { dim } => (*dim + 1) as f64,
            _ => self.dim() as f64,
        }
    }

    /// Declared constant `kappa` in `Q(B(x, r)) <= kappa r^gamma`, if known.
    pub fn kappa(&self) -> Option<f64> {
        match &self.kind {
            SpaceKind::UnitCube { dim } => Some(unit_ball_volume(*dim)),
            SpaceKind::Ball { dim, radius, .. } => Some(radius.powi(-(*dim as i32))),
            SpaceKind::TriangleUnderF { dim, .. } => Some(unit_ball_volume(*dim) / self.volume()),
            SpaceKind::GeodesicSphere { m: 1 } => Some(1.0 / PI),
            SpaceKind::GeodesicSphere { .. } => Some(0.25),
            SpaceKind::ConvexBodyDMax { .. } => None,
        }
    }

    /// The metric of the space.
    pub fn metric(&self) -> Metric {
        match &self.kind {
            SpaceKind::GeodesicSphere { .. } => Metric::Geodesic,
            SpaceKind::ConvexBodyDMax { .. } => Metric::DMax,
            _ => Metric::Euclidean,
        }
    }

    /// Lebesgue volume of the underlying set (surface area for spheres).
    pub fn volume(&self) -> f64 {
        match &self.kind {
            SpaceKind::UnitCube { .. } => 1.0,
            SpaceKind::Ball { dim, radius, .. } => unit_ball_volume(*dim) * radius.powi(*dim as i32),
            SpaceKind::TriangleUnderF { dim, weights, offset } => {
                let fact: f64 = (1..=*dim).map(|k| k as f64).product();
                (1.0 - offset).powi(*dim as i32) / (fact * weights.iter().product::<f64>())
            }
            SpaceKind::GeodesicSphere { m: 1 } => 2.0 * PI,
            SpaceKind::GeodesicSphere { .. } => 4.0 * PI,
            SpaceKind::ConvexBodyDMax { dim } => unit_ball_volume(*dim),
        }
    }

    /// Membership test with a small tolerance.
    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.ambient_dim() {
            return false;
        }
        let c = p.coords();
        let t = CONTAINS_TOL;
        match &self.kind {
            SpaceKind::UnitCube { .. } => c.iter().all(|v| *v >= -t && *v <= 1.0 + t),
            SpaceKind::Ball { radius, center, .. } => {
                let d2: f64 = c.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() <= radius * (1.0 + t)
            }
            SpaceKind::TriangleUnderF { weights, offset, .. } => {
                c.iter().all(|v| *v >= -t) && offset + c.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() <= 1.0 + t
            }
            SpaceKind::GeodesicSphere { .. } => (p.norm() - 1.0).abs() <= t,
            SpaceKind::ConvexBodyDMax { .. } => p.norm() <= 1.0 + t,
        }
    }

    fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: p.dim() });
        }
        if !self.contains(p) {
            return Err(Error::OutsideSpace(String::from("space")));
        }
        Ok(())
    }

    /// Semimetric `d(x, y)`; errors on dimension mismatch or points outside.
    pub fn semimetric(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.metric().dist(x, y))
    }

    /// One point drawn from `Q`.
    pub fn sample_point(&self, s: &mut Sampler) -> Point {
        match &self.kind {
            SpaceKind::UnitCube { dim } => {
                let mut c = [0.0; geometry::MAX_DIM];
                for v in c.iter_mut().take(*dim) {
                    *v = s.uniform();
                }
                Point::new(&c[..*dim]).expect("valid dimension")
            }
            SpaceKind::Ball { dim, radius, center } => {
                let u = uniform_in_unit_ball(*dim, s);
                let c: Vec<f64> = u.iter().zip(center).map(|(u, c)| c + radius * u).collect();
                Point::new(&c).expect("valid dimension")
            }
            SpaceKind::ConvexBodyDMax { dim } => {
                Point::new(&uniform_in_unit_ball(*dim, s)).expect("valid dimension")
            }
            SpaceKind::TriangleUnderF { dim, weights, offset } => {
                let mut e = [0.0; geometry::MAX_DIM + 1];
                for v in e.iter_mut().take(dim + 1) {
                    *v = s.exponential();
                }
                let total: f64 = e[..=*dim].iter().sum();
                let c: Vec<f64> = (0..*dim).map(|i| (1.0 - offset) * e[i + 1] / total / weights[i]).collect();
                Point::new(&c).expect("valid dimension")
            }
            SpaceKind::GeodesicSphere { m } => {
                let phi = core::f64::consts::TAU * s.uniform();
                if *m == 1 {
                    Point::new(&[phi.cos(), phi.sin()]).expect("valid dimension")
                } else {
                    let z = 2.0 * s.uniform() - 1.0;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    Point::new(&[r * phi.cos(), r * phi.sin(), z]).expect("valid dimension")
                }
            }
        }
    }

    /// `n` independent points drawn from `Q`.
    pub fn sample_points(&self, n: usize, s: &mut Sampler) -> Vec<Point> {
        (0..n).map(|_| self.sample_point(s)).collect()
    }

    /// Distance `d(x, K)` in the metric of the space.
    pub fn distance_to_k(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        let c = x.coords();
        let unsupported =
            || Error::Unsupported(format!("no closed-form distance to {:?} for {:?}", self.k_spec, self.kind));
        match (&self.k_spec, &self.kind) {
            (KSpec::FullSpace, _) => Ok(0.0),
            (KSpec::BoundaryOfBody, SpaceKind::UnitCube { .. }) => {
                Ok(c.iter().map(|v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min).max(0.0))
            }
            (KSpec::BoundaryOfBody, SpaceKind::Ball { radius, center, .. }) => {
                let d: f64 = c.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                Ok((radius - d).max(0.0))
            }
            (KSpec::BoundaryOfBody, SpaceKind::ConvexBodyDMax { .. }) => Ok((1.0 - x.norm()).max(0.0).sqrt()),
            (KSpec::BoundaryOfBody, SpaceKind::TriangleUnderF { weights, offset, .. }) => {
                let faces = c.iter().fold(f64::INFINITY, |m, v| m.min(*v));
                Ok(faces.min(level_set_distance(c, weights, *offset)).max(0.0))
            }
            (KSpec::LevelSetF, SpaceKind::TriangleUnderF { weights, offset, .. }) => {
                Ok(level_set_distance(c, weights, *offset).max(0.0))
            }
            (KSpec::BoundaryOf { body }, SpaceKind::UnitCube { .. } | SpaceKind::Ball { .. } | SpaceKind::TriangleUnderF { .. })
                if c.len() == 2 =>
            {
                Ok(body.distance_to_boundary([c[0], c[1]]))
            }
            _ => Err(unsupported()),
        }
    }

    /// Monte Carlo check of `Q(B(x, r)) <= kappa r^gamma` over random centres
    /// and the given radii, using `mc` sample points.
    pub fn growth_check(&self, r_grid: &[f64], centers: usize, mc: usize, stream: RandomStream) -> Result<GrowthReport> {
        if r_grid.is_empty() || centers == 0 || mc == 0 || r_grid.iter().any(|r| !(*r > 0.0)) {
            return Err(invalid("growth check needs positive radii, centres and samples"));
        }
        let mut s = stream.sampler();
        let cloud = self.sample_points(mc, &mut s);
        let metric = self.metric();
        let gamma = self.gamma();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for _ in 0..centers {
            let x = self.sample_point(&mut s);
            let mut dists: Vec<f64> = cloud.iter().map(|y| metric.dist(&x, y)).collect();
            dists.sort_by(|a, b| a.total_cmp(b));
            for &r in r_grid {
                let inside = dists.partition_point(|d| *d <= r) as f64;
                let p = inside / mc as f64;
                let scale = r.powf(gamma);
                let ratio = p / scale;
                if ratio > best.0 {
                    best = (ratio, (p * (1.0 - p) / mc as f64).sqrt() / scale, r);
                }
            }
        }
        let kappa = self.kappa();
        Ok(GrowthReport {
            kappa,
            sup_ratio: best.0,
            sup_ratio_se: best.1,
            r_at_sup: best.2,
            violation: kappa.is_some_and(|k| best.0 - 3.0 * best.1 > k),
        })
    }
}

fn level_set_distance(c: &[f64], weights: &[f64], offset: f64) -> f64 {
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    (1.0 - offset - c.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>()) / norm
}

fn uniform_in_unit_ball(dim: usize, s: &mut Sampler) -> Vec<f64> {
    if dim == 1 {
        return vec![2.0 * s.uniform() - 1.0];
    }
    let mut g: Vec<f64> = (0..dim).map(|_| s.normal()).collect();
    let mut n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    while n == 0.0 {
        g = (0..dim).map(|_| s.normal()).collect();
        n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let r = s.uniform().powf(1.0 / dim as f64);
    g.iter().map(|v| v / n * r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semimetric_examples() {
        let cube = SpaceDescriptor::unit_cube(2);
        let d = cube.semimetric(&Point::xy(0.0, 0.0), &Point::xy(0.3, 0.4)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        let circle = SpaceDescriptor::geodesic_sphere(1);
        let g = circle.semimetric(&Point::xy(1.0, 0.0), &Point::xy(-1.0, 0.0)).unwrap();
        assert!((g - PI).abs() < 1e-12);
        let e = cube.semimetric(&Point::xy(0.0, 0.0), &Point::new(&[0.1, 0.2, 0.3]).unwrap());
        assert!(matches!(e, Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            cube.semimetric(&Point::xy(0.0, 0.0), &Point::xy(1.5, 0.0)),
            Err(Error::OutsideSpace(_))
        ));
    }

    #[test]
    fn dmax_distance_to_boundary() {
        let s = SpaceDescriptor::dmax_disk();
        let d = s.distance_to_k(&Point::xy(0.5, 0.0)).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        // d_max is at least the Euclidean distance and sees radial offsets.
        let m = s.metric().dist(&Point::xy(0.0, 0.5), &Point::xy(0.0, 0.51));
        assert!((m - 0.1).abs() < 1e-12);
    }

    #[test]
    fn simplex_level_set_distance() {
        let s = SpaceDescriptor::simplex(2);
        let d = s.distance_to_k(&Point::xy(0.25, 0.25)).unwrap();
        assert!((d - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((s.volume() - 0.5).abs() < 1e-15);
        let bad = SpaceDescriptor::unit_cube(2).with_k(KSpec::LevelSetF);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn samples_lie_in_space() {
        let spaces = [
            SpaceDescriptor::unit_cube(3),
            SpaceDescriptor::ball(0.5, &[0.5, 0.5]),
            SpaceDescriptor::simplex(3),
            SpaceDescriptor::triangle_under_f(vec![2.0, 0.5], 0.2),
            SpaceDescriptor::geodesic_sphere(1),
            SpaceDescriptor::geodesic_sphere(2),
            SpaceDescriptor::dmax_disk(),
        ];
        let mut s = RandomStream::new(3).sampler();
        for sp in &spaces {
            sp.validate().unwrap();
            for _ in 0..2000 {
                let p = sp.sample_point(&mut s);
                assert!(sp.contains(&p), "{:?} {:?}", sp.kind, p);
            }
        }
    }

    #[test]
    fn triangle_sampling_is_uniform() {
        // Mean of the uniform law on {x >= 0, 2x + y/2 <= 0.8} is the centroid.
        let sp = SpaceDescriptor::triangle_under_f(vec![2.0, 0.5], 0.2);
        let mut s = RandomStream::new(9).sampler();
        let n = 40_000;
        let (mut mx, mut my) = (0.0, 0.0);
        for _ in 0..n {
            let p = sp.sample_point(&mut s);
            mx += p.x();
            my += p.y();
        }
        assert!((mx / n as f64 - 0.4 / 3.0).abs() < 3e-3);
        assert!((my / n as f64 - 1.6 / 3.0).abs() < 1e-2);
    }

    #[test]
    fn growth_check_unit_square() {
        let sp = SpaceDescriptor::unit_cube(2);
        let rep = sp.growth_check(&[0.05, 0.1, 0.2], 20, 20_000, RandomStream::new(1)).unwrap();
        assert!(!rep.violation);
        assert!(rep.sup_ratio <= PI + 3.0 * rep.sup_ratio_se + 1e-12);
        assert!(rep.sup_ratio > 2.0);
        let dm = SpaceDescriptor::dmax_disk().growth_check(&[0.05, 0.1, 0.2], 20, 20_000, RandomStream::new(1)).unwrap();
        assert!(dm.kappa.is_none() && !dm.violation && dm.sup_ratio.is_finite());
    }

    #[test]
    fn descriptor_round_trips_through_record() {
        let sp = SpaceDescriptor::unit_cube(2).with_k(KSpec::BoundaryOf { body: Body::Disk { center: [0.5, 0.5], radius: 0.25 } });
        let rec: SpaceRecord = sp.clone().into();
        assert_eq!(rec.gamma, Some(2.0));
        assert_eq!(SpaceDescriptor::try_from(rec).unwrap(), sp);
        let bad = SpaceRecord { kind: "unit_cube".into(), dim: 2, gamma: Some(3.0), k_spec: None, params: SpaceParams::default() };
        assert!(SpaceDescriptor::try_from(bad).is_err());
        let short: SpaceDescriptor = serde_json::from_str(r#"{"kind":"triangle_under_f","dim":2}"#).unwrap();
        assert_eq!(short, SpaceDescriptor::simplex(2));
    }

    #[test]
    fn body_geometry() {
        let r = Body::rect([0.0, 0.0], [0.5, 1.0]);
        r.validate().unwrap();
        assert!((r.area() - 0.5).abs() < 1e-15);
        let sq = [[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]];
        assert!((r.intersection_area(&sq) - 0.125).abs() < 1e-15);
        assert!(r.contains([0.5, 0.5]) && !r.contains([0.6, 0.5]));
        assert!((r.distance_to_boundary([0.25, 0.5]) - 0.25).abs() < 1e-15);
        let cw = Body::Polygon { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]] };
        assert!(cw.validate().is_err());
    }
}
