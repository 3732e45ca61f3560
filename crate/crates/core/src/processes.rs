//! Marked point configurations and Poisson / binomial samplers.
//!
//! A [`Configuration`] is a finite multiset of marked points kept sorted in a
//! fixed total order (lexicographic coordinates, then mark). That order is the
//! tie-breaking order used by every functional.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::rng::Sampler;
use crate::spaces::SpaceDescriptor;

/// Largest number of extra points accepted by [`Configuration::insert`].
pub const MAX_EXTRAS: usize = 8;

/// A point with a non-negative real mark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub point: Point,
    pub mark: f64,
}

impl MarkedPoint {
    /// Marked point; the mark must be finite and non-negative.
    pub fn new(point: Point, mark: f64) -> Result<Self> {
        if !(mark >= 0.0) || !mark.is_finite() {
            return Err(invalid("marks must be finite and non-negative"));
        }
        Ok(Self { point, mark })
    }

    /// Point with mark one.
    pub fn unmarked(point: Point) -> Self {
        Self { point, mark: 1.0 }
    }

    /// The fixed total order on marked points.
    pub fn order(&self, other: &Self) -> Ordering {
        self.point.lex_cmp(&other.point).then(self.mark.total_cmp(&other.mark))
    }
}

/// Law of the marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarkDistribution {
    /// Constant mark.
    Dirac { value: f64 },
    /// `|N(0, sigma^2)|`.
    HalfNormal { sigma: f64 },
    /// Weibull-type law with `P(M >= r) = exp(-r^c2 / c1)`.
    Exponentialized { c1: f64, c2: f64 },
}

impl Default for MarkDistribution {
    fn default() -> Self {
        MarkDistribution::Dirac { value: 1.0 }
    }
}

impl MarkDistribution {
    /// Checks the parameters (the tail constants must satisfy `c1 >= 1`).
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MarkDistribution::Dirac { value } => value >= 0.0 && value.is_finite(),
            MarkDistribution::HalfNormal { sigma } => sigma > 0.0 && sigma.is_finite(),
            MarkDistribution::Exponentialized { c1, c2 } => c1 >= 1.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("invalid mark distribution parameters"))
        }
    }

    /// Constants `(c1, c2)` with `P(M >= r) <= c1 exp(-r^c2 / c1)` for all `r >= 0`.
    pub fn tail_constants(&self) -> (f64, f64) {
        match *self {
            MarkDistribution::Dirac { value } => {
                // P(M >= r) = 1{r <= v} <= c1 exp(-r / c1) with c1 = max(1, v e).
                (1.0f64.max(value * core::f64::consts::E), 1.0)
            }
            MarkDistribution::HalfNormal { sigma } => (2.0f64.max(2.0 * sigma * sigma), 2.0),
            MarkDistribution::Exponentialized { c1, c2 } => (c1, c2),
        }
    }

    /// One mark.
    pub fn sample(&self, s: &mut Sampler) -> f64 {
        match *self {
            MarkDistribution::Dirac { value } => value,
            MarkDistribution::HalfNormal { sigma } => (sigma * s.normal()).abs(),
            MarkDistribution::Exponentialized { c1, c2 } => (c1 * s.exponential()).powf(1.0 / c2),
        }
    }

    /// Largest possible mark, if bounded.
    pub fn sup(&self) -> Option<f64> {
        match *self {
            MarkDistribution::Dirac { value } => Some(value),
            _ => None,
        }
    }
}

/// A finite multiset of marked points in canonical order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<MarkedPoint>", try_from = "Vec<MarkedPoint>")]
pub struct Configuration {
    items: Vec<MarkedPoint>,
}

impl From<Configuration> for Vec<MarkedPoint> {
    fn from(c: Configuration) -> Self {
        c.items
    }
}

impl TryFrom<Vec<MarkedPoint>> for Configuration {
    type Error = Error;
    fn try_from(v: Vec<MarkedPoint>) -> Result<Self> {
        Configuration::new(v)
    }
}

/// Result of inserting extra points: the new configuration, the position of
/// each extra point and the new position of each old point.
#[derive(Debug, Clone)]
pub struct Inserted {
    pub config: Configuration,
    pub extra_positions: Vec<usize>,
    pub old_to_new: Vec<usize>,
}

impl Configuration {
    /// Configuration from arbitrary marked points (all of one dimension).
    pub fn new(mut items: Vec<MarkedPoint>) -> Result<Self> {
        if let Some(first) = items.first() {
            let d = first.point.dim();
            if let Some(bad) = items.iter().find(|m| m.point.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: bad.point.dim() });
            }
        }
        if items.iter().any(|m| !(m.mark >= 0.0) || !m.mark.is_finite()) {
            return Err(invalid("marks must be finite and non-negative"));
        }
        items.sort_by(MarkedPoint::order);
        Ok(Self { items })
    }

    /// Configuration of points with mark one.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        Self::new(points.into_iter().map(MarkedPoint::unmarked).collect())
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    /// Whether the configuration is empty.
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Marked points in canonical order.
    pub fn items(&self) -> &[MarkedPoint] {
        &self.items
    }

    /// Point number `i`.
    pub fn point(&self, i: usize) -> &Point {
        &self.items[i].point
    }

    /// Mark of point number `i`.
    pub fn mark(&self, i: usize) -> f64 {
        self.items[i].mark
    }

    /// Unmarked points in canonical order.
    pub fn points(&self) -> Vec<Point> {
        self.items.iter().map(|m| m.point).collect()
    }

    /// Ambient dimension (`None` when empty).
    pub fn dim(&self) -> Option<usize> {
        self.items.first().map(|m| m.point.dim())
    }

    /// Position of the first element equal to `x`.
    pub fn index_of(&self, x: &MarkedPoint) -> Option<usize> {
        let i = self.items.partition_point(|m| m.order(x) == Ordering::Less);
        (i < self.items.len() && self.items[i].order(x) == Ordering::Equal).then_some(i)
    }

    /// Union with at most [`MAX_EXTRAS`] extra points (multiset semantics).
    pub fn insert(&self, extras: &[MarkedPoint]) -> Result<Self> {
        Ok(self.insert_tracked(extras)?.config)
    }

    /// Like [`Configuration::insert`] but also reports where points went.
    pub fn insert_tracked(&self, extras: &[MarkedPoint]) -> Result<Inserted> {
        if extras.len() > MAX_EXTRAS {
            return Err(Error::TooManyExtras { max: MAX_EXTRAS, found: extras.len() });
        }
        self.merge(extras)
    }

    /// Union with any number of extra points.
    pub fn union(&self, extras: &[MarkedPoint]) -> Result<Self> {
        Ok(self.merge(extras)?.config)
    }

    fn merge(&self, extras: &[MarkedPoint]) -> Result<Inserted> {
        if let Some(d) = self.dim().or_else(|| extras.first().map(|m| m.point.dim())) {
            if let Some(bad) = extras.iter().find(|m| m.point.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: bad.point.dim() });
            }
        }
        if extras.iter().any(|m| !(m.mark >= 0.0) || !m.mark.is_finite()) {
            return Err(invalid("marks must be finite and non-negative"));
        }
        // Stable order of extras among themselves: by value, then argument order.
        let mut order: Vec<usize> = (0..extras.len()).collect();
        order.sort_by(|&a, &b| extras[a].order(&extras[b]).then(a.cmp(&b)));
        let n = self.items.len();
        let mut items = Vec::with_capacity(n + extras.len());
        let mut extra_positions = alloc::vec![0; extras.len()];
        let mut old_to_new = Vec::with_capacity(n);
        let (mut i, mut j) = (0, 0);
        while i < n || j < order.len() {
            // Existing points go before equal extras.
            let take_old = j == order.len()
                || (i < n && self.items[i].order(&extras[order[j]]) != Ordering::Greater);
            if take_old {
                old_to_new.push(items.len());
                items.push(self.items[i]);
                i += 1;
            } else {
                extra_positions[order[j]] = items.len();
                items.push(extras[order[j]]);
                j += 1;
            }
        }
        Ok(Inserted { config: Configuration { items }, extra_positions, old_to_new })
    }

    /// Configuration without point number `i`.
    pub fn remove(&self, i: usize) -> Self {
        let mut items = self.items.clone();
        items.remove(i);
        Self { items }
    }

    /// Sub-configuration of the points satisfying `keep`.
    pub fn restrict<F: Fn(&MarkedPoint) -> bool>(&self, keep: F) -> Self {
        Self { items: self.items.iter().filter(|m| keep(m)).copied().collect() }
    }
}

fn sample_marked(space: &SpaceDescriptor, marks: &MarkDistribution, n: usize, s: &mut Sampler) -> Result<Configuration> {
    let mut items = Vec::with_capacity(n);
    for _ in 0..n {
        let point = space.sample_point(s);
        let mark = marks.sample(s);
        items.push(MarkedPoint { point, mark });
    }
    Configuration::new(items)
}

/// Poisson process `P_s` with intensity measure `s Q`.
pub fn sample_poisson(space: &SpaceDescriptor, s_intensity: f64, marks: &MarkDistribution, s: &mut Sampler) -> Result<Configuration> {
    marks.validate()?;
    if !(s_intensity > 0.0) {
        return Err(invalid("intensity must be positive"));
    }
    let n = s.poisson(s_intensity)?;
    sample_marked(space, marks, n, s)
}

/// Binomial process `X_n` of `n` i.i.d. points with law `Q`.
pub fn sample_binomial(space: &SpaceDescriptor, n: usize, marks: &MarkDistribution, s: &mut Sampler) -> Result<Configuration> {
    marks.validate()?;
    if n == 0 {
        return Err(invalid("binomial sample size must be at least one"));
    }
    sample_marked(space, marks, n, s)
}

/// Which process a sample is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// Poisson process with intensity `size * Q`.
    Poisson,
    /// `size` i.i.d. points.
    Binomial,
}

impl ProcessKind {
    /// Draws a configuration of the given size parameter.
    pub fn sample(self, space: &SpaceDescriptor, size: f64, marks: &MarkDistribution, s: &mut Sampler) -> Result<Configuration> {
        match self {
            ProcessKind::Poisson => sample_poisson(space, size, marks, s),
            ProcessKind::Binomial => {
                if !(size >= 1.0) || size.fract() != 0.0 {
                    return Err(invalid("binomial size must be a positive integer"));
                }
                sample_binomial(space, size as usize, marks, s)
            }
        }
    }
}

/// One point drawn from `Q` with a mark drawn from the mark law.
pub fn sample_marked_point(space: &SpaceDescriptor, marks: &MarkDistribution, s: &mut Sampler) -> MarkedPoint {
    let point = space.sample_point(s);
    MarkedPoint { point, mark: marks.sample(s) }
}
