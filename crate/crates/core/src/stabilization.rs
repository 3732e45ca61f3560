//! Add-one and add-two costs, score identities, radii of stabilization and
//! survival-tail fits.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{try_map, Executor};
use crate::functionals::ScoreFunctional;
use crate::geometry::Point;
use crate::numeric;
use crate::processes::{sample_binomial, sample_marked_point, Configuration, MarkDistribution, MarkedPoint, ProcessKind};
use crate::rng::RandomStream;
use crate::spaces::SpaceDescriptor;

/// A statistic of configurations.
pub type Statistic<'a> = dyn Fn(&Configuration) -> Result<f64> + Sync + 'a;

/// `D_x f(M) = f(M ∪ {x}) - f(M)`.
pub fn diff1(f: &Statistic<'_>, config: &Configuration, x: MarkedPoint) -> Result<f64> {
    Ok(f(&config.insert(&[x])?)? - f(config)?)
}

/// `D^2_{x1,x2} f(M) = f(M ∪ {x1, x2}) - f(M ∪ {x1}) - f(M ∪ {x2}) + f(M)`,
/// evaluated as `(f12 + f0) - (f1 + f2)` so that it is exactly symmetric.
pub fn diff2(f: &Statistic<'_>, config: &Configuration, x1: MarkedPoint, x2: MarkedPoint) -> Result<f64> {
    let f12 = f(&config.insert(&[x1, x2])?)?;
    let f1 = f(&config.insert(&[x1])?)?;
    let f2 = f(&config.insert(&[x2])?)?;
    let f0 = f(config)?;
    Ok((f12 + f0) - (f1 + f2))
}

/// Outcome of [`score_sum_identity_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub family: String,
    pub trials: usize,
    /// Largest relative residual of the first-order identity.
    pub max_residual_first: f64,
    /// Largest relative residual of the second-order identity.
    pub max_residual_second: f64,
    /// Largest relative gap between `total` and `offset + sum of scores`
    /// (over trials where the family's decomposition is exact).
    pub max_residual_total: f64,
    /// Largest `|D^2_{y1,y2} - D^2_{y2,y1}|` (must be zero).
    pub max_asymmetry: f64,
    /// Largest relative gap between `D^2` and `D_{y1}(D_{y2} f)`.
    pub max_inclusion_exclusion: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1.0)
}

/// Checks, on random configurations, the decompositions of the add-one and
/// add-two costs of `h = sum of scores` into score differences:
///
/// * `D_y h(M) = xi(y, M ∪ {y}) + sum_{x in M} D_y xi(x, M)`,
/// * `D^2_{y1,y2} h(M) = D_{y1} xi(y2, M ∪ {y2}) + D_{y2} xi(y1, M ∪ {y1})
///   + sum_{x in M} D^2_{y1,y2} xi(x, M)`.
///
/// Left sides use the bulk scores, right sides the local per-point scores.
/// Also checks `total = offset + sum of scores`, symmetry of `D^2` and
/// inclusion-exclusion. Configuration sizes are uniform on `n_min..=n_max`.
#[allow(clippy::too_many_arguments)]
pub fn score_sum_identity_check(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    trials: usize,
    n_min: usize,
    n_max: usize,
    tolerance: f64,
    stream: RandomStream,
) -> Result<IdentityReport> {
    if n_min == 0 || n_max < n_min || trials == 0 {
        return Err(invalid("need trials >= 1 and 1 <= n_min <= n_max"));
    }
    let h = |c: &Configuration| -> Result<f64> { Ok(numeric::sum(f.scores(c)?)) };
    let mut rep = IdentityReport {
        family: f.id().to_string(),
        trials,
        max_residual_first: 0.0,
        max_residual_second: 0.0,
        max_residual_total: 0.0,
        max_asymmetry: 0.0,
        max_inclusion_exclusion: 0.0,
        tolerance,
        pass: false,
    };
    for t in 0..trials {
        let mut s = stream.derive(t as u64).sampler();
        let n = n_min + s.below(n_max - n_min + 1);
        let m = sample_binomial(space, n, marks, &mut s)?;
        let y1 = sample_marked_point(space, marks, &mut s);
        let y2 = sample_marked_point(space, marks, &mut s);

        let i1 = m.insert_tracked(&[y1])?;
        let i2 = m.insert_tracked(&[y2])?;
        let i12 = m.insert_tracked(&[y1, y2])?;
        // After inserting y2 into M ∪ {y1} the positions are those of i12.
        let xi = |c: &Configuration, i: usize| f.score(c, i);

        // First order.
        let lhs1 = h(&i1.config)? - h(&m)?;
        let mut terms = Vec::with_capacity(n + 1);
        terms.push(xi(&i1.config, i1.extra_positions[0])?);
        for x in 0..n {
            terms.push(xi(&i1.config, i1.old_to_new[x])? - xi(&m, x)?);
        }
        let scale: f64 = terms.iter().map(|v| v.abs()).sum();
        rep.max_residual_first = rep.max_residual_first.max(rel(lhs1, numeric::sum(terms), scale));

        // Second order.
        let (h12, h1, h2, h0) = (h(&i12.config)?, h(&i1.config)?, h(&i2.config)?, h(&m)?);
        let lhs2 = (h12 + h0) - (h1 + h2);
        let mut terms = Vec::with_capacity(n + 2);
        terms.push(xi(&i12.config, i12.extra_positions[1])? - xi(&i2.config, i2.extra_positions[0])?);
        terms.push(xi(&i12.config, i12.extra_positions[0])? - xi(&i1.config, i1.extra_positions[0])?);
        for x in 0..n {
            let a = xi(&i12.config, i12.old_to_new[x])?;
            let b = xi(&i1.config, i1.old_to_new[x])?;
            let c = xi(&i2.config, i2.old_to_new[x])?;
            let d = xi(&m, x)?;
            terms.push((a + d) - (b + c));
        }
        let scale: f64 = terms.iter().map(|v| v.abs()).sum::<f64>() + h12.abs().max(h0.abs());
        rep.max_residual_second = rep.max_residual_second.max(rel(lhs2, numeric::sum(terms), scale));

        // Symmetry and inclusion-exclusion of the difference operators.
        let d12 = diff2(&h, &m, y1, y2)?;
        let d21 = diff2(&h, &m, y2, y1)?;
        rep.max_asymmetry = rep.max_asymmetry.max((d12 - d21).abs());
        let nested = (h12 - h1) - (h2 - h0);
        rep.max_inclusion_exclusion =
            rep.max_inclusion_exclusion.max(rel(d12, nested, h12.abs().max(h0.abs())));

        // Total versus scores (hull deficits are exact only when the centre is inside).
        let total = f.total(&m)?;
        let from_scores = f.offset() + h0;
        let exact = match f.id() {
            "hull-v1" | "hull-v2" => {
                let body = crate::functionals::FunctionalSpec::default_hull_body();
                !crate::functionals::hull::hull_statistics_2d(&m, &body, 1.0)?.origin_outside
            }
            _ => true,
        };
        if exact {
            rep.max_residual_total =
                rep.max_residual_total.max(rel(total, from_scores, total.abs().max(from_scores.abs())));
        }
    }
    rep.pass = rep.max_residual_first <= tolerance
        && rep.max_residual_second <= tolerance
        && rep.max_residual_total <= tolerance
        && rep.max_asymmetry == 0.0
        && rep.max_inclusion_exclusion <= tolerance;
    Ok(rep)
}

/// Outcome of [`vanishing_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub family: String,
    pub trials: usize,
    /// Trials where no admissible extra points could be placed.
    pub skipped: usize,
    /// Trials where the score changed.
    pub violations: usize,
    pub max_change: f64,
    pub pass: bool,
}

/// Checks that the score of `x` neither changes when up to `max_extras`
/// points are added outside `B(x, R)`, nor when the configuration is
/// restricted to that ball, where `R` is the family's radius of stabilization.
#[allow(clippy::too_many_arguments)]
pub fn vanishing_check(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    trials: usize,
    n: usize,
    max_extras: usize,
    stream: RandomStream,
) -> Result<VanishingReport> {
    if max_extras == 0 || max_extras > crate::processes::MAX_EXTRAS - 1 {
        return Err(invalid("between 1 and 7 extra points"));
    }
    let metric = space.metric();
    let mut rep =
        VanishingReport { family: f.id().to_string(), trials, skipped: 0, violations: 0, max_change: 0.0, pass: false };
    for t in 0..trials {
        let mut s = stream.derive(t as u64).sampler();
        let m = sample_binomial(space, n, marks, &mut s)?;
        let x = sample_marked_point(space, marks, &mut s);
        let ins = m.insert_tracked(&[x])?;
        let (c, i) = (ins.config, ins.extra_positions[0]);
        let r = match f.radius(&c, i) {
            Some(r) => r?,
            None => return Err(Error::Unsupported(format!("{} has no radius of stabilization", f.id()))),
        };
        let k = 1 + s.below(max_extras);
        let mut extras = Vec::with_capacity(k);
        let mut attempts = 0;
        while extras.len() < k && attempts < 10_000 {
            attempts += 1;
            let y = sample_marked_point(space, marks, &mut s);
            if metric.dist(&y.point, &x.point) > r {
                extras.push(y);
            }
        }
        if extras.len() < k {
            rep.skipped += 1;
            continue;
        }
        let base = f.score(&c, i)?;
        let more = c.insert_tracked(&extras)?;
        let with_extras = f.score(&more.config, more.old_to_new[i])?;
        let ball = more.config.restrict(|p| metric.dist(&p.point, &x.point) <= r);
        let j = ball.index_of(&x).ok_or_else(|| invalid("centre lost in restriction"))?;
        let restricted = f.score(&ball, j)?;
        let change = (with_extras - base).abs().max((restricted - with_extras).abs());
        rep.max_change = rep.max_change.max(change);
        if change > 1e-12 * base.abs().max(1.0) {
            rep.violations += 1;
        }
    }
    rep.pass = rep.violations == 0;
    Ok(rep)
}

/// Parameters of the hull radius of stabilization on the unit disk under
/// `d_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullRadius {
    /// Width of the boundary layer `A_{-rho0}` where scores live.
    pub rho0: f64,
    /// Multiplier of the returned radius.
    pub c_max: f64,
    /// Lower curvature constant (`< 1`).
    pub c_lower: f64,
    /// Upper curvature constant (`> 1`).
    pub c_upper: f64,
    /// Smallest and largest radius of the geometric search grid.
    pub r_min: f64,
    pub r_max: f64,
    /// Number of grid radii.
    pub steps: usize,
}

impl Default for HullRadius {
    fn default() -> Self {
        Self { rho0: 0.2, c_max: 3.0, c_lower: 0.7, c_upper: 1.2, r_min: 1e-3, r_max: 2.0, steps: 40 }
    }
}

impl HullRadius {
    fn grid(&self) -> Vec<f64> {
        let ratio = (self.r_max / self.r_min).ln();
        (0..self.steps).map(|j| self.r_min * (ratio * j as f64 / (self.steps - 1) as f64).exp()).collect()
    }

    /// Whether `y` lies in the region `A_{x,r}` (unit disk `A`).
    ///
    /// For `r <= sqrt(d(x, A^c))` the region is the triangle spanned by the
    /// segment of half-length `r / c_upper` through `x` orthogonal to the
    /// outer normal `u` and the apex `x + r^2 u`. Otherwise it is
    /// `A \ conv((A \ B(x, r / c_lower)) ∪ {x})`.
    pub fn in_region(&self, x: [f64; 2], y: [f64; 2], r: f64) -> bool {
        if y[0] * y[0] + y[1] * y[1] > 1.0 {
            return false;
        }
        let nx = x[0].hypot(x[1]);
        let delta = 1.0 - nx;
        let u = [x[0] / nx, x[1] / nx];
        let t = [-u[1], u[0]];
        // Coordinates of y relative to x along (t, u).
        let rel = [y[0] - x[0], y[1] - x[1]];
        let (a, b) = (rel[0] * t[0] + rel[1] * t[1], rel[0] * u[0] + rel[1] * u[1]);
        if r * r <= delta {
            let w = r / self.c_upper;
            let hgt = r * r;
            // Triangle with base [-w, w] x {0} and apex (0, hgt).
            return b >= 0.0 && b <= hgt && a.abs() <= w * (1.0 - b / hgt);
        }
        let rho = r / self.c_lower;
        if rho >= 1.0 + nx {
            return y != x;
        }
        // Intersection of |z| = 1 and |z - x| = rho: z.u = h.
        let h = (1.0 + nx * nx - rho * rho) / (2.0 * nx);
        if h >= 1.0 {
            return false;
        }
        let half = (1.0 - h * h).max(0.0).sqrt();
        let yu = y[0] * u[0] + y[1] * u[1];
        if nx <= h {
            return yu > h;
        }
        if yu < h {
            return false;
        }
        // Exclude triangle (x, p1, p2) with p1,2 = h u ± half t, in (a, b) coordinates.
        let b_chord = h - nx;
        let inside_tri = b <= 0.0 && b >= b_chord && a.abs() <= half * (b / b_chord);
        !inside_tri
    }

    /// Radius of stabilization of point `i` of a configuration in the unit
    /// disk: zero outside `A_{-rho0}`, otherwise `c_max` times the smallest
    /// grid radius at which both sides of the radial line through `x` contain
    /// a point of `X ∩ A_{-rho0} ∩ A_{x,r}`; infinite if none does.
    pub fn radius(&self, config: &Configuration, i: usize) -> Result<f64> {
        if config.dim() != Some(2) {
            return Err(Error::DimensionMismatch { expected: 2, found: config.dim().unwrap_or(0) });
        }
        let p = config.point(i);
        let x = [p.x(), p.y()];
        let nx = x[0].hypot(x[1]);
        if nx > 1.0 + 1e-12 {
            return Err(Error::OutsideSpace(String::from("unit disk")));
        }
        if 1.0 - nx > self.rho0 || nx == 0.0 {
            return Ok(0.0);
        }
        let grid = self.grid();
        let u = [x[0] / nx, x[1] / nx];
        let mut best = [usize::MAX; 2];
        for j in 0..config.len() {
            if j == i {
                continue;
            }
            let q = config.point(j);
            let y = [q.x(), q.y()];
            let ny = y[0].hypot(y[1]);
            if 1.0 - ny > self.rho0 || y == x {
                continue;
            }
            let side = u[0] * y[1] - u[1] * y[0];
            let sides: &[usize] = if side > 0.0 {
                &[0]
            } else if side < 0.0 {
                &[1]
            } else {
                &[0, 1]
            };
            let limit = sides.iter().map(|&k| best[k]).max().unwrap_or(usize::MAX).min(grid.len());
            if limit == 0 || !self.in_region(x, y, grid[limit - 1]) {
                continue;
            }
            // Membership grows with r: binary search for the first grid radius.
            let (mut lo, mut hi) = (0usize, limit - 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if self.in_region(x, y, grid[mid]) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            for &k in sides {
                best[k] = best[k].min(lo);
            }
        }
        let j = best[0].max(best[1]);
        Ok(if j == usize::MAX { f64::INFINITY } else { self.c_max * grid[j] })
    }
}

/// Least-squares fit of `S(t) = C exp(-c t^alpha)` to survival estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub alpha_hat: f64,
    /// Approximate standard error of `alpha_hat`.
    pub alpha_se: f64,
    pub c_hat: f64,
    #[serde(rename = "C_hat")]
    pub big_c_hat: f64,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub points: usize,
}

/// One survival estimate `P(R >= r)` (or `P(score != 0)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    /// Intensity or sample size.
    pub s: f64,
    /// Radius (or distance to `K`).
    pub r: f64,
    /// Rescaled argument `s^(1/gamma) r`.
    pub t: f64,
    pub survival: f64,
    /// Number of replicates with the event.
    pub events: usize,
    pub reps: usize,
}

/// Tail report `{family, alpha_hat, c_hat, C_hat, grid, survivals}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub family: String,
    pub alpha_hat: f64,
    pub alpha_se: f64,
    pub c_hat: f64,
    #[serde(rename = "C_hat")]
    pub big_c_hat: f64,
    /// `(s, r)` pairs of the design.
    pub grid: Vec<[f64; 2]>,
    /// Survival estimates at the design points.
    pub survivals: Vec<SurvivalPoint>,
    /// Whether the survival is non-increasing in `t` (within three standard
    /// errors) for every `s`.
    pub monotone: bool,
}

/// Fits `log S = log C - c t^alpha` by weighted least squares, profiling over
/// `alpha`. Uses points with at least `min_events` events and `S < 1`;
/// needs at least five of them.
pub fn fit_tail(points: &[SurvivalPoint], min_events: usize) -> Result<TailFit> {
    let used: Vec<&SurvivalPoint> =
        points.iter().filter(|p| p.events >= min_events && p.events < p.reps && p.t > 0.0).collect();
    if used.len() < 5 {
        return Err(Error::Unfittable(format!("{} usable survival points (need 5)", used.len())));
    }
    let y: Vec<f64> = used.iter().map(|p| p.survival.ln()).collect();
    let w: Vec<f64> = used.iter().map(|p| p.reps as f64 * p.survival / (1.0 - p.survival)).collect();
    let lt: Vec<f64> = used.iter().map(|p| p.t.ln()).collect();
    let solve = |alpha: f64| -> Option<(f64, f64, f64)> {
        let x: Vec<f64> = lt.iter().map(|l| -(alpha * l).exp()).collect();
        let (a, c) = numeric::weighted_line(&x, &y, &w)?;
        let rss = numeric::sum((0..y.len()).map(|k| w[k] * (y[k] - a - c * x[k]).powi(2)));
        Some((a, c, rss))
    };
    let rss_of = |alpha: f64| solve(alpha).map_or(f64::INFINITY, |v| v.2);
    // Coarse log-spaced scan, then golden-section refinement.
    let scan: Vec<f64> = (0..=240).map(|k| 0.05 * (400.0f64).powf(k as f64 / 240.0)).collect();
    let best = (0..scan.len()).min_by(|&a, &b| rss_of(scan[a]).total_cmp(&rss_of(scan[b]))).unwrap_or(0);
    let lo = scan[best.saturating_sub(1)];
    let hi = scan[(best + 1).min(scan.len() - 1)];
    let alpha = numeric::golden_min(rss_of, lo, hi, 1e-9);
    let (a, c, rss) = solve(alpha).ok_or_else(|| Error::Unfittable(String::from("degenerate design")))?;
    if !(c > 0.0) {
        return Err(Error::Unfittable(String::from("survival does not decay")));
    }
    let step = 1e-3 * alpha;
    let curv = (rss_of(alpha + step) - 2.0 * rss + rss_of(alpha - step)) / (step * step);
    let dof = (used.len() as f64 - 3.0).max(1.0);
    let alpha_se = if curv > 0.0 { (2.0 * (rss / dof).max(1.0) / curv).sqrt() } else { f64::INFINITY };
    Ok(TailFit { alpha_hat: alpha, alpha_se, c_hat: c, big_c_hat: a.exp(), rss, points: used.len() })
}

/// Sampling design shared by the tail estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDesign {
    pub process: ProcessKind,
    /// Intensities (or sample sizes).
    pub s_grid: Vec<f64>,
    /// Radii at which the survival is evaluated; when empty, the radii are
    /// the empirical quantiles of the observed radii at `levels`.
    #[serde(default)]
    pub r_grid: Vec<f64>,
    /// Survival levels; the defaults sit in the tail, where maxima over
    /// several independent directions have settled to a single exponential.
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    /// Replicates per intensity (radius fits) or per centre and intensity
    /// (decay fits).
    pub reps: usize,
    /// Minimum number of events for a survival point to enter the fit.
    #[serde(default = "default_min_events")]
    pub min_events: usize,
}

fn default_levels() -> Vec<f64> {
    alloc::vec![0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 0.0005]
}

fn default_min_events() -> usize {
    20
}

/// A radius of stabilization `R(x, M)` for point `i` of `M`.
pub type RadiusFn<'a> = dyn Fn(&Configuration, usize) -> Result<f64> + Sync + 'a;

fn survival_at(sorted: &[f64], r: f64) -> usize {
    sorted.len() - sorted.partition_point(|v| *v < r)
}

fn monotone_in_t(points: &[SurvivalPoint]) -> bool {
    let mut by_s: Vec<&SurvivalPoint> = points.iter().collect();
    by_s.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.t.total_cmp(&b.t)));
    by_s.windows(2).all(|w| {
        if w[0].s != w[1].s {
            return true;
        }
        let se = |p: &SurvivalPoint| (p.survival * (1.0 - p.survival) / p.reps as f64).sqrt();
        w[1].survival <= w[0].survival + 3.0 * (se(w[0]).hypot(se(w[1]))) + 1e-12
    })
}

/// Estimates `P(R(x, P_s ∪ {x}) >= r)` with centres cycling through
/// `centers`, then fits the tail against `t = s^(1/gamma) r`.
#[allow(clippy::too_many_arguments)]
pub fn radius_tail_fit<E: Executor>(
    family: &str,
    radius: &RadiusFn<'_>,
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    centers: &[MarkedPoint],
    design: &TailDesign,
    stream: RandomStream,
    exec: &E,
) -> Result<TailReport> {
    if centers.is_empty() || design.reps == 0 || design.s_grid.is_empty() {
        return Err(invalid("need centres, replicates and intensities"));
    }
    let gamma = space.gamma();
    let mut survivals = Vec::new();
    let mut grid = Vec::new();
    for (si, &s) in design.s_grid.iter().enumerate() {
        let base = stream.derive(si as u64);
        let mut radii = try_map(exec, design.reps, |j| {
            let mut smp = base.derive(j as u64).sampler();
            let m = design.process.sample(space, s, marks, &mut smp)?;
            let x = centers[j % centers.len()];
            let ins = m.insert_tracked(&[x])?;
            radius(&ins.config, ins.extra_positions[0])
        })?;
        radii.sort_by(|a, b| a.total_cmp(b));
        let rs: Vec<f64> = if design.r_grid.is_empty() {
            let mut v: Vec<f64> = design
                .levels
                .iter()
                .map(|&lv| {
                    let k = (((1.0 - lv) * design.reps as f64).floor() as usize).min(design.reps - 1);
                    radii[k]
                })
                .filter(|r| r.is_finite() && *r > 0.0)
                .collect();
            v.dedup();
            v
        } else {
            design.r_grid.clone()
        };
        for r in rs {
            let events = survival_at(&radii, r);
            grid.push([s, r]);
            survivals.push(SurvivalPoint {
                s,
                r,
                t: s.powf(1.0 / gamma) * r,
                survival: events as f64 / design.reps as f64,
                events,
                reps: design.reps,
            });
        }
    }
    let fit = fit_tail(&survivals, design.min_events)?;
    Ok(TailReport {
        family: family.to_string(),
        alpha_hat: fit.alpha_hat,
        alpha_se: fit.alpha_se,
        c_hat: fit.c_hat,
        big_c_hat: fit.big_c_hat,
        grid,
        monotone: monotone_in_t(&survivals),
        survivals,
    })
}

/// Estimates `P(xi(x, P_s ∪ {x} ∪ A) != 0)` for centres `x` at various
/// distances from `K` (with `extras` random points `A`), then fits the
/// survival against `t = s^(1/gamma) d(x, K)`.
#[allow(clippy::too_many_arguments)]
pub fn decay_check<E: Executor>(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    centers: &[Point],
    extras: usize,
    design: &TailDesign,
    stream: RandomStream,
    exec: &E,
) -> Result<TailReport> {
    if centers.is_empty() || design.reps == 0 || extras > crate::processes::MAX_EXTRAS - 1 {
        return Err(invalid("need centres, replicates and at most 7 extras"));
    }
    let gamma = space.gamma();
    let dists: Vec<f64> = centers.iter().map(|c| space.distance_to_k(c)).collect::<Result<_>>()?;
    let mut survivals = Vec::new();
    let mut grid = Vec::new();
    for (si, &s) in design.s_grid.iter().enumerate() {
        for (ci, c) in centers.iter().enumerate() {
            let base = stream.derive(si as u64).derive(ci as u64);
            let hits = try_map(exec, design.reps, |j| {
                let mut smp = base.derive(j as u64).sampler();
                let m = design.process.sample(space, s, marks, &mut smp)?;
                let x = MarkedPoint { point: *c, mark: marks.sample(&mut smp) };
                let mut add = Vec::with_capacity(extras + 1);
                add.push(x);
                for _ in 0..extras {
                    add.push(sample_marked_point(space, marks, &mut smp));
                }
                let ins = m.insert_tracked(&add)?;
                Ok(f.score(&ins.config, ins.extra_positions[0])?.abs() > 1e-12)
            })?;
            let events = hits.iter().filter(|h| **h).count();
            grid.push([s, dists[ci]]);
            survivals.push(SurvivalPoint {
                s,
                r: dists[ci],
                t: s.powf(1.0 / gamma) * dists[ci],
                survival: events as f64 / design.reps as f64,
                events,
                reps: design.reps,
            });
        }
    }
    let monotone = monotone_in_t(&survivals);
    let fit = fit_tail(&survivals, design.min_events)?;
    Ok(TailReport {
        family: f.id().to_string(),
        alpha_hat: fit.alpha_hat,
        alpha_se: fit.alpha_se,
        c_hat: fit.c_hat,
        big_c_hat: fit.big_c_hat,
        grid,
        survivals,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::functionals::{FunctionalSpec, Knn};
    use alloc::vec;

    #[test]
    fn diff_examples() {
        let space = SpaceDescriptor::unit_cube(1);
        let f = Knn::new(1, 1.0, false, &space).unwrap();
        let total = crate::functionals::total_of(&f);
        let c = Configuration::from_points(vec![Point::new(&[0.0]).unwrap(), Point::new(&[1.0]).unwrap()]).unwrap();
        let x = MarkedPoint::unmarked(Point::new(&[3.0]).unwrap());
        // Total goes from 1 to 1 + 2 = 3.
        assert_eq!(diff1(&total, &c, x).unwrap(), 2.0);
    }

    #[test]
    fn tail_fit_recovers_weibull() {
        let pts: Vec<SurvivalPoint> = (1..=8)
            .map(|k| {
                let t = 0.2 * k as f64;
                let s = 0.8 * (-1.5 * t * t * t).exp();
                SurvivalPoint { s: 1.0, r: t, t, survival: s, events: 5000, reps: 10_000 }
            })
            .collect();
        let fit = fit_tail(&pts, 1).unwrap();
        assert!((fit.alpha_hat - 3.0).abs() < 1e-5, "{fit:?}");
        assert!((fit.c_hat - 1.5).abs() < 1e-4);
        assert!((fit.big_c_hat - 0.8).abs() < 1e-4);
        assert!(fit_tail(&pts[..4], 1).is_err());
    }

    #[test]
    fn hull_region_is_monotone_in_r() {
        let hr = HullRadius::default();
        let grid = hr.grid();
        let mut s = RandomStream::new(4).sampler();
        for _ in 0..300 {
            let depth = 0.01 + 0.19 * s.uniform();
            let ang = core::f64::consts::TAU * s.uniform();
            let x = [(1.0 - depth) * ang.cos(), (1.0 - depth) * ang.sin()];
            for _ in 0..30 {
                let rr = 1.0 - 0.3 * s.uniform();
                let b = ang + 0.6 * (s.uniform() - 0.5);
                let y = [rr * b.cos(), rr * b.sin()];
                let flags: Vec<bool> = grid.iter().map(|&r| hr.in_region(x, y, r)).collect();
                let first = flags.iter().position(|f| *f).unwrap_or(flags.len());
                assert!(flags[first..].iter().all(|f| *f), "x={x:?} y={y:?} flags={flags:?}");
            }
        }
    }

    #[test]
    fn hull_radius_matches_linear_scan() {
        let hr = HullRadius::default();
        let space = SpaceDescriptor::dmax_disk();
        let grid = hr.grid();
        for seed in 0..40 {
            let mut s = RandomStream::new(seed).sampler();
            let c = sample_binomial(&space, 60, &MarkDistribution::default(), &mut s).unwrap();
            for i in 0..c.len() {
                let got = hr.radius(&c, i).unwrap();
                let p = c.point(i);
                let x = [p.x(), p.y()];
                let nx = x[0].hypot(x[1]);
                let expect = if 1.0 - nx > hr.rho0 {
                    0.0
                } else {
                    let u = [x[0] / nx, x[1] / nx];
                    let hit = |r: f64, side: f64| {
                        (0..c.len()).any(|j| {
                            let q = c.point(j);
                            let y = [q.x(), q.y()];
                            let sd = u[0] * y[1] - u[1] * y[0];
                            j != i && 1.0 - y[0].hypot(y[1]) <= hr.rho0 && sd * side >= 0.0 && hr.in_region(x, y, r)
                        })
                    };
                    grid.iter().find(|&&r| hit(r, 1.0) && hit(r, -1.0)).map_or(f64::INFINITY, |r| hr.c_max * r)
                };
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn knn_identities_small() {
        let space = SpaceDescriptor::unit_cube(2);
        let f = FunctionalSpec::named("knn").build(&space, 1.0).unwrap();
        let rep =
            score_sum_identity_check(f.as_ref(), &space, &MarkDistribution::default(), 30, 3, 20, 1e-9, RandomStream::new(1))
                .unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn knn_vanishing_small() {
        let space = SpaceDescriptor::unit_cube(2);
        let f = Knn::new(2, 1.0, false, &space).unwrap();
        let rep = vanishing_check(&f, &space, &MarkDistribution::default(), 50, 40, 7, RandomStream::new(2)).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn decay_for_maximal_points() {
        // P(x maximal) = exp(-2 s d^2) exactly on the simplex of mass s (no extras).
        let space = SpaceDescriptor::simplex(2);
        let f = FunctionalSpec::named("maxpts").build(&space, 1.0).unwrap();
        let centers: Vec<Point> = (1..=7)
            .map(|k| {
                let d = 0.015 * k as f64;
                let u = 0.5 * (1.0 - d * 2f64.sqrt());
                Point::xy(u, u)
            })
            .collect();
        let design = TailDesign {
            process: ProcessKind::Poisson,
            s_grid: vec![200.0],
            r_grid: vec![],
            levels: vec![],
            reps: 4000,
            min_events: 40,
        };
        let rep = decay_check(f.as_ref(), &space, &MarkDistribution::default(), &centers, 0, &design, RandomStream::new(3), &Sequential)
            .unwrap();
        assert!((rep.alpha_hat - 2.0).abs() < 0.3, "{rep:?}");
        assert!(rep.monotone);
    }
}
