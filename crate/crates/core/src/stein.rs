//! Ingredients of Malliavin–Stein normal-approximation bounds: the weighted
//! mass `I_{K,s}` near `K`, the add-one term `Gamma`, the add-two integrals of
//! `psi`, their assembly into Kolmogorov-distance bounds, and a fourth-moment
//! inequality check.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{try_map, Executor};
use crate::functionals::ScoreFunctional;
use crate::geometry::{arc_length_in_rect, Point};
use crate::numeric;
use crate::processes::{sample_binomial, sample_marked_point, Configuration, MarkDistribution, MarkedPoint, ProcessKind};
use crate::rng::{RandomStream, Sampler};
use crate::spaces::{Body, KSpec, SpaceDescriptor, SpaceKind};
use crate::stats;

/// Constants entering `I_{K,s}` and the assembled bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    /// Moment exponent `p` in `(0, 1]`.
    pub p: f64,
    /// Combined decay constant `min(c_stab, c_K)`.
    pub c_combined: f64,
    /// Combined tail exponent `min(alpha_stab, alpha_K)`.
    pub alpha: f64,
    /// Stand-in for the non-explicit constant in front of the bounds.
    pub user_constant: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self { p: 1.0, c_combined: 1.0, alpha: 1.0, user_constant: 1.0 }
    }
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(invalid("p must lie in (0, 1]"));
        }
        if !(self.c_combined >= 0.0 && self.c_combined.is_finite()) {
            return Err(invalid("c_combined must be finite and nonnegative"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha must be positive"));
        }
        if !(self.user_constant > 0.0 && self.user_constant.is_finite()) {
            return Err(invalid("user_constant must be positive"));
        }
        Ok(())
    }
}

/// `I_{K,s} = s * int exp(-c p d_s(x, K)^alpha / (36 * 4^(alpha + 1))) Q(dx)` with
/// `d_s(x, K) = s^(1/gamma) d(x, K)`.
///
/// Exact for `K = X`; otherwise reduced to a one-dimensional integral over
/// the distance to `K` and evaluated by adaptive quadrature.
pub fn i_ks(space: &SpaceDescriptor, inputs: &BoundInputs, s: f64) -> Result<f64> {
    inputs.validate()?;
    space.validate()?;
    if !(s >= 1.0) || !s.is_finite() {
        return Err(invalid("s must be at least 1"));
    }
    if matches!(space.k_spec, KSpec::FullSpace) || inputs.c_combined == 0.0 {
        return Ok(s);
    }
    let a = inputs.c_combined * inputs.p / (36.0 * 4f64.powf(inputs.alpha + 1.0));
    let scale = s.powf(1.0 / space.gamma());
    let g = |t: f64| (-a * (scale * t).powf(inputs.alpha)).exp();
    let tol = 1e-8;
    // Integrate up to where the weight is negligible, keeping the full range
    // when the integrand is flat.
    let cut = |len: f64| {
        let t_neg = (745.0 / a).powf(1.0 / inputs.alpha) / scale;
        t_neg.min(len)
    };
    let unsupported = || Error::Unsupported(alloc::format!("I_K,s for {:?} with {:?}", space.kind, space.k_spec));
    let value = match (&space.k_spec, &space.kind) {
        (KSpec::BoundaryOfBody, SpaceKind::UnitCube { dim }) => {
            // P(min distance to a face >= t) = (1 - 2t)^d.
            let d = *dim as i32;
            numeric::integrate(|t| g(t) * 2.0 * d as f64 * (1.0 - 2.0 * t).powi(d - 1), 0.0, cut(0.5), tol)
        }
        (KSpec::BoundaryOfBody, SpaceKind::Ball { dim, radius, .. }) => {
            let d = *dim as i32;
            let r = *radius;
            numeric::integrate(|t| g(t) * d as f64 * (r - t).powi(d - 1) / r.powi(d), 0.0, cut(r), tol)
        }
        (KSpec::BoundaryOfBody, SpaceKind::ConvexBodyDMax { dim }) => {
            // d(x, K) = sqrt(1 - |x|); substitute u = sqrt(1 - r).
            let d = *dim as i32;
            numeric::integrate(|u| g(u) * d as f64 * (1.0 - u * u).powi(d - 1) * 2.0 * u, 0.0, cut(1.0), tol)
        }
        (KSpec::LevelSetF, SpaceKind::TriangleUnderF { dim, weights, offset }) => {
            // F - offset over the level is Beta(d, 1) distributed on [0, 1 - offset].
            let d = *dim as i32;
            let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            let len = (1.0 - offset) / norm;
            numeric::integrate(|t| g(t) * d as f64 * (1.0 - t / len).powi(d - 1) / len, 0.0, cut(len), tol)
        }
        (KSpec::BoundaryOf { body: Body::Disk { center, radius } }, SpaceKind::UnitCube { dim: 2 }) => {
            let arc = |rho: f64| arc_length_in_rect(*center, rho, [0.0, 0.0], [1.0, 1.0]);
            let far = [0.0f64, 1.0]
                .iter()
                .flat_map(|x| [0.0f64, 1.0].map(|y| (x - center[0]).hypot(y - center[1])))
                .fold(0.0f64, f64::max);
            let inner = numeric::integrate(|t| g(t) * arc(radius - t), 0.0, cut(*radius), tol);
            let outer = numeric::integrate(|t| g(t) * arc(radius + t), 0.0, cut(far - radius), tol);
            inner + outer
        }
        _ => return Err(unsupported()),
    };
    Ok(s * value.min(1.0))
}

/// Which bound the right-hand side refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Poisson,
    Binomial,
}

impl From<ProcessKind> for BoundKind {
    fn from(p: ProcessKind) -> Self {
        match p {
            ProcessKind::Poisson => BoundKind::Poisson,
            ProcessKind::Binomial => BoundKind::Binomial,
        }
    }
}

/// Bound in terms of the weighted mass `I` near `K` and the variance `V`:
/// `C (sqrt(I)/V + I/V^(3/2) + (I^(5/4) + I^(3/2))/V^2)`; the binomial
/// variant replaces `I^(5/4)` by `I`.
pub fn intensity_bound(i: f64, variance: f64, user_constant: f64, kind: BoundKind) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    if !(i >= 0.0) {
        return Err(invalid("I must be nonnegative"));
    }
    let third = match kind {
        BoundKind::Poisson => i.powf(1.25),
        BoundKind::Binomial => i,
    } + i.powf(1.5);
    Ok(user_constant * (i.sqrt() / variance + i / variance.powf(1.5) + third / (variance * variance)))
}

/// Monte Carlo sizes of the nested estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    /// Outer points `x` (for `Gamma`) or `x1` (for the `psi` integrals).
    pub outer: usize,
    /// Points `x2` per `x1`.
    #[serde(default = "default_pairs")]
    pub pairs_per_outer: usize,
    /// Process replicates per probability estimate.
    pub inner: usize,
    /// Share of `x2` drawn from `Q` rather than near `x1` (unit cubes only).
    #[serde(default = "default_uniform_fraction")]
    pub uniform_fraction: f64,
    /// Half-width of the local proposal box in units of `s^(-1/gamma)`.
    #[serde(default = "default_local_scale")]
    pub local_scale: f64,
}

fn default_pairs() -> usize {
    4
}
fn default_uniform_fraction() -> f64 {
    0.3
}
fn default_local_scale() -> f64 {
    3.0
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            outer: 200,
            pairs_per_outer: default_pairs(),
            inner: 1000,
            uniform_fraction: default_uniform_fraction(),
            local_scale: default_local_scale(),
        }
    }
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if self.outer < 100 || self.inner < 100 {
            return Err(invalid("outer and inner replicate counts must be at least 100"));
        }
        if self.pairs_per_outer < 2 {
            return Err(invalid("at least two x2 per x1"));
        }
        if !(self.uniform_fraction > 0.0 && self.uniform_fraction <= 1.0) {
            return Err(invalid("uniform_fraction must lie in (0, 1]"));
        }
        if !(self.local_scale > 0.0) {
            return Err(invalid("local_scale must be positive"));
        }
        Ok(())
    }
}

/// Estimate with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

fn estimate_of(values: &[f64], factor: f64) -> Estimate {
    Estimate { value: factor * numeric::mean(values), se: factor * numeric::standard_error(values) }
}

/// Base configuration of the nested estimators.
#[derive(Debug, Clone, Copy)]
enum Base {
    Poisson(f64),
    /// `n` i.i.d. points.
    Binomial(usize),
}

impl Base {
    fn sample(self, space: &SpaceDescriptor, marks: &MarkDistribution, smp: &mut Sampler) -> Result<Configuration> {
        match self {
            Base::Poisson(s) => ProcessKind::Poisson.sample(space, s, marks, smp),
            Base::Binomial(n) => sample_binomial(space, n, marks, smp),
        }
    }
}

fn nonzero(d: f64, scale: f64) -> bool {
    d.abs() > 1e-12 * scale.max(1.0)
}

/// Fraction of `inner` base samples `B` (with `fixed` points added) for which
/// the first- or second-order difference of `f` at `added` is nonzero.
#[allow(clippy::too_many_arguments)]
fn prob_nonzero(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    base: Base,
    fixed: &[MarkedPoint],
    added: &[MarkedPoint],
    inner: usize,
    stream: RandomStream,
) -> Result<f64> {
    let mut hits = 0usize;
    for r in 0..inner {
        let mut smp = stream.derive(r as u64).sampler();
        let mut b = base.sample(space, marks, &mut smp)?;
        if !fixed.is_empty() {
            b = b.insert(fixed)?;
        }
        let f0 = f.total(&b)?;
        let hit = match added {
            [x] => {
                let f1 = f.total(&b.insert(&[*x])?)?;
                nonzero(f1 - f0, f0.abs() + f1.abs())
            }
            [x1, x2] => {
                let f12 = f.total(&b.insert(&[*x1, *x2])?)?;
                let f1 = f.total(&b.insert(&[*x1])?)?;
                let f2 = f.total(&b.insert(&[*x2])?)?;
                nonzero((f12 + f0) - (f1 + f2), f12.abs() + f0.abs() + f1.abs() + f2.abs())
            }
            _ => return Err(invalid("one or two added points")),
        };
        if hit {
            hits += 1;
        }
    }
    Ok(hits as f64 / inner as f64)
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `Gamma = s * int P(D_x f(P_s) != 0)^(p/(8+2p)) Q(dx)` (Poisson) or
/// `n * int P(D_x f(X_{n-1}) != 0)^(p/(8+2p)) Q(dx)` (binomial).
#[allow(clippy::too_many_arguments)]
pub fn estimate_gamma<E: Executor>(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    process: ProcessKind,
    marks: &MarkDistribution,
    s: f64,
    p: f64,
    mc: &McParams,
    stream: RandomStream,
    exec: &E,
) -> Result<Estimate> {
    mc.validate()?;
    let base = base_for(process, s, 1)?;
    let e = p / (8.0 + 2.0 * p);
    let vals = try_map(exec, mc.outer, |i| {
        let st = stream.derive(i as u64);
        let mut smp = st.derive(u64::MAX).sampler();
        let x = sample_marked_point(space, marks, &mut smp);
        Ok(clamp01(prob_nonzero(f, space, marks, base, &[], &[x], mc.inner, st)?).powf(e))
    })?;
    Ok(estimate_of(&vals, s))
}

fn base_for(process: ProcessKind, s: f64, removed: usize) -> Result<Base> {
    match process {
        ProcessKind::Poisson => {
            if !(s > 0.0) {
                return Err(invalid("intensity must be positive"));
            }
            Ok(Base::Poisson(s))
        }
        ProcessKind::Binomial => {
            if !(s >= 3.0) || s.fract() != 0.0 {
                return Err(invalid("binomial size must be an integer >= 3"));
            }
            Ok(Base::Binomial(s as usize - removed))
        }
    }
}

/// `psi(x1, x2)`: the Poisson form `P(D^2 f(P_s) != 0)^(p/(16+4p))`, or the
/// binomial form `max_{|A| <= 1} P(D^2 f(X_{n-2-|A|} ∪ A) != 0)^(p/(8+2p))`
/// with `A` either empty or one fresh `Q`-point.
#[allow(clippy::too_many_arguments)]
pub fn psi_value(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    process: ProcessKind,
    marks: &MarkDistribution,
    s: f64,
    p: f64,
    x1: MarkedPoint,
    x2: MarkedPoint,
    inner: usize,
    stream: RandomStream,
) -> Result<f64> {
    match process {
        ProcessKind::Poisson => {
            let pr = prob_nonzero(f, space, marks, base_for(process, s, 0)?, &[], &[x1, x2], inner, stream)?;
            Ok(clamp01(pr).powf(p / (16.0 + 4.0 * p)))
        }
        ProcessKind::Binomial => {
            let e = p / (8.0 + 2.0 * p);
            let empty = prob_nonzero(f, space, marks, base_for(process, s, 2)?, &[], &[x1, x2], inner, stream.derive(0))?;
            let mut smp = stream.derive(1).sampler();
            let a = sample_marked_point(space, marks, &mut smp);
            let one = prob_nonzero(f, space, marks, base_for(process, s, 3)?, &[a], &[x1, x2], inner, stream.derive(2))?;
            Ok(clamp01(empty.max(one)).powf(e))
        }
    }
}

/// Monte Carlo estimates of the `psi` integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiIntegrals {
    /// `int psi dQ^2`.
    pub psi: Estimate,
    /// `int psi^2 dQ^2`.
    pub psi_sq: Estimate,
    /// `int (int psi(x1, x2) Q(dx2))^2 Q(dx1)`.
    pub psi_inner_sq: Estimate,
}

/// Draws `x2` near `x1` (defensive mixture with `Q` on unit cubes) and
/// returns it with its importance weight `dQ / d(proposal)`.
fn propose(
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    x1: &Point,
    width: f64,
    mix: f64,
    smp: &mut Sampler,
) -> Result<(MarkedPoint, f64)> {
    let SpaceKind::UnitCube { dim } = space.kind else {
        return Ok((sample_marked_point(space, marks, smp), 1.0));
    };
    let c = x1.coords();
    let (mut lo, mut hi) = ([0.0; 5], [0.0; 5]);
    let mut vol = 1.0;
    for k in 0..dim {
        lo[k] = (c[k] - width).max(0.0);
        hi[k] = (c[k] + width).min(1.0);
        vol *= hi[k] - lo[k];
    }
    let y = if smp.uniform() < mix {
        sample_marked_point(space, marks, smp)
    } else {
        let mut v = [0.0; 5];
        for k in 0..dim {
            v[k] = lo[k] + (hi[k] - lo[k]) * smp.uniform();
        }
        MarkedPoint { point: Point::new(&v[..dim])?, mark: marks.sample(smp) }
    };
    let yc = y.point.coords();
    let in_box = (0..dim).all(|k| yc[k] >= lo[k] && yc[k] <= hi[k]);
    let density = mix + if in_box && vol > 0.0 { (1.0 - mix) / vol } else { 0.0 };
    Ok((y, 1.0 / density))
}

/// Nested Monte Carlo estimates of the `psi` integrals over `mc.outer` points
/// `x1 ~ Q`, each with `mc.pairs_per_outer` importance-sampled `x2`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_psi_integrals<E: Executor>(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    process: ProcessKind,
    marks: &MarkDistribution,
    s: f64,
    p: f64,
    mc: &McParams,
    stream: RandomStream,
    exec: &E,
) -> Result<PsiIntegrals> {
    mc.validate()?;
    let width = mc.local_scale * s.powf(-1.0 / space.gamma());
    let m2 = mc.pairs_per_outer;
    let rows = try_map(exec, mc.outer, |i| {
        let st = stream.derive(i as u64);
        let mut smp = st.derive(u64::MAX).sampler();
        let x1 = sample_marked_point(space, marks, &mut smp);
        let mut a = Vec::with_capacity(m2);
        let mut b = Vec::with_capacity(m2);
        for j in 0..m2 {
            let (x2, w) = propose(space, marks, &x1.point, width, mc.uniform_fraction, &mut smp)?;
            let psi = psi_value(f, space, process, marks, s, p, x1, x2, mc.inner, st.derive(j as u64))?;
            a.push(w * psi);
            b.push(w * psi * psi);
        }
        let sa = numeric::sum(a.iter().copied());
        let sa2 = numeric::sum(a.iter().map(|v| v * v));
        let u = (sa * sa - sa2) / (m2 * (m2 - 1)) as f64;
        Ok([sa / m2 as f64, numeric::mean(&b), u])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let inner_sq = estimate_of(&col(2), 1.0);
    Ok(PsiIntegrals {
        psi: estimate_of(&col(0), 1.0),
        psi_sq: estimate_of(&col(1), 1.0),
        psi_inner_sq: Estimate { value: inner_sq.value.max(0.0), se: inner_sq.se },
    })
}

/// Empirical mean and variance of `f` over `reps` samples.
#[allow(clippy::too_many_arguments)]
pub fn estimate_variance<E: Executor>(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    process: ProcessKind,
    marks: &MarkDistribution,
    s: f64,
    reps: usize,
    stream: RandomStream,
    exec: &E,
) -> Result<stats::Moments> {
    let vals = try_map(exec, reps, |r| {
        let mut smp = stream.derive(r as u64).sampler();
        f.total(&process.sample(space, s, marks, &mut smp)?)
    })?;
    stats::moments(&vals)
}

/// Sizes behind a [`SteinEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub outer: usize,
    pub pairs_per_outer: usize,
    pub inner: usize,
    pub variance_reps: usize,
    pub p: f64,
}

/// Assembled bound with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinEstimate {
    pub family: String,
    pub process: ProcessKind,
    pub size: f64,
    pub gamma_term: f64,
    pub gamma_term_se: f64,
    pub psi_integral: f64,
    pub psi_integral_se: f64,
    pub psi_sq_integral: f64,
    pub psi_sq_integral_se: f64,
    pub psi_inner_sq_integral: f64,
    pub psi_inner_sq_integral_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub i_ks: f64,
    /// `user_constant * (s1 + s2 + s3)`.
    pub bound: f64,
    /// Right-hand side in terms of `I_{K,s}` and the variance.
    pub intensity_bound: f64,
    pub inputs: BoundInputs,
    pub mc_params: McRecord,
}

/// `(S1, S2, S3)` for Poisson input:
/// `S1 = s sqrt(int psi^2)/V`, `S2 = s^(3/2) sqrt(int (int psi)^2)/V`,
/// `S3 = sqrt(G)/V + 2G/V^(3/2) + (G^(5/4) + 2G^(3/2))/V^2`.
pub fn poisson_terms(s: f64, gamma: f64, psi_sq: f64, psi_inner_sq: f64, variance: f64) -> Result<[f64; 3]> {
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let v = variance;
    let (g, a, b) = (gamma.max(0.0), psi_sq.max(0.0), psi_inner_sq.max(0.0));
    Ok([
        s * a.sqrt() / v,
        s.powf(1.5) * b.sqrt() / v,
        g.sqrt() / v + 2.0 * g / v.powf(1.5) + (g.powf(1.25) + 2.0 * g.powf(1.5)) / (v * v),
    ])
}

/// `(S1', S2', S3')` for binomial input:
/// `S1' = n sqrt(int psi')/V`, `S2' = n^(3/2) sqrt(int (int psi')^2)/V`,
/// `S3' = sqrt(G)/V + G/V^(3/2) + (G^(3/2) + G)/V^2`.
pub fn binomial_terms(n: f64, gamma: f64, psi: f64, psi_inner_sq: f64, variance: f64) -> Result<[f64; 3]> {
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let v = variance;
    let (g, a, b) = (gamma.max(0.0), psi.max(0.0), psi_inner_sq.max(0.0));
    Ok([
        n * a.sqrt() / v,
        n.powf(1.5) * b.sqrt() / v,
        g.sqrt() / v + g / v.powf(1.5) + (g.powf(1.5) + g) / (v * v),
    ])
}

/// Poisson bound `user_constant * (S1 + S2 + S3)` from an estimate's
/// ingredients and a variance.
pub fn assemble_poisson_bound(est: &SteinEstimate, variance: f64) -> Result<f64> {
    let t = poisson_terms(est.size, est.gamma_term, est.psi_sq_integral, est.psi_inner_sq_integral, variance)?;
    Ok(est.inputs.user_constant * (t[0] + t[1] + t[2]))
}

/// Binomial counterpart of [`assemble_poisson_bound`].
pub fn assemble_binomial_from(est: &SteinEstimate, variance: f64) -> Result<f64> {
    let t = binomial_terms(est.size, est.gamma_term, est.psi_integral, est.psi_inner_sq_integral, variance)?;
    Ok(est.inputs.user_constant * (t[0] + t[1] + t[2]))
}

/// Estimates every ingredient for `f` at size `s` and assembles the bound.
/// The variance is estimated from `variance_reps` samples unless given.
#[allow(clippy::too_many_arguments)]
pub fn estimate_stein<E: Executor>(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    process: ProcessKind,
    marks: &MarkDistribution,
    s: f64,
    inputs: &BoundInputs,
    mc: &McParams,
    variance: Option<f64>,
    variance_reps: usize,
    stream: RandomStream,
    exec: &E,
) -> Result<SteinEstimate> {
    inputs.validate()?;
    mc.validate()?;
    let gamma = estimate_gamma(f, space, process, marks, s, inputs.p, mc, stream.derive(0), exec)?;
    let psi = estimate_psi_integrals(f, space, process, marks, s, inputs.p, mc, stream.derive(1), exec)?;
    let (var, var_se) = match variance {
        Some(v) => (v, 0.0),
        None => {
            let m = estimate_variance(f, space, process, marks, s, variance_reps, stream.derive(2), exec)?;
            (m.variance, m.variance_se)
        }
    };
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let terms = match process {
        ProcessKind::Poisson => poisson_terms(s, gamma.value, psi.psi_sq.value, psi.psi_inner_sq.value, var)?,
        ProcessKind::Binomial => binomial_terms(s, gamma.value, psi.psi.value, psi.psi_inner_sq.value, var)?,
    };
    let i = i_ks(space, inputs, s)?;
    Ok(SteinEstimate {
        family: f.id().to_string(),
        process,
        size: s,
        gamma_term: gamma.value,
        gamma_term_se: gamma.se,
        psi_integral: psi.psi.value,
        psi_integral_se: psi.psi.se,
        psi_sq_integral: psi.psi_sq.value,
        psi_sq_integral_se: psi.psi_sq.se,
        psi_inner_sq_integral: psi.psi_inner_sq.value,
        psi_inner_sq_integral_se: psi.psi_inner_sq.se,
        variance: var,
        variance_se: var_se,
        s1: terms[0],
        s2: terms[1],
        s3: terms[2],
        i_ks: i,
        bound: inputs.user_constant * (terms[0] + terms[1] + terms[2]),
        intensity_bound: intensity_bound(i, var, inputs.user_constant, process.into())?,
        inputs: *inputs,
        mc_params: McRecord {
            outer: mc.outer,
            pairs_per_outer: mc.pairs_per_outer,
            inner: mc.inner,
            variance_reps: if variance.is_some() { 0 } else { variance_reps },
            p: inputs.p,
        },
    })
}

/// Binomial bound for `n` i.i.d. points with every ingredient estimated.
#[allow(clippy::too_many_arguments)]
pub fn assemble_binomial_bound<E: Executor>(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    n: usize,
    inputs: &BoundInputs,
    mc: &McParams,
    variance_reps: usize,
    stream: RandomStream,
    exec: &E,
) -> Result<SteinEstimate> {
    if n < 3 {
        return Err(invalid("n must be at least 3"));
    }
    estimate_stein(f, space, ProcessKind::Binomial, marks, n as f64, inputs, mc, None, variance_reps, stream, exec)
}

/// Outcome of [`efron_stein_4th_check`] for the standardized functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfronSteinReport {
    pub family: String,
    pub n: usize,
    pub reps: usize,
    /// `E (F - E F)^4` after scaling to unit variance.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `(32 n int sqrt(E (D_x F)^4) Q(dx))^2`.
    pub add_one_term: f64,
    /// `4 n E (D_1 F)^4 + 1` with `D_1` the resampling difference.
    pub resample_term: f64,
    /// `9 max(add_one_term, resample_term)`.
    pub rhs: f64,
    pub rhs_se: f64,
    pub pass: bool,
}

/// Monte Carlo check of
/// `E (F - E F)^4 <= 9 max((32 n int sqrt(E (D_x F(X_{n-1}))^4) dQ)^2, 4 n E (D_1 F)^4 + 1)`
/// for `F = f(X_n)` rescaled to unit empirical variance. Replicate `r`
/// resamples a random point of `X_n` at one of `ceil(sqrt(reps))` fixed
/// locations `x ~ Q`, so the add-one moments are estimated per location.
pub fn efron_stein_4th_check<E: Executor>(
    f: &dyn ScoreFunctional,
    space: &SpaceDescriptor,
    marks: &MarkDistribution,
    n: usize,
    reps: usize,
    stream: RandomStream,
    exec: &E,
) -> Result<EfronSteinReport> {
    if n < 2 || reps < 4 {
        return Err(invalid("need n >= 2 and reps >= 4"));
    }
    let groups = (reps as f64).sqrt().ceil() as usize;
    let mut csmp = stream.derive(u64::MAX).sampler();
    let centers: Vec<MarkedPoint> = (0..groups).map(|_| sample_marked_point(space, marks, &mut csmp)).collect();
    // (f(X_n), f(X_n^1), f(X_{n-1})) with X_n^1 = X_{n-1} ∪ {x}.
    let rows = try_map(exec, reps, |r| {
        let mut smp = stream.derive(r as u64).sampler();
        let xn = sample_binomial(space, n, marks, &mut smp)?;
        let drop = smp.below(n);
        let rest = xn.remove(drop);
        let replaced = rest.insert(&[centers[r % groups]])?;
        Ok([f.total(&xn)?, f.total(&replaced)?, f.total(&rest)?])
    })?;
    let fx: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let m = stats::moments(&fx)?;
    if !(m.variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let sd = m.variance.sqrt();
    let nf = n as f64;
    let centred4: Vec<f64> = fx.iter().map(|v| ((v - m.mean) / sd).powi(4)).collect();
    let lhs = estimate_of(&centred4, 1.0);
    let d1_4: Vec<f64> = rows.iter().map(|r| ((r[0] - r[1]) / sd).powi(4)).collect();
    let resample = estimate_of(&d1_4, 4.0 * nf);
    let per_group: Vec<f64> = (0..groups)
        .filter_map(|g| {
            let v: Vec<f64> = rows.iter().skip(g).step_by(groups).map(|r| ((r[1] - r[2]) / sd).powi(4)).collect();
            (!v.is_empty()).then(|| numeric::mean(&v).sqrt())
        })
        .collect();
    let integral = estimate_of(&per_group, 32.0 * nf);
    let add_one = integral.value * integral.value;
    let add_one_se = 2.0 * integral.value * integral.se;
    let resample_term = resample.value + 1.0;
    let (rhs, rhs_se) =
        if add_one >= resample_term { (9.0 * add_one, 9.0 * add_one_se) } else { (9.0 * resample_term, 9.0 * resample.se) };
    let pass = lhs.value <= rhs + 3.0 * lhs.se.hypot(rhs_se);
    Ok(EfronSteinReport {
        family: f.id().to_string(),
        n,
        reps,
        lhs: lhs.value,
        lhs_se: lhs.se,
        add_one_term: add_one,
        resample_term,
        rhs,
        rhs_se,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::functionals::{Cardinality, FunctionalSpec};
    use alloc::vec;

    #[test]
    fn i_ks_full_space_and_flat_weight() {
        let inp = BoundInputs::default();
        assert_eq!(i_ks(&SpaceDescriptor::unit_cube(2), &inp, 500.0).unwrap(), 500.0);
        let sq = SpaceDescriptor::unit_cube(2).with_k(KSpec::BoundaryOfBody);
        let flat = BoundInputs { c_combined: 0.0, ..inp };
        assert_eq!(i_ks(&sq, &flat, 321.0).unwrap(), 321.0);
        assert!(i_ks(&sq, &inp, 0.5).is_err());
    }

    #[test]
    fn i_ks_square_boundary_closed_form() {
        // s * int_0^{1/2} e^{-a t} 4 (1 - 2t) dt with a = coeff * sqrt(s).
        let inp = BoundInputs { c_combined: 576.0, ..Default::default() };
        let sq = SpaceDescriptor::unit_cube(2).with_k(KSpec::BoundaryOfBody);
        for s in [4.0, 100.0, 1e4] {
            let a = 576.0 / (36.0 * 16.0) * f64::sqrt(s);
            let exact = s * (4.0 / a - 8.0 / (a * a) + 8.0 / (a * a) * (-a / 2.0).exp());
            let got = i_ks(&sq, &inp, s).unwrap();
            assert!((got - exact).abs() <= 1e-6 * exact, "{s}: {got} vs {exact}");
        }
    }

    #[test]
    fn i_ks_disk_in_square_matches_monte_carlo() {
        let body = Body::Disk { center: [0.5, 0.5], radius: 0.25 };
        let space = SpaceDescriptor::unit_cube(2).with_k(KSpec::BoundaryOf { body: body.clone() });
        let inp = BoundInputs { c_combined: 2000.0, ..Default::default() };
        let s = 400.0;
        let got = i_ks(&space, &inp, s).unwrap();
        let a = 2000.0 / 576.0 * 20.0;
        let mut smp = RandomStream::new(9).sampler();
        let n = 400_000;
        let mc: f64 = (0..n)
            .map(|_| {
                let p = [smp.uniform(), smp.uniform()];
                (-a * body.distance_to_boundary(p)).exp()
            })
            .sum::<f64>()
            / n as f64
            * s;
        assert!((got - mc).abs() < 0.02 * got, "{got} vs {mc}");
    }

    #[test]
    fn intensity_bound_examples() {
        let v = intensity_bound(100.0, 100.0, 1.0, BoundKind::Poisson).unwrap();
        assert!((v - (0.1 + 0.1 + (100f64.powf(1.25) + 1000.0) / 1e4)).abs() < 1e-12);
        assert!((v - 0.33162).abs() < 1e-5);
        assert_eq!(intensity_bound(0.0, 5.0, 1.0, BoundKind::Poisson).unwrap(), 0.0);
        assert!(intensity_bound(1.0, 0.0, 1.0, BoundKind::Poisson).is_err());
        let b = intensity_bound(100.0, 100.0, 1.0, BoundKind::Binomial).unwrap();
        assert!((b - (0.1 + 0.1 + 1100.0 / 1e4)).abs() < 1e-12);
    }

    #[test]
    fn s3_example() {
        let t = poisson_terms(100.0, 100.0, 0.0, 0.0, 100.0).unwrap();
        assert_eq!(t[0] + t[1], 0.0);
        assert!((t[2] - 0.531623).abs() < 1e-6, "{}", t[2]);
        assert_eq!(poisson_terms(100.0, 0.0, 0.0, 0.0, 3.0).unwrap(), [0.0; 3]);
        assert!(poisson_terms(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    fn small_mc() -> McParams {
        McParams { outer: 100, inner: 100, pairs_per_outer: 2, ..Default::default() }
    }

    #[test]
    fn cardinality_gamma_and_psi() {
        let space = SpaceDescriptor::unit_cube(2);
        let f = Cardinality { window: None, gamma: 2.0 };
        let marks = MarkDistribution::default();
        let g = estimate_gamma(&f, &space, ProcessKind::Poisson, &marks, 50.0, 1.0, &small_mc(), RandomStream::new(1), &Sequential)
            .unwrap();
        assert_eq!(g, Estimate { value: 50.0, se: 0.0 });
        let gb = estimate_gamma(&f, &space, ProcessKind::Binomial, &marks, 100.0, 1.0, &small_mc(), RandomStream::new(1), &Sequential)
            .unwrap();
        assert_eq!(gb.value, 100.0);
        let psi = estimate_psi_integrals(&f, &space, ProcessKind::Poisson, &marks, 50.0, 1.0, &small_mc(), RandomStream::new(2), &Sequential)
            .unwrap();
        assert_eq!((psi.psi.value, psi.psi_sq.value, psi.psi_inner_sq.value), (0.0, 0.0, 0.0));
    }

    #[test]
    fn knn_total_gamma_is_s() {
        let space = SpaceDescriptor::unit_cube(2);
        let f = FunctionalSpec::named("knn").build(&space, 200.0).unwrap();
        let g = estimate_gamma(
            f.as_ref(),
            &space,
            ProcessKind::Poisson,
            &MarkDistribution::default(),
            200.0,
            1.0,
            &small_mc(),
            RandomStream::new(3),
            &Sequential,
        )
        .unwrap();
        assert!((g.value - 200.0).abs() <= 2.0 * g.se + 1e-9, "{g:?}");
    }

    #[test]
    fn knn_psi_decreases_with_distance() {
        let space = SpaceDescriptor::unit_cube(2);
        let f = FunctionalSpec::named("knn").build(&space, 200.0).unwrap();
        let marks = MarkDistribution::default();
        let profile: Vec<f64> = [0.01, 0.05, 0.1, 0.2, 0.35]
            .iter()
            .map(|&d| {
                let mut acc = 0.0;
                for k in 0..6 {
                    let x1 = MarkedPoint::unmarked(Point::xy(0.3, 0.3 + 0.05 * k as f64));
                    let x2 = MarkedPoint::unmarked(Point::xy(0.3 + d, 0.3 + 0.05 * k as f64));
                    acc += psi_value(f.as_ref(), &space, ProcessKind::Poisson, &marks, 200.0, 1.0, x1, x2, 100, RandomStream::new(k))
                        .unwrap();
                }
                acc / 6.0
            })
            .collect();
        assert!(profile.windows(2).all(|w| w[1] <= w[0] + 0.02), "{profile:?}");
        assert!(profile[0] > 0.5 && profile[4] < 0.1, "{profile:?}");
    }

    #[test]
    fn gamma_se_shrinks_with_outer_reps() {
        let space = SpaceDescriptor::simplex(2);
        let f = FunctionalSpec::named("maxpts").build(&space, 100.0).unwrap();
        let marks = MarkDistribution::default();
        let se = |outer: usize| {
            let mc = McParams { outer, inner: 100, ..Default::default() };
            estimate_gamma(f.as_ref(), &space, ProcessKind::Poisson, &marks, 100.0, 1.0, &mc, RandomStream::new(5), &Sequential)
                .unwrap()
                .se
        };
        let ratio = se(400) / se(800);
        assert!((1.2..=1.7).contains(&ratio), "{ratio}");
    }

    #[test]
    fn efron_stein_for_half_count() {
        let space = SpaceDescriptor::unit_cube(2);
        let f = Cardinality { window: Some(0.5), gamma: 2.0 };
        let rep = efron_stein_4th_check(&f, &space, &MarkDistribution::default(), 100, 4000, RandomStream::new(6), &Sequential)
            .unwrap();
        assert!(rep.pass, "{rep:?}");
        // Binomial(n, 1/2) kurtosis is 3 - 2/n.
        assert!((rep.lhs - (3.0 - 2.0 / 100.0)).abs() < 0.25, "{rep:?}");
        let full = Cardinality { window: None, gamma: 2.0 };
        assert!(matches!(
            efron_stein_4th_check(&full, &space, &MarkDistribution::default(), 10, 10, RandomStream::new(6), &Sequential),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn assembly_monotone_in_variance() {
        let est = SteinEstimate {
            family: "x".into(),
            process: ProcessKind::Poisson,
            size: 100.0,
            gamma_term: 100.0,
            gamma_term_se: 0.0,
            psi_integral: 0.02,
            psi_integral_se: 0.0,
            psi_sq_integral: 0.01,
            psi_sq_integral_se: 0.0,
            psi_inner_sq_integral: 1e-4,
            psi_inner_sq_integral_se: 0.0,
            variance: 1.0,
            variance_se: 0.0,
            s1: 0.0,
            s2: 0.0,
            s3: 0.0,
            i_ks: 100.0,
            bound: 0.0,
            intensity_bound: 0.0,
            inputs: BoundInputs::default(),
            mc_params: McRecord { outer: 1, pairs_per_outer: 2, inner: 1, variance_reps: 0, p: 1.0 },
        };
        let vals: Vec<f64> = vec![10.0, 50.0, 100.0, 500.0].into_iter().map(|v| assemble_poisson_bound(&est, v).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        let b: Vec<f64> = [10.0, 100.0].iter().map(|v| assemble_binomial_from(&est, *v).unwrap()).collect();
        assert!(b[1] <= b[0]);
    }
}
