//! Built-in self-check suites run by `stabilize check` and the acceptance
//! tests.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use stabilize_core::functionals::FAMILY_IDS;
use stabilize_core::processes::{sample_binomial, sample_marked_point};
use stabilize_core::stabilization::{diff2, score_sum_identity_check, vanishing_check};
use stabilize_core::stein::efron_stein_4th_check;
use stabilize_core::{numeric, stats, Executor, FunctionalSpec, MarkDistribution, RandomStream, SpaceDescriptor};

use crate::error::Result;

/// A named group of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// First- and second-order score-sum identities for every family.
    Identities,
    /// Vanishing beyond the radius of stabilization; symmetry and
    /// inclusion-exclusion of the second difference.
    Stabilization,
    /// Fourth-moment inequality for standardized binomial functionals.
    EfronStein,
    /// Growth bound `Q(B(x, r)) <= kappa r^gamma` on every space.
    Growth,
    /// Normal CDF accuracy and distance estimators on normal samples.
    Calibration,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Identities, Suite::Stabilization, Suite::EfronStein, Suite::Growth, Suite::Calibration];
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub details: Value,
}

/// Space on which a family is exercised by default.
pub fn natural_space(family: &str) -> SpaceDescriptor {
    match family {
        "maxpts" => SpaceDescriptor::simplex(2),
        f if f.starts_with("hull") => SpaceDescriptor::dmax_disk(),
        _ => SpaceDescriptor::unit_cube(2),
    }
}

/// Mark law used with a family by default.
pub fn natural_marks(family: &str) -> MarkDistribution {
    match family {
        "cliques" => MarkDistribution::HalfNormal { sigma: 1.0 },
        _ => MarkDistribution::default(),
    }
}

/// Runs a suite; `quick` shrinks the Monte Carlo sizes.
pub fn run_suite<E: Executor>(suite: Suite, seed: u64, quick: bool, exec: &E) -> Result<SuiteReport> {
    let stream = RandomStream::new(seed).derive(suite as u64);
    let (pass, details) = match suite {
        Suite::Identities => identities(stream, if quick { 20 } else { 200 })?,
        Suite::Stabilization => stabilization(stream, if quick { 50 } else { 500 })?,
        Suite::EfronStein => {
            let (n, reps) = if quick { (50, 400) } else { (200, 10_000) };
            efron_stein(stream, n, reps, exec)?
        }
        Suite::Growth => growth(stream, if quick { 20_000 } else { 200_000 })?,
        Suite::Calibration => calibration(stream, if quick { 20_000 } else { 100_000 })?,
    };
    Ok(SuiteReport { suite, pass, details })
}

/// Smallest base configuration on which every score is defined; k-NN
/// scores need `k + 1 = 2` points.
fn min_points(id: &str) -> usize {
    if id.starts_with("knn") {
        2
    } else {
        1
    }
}

fn identities(stream: RandomStream, trials: usize) -> Result<(bool, Value)> {
    let mut all = true;
    let mut out = Vec::new();
    for (k, id) in FAMILY_IDS.iter().enumerate() {
        let space = natural_space(id);
        let f = FunctionalSpec::named(id).build(&space, 30.0)?;
        let rep = score_sum_identity_check(f.as_ref(), &space, &natural_marks(id), trials, min_points(id), 30, 1e-9, stream.derive(k as u64))?;
        all &= rep.pass;
        out.push(serde_json::to_value(rep)?);
    }
    Ok((all, json!({ "families": out })))
}

fn stabilization(stream: RandomStream, trials: usize) -> Result<(bool, Value)> {
    let mut all = true;
    let mut out = Vec::new();
    for (k, id) in ["knn", "cliques"].iter().enumerate() {
        let space = natural_space(id);
        let marks = natural_marks(id);
        let f = FunctionalSpec::named(id).build(&space, 50.0)?;
        let rep = vanishing_check(f.as_ref(), &space, &marks, trials, 50, 7, stream.derive(k as u64))?;
        all &= rep.pass;
        out.push(serde_json::to_value(rep)?);
    }
    // Symmetry (exact) and inclusion-exclusion of D^2 for every family.
    let mut algebra = Vec::new();
    for (k, id) in FAMILY_IDS.iter().enumerate() {
        let space = natural_space(id);
        let marks = natural_marks(id);
        let f = FunctionalSpec::named(id).build(&space, 30.0)?;
        let total = |c: &stabilize_core::Configuration| f.total(c);
        let (mut asym, mut ie) = (0.0f64, 0.0f64);
        for t in 0..trials {
            let mut s = stream.derive(100 + k as u64).derive(t as u64).sampler();
            let n = min_points(id) + s.below(31 - min_points(id));
            let m = sample_binomial(&space, n, &marks, &mut s)?;
            let y1 = sample_marked_point(&space, &marks, &mut s);
            let y2 = sample_marked_point(&space, &marks, &mut s);
            let d12 = diff2(&total, &m, y1, y2)?;
            let d21 = diff2(&total, &m, y2, y1)?;
            let (f12, f1, f2, f0) = (total(&m.insert(&[y1, y2])?)?, total(&m.insert(&[y1])?)?, total(&m.insert(&[y2])?)?, total(&m)?);
            let nested = (f12 - f1) - (f2 - f0);
            asym = asym.max((d12 - d21).abs());
            ie = ie.max((d12 - nested).abs() / f12.abs().max(f0.abs()).max(1.0));
        }
        let ok = asym == 0.0 && ie <= 1e-12;
        all &= ok;
        algebra.push(json!({ "family": id, "max_asymmetry": asym, "max_inclusion_exclusion": ie, "pass": ok }));
    }
    Ok((all, json!({ "vanishing": out, "second_difference": algebra })))
}

fn efron_stein<E: Executor>(stream: RandomStream, n: usize, reps: usize, exec: &E) -> Result<(bool, Value)> {
    let mut all = true;
    let mut out = Vec::new();
    for (k, id) in ["knn", "maxpts", "cardinality-half"].iter().enumerate() {
        let space = natural_space(id);
        let f = FunctionalSpec::named(id).build(&space, n as f64)?;
        let rep = efron_stein_4th_check(f.as_ref(), &space, &natural_marks(id), n, reps, stream.derive(k as u64), exec)?;
        all &= rep.pass;
        out.push(serde_json::to_value(rep)?);
    }
    Ok((all, json!({ "families": out })))
}

fn growth(stream: RandomStream, mc: usize) -> Result<(bool, Value)> {
    let spaces = [
        ("cube2", SpaceDescriptor::unit_cube(2)),
        ("cube3", SpaceDescriptor::unit_cube(3)),
        ("disk", SpaceDescriptor::ball(1.0, &[0.0, 0.0])),
        ("simplex2", SpaceDescriptor::simplex(2)),
        ("circle", SpaceDescriptor::geodesic_sphere(1)),
        ("sphere", SpaceDescriptor::geodesic_sphere(2)),
        ("dmax-disk", SpaceDescriptor::dmax_disk()),
    ];
    let radii = [0.02, 0.05, 0.1, 0.2, 0.4];
    let mut all = true;
    let mut out = Vec::new();
    for (k, (name, space)) in spaces.iter().enumerate() {
        let rep = space.growth_check(&radii, 20, mc, stream.derive(k as u64))?;
        all &= !rep.violation;
        out.push(json!({ "space": name, "report": rep }));
    }
    Ok((all, json!({ "spaces": out })))
}

/// `Phi(z)` from the everywhere-convergent series
/// `1/2 + phi(z) (z + z^3/3 + z^5/(3*5) + ...)`, whose terms are all
/// positive for `z > 0`; used as an independent reference.
pub fn normal_cdf_series(z: f64) -> f64 {
    let a = z.abs();
    let mut term = a;
    let mut sum = a;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        k += 2.0;
        term *= a * a / k;
        sum += term;
    }
    let half_mass = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt() * sum;
    if z >= 0.0 {
        0.5 + half_mass
    } else {
        0.5 - half_mass
    }
}

fn calibration(stream: RandomStream, n: usize) -> Result<(bool, Value)> {
    let grid = 10_000;
    let mut max_err = 0.0f64;
    for i in 0..grid {
        let z = -8.0 + 16.0 * i as f64 / (grid - 1) as f64;
        max_err = max_err.max((stats::normal_cdf(z) - normal_cdf_series(z)).abs());
    }
    let mut s = stream.sampler();
    let draws: Vec<f64> = (0..n).map(|_| s.normal()).collect();
    let dk = stats::kolmogorov_distance_raw(&draws)?;
    let dw = stats::wasserstein_distance_raw(&draws)?;
    // Sampling tolerances are 0.01 at 10^5 draws and grow like n^(-1/2) below.
    let tol = 0.01 * (1e5 / n as f64).sqrt().max(1.0);
    let pass = max_err <= 1e-12 && dk <= tol && dw <= tol && (numeric::mean(&draws)).abs() <= 2.0 * tol;
    Ok((pass, json!({ "cdf_max_error": max_err, "cdf_grid": grid, "dk_normal": dk, "dw_normal": dw, "draws": n, "tolerance": tol })))
}
