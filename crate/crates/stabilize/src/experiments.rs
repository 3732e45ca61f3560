//! Replicated evaluation of a statistic along a size grid.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use stabilize_core::processes::ProcessKind;
use stabilize_core::stats::{self, RateFit};
use stabilize_core::exec::try_map;
use stabilize_core::{Executor, FunctionalSpec, MarkDistribution, RandomStream, SpaceDescriptor};

use crate::error::{Error, Result};

/// What to replicate and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub functional: FunctionalSpec,
    pub process: ProcessKind,
    pub space: SpaceDescriptor,
    #[serde(default)]
    pub marks: MarkDistribution,
    /// Intensities (Poisson) or sample sizes (binomial), strictly increasing.
    pub sizes: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    /// Record wall-clock time per size (makes reports non-reproducible).
    #[serde(default)]
    pub timings: bool,
    /// Confidence level parameter of the DKW noise floor.
    #[serde(default = "default_delta")]
    pub dkw_delta: f64,
}

fn default_delta() -> f64 {
    0.05
}

impl ExperimentSpec {
    pub fn new(functional: FunctionalSpec, process: ProcessKind, space: SpaceDescriptor, sizes: Vec<f64>, replications: usize, seed: u64) -> Self {
        Self {
            functional,
            process,
            space,
            marks: MarkDistribution::default(),
            sizes,
            replications,
            seed,
            timings: false,
            dkw_delta: default_delta(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        self.marks.validate()?;
        if self.replications < 2 {
            return Err(Error::Config("at least two replications".into()));
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("sizes must be nonempty and strictly increasing".into()));
        }
        if self.sizes.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Config("sizes must be positive".into()));
        }
        if self.process == ProcessKind::Binomial && self.sizes.iter().any(|s| s.fract() != 0.0) {
            return Err(Error::Config("binomial sizes must be integers".into()));
        }
        if !(self.dkw_delta > 0.0 && self.dkw_delta < 1.0) {
            return Err(Error::Config("dkw_delta must lie in (0, 1)".into()));
        }
        self.functional.build(&self.space, self.sizes[0])?;
        Ok(())
    }
}

/// Summary of the replicates at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub size: f64,
    pub replications: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub fourth_central: f64,
    /// Kolmogorov distance of the standardized sample to `N(0, 1)`.
    pub dk_emp: f64,
    /// Wasserstein distance of the standardized sample to `N(0, 1)`.
    pub dw_emp: f64,
    /// DKW noise floor of `dk_emp`.
    pub dkw_floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
}

/// Rows plus log-log fits of variance, mean and `d_K` against size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<SummaryRow>,
    pub var_slope: Option<RateFit>,
    pub mean_slope: Option<RateFit>,
    /// Fit over sizes whose `d_K` exceeds twice the noise floor.
    pub dk_slope: Option<RateFit>,
    pub dk_sizes_used: usize,
    /// `d_K` decreases along the grid with at most one inversion.
    pub dk_monotone: bool,
    /// Variance at the largest size is positive.
    pub variance_positive: bool,
}

/// Values of the statistic for each replicate at grid position `index`.
pub fn replicate<E: Executor>(spec: &ExperimentSpec, index: usize, exec: &E) -> Result<Vec<f64>> {
    let size = spec.sizes[index];
    let f = spec.functional.build(&spec.space, size)?;
    let base = RandomStream::new(spec.seed).derive(index as u64);
    Ok(try_map(exec, spec.replications, |r| {
        let mut smp = base.derive(r as u64).sampler();
        let c = spec.process.sample(&spec.space, size, &spec.marks, &mut smp)?;
        f.total(&c)
    })?)
}

/// Summarizes a sample of the statistic at one size.
pub fn summarize(size: f64, values: &[f64], delta: f64) -> Result<SummaryRow> {
    let m = stats::moments(values)?;
    if !(m.variance > 0.0) {
        return Err(stabilize_core::Error::ZeroVariance.into());
    }
    Ok(SummaryRow {
        size,
        replications: values.len(),
        mean: m.mean,
        mean_se: m.mean_se,
        variance: m.variance,
        variance_se: m.variance_se,
        fourth_central: m.fourth_central,
        dk_emp: stats::kolmogorov_distance(values)?,
        dw_emp: stats::wasserstein_distance(values)?,
        dkw_floor: stats::dkw_floor(values.len(), delta),
        runtime_secs: None,
    })
}

/// Runs every size of the grid and fits the rates.
pub fn run_experiment<E: Executor>(spec: &ExperimentSpec, exec: &E) -> Result<RateReport> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.sizes.len());
    for (i, &size) in spec.sizes.iter().enumerate() {
        let start = Instant::now();
        let values = replicate(spec, i, exec)?;
        let mut row = summarize(size, &values, spec.dkw_delta)?;
        if spec.timings {
            row.runtime_secs = Some(start.elapsed().as_secs_f64());
        }
        rows.push(row);
    }
    Ok(report_from_rows(spec.clone(), rows))
}

/// Fits the rates of already computed rows.
pub fn report_from_rows(spec: ExperimentSpec, rows: Vec<SummaryRow>) -> RateReport {
    let sizes: Vec<f64> = rows.iter().map(|r| r.size).collect();
    let col = |f: fn(&SummaryRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let var_slope = stats::rate_fit(&sizes, &col(|r| r.variance)).ok();
    let mean_slope = if rows.iter().all(|r| r.mean > 0.0) { stats::rate_fit(&sizes, &col(|r| r.mean)).ok() } else { None };
    let (dk_x, dk_y): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.dk_emp >= 2.0 * r.dkw_floor).map(|r| (r.size, r.dk_emp)).unzip();
    let dk_slope = stats::rate_fit(&dk_x, &dk_y).ok();
    let inversions = rows.windows(2).filter(|w| w[1].dk_emp > w[0].dk_emp).count();
    RateReport {
        spec,
        var_slope,
        mean_slope,
        dk_sizes_used: dk_x.len(),
        dk_slope,
        dk_monotone: inversions <= 1,
        variance_positive: rows.last().is_some_and(|r| r.variance > 0.0),
        rows,
    }
}

/// Powers of two `2^lo ..= 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| f64::from(1u32 << k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabilize_core::Sequential;

    #[test]
    fn cardinality_matches_poisson_moments() {
        let spec = ExperimentSpec::new(
            FunctionalSpec::named("cardinality"),
            ProcessKind::Poisson,
            SpaceDescriptor::unit_cube(2),
            vec![20.0, 80.0],
            4000,
            1,
        );
        let rep = run_experiment(&spec, &Sequential).unwrap();
        for row in &rep.rows {
            assert!((row.mean - row.size).abs() < 4.0 * row.mean_se);
            assert!((row.variance - row.size).abs() < 4.0 * row.variance_se);
        }
        assert!((rep.var_slope.unwrap().slope - 1.0).abs() < 0.1);
        assert!(rep.variance_positive);
    }

    #[test]
    fn invalid_grids_rejected() {
        let mut spec = ExperimentSpec::new(
            FunctionalSpec::named("knn"),
            ProcessKind::Binomial,
            SpaceDescriptor::unit_cube(2),
            vec![20.0, 10.0],
            10,
            1,
        );
        assert!(spec.validate().is_err());
        spec.sizes = vec![10.0, 20.5];
        assert!(spec.validate().is_err());
        spec.sizes = vec![10.0, 20.0];
        spec.replications = 1;
        assert!(spec.validate().is_err());
        spec.replications = 2;
        spec.space = SpaceDescriptor::unit_cube(3);
        spec.functional = FunctionalSpec::named("voronoi-vol");
        assert!(spec.validate().is_err());
    }

    #[test]
    fn powers() {
        assert_eq!(powers_of_two(2, 4), vec![4.0, 8.0, 16.0]);
    }
}
