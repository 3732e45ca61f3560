//! Command-line interface: argument parsing and the subcommands.
//!
//! Exit codes: 0 success (all predicates pass), 1 predicate failure,
//! 2 usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use stabilize_core::processes::ProcessKind;
use stabilize_core::stabilization::{decay_check, radius_tail_fit, HullRadius, TailReport};
use stabilize_core::stein::{estimate_stein, SteinEstimate};
use stabilize_core::{stats, Configuration, Executor, FunctionalSpec, KSpec, MarkDistribution, MarkedPoint, RandomStream, SpaceDescriptor};

use crate::config::{evaluate_all, resolve, CheckConfig, OutputSpec, PredicateOutcome, RatesConfig, SteinConfig, TailMode, TailsConfig};
use crate::error::{Error, Result};
use crate::exec::RayonExecutor;
use crate::experiments::run_experiment;
use crate::io;
use crate::plot;
use crate::suites::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(name = "stabilize", version, about = "Stabilizing functionals: sampling, statistics, rates, tails and normal-approximation bounds")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed of every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a configuration and write it as CSV.
    Sample(SampleArgs),
    /// Evaluate a functional on a sampled or loaded configuration.
    Stat(StatArgs),
    /// Replicate a functional along a size grid and fit rates.
    Rates(RatesArgs),
    /// Fit survival tails of stabilization radii or of score decay near K.
    Tails(TailsArgs),
    /// Estimate the ingredients of the normal-approximation bound.
    Stein(SteinArgs),
    /// Run built-in check suites.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KSet {
    Full,
    Boundary,
    LevelSet,
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// cube1, cube2 (square), cube3, disk, ball3, simplex2, simplex3, circle,
    /// sphere or dmax-disk.
    #[arg(long)]
    pub space: Option<String>,
    /// Decay set K (default: the space's own).
    #[arg(long, value_enum)]
    pub kset: Option<KSet>,
}

#[derive(Debug, Args)]
pub struct FnArgs {
    /// Functional identifier.
    #[arg(long = "fn")]
    pub family: Option<String>,
    /// Neighbour count (knn) or clique order minus one (cliques).
    #[arg(long)]
    pub k: Option<usize>,
    /// Power of the edge lengths (knn).
    #[arg(long)]
    pub q: Option<f64>,
    /// Connection radius multiplier (cliques).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Fixed scale parameter (hull, cliques).
    #[arg(long)]
    pub scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MarksArgs {
    /// Mark law as JSON, e.g. '{"type":"half_normal","sigma":1}'.
    #[arg(long)]
    pub marks: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub marks: MarksArgs,
    /// Poisson process of this intensity.
    #[arg(long, conflicts_with = "binomial", required_unless_present = "binomial")]
    pub poisson: Option<f64>,
    /// This many i.i.d. points.
    #[arg(long)]
    pub binomial: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatArgs {
    #[command(flatten)]
    pub func: FnArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub marks: MarksArgs,
    /// Configuration CSV to evaluate.
    #[arg(long)]
    pub load: Option<PathBuf>,
    /// Sample a Poisson configuration of this intensity instead.
    #[arg(long, conflicts_with_all = ["binomial", "load"])]
    pub poisson: Option<f64>,
    /// Sample this many i.i.d. points instead.
    #[arg(long, conflicts_with = "load")]
    pub binomial: Option<usize>,
    /// Print every score, one per line, before the total.
    #[arg(long)]
    pub scores: bool,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// JSON run configuration (overrides flags).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output file stem.
    #[arg(long)]
    pub stem: Option<String>,
    /// Also write an SVG plot.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub func: FnArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub marks: MarksArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Process kind.
    #[arg(long, value_enum)]
    pub process: Option<ProcessArg>,
    /// Comma-separated size grid.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<f64>,
    /// Replications per size.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Record runtimes (reports are then not byte-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    Poisson,
    Binomial,
}

impl From<ProcessArg> for ProcessKind {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::Poisson => ProcessKind::Poisson,
            ProcessArg::Binomial => ProcessKind::Binomial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Radius,
    Decay,
}

#[derive(Debug, Args)]
pub struct TailsArgs {
    #[command(flatten)]
    pub func: FnArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub marks: MarksArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub process: Option<ProcessArg>,
    /// Comma-separated intensities.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<f64>,
    /// Replicates per intensity (radius) or per centre and intensity (decay).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Minimum number of events for a survival point to be fitted.
    #[arg(long)]
    pub min_events: Option<usize>,
    /// Centres as `x,y;x,y;...`.
    #[arg(long)]
    pub centers: Option<String>,
    /// Extra random points (decay mode).
    #[arg(long)]
    pub extras: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SteinArgs {
    #[command(flatten)]
    pub func: FnArgs,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub marks: MarksArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, value_enum)]
    pub process: Option<ProcessArg>,
    /// Single intensity or sample size.
    #[arg(long, conflicts_with = "sizes")]
    pub s: Option<f64>,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<f64>,
    /// Moment exponent in (0, 1].
    #[arg(long)]
    pub p: Option<f64>,
    /// Combined decay constant of the stabilization and K-decay tails.
    #[arg(long)]
    pub c_combined: Option<f64>,
    /// Combined tail exponent of the stabilization and K-decay tails.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Multiplier standing in for the non-explicit constant of the bound.
    #[arg(long)]
    pub user_constant: Option<f64>,
    /// Outer Monte Carlo points.
    #[arg(long)]
    pub outer: Option<usize>,
    /// Inner process replicates per probability.
    #[arg(long)]
    pub inner: Option<usize>,
    /// Second points per outer point.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Replicates of the variance estimate.
    #[arg(long)]
    pub variance_reps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Suites to run (default: all).
    #[arg(long, value_enum)]
    pub suite: Vec<Suite>,
    /// Smaller Monte Carlo sizes.
    #[arg(long)]
    pub quick: bool,
}

/// Space by short name.
pub fn space_by_name(name: &str) -> Result<SpaceDescriptor> {
    Ok(match name {
        "cube1" => SpaceDescriptor::unit_cube(1),
        "cube2" | "square" => SpaceDescriptor::unit_cube(2),
        "cube3" => SpaceDescriptor::unit_cube(3),
        "disk" => SpaceDescriptor::ball(1.0, &[0.0, 0.0]),
        "ball3" => SpaceDescriptor::ball(1.0, &[0.0, 0.0, 0.0]),
        "simplex2" => SpaceDescriptor::simplex(2),
        "simplex3" => SpaceDescriptor::simplex(3),
        "circle" => SpaceDescriptor::geodesic_sphere(1),
        "sphere" => SpaceDescriptor::geodesic_sphere(2),
        "dmax-disk" => SpaceDescriptor::dmax_disk(),
        other => return Err(Error::Config(format!("unknown space `{other}`"))),
    })
}

impl SpaceArgs {
    fn resolve(&self) -> Result<Option<SpaceDescriptor>> {
        let Some(name) = &self.space else { return Ok(None) };
        let mut space = space_by_name(name)?;
        if let Some(k) = self.kset {
            space = space.with_k(match k {
                KSet::Full => KSpec::FullSpace,
                KSet::Boundary => KSpec::BoundaryOfBody,
                KSet::LevelSet => KSpec::LevelSetF,
            });
        }
        space.validate()?;
        Ok(Some(space))
    }
}

impl FnArgs {
    fn resolve(&self) -> Option<FunctionalSpec> {
        self.family.as_ref().map(|id| FunctionalSpec {
            k: self.k,
            q: self.q,
            beta: self.beta,
            scale: self.scale,
            ..FunctionalSpec::named(id)
        })
    }
}

impl MarksArgs {
    fn resolve(&self) -> Result<MarkDistribution> {
        let m = match &self.marks {
            Some(text) => serde_json::from_str::<MarkDistribution>(text).map_err(|e| Error::Config(format!("--marks: {e}")))?,
            None => MarkDistribution::default(),
        };
        m.validate()?;
        Ok(m)
    }

    fn value(&self) -> Result<Option<Value>> {
        Ok(match &self.marks {
            Some(_) => Some(serde_json::to_value(self.resolve()?)?),
            None => None,
        })
    }
}

/// Inserts `value` under `key` if present.
fn put<T: Serialize>(map: &mut Map<String, Value>, key: &str, value: Option<T>) -> Result<()> {
    if let Some(v) = value {
        map.insert(key.into(), serde_json::to_value(v)?);
    }
    Ok(())
}

fn output_value(out: &OutArgs, default_stem: &str) -> Value {
    json!({
        "dir": out.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        "stem": out.stem.clone().unwrap_or_else(|| default_stem.into()),
        "svg": out.svg,
    })
}

fn parse_centers(text: &str) -> Result<Vec<Value>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|p| {
            let coords = p
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Config(format!("--centers: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            Ok(json!(coords))
        })
        .collect()
}

/// Report document: resolved configuration, payload and predicate outcomes.
#[derive(Debug, Serialize)]
struct Document<'a, C: Serialize, R: Serialize> {
    config: &'a C,
    report: &'a R,
    predicates: Vec<PredicateOutcome>,
    pass: bool,
}

fn finish<C: Serialize, R: Serialize>(
    config: &C,
    report: &R,
    preds: &[crate::config::Predicate],
    own_pass: bool,
    output: &OutputSpec,
    csv: Option<String>,
    svg: Option<String>,
) -> Result<bool> {
    let value = serde_json::to_value(report)?;
    let predicates = evaluate_all(preds, &value);
    let pass = own_pass && predicates.iter().all(|p| p.pass);
    let doc = Document { config, report, predicates, pass };
    let path = output.path("json");
    io::write_text(&path, &io::to_json(&doc)?)?;
    if let Some(text) = csv {
        io::write_text(&output.path("csv"), &text)?;
    }
    if let (true, Some(text)) = (output.svg, svg) {
        io::write_text(&output.path("svg"), &text)?;
    }
    println!("{}: {}", if pass { "PASS" } else { "FAIL" }, path.display());
    Ok(pass)
}

fn cmd_sample(cli: &Cli, a: &SampleArgs) -> Result<bool> {
    let space = a.space.resolve()?.ok_or_else(|| Error::Config("--space is required".into()))?;
    let marks = a.marks.resolve()?;
    let mut smp = RandomStream::new(cli.seed).sampler();
    let (process, size) = match (a.poisson, a.binomial) {
        (Some(s), _) => (ProcessKind::Poisson, s),
        (None, Some(n)) => (ProcessKind::Binomial, n as f64),
        _ => return Err(Error::Config("one of --poisson or --binomial is required".into())),
    };
    let c = process.sample(&space, size, &marks, &mut smp)?;
    let echo = json!({ "space": space, "process": process, "size": size, "marks": marks, "seed": cli.seed });
    let text = io::configuration_csv(&c, Some(&echo))?;
    match &a.output {
        Some(path) => io::write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn cmd_stat(cli: &Cli, a: &StatArgs) -> Result<bool> {
    let spec = a.func.resolve().ok_or_else(|| Error::Config("--fn is required".into()))?;
    let (config, space): (Configuration, SpaceDescriptor) = match &a.load {
        Some(path) => {
            let c = io::read_configuration(path)?;
            let space = match a.space.resolve()? {
                Some(s) => s,
                None => default_space_for(&spec.id, c.dim().unwrap_or(2))?,
            };
            (c, space)
        }
        None => {
            let space = a.space.resolve()?.ok_or_else(|| Error::Config("--space or --load is required".into()))?;
            let marks = a.marks.resolve()?;
            let mut smp = RandomStream::new(cli.seed).sampler();
            let c = match (a.poisson, a.binomial) {
                (Some(s), _) => ProcessKind::Poisson.sample(&space, s, &marks, &mut smp)?,
                (None, Some(n)) => ProcessKind::Binomial.sample(&space, n as f64, &marks, &mut smp)?,
                _ => return Err(Error::Config("one of --load, --poisson or --binomial is required".into())),
            };
            (c, space)
        }
    };
    let f = spec.build(&space, config.len().max(1) as f64)?;
    if a.scores {
        for v in f.scores(&config)? {
            println!("{v}");
        }
    }
    println!("{}", f.total(&config)?);
    Ok(true)
}

/// Space assumed for a loaded configuration when none is given.
fn default_space_for(family: &str, dim: usize) -> Result<SpaceDescriptor> {
    Ok(match family {
        "maxpts" => SpaceDescriptor::simplex(dim),
        f if f.starts_with("hull") => SpaceDescriptor::dmax_disk(),
        _ => SpaceDescriptor::unit_cube(dim),
    })
}

fn cmd_rates<E: Executor>(cli: &Cli, a: &RatesArgs, exec: &E) -> Result<bool> {
    let mut exp = Map::new();
    put(&mut exp, "functional", a.func.resolve())?;
    put(&mut exp, "space", a.space.resolve()?)?;
    put(&mut exp, "marks", a.marks.value()?)?;
    put(&mut exp, "process", a.process.map(ProcessKind::from).or(Some(ProcessKind::Binomial)))?;
    put(&mut exp, "sizes", (!a.sizes.is_empty()).then(|| a.sizes.clone()))?;
    put(&mut exp, "replications", a.reps.or(Some(2000)))?;
    put(&mut exp, "seed", Some(cli.seed))?;
    put(&mut exp, "timings", Some(a.timings))?;
    let flags = json!({ "experiment": exp, "output": output_value(&a.out, "rates") });
    let cfg: RatesConfig = resolve(flags, a.out.config.as_deref())?;
    let report = run_experiment(&cfg.experiment, exec)?;
    let csv = io::records_csv(&report.rows, Some(&serde_json::to_value(&cfg)?))?;
    let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.size, r.variance)).collect();
    let svg = plot::loglog_svg(&format!("{}: variance", cfg.experiment.functional.id), "size", "variance", &pts, report.var_slope.as_ref());
    finish(&cfg, &report, &cfg.predicates, true, &cfg.output, Some(csv), Some(svg))
}

fn cmd_tails<E: Executor>(cli: &Cli, a: &TailsArgs, exec: &E) -> Result<bool> {
    let mut design = Map::new();
    put(&mut design, "process", Some(a.process.map(ProcessKind::from).unwrap_or(ProcessKind::Poisson)))?;
    put(&mut design, "s_grid", (!a.sizes.is_empty()).then(|| a.sizes.clone()))?;
    put(&mut design, "reps", a.reps)?;
    put(&mut design, "min_events", a.min_events)?;
    let mut m = Map::new();
    put(&mut m, "mode", a.mode.map(|m| match m {
        ModeArg::Radius => TailMode::Radius,
        ModeArg::Decay => TailMode::Decay,
    }))?;
    put(&mut m, "functional", a.func.resolve())?;
    put(&mut m, "space", a.space.resolve()?)?;
    put(&mut m, "marks", a.marks.value()?)?;
    m.insert("design".into(), Value::Object(design));
    put(&mut m, "centers", a.centers.as_deref().map(parse_centers).transpose()?)?;
    put(&mut m, "extras", a.extras)?;
    put(&mut m, "seed", Some(cli.seed))?;
    m.insert("output".into(), output_value(&a.out, "tails"));
    let cfg: TailsConfig = resolve(Value::Object(m), a.out.config.as_deref())?;
    let report = run_tails(&cfg, exec)?;
    let csv = io::records_csv(&report.survivals, Some(&serde_json::to_value(&cfg)?))?;
    let pts: Vec<(f64, f64)> = report.survivals.iter().map(|p| (p.t, -p.survival.ln())).collect();
    let svg = plot::loglog_svg(&format!("{}: -log survival", report.family), "t", "-log S", &pts, None);
    finish(&cfg, &report, &cfg.predicates, true, &cfg.output, Some(csv), Some(svg))
}

/// Runs a tail configuration.
pub fn run_tails<E: Executor>(cfg: &TailsConfig, exec: &E) -> Result<TailReport> {
    cfg.space.validate()?;
    cfg.marks.validate()?;
    if cfg.centers.is_empty() {
        return Err(Error::Config("at least one centre".into()));
    }
    let stream = RandomStream::new(cfg.seed);
    let size = cfg.design.s_grid.first().copied().unwrap_or(1.0);
    let f = cfg.functional.build(&cfg.space, size)?;
    Ok(match cfg.mode {
        TailMode::Radius => {
            let mut smp = stream.derive(u64::MAX).sampler();
            let centers: Vec<MarkedPoint> = cfg
                .centers
                .iter()
                .map(|p| MarkedPoint::new(*p, cfg.marks.sample(&mut smp)))
                .collect::<stabilize_core::Result<_>>()?;
            if cfg.functional.id.starts_with("hull") {
                let hr = HullRadius::default();
                let radius = |c: &Configuration, i: usize| hr.radius(c, i);
                radius_tail_fit(&cfg.functional.id, &radius, &cfg.space, &cfg.marks, &centers, &cfg.design, stream, exec)?
            } else {
                let radius = |c: &Configuration, i: usize| {
                    f.radius(c, i).unwrap_or_else(|| {
                        Err(stabilize_core::Error::Unsupported(format!("{} has no radius of stabilization", f.id())))
                    })
                };
                radius_tail_fit(f.id(), &radius, &cfg.space, &cfg.marks, &centers, &cfg.design, stream, exec)?
            }
        }
        TailMode::Decay => decay_check(f.as_ref(), &cfg.space, &cfg.marks, &cfg.centers, cfg.extras, &cfg.design, stream, exec)?,
    })
}

/// Flat per-size view of a [`SteinEstimate`] for CSV output.
#[derive(Debug, Serialize)]
struct SteinRow {
    size: f64,
    gamma_term: f64,
    gamma_term_se: f64,
    psi_integral: f64,
    psi_sq_integral: f64,
    psi_inner_sq_integral: f64,
    variance: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    i_ks: f64,
    bound: f64,
    intensity_bound: f64,
}

/// Estimates at every size plus log-log slopes of the assembled bounds.
#[derive(Debug, Clone, Serialize)]
pub struct SteinReport {
    pub estimates: Vec<SteinEstimate>,
    pub bound_slope: Option<stats::RateFit>,
    pub intensity_bound_slope: Option<stats::RateFit>,
}

/// Runs a Stein configuration.
pub fn run_stein<E: Executor>(cfg: &SteinConfig, exec: &E) -> Result<SteinReport> {
    if cfg.sizes.is_empty() {
        return Err(Error::Config("at least one size".into()));
    }
    let stream = RandomStream::new(cfg.seed);
    let mut estimates = Vec::with_capacity(cfg.sizes.len());
    for (i, &s) in cfg.sizes.iter().enumerate() {
        let f = cfg.functional.build(&cfg.space, s)?;
        estimates.push(estimate_stein(
            f.as_ref(),
            &cfg.space,
            cfg.process,
            &cfg.marks,
            s,
            &cfg.inputs,
            &cfg.mc,
            None,
            cfg.variance_reps,
            stream.derive(i as u64),
            exec,
        )?);
    }
    let x: Vec<f64> = estimates.iter().map(|e| e.size).collect();
    let bound: Vec<f64> = estimates.iter().map(|e| e.bound).collect();
    let rhs: Vec<f64> = estimates.iter().map(|e| e.intensity_bound).collect();
    Ok(SteinReport { bound_slope: stats::rate_fit(&x, &bound).ok(), intensity_bound_slope: stats::rate_fit(&x, &rhs).ok(), estimates })
}

fn cmd_stein<E: Executor>(cli: &Cli, a: &SteinArgs, exec: &E) -> Result<bool> {
    let mut m = Map::new();
    put(&mut m, "functional", a.func.resolve())?;
    put(&mut m, "space", Some(a.space.resolve()?.unwrap_or_else(|| SpaceDescriptor::unit_cube(2))))?;
    put(&mut m, "process", Some(a.process.map(ProcessKind::from).unwrap_or(ProcessKind::Poisson)))?;
    put(&mut m, "marks", a.marks.value()?)?;
    let sizes = match a.s {
        Some(s) => Some(vec![s]),
        None => (!a.sizes.is_empty()).then(|| a.sizes.clone()),
    };
    put(&mut m, "sizes", sizes)?;
    let mut inputs = Map::new();
    let dflt = stabilize_core::stein::BoundInputs::default();
    for (k, v, d) in [
        ("p", a.p, dflt.p),
        ("c_combined", a.c_combined, dflt.c_combined),
        ("alpha", a.alpha, dflt.alpha),
        ("user_constant", a.user_constant, dflt.user_constant),
    ] {
        put(&mut inputs, k, Some(v.unwrap_or(d)))?;
    }
    m.insert("inputs".into(), Value::Object(inputs));
    let d = stabilize_core::stein::McParams::default();
    m.insert(
        "mc".into(),
        json!({
            "outer": a.outer.unwrap_or(d.outer),
            "inner": a.inner.unwrap_or(d.inner),
            "pairs_per_outer": a.pairs.unwrap_or(d.pairs_per_outer),
        }),
    );
    put(&mut m, "variance_reps", a.variance_reps)?;
    put(&mut m, "seed", Some(cli.seed))?;
    m.insert("output".into(), output_value(&a.out, "stein"));
    let cfg: SteinConfig = resolve(Value::Object(m), a.out.config.as_deref())?;
    let report = run_stein(&cfg, exec)?;
    let rows: Vec<SteinRow> = report
        .estimates
        .iter()
        .map(|e| SteinRow {
            size: e.size,
            gamma_term: e.gamma_term,
            gamma_term_se: e.gamma_term_se,
            psi_integral: e.psi_integral,
            psi_sq_integral: e.psi_sq_integral,
            psi_inner_sq_integral: e.psi_inner_sq_integral,
            variance: e.variance,
            s1: e.s1,
            s2: e.s2,
            s3: e.s3,
            i_ks: e.i_ks,
            bound: e.bound,
            intensity_bound: e.intensity_bound,
        })
        .collect();
    let csv = io::records_csv(&rows, Some(&serde_json::to_value(&cfg)?))?;
    let pts: Vec<(f64, f64)> = report.estimates.iter().map(|e| (e.size, e.bound)).collect();
    let svg = plot::loglog_svg(&format!("{}: assembled bound", cfg.functional.id), "size", "bound", &pts, report.bound_slope.as_ref());
    finish(&cfg, &report, &cfg.predicates, true, &cfg.output, Some(csv), Some(svg))
}

fn cmd_check<E: Executor>(cli: &Cli, a: &CheckArgs, exec: &E) -> Result<bool> {
    let suites = if a.suite.is_empty() { Suite::ALL.to_vec() } else { a.suite.clone() };
    let flags = json!({ "suites": suites, "seed": cli.seed, "quick": a.quick, "output": output_value(&a.out, "check") });
    let cfg: CheckConfig = resolve(flags, a.out.config.as_deref())?;
    let mut reports = Vec::with_capacity(cfg.suites.len());
    for &s in &cfg.suites {
        let r = run_suite(s, cfg.seed, cfg.quick, exec)?;
        println!("{} {:?}", if r.pass { "PASS" } else { "FAIL" }, s);
        reports.push(r);
    }
    let all = reports.iter().all(|r| r.pass);
    let rows: Vec<CheckRow> = reports.iter().map(|r| CheckRow { suite: r.suite, pass: r.pass }).collect();
    let csv = io::records_csv(&rows, Some(&serde_json::to_value(&cfg)?))?;
    finish(&cfg, &reports, &cfg.predicates, all, &cfg.output, Some(csv), None)
}

/// One line of the `check` CSV.
#[derive(Debug, Serialize)]
struct CheckRow {
    suite: Suite,
    pass: bool,
}

/// Runs a parsed command line and maps the outcome to an exit code.
pub fn run(cli: Cli) -> ExitCode {
    let outcome = (|| -> Result<bool> {
        let exec = RayonExecutor::new(cli.threads)?;
        match &cli.command {
            Command::Sample(a) => cmd_sample(&cli, a),
            Command::Stat(a) => cmd_stat(&cli, a),
            Command::Rates(a) => cmd_rates(&cli, a, &exec),
            Command::Tails(a) => cmd_tails(&cli, a, &exec),
            Command::Stein(a) => cmd_stein(&cli, a, &exec),
            Command::Check(a) => cmd_check(&cli, a, &exec),
        }
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
