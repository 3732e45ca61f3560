//! Experiments, file formats and the command-line front end for
//! [`stabilize_core`].
//!
//! * [`exec`]: a rayon-backed [`stabilize_core::Executor`],
//! * [`experiments`]: replicated runs over size grids with moment summaries,
//!   distances to the normal law and log-log rate fits,
//! * [`suites`]: self-checks (identities, stabilization, fourth moments,
//!   growth, estimator calibration),
//! * [`config`]: JSON run configurations and acceptance predicates,
//! * [`io`] and [`plot`]: CSV / JSON / SVG output.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod io;
pub mod plot;
pub mod suites;

pub use error::{Error, Result};
pub use exec::RayonExecutor;
pub use experiments::{run_experiment, ExperimentSpec, RateReport, SummaryRow};
