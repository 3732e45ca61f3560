//! Stabilizing score functionals on metric spaces and quantitative
//! normal-approximation bounds for their sums.
//!
//! The crate is `no_std` (with `alloc`). It provides
//!
//! * [`spaces`]: metric probability spaces with a declared growth exponent and
//!   an optional boundary set `K` with closed-form distances,
//! * [`processes`]: marked configurations and Poisson / binomial samplers
//!   driven by reproducible random streams,
//! * [`functionals`]: k-nearest-neighbour lengths, maximal points, Voronoi set
//!   approximation, convex-hull statistics and clique counts,
//! * [`stabilization`]: add-one / add-two costs, radii of stabilization and
//!   survival-tail fits,
//! * [`stein`]: Monte Carlo estimates of the quantities entering the
//!   Kolmogorov-distance bounds and their assembly,
//! * [`stats`]: distances to the normal law, moments and log-log rate fits.
//!
//! Parallel work goes through the [`exec::Executor`] trait so that results do
//! not depend on how work is scheduled.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod exec;
pub mod functionals;
pub mod geometry;
pub mod kdtree;
pub mod numeric;
pub mod processes;
pub mod rng;
pub mod spaces;
pub mod stabilization;
pub mod stats;
pub mod stein;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use functionals::{FunctionalSpec, ScoreFunctional};
pub use geometry::Point;
pub use processes::{Configuration, MarkDistribution, MarkedPoint};
pub use rng::RandomStream;
pub use spaces::{KSpec, SpaceDescriptor, SpaceKind};
