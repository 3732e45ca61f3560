//! Score functionals `h(M) = c + sum_{x in M} xi(x, M)`.
//!
//! Every family implements [`ScoreFunctional`]; [`FunctionalSpec`] names a
//! family and its parameters in serialized form.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::Configuration;
use crate::spaces::{Body, SpaceDescriptor, SpaceKind};

pub mod cardinality;
pub mod cliques;
pub mod hull;
pub mod knn;
pub mod maxpts;
pub mod voronoi;

pub use cardinality::Cardinality;
pub use cliques::Cliques;
pub use hull::{Hull, HullKind};
pub use knn::Knn;
pub use maxpts::MaximalPoints;
pub use voronoi::{Voronoi, VoronoiKind};

/// Scaling metadata: scores of intensity `s` are `s^(q / gamma) xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub gamma: f64,
    pub q: f64,
}

/// A functional given by local scores.
pub trait ScoreFunctional: Send + Sync {
    /// Family identifier.
    fn id(&self) -> &'static str;

    /// Score `xi(x_i, M)` of point number `i`, computed locally.
    fn score(&self, config: &Configuration, i: usize) -> Result<f64>;

    /// All scores in configuration order.
    fn scores(&self, config: &Configuration) -> Result<Vec<f64>> {
        (0..config.len()).map(|i| self.score(config, i)).collect()
    }

    /// Constant added to the sum of scores by [`ScoreFunctional::total`].
    fn offset(&self) -> f64 {
        0.0
    }

    /// `h(M) = offset + sum of scores`.
    fn total(&self, config: &Configuration) -> Result<f64> {
        Ok(self.offset() + crate::numeric::sum(self.scores(config)?))
    }

    /// Scaling metadata.
    fn scaling(&self) -> Scaling;

    /// Radius of stabilization of point `i`, if the family defines one.
    fn radius(&self, _config: &Configuration, _i: usize) -> Option<Result<f64>> {
        None
    }
}

/// Serialized description of a functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    /// One of `cardinality`, `cardinality-half`, `knn`, `knn-directed`,
    /// `maxpts`, `voronoi-vol`, `voronoi-symdiff`, `voronoi-boundary`,
    /// `hull-f0`, `hull-v1`, `hull-v2`, `cliques`.
    pub id: String,
    /// Number of neighbours (k-NN) or clique order minus one (cliques).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Power of the edge lengths (k-NN).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Connection parameter (cliques).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Target set (Voronoi) or convex body (hull).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Body>,
    /// Fixed scale parameter; when absent the sample size is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

/// Identifiers accepted by [`FunctionalSpec::build`].
pub const FAMILY_IDS: [&str; 12] = [
    "cardinality",
    "cardinality-half",
    "knn",
    "knn-directed",
    "maxpts",
    "voronoi-vol",
    "voronoi-symdiff",
    "voronoi-boundary",
    "hull-f0",
    "hull-v1",
    "hull-v2",
    "cliques",
];

impl FunctionalSpec {
    /// Spec with default parameters.
    pub fn named(id: &str) -> Self {
        Self { id: String::from(id), k: None, q: None, beta: None, body: None, scale: None }
    }

    /// Default target set for Voronoi approximation.
    pub fn default_voronoi_body() -> Body {
        Body::Disk { center: [0.5, 0.5], radius: 0.25 }
    }

    /// Default convex body for hull statistics.
    pub fn default_hull_body() -> Body {
        Body::Disk { center: [0.0, 0.0], radius: 1.0 }
    }

    /// Instantiates the functional on `space` for size parameter `size`.
    pub fn build(&self, space: &SpaceDescriptor, size: f64) -> Result<Box<dyn ScoreFunctional>> {
        let scale = self.scale.unwrap_or(size);
        let f: Box<dyn ScoreFunctional> = match self.id.as_str() {
            "knn" | "knn-directed" => Box::new(Knn::new(
                self.k.unwrap_or(1),
                self.q.unwrap_or(1.0),
                self.id == "knn-directed",
                space,
            )?),
            "cardinality" => Box::new(Cardinality { window: None, gamma: space.gamma() }),
            "cardinality-half" => Box::new(Cardinality { window: Some(0.5), gamma: space.gamma() }),
            "maxpts" => Box::new(MaximalPoints::on(space)),
            "voronoi-vol" | "voronoi-symdiff" | "voronoi-boundary" => {
                if !matches!(space.kind, SpaceKind::UnitCube { dim: 2 }) {
                    return Err(Error::Unsupported(String::from("Voronoi approximation lives in the unit square")));
                }
                let kind = match self.id.as_str() {
                    "voronoi-vol" => VoronoiKind::Vol,
                    "voronoi-symdiff" => VoronoiKind::SymDiff,
                    _ => VoronoiKind::Boundary,
                };
                Box::new(Voronoi::new(kind, self.body.clone().unwrap_or_else(Self::default_voronoi_body))?)
            }
            "hull-f0" | "hull-v1" | "hull-v2" => {
                let kind = match self.id.as_str() {
                    "hull-f0" => HullKind::F0,
                    "hull-v1" => HullKind::V1,
                    _ => HullKind::V2,
                };
                Box::new(Hull::new(kind, self.body.clone().unwrap_or_else(Self::default_hull_body), scale, space.gamma())?)
            }
            "cliques" => Box::new(Cliques::new(
                self.k.unwrap_or(2),
                self.beta.unwrap_or(1.0),
                scale,
                space,
            )?),
            other => return Err(Error::InvalidParameter(format!("unknown functional `{other}`"))),
        };
        Ok(f)
    }
}

/// Adapts a functional to the closure form used by the difference operators.
pub fn total_of(f: &dyn ScoreFunctional) -> impl Fn(&Configuration) -> Result<f64> + Sync + '_ {
    move |c| f.total(c)
}
