//! Point counts, the simplest additive functionals.

use crate::error::Result;
use crate::functionals::{Scaling, ScoreFunctional};
use crate::processes::Configuration;

/// Counts points; with a window, only those whose first coordinate is below
/// the threshold (so that the count stays random under binomial input).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cardinality {
    pub window: Option<f64>,
    pub gamma: f64,
}

impl Cardinality {
    fn weight(&self, config: &Configuration, i: usize) -> f64 {
        match self.window {
            Some(t) if config.point(i).coords()[0] >= t => 0.0,
            _ => 1.0,
        }
    }
}

impl ScoreFunctional for Cardinality {
    fn id(&self) -> &'static str {
        if self.window.is_some() {
            "cardinality-half"
        } else {
            "cardinality"
        }
    }

    fn score(&self, config: &Configuration, i: usize) -> Result<f64> {
        Ok(self.weight(config, i))
    }

    fn scaling(&self) -> Scaling {
        Scaling { gamma: self.gamma, q: 0.0 }
    }

    fn radius(&self, _config: &Configuration, _i: usize) -> Option<Result<f64>> {
        Some(Ok(0.0))
    }
}
