//! Maximal points: the score of `x` is one when no other point `z` satisfies
//! `z_i >= x_i` for every coordinate, and zero otherwise.

use alloc::vec;
use alloc::vec::Vec;
use alloc::string::String;

use super::{Scaling, ScoreFunctional};
use crate::error::{Error, Result};
use crate::processes::Configuration;
use crate::spaces::{SpaceDescriptor, SpaceKind};

/// Number of maximal points of a configuration.
#[derive(Debug, Clone)]
pub struct MaximalPoints {
    /// Region every point must lie in (checked when present).
    pub region: Option<SpaceDescriptor>,
    pub gamma: f64,
}

impl MaximalPoints {
    /// Maximal points on `space`; configurations are checked to lie in it
    /// when it is a region under a level set.
    pub fn on(space: &SpaceDescriptor) -> Self {
        let region = matches!(space.kind, SpaceKind::TriangleUnderF { .. }).then(|| space.clone());
        Self { region, gamma: space.gamma() }
    }

    fn check(&self, config: &Configuration) -> Result<()> {
        if let Some(r) = &self.region {
            if config.items().iter().any(|m| !r.contains(&m.point)) {
                return Err(Error::OutsideSpace(String::from("region {F <= 1}")));
            }
        }
        Ok(())
    }
}

fn dominates(z: &[f64], x: &[f64]) -> bool {
    z.iter().zip(x).all(|(a, b)| a >= b)
}

/// Maximality flags of all points.
pub fn maximal_flags(config: &Configuration) -> Vec<bool> {
    let n = config.len();
    if n == 0 {
        return Vec::new();
    }
    if config.dim() == Some(2) {
        // Sweep by decreasing first coordinate, ties by decreasing second.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (p, q) = (config.point(a), config.point(b));
            q.x().total_cmp(&p.x()).then(q.y().total_cmp(&p.y())).then(a.cmp(&b))
        });
        let mut flags = vec![false; n];
        let mut max_y = f64::NEG_INFINITY;
        for (k, &i) in order.iter().enumerate() {
            let p = config.point(i);
            let duplicate_after = order.get(k + 1).is_some_and(|&j| {
                let q = config.point(j);
                q.x() == p.x() && q.y() == p.y()
            });
            flags[i] = !(max_y >= p.y()) && !duplicate_after;
            max_y = max_y.max(p.y());
        }
        return flags;
    }
    (0..n)
        .map(|i| {
            let x = config.point(i).coords();
            !(0..n).any(|j| j != i && dominates(config.point(j).coords(), x))
        })
        .collect()
}

impl ScoreFunctional for MaximalPoints {
    fn id(&self) -> &'static str {
        "maxpts"
    }

    fn score(&self, config: &Configuration, i: usize) -> Result<f64> {
        self.check(config)?;
        let x = config.point(i).coords();
        let dominated = (0..config.len()).any(|j| j != i && dominates(config.point(j).coords(), x));
        Ok(if dominated { 0.0 } else { 1.0 })
    }

    fn scores(&self, config: &Configuration) -> Result<Vec<f64>> {
        self.check(config)?;
        Ok(maximal_flags(config).into_iter().map(|f| if f { 1.0 } else { 0.0 }).collect())
    }

    fn scaling(&self) -> Scaling {
        Scaling { gamma: self.gamma, q: 0.0 }
    }
}
