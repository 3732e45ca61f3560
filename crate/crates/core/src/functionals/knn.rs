//! k-nearest-neighbour graph lengths.
//!
//! The undirected score of `x` is `sum_{y in V_k(x)} rho(x, y)` with
//! `rho = d^q / 2` when `x` and `y` are mutual k-nearest neighbours and `d^q`
//! otherwise, so the total is the `q`-th power length of the undirected graph.
//! The directed score is `sum_{y in V_k(x)} d^q`. Ties are broken by the
//! canonical order of the configuration.

use alloc::vec::Vec;


use super::{Scaling, ScoreFunctional};
use crate::error::{invalid, Error, Result};
use crate::kdtree::KdTree;
use crate::processes::Configuration;
use crate::spaces::{Metric, SpaceDescriptor};

/// k-NN length functional.
#[derive(Debug, Clone)]
pub struct Knn {
    pub k: usize,
    pub q: f64,
    pub directed: bool,
    pub metric: Metric,
    pub gamma: f64,
}

impl Knn {
    /// k-NN functional on `space`; needs `k >= 1` and `q >= 0`.
    pub fn new(k: usize, q: f64, directed: bool, space: &SpaceDescriptor) -> Result<Self> {
        Self::with_metric(k, q, directed, space.metric(), space.gamma())
    }

    /// k-NN functional for an explicit metric.
    pub fn with_metric(k: usize, q: f64, directed: bool, metric: Metric, gamma: f64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if !(q >= 0.0) || !q.is_finite() {
            return Err(invalid("q must be finite and non-negative"));
        }
        Ok(Self { k, q, directed, metric, gamma })
    }

    fn check(&self, config: &Configuration) -> Result<()> {
        if config.len() <= self.k {
            return Err(Error::TooFewPoints { needed: self.k + 1, found: config.len() });
        }
        Ok(())
    }

    fn weight(&self, d: f64) -> f64 {
        if self.q == 0.0 {
            1.0
        } else if self.q == 1.0 {
            d
        } else {
            d.powf(self.q)
        }
    }

    fn score_from(&self, i: usize, nbrs: &[Neighbors]) -> f64 {
        crate::numeric::sum(nbrs[i].iter().map(|&(d, y)| {
            let w = self.weight(d);
            if !self.directed && nbrs[y].iter().any(|&(_, z)| z == i) {
                0.5 * w
            } else {
                w
            }
        }))
    }
}

/// `(distance, index)` pairs sorted by `(distance, index)`.
pub type Neighbors = Vec<(f64, usize)>;

/// Nearest-neighbour oracle for a configuration.
pub struct NeighborIndex<'a> {
    pts: &'a [crate::geometry::Point],
    tree: Option<KdTree<'a>>,
    metric: Metric,
}

impl<'a> NeighborIndex<'a> {
    /// Index over `pts`; uses a k-d tree when the metric ranks like the
    /// Euclidean distance and brute force otherwise.
    pub fn new(pts: &'a [crate::geometry::Point], metric: Metric) -> Self {
        let tree = metric.euclidean_ranked().then(|| KdTree::new(pts));
        Self { pts, tree, metric }
    }

    /// The `k` nearest neighbours of point `i` (excluding itself).
    pub fn nearest(&self, i: usize, k: usize) -> Neighbors {
        let q = &self.pts[i];
        match &self.tree {
            Some(t) => t
                .nearest(q, k, Some(i))
                .into_iter()
                .map(|(d2, j)| {
                    let d = match self.metric {
                        Metric::Geodesic => self.metric.dist(q, &self.pts[j]),
                        _ => d2.sqrt(),
                    };
                    (d, j)
                })
                .collect(),
            None => {
                let mut all: Neighbors = (0..self.pts.len())
                    .filter(|&j| j != i)
                    .map(|j| (self.metric.dist(q, &self.pts[j]), j))
                    .collect();
                let k = k.min(all.len());
                if k < all.len() {
                    all.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    all.truncate(k);
                }
                all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                all
            }
        }
    }
}

/// k nearest neighbours of every point.
pub fn all_neighbors(config: &Configuration, k: usize, metric: Metric) -> Vec<Neighbors> {
    let pts = config.points();
    let index = NeighborIndex::new(&pts, metric);
    (0..pts.len()).map(|i| index.nearest(i, k)).collect()
}

impl ScoreFunctional for Knn {
    fn id(&self) -> &'static str {
        if self.directed {
            "knn-directed"
        } else {
            "knn"
        }
    }

    fn score(&self, config: &Configuration, i: usize) -> Result<f64> {
        self.check(config)?;
        let pts = config.points();
        let index = NeighborIndex::new(&pts, self.metric);
        let own = index.nearest(i, self.k);
        Ok(crate::numeric::sum(own.iter().map(|&(d, y)| {
            let w = self.weight(d);
            if !self.directed && index.nearest(y, self.k).iter().any(|&(_, z)| z == i) {
                0.5 * w
            } else {
                w
            }
        })))
    }

    fn scores(&self, config: &Configuration) -> Result<Vec<f64>> {
        self.check(config)?;
        let nbrs = all_neighbors(config, self.k, self.metric);
        Ok((0..config.len()).map(|i| self.score_from(i, &nbrs)).collect())
    }

    fn scaling(&self) -> Scaling {
        Scaling { gamma: self.gamma, q: self.q }
    }

    fn radius(&self, config: &Configuration, i: usize) -> Option<Result<f64>> {
        Some(knn_radius(config, i, self.k, self.metric))
    }
}

/// Radius of stabilization `3 d(x, k-th nearest neighbour)`.
pub fn knn_radius(config: &Configuration, i: usize, k: usize, metric: Metric) -> Result<f64> {
    if config.len() <= k {
        return Err(Error::TooFewPoints { needed: k + 1, found: config.len() });
    }
    let pts = config.points();
    let index = NeighborIndex::new(&pts, metric);
    let nb = index.nearest(i, k);
    Ok(3.0 * nb[k - 1].0)
}

/// Renyi-entropy estimator `n^(q/m - 1) L^(q)` of the undirected
/// nearest-neighbour graph (`k = 1`); `m` is the intrinsic dimension.
pub fn renyi_statistic(config: &Configuration, q: f64, m: usize, metric: Metric) -> Result<f64> {
    if q == 0.0 {
        return Err(invalid("q = 0 is excluded from the Renyi estimator"));
    }
    if m == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let f = Knn::with_metric(1, q, false, metric, m as f64)?;
    let l = f.total(config)?;
    let n = config.len() as f64;
    Ok(n.powf(q / m as f64 - 1.0) * l)
}
