//! Clique counts of marked random geometric graphs.
//!
//! Points `x, y` are adjacent when `d(x, y) <= r min(m_x, m_y)` with
//! `r = beta * scale^(-1/gamma)`. The score of `x` is the number of
//! `(k + 1)`-cliques in which `x` has the largest mark (ties broken by the
//! canonical order), so the total is the number of `(k + 1)`-cliques.

use alloc::vec::Vec;


use super::{Scaling, ScoreFunctional};
use crate::error::{invalid, Result};
use crate::kdtree::KdTree;
use crate::processes::Configuration;
use crate::spaces::{Metric, SpaceDescriptor};

/// `(k + 1)`-clique count.
#[derive(Debug, Clone)]
pub struct Cliques {
    pub k: usize,
    pub beta: f64,
    pub scale: f64,
    pub gamma: f64,
    pub metric: Metric,
}

impl Cliques {
    /// Clique functional on `space`; needs `k >= 1`, `beta > 0`, `scale > 0`.
    pub fn new(k: usize, beta: f64, scale: f64, space: &SpaceDescriptor) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if !(beta > 0.0) || !(scale > 0.0) {
            return Err(invalid("beta and scale must be positive"));
        }
        Ok(Self { k, beta, scale, gamma: space.gamma(), metric: space.metric() })
    }

    /// Effective connection radius `beta * scale^(-1/gamma)`.
    pub fn radius_eff(&self) -> f64 {
        self.beta * self.scale.powf(-1.0 / self.gamma)
    }

    fn adjacent(&self, c: &Configuration, i: usize, j: usize) -> bool {
        self.metric.dist(c.point(i), c.point(j)) <= self.radius_eff() * c.mark(i).min(c.mark(j))
    }

    /// Neighbours of `i` that rank below `i` (by mark, then order).
    fn lower_neighbors(&self, c: &Configuration, tree: &KdTree<'_>, i: usize) -> Vec<usize> {
        let reach = self.metric.euclidean_cover(self.radius_eff() * c.mark(i));
        let below = |j: usize| c.mark(j) < c.mark(i) || (c.mark(j) == c.mark(i) && j < i);
        tree.within(c.point(i), reach * reach)
            .into_iter()
            .filter(|&j| j != i && below(j) && self.adjacent(c, i, j))
            .collect()
    }

    fn count_from(&self, c: &Configuration, cand: &[usize], need: usize) -> u64 {
        if need == 0 {
            return 1;
        }
        let mut total = 0;
        for (a, &u) in cand.iter().enumerate() {
            if cand.len() - a < need {
                break;
            }
            let next: Vec<usize> = cand[a + 1..].iter().copied().filter(|&v| self.adjacent(c, u, v)).collect();
            total += self.count_from(c, &next, need - 1);
        }
        total
    }
}

impl ScoreFunctional for Cliques {
    fn id(&self) -> &'static str {
        "cliques"
    }

    fn score(&self, config: &Configuration, i: usize) -> Result<f64> {
        let pts = config.points();
        let tree = KdTree::new(&pts);
        let lower = self.lower_neighbors(config, &tree, i);
        Ok(self.count_from(config, &lower, self.k) as f64)
    }

    fn scores(&self, config: &Configuration) -> Result<Vec<f64>> {
        let pts = config.points();
        let tree = KdTree::new(&pts);
        Ok((0..config.len())
            .map(|i| {
                let lower = self.lower_neighbors(config, &tree, i);
                self.count_from(config, &lower, self.k) as f64
            })
            .collect())
    }

    fn scaling(&self) -> Scaling {
        Scaling { gamma: self.gamma, q: 0.0 }
    }

    fn radius(&self, config: &Configuration, i: usize) -> Option<Result<f64>> {
        Some(Ok(self.radius_eff() * config.mark(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::processes::{sample_binomial, MarkDistribution};
    use crate::rng::RandomStream;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn single_triangle() {
        let space = SpaceDescriptor::unit_cube(2);
        let c = Configuration::from_points(vec![Point::xy(0.1, 0.1), Point::xy(0.2, 0.1), Point::xy(0.15, 0.2)]).unwrap();
        let f = Cliques::new(2, 0.2, 1.0, &space).unwrap();
        assert_eq!(f.total(&c).unwrap(), 1.0);
        let f = Cliques::new(2, 0.05, 1.0, &space).unwrap();
        assert_eq!(f.total(&c).unwrap(), 0.0);
    }

    /// Oracle: enumerate all (k + 1)-subsets of a small configuration.
    fn subsets(f: &Cliques, c: &Configuration) -> u64 {
        let n = c.len();
        let size = f.k + 1;
        let mut count = 0;
        let mut idx: Vec<usize> = (0..size).collect();
        if size > n {
            return 0;
        }
        loop {
            if idx.iter().enumerate().all(|(a, &u)| idx[a + 1..].iter().all(|&v| f.adjacent(c, u, v))) {
                count += 1;
            }
            let mut p = size;
            while p > 0 && idx[p - 1] == n - size + p - 1 {
                p -= 1;
            }
            if p == 0 {
                return count;
            }
            idx[p - 1] += 1;
            for q in p..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }

    proptest! {
        #[test]
        fn matches_subset_enumeration(seed in 0u64..1000, n in 1usize..18, k in 1usize..4, beta in 0.1f64..0.6) {
            let space = SpaceDescriptor::unit_cube(2);
            let mut s = RandomStream::new(seed).sampler();
            let c = sample_binomial(&space, n, &MarkDistribution::HalfNormal { sigma: 1.0 }, &mut s).unwrap();
            let f = Cliques::new(k, beta, 1.0, &space).unwrap();
            prop_assert_eq!(f.total(&c).unwrap() as u64, subsets(&f, &c));
        }
    }
}
