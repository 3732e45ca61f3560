//! Static k-d tree for nearest-neighbour and range queries under the
//! Euclidean distance of the ambient coordinates.
//!
//! Neighbours are ranked by `(squared distance, index)`, so ties are broken by
//! the index order of the input slice.

use alloc::vec::Vec;

use crate::geometry::Point;

const LEAF: usize = 8;

/// k-d tree over a borrowed slice of points.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    pts: &'a [Point],
    idx: Vec<u32>,
    dim: usize,
}

impl<'a> KdTree<'a> {
    /// Builds the tree in `O(n log n)`.
    pub fn new(pts: &'a [Point]) -> Self {
        let dim = pts.first().map_or(1, |p| p.dim());
        let mut idx: Vec<u32> = (0..pts.len() as u32).collect();
        build(pts, &mut idx, 0, dim);
        Self { pts, idx, dim }
    }

    /// The `k` nearest points to `q` (excluding index `skip`), as
    /// `(squared distance, index)` sorted ascending.
    pub fn nearest(&self, q: &Point, k: usize, skip: Option<usize>) -> Vec<(f64, usize)> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 {
            self.nearest_rec(q, k, skip, 0, self.idx.len(), 0, &mut best);
        }
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn nearest_rec(
        &self,
        q: &Point,
        k: usize,
        skip: Option<usize>,
        lo: usize,
        hi: usize,
        depth: usize,
        best: &mut Vec<(f64, usize)>,
    ) {
        if hi - lo <= LEAF {
            for &i in &self.idx[lo..hi] {
                self.offer(q, k, skip, i as usize, best);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = depth % self.dim;
        let p = self.idx[mid] as usize;
        self.offer(q, k, skip, p, best);
        let diff = q.coords()[axis] - self.pts[p].coords()[axis];
        let (first, second) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.nearest_rec(q, k, skip, first.0, first.1, depth + 1, best);
        if best.len() < k || diff * diff <= best[k - 1].0 {
            self.nearest_rec(q, k, skip, second.0, second.1, depth + 1, best);
        }
    }

    fn offer(&self, q: &Point, k: usize, skip: Option<usize>, i: usize, best: &mut Vec<(f64, usize)>) {
        if Some(i) == skip {
            return;
        }
        let key = (q.dist2(&self.pts[i]), i);
        if best.len() == k {
            let worst = best[k - 1];
            if key.0 > worst.0 || (key.0 == worst.0 && key.1 > worst.1) {
                return;
            }
            best.pop();
        }
        let pos = best.partition_point(|b| b.0 < key.0 || (b.0 == key.0 && b.1 < key.1));
        best.insert(pos, key);
    }

    /// Indices of all points with squared distance at most `r2` from `q`,
    /// in ascending index order.
    pub fn within(&self, q: &Point, r2: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.within_rec(q, r2, 0, self.idx.len(), 0, &mut out);
        out.sort_unstable();
        out
    }

    fn within_rec(&self, q: &Point, r2: f64, lo: usize, hi: usize, depth: usize, out: &mut Vec<usize>) {
        if hi - lo <= LEAF {
            for &i in &self.idx[lo..hi] {
                if q.dist2(&self.pts[i as usize]) <= r2 {
                    out.push(i as usize);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = depth % self.dim;
        let p = self.idx[mid] as usize;
        if q.dist2(&self.pts[p]) <= r2 {
            out.push(p);
        }
        let diff = q.coords()[axis] - self.pts[p].coords()[axis];
        if diff <= 0.0 || diff * diff <= r2 {
            self.within_rec(q, r2, lo, mid, depth + 1, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.within_rec(q, r2, mid + 1, hi, depth + 1, out);
        }
    }
}

fn build(pts: &[Point], idx: &mut [u32], depth: usize, dim: usize) {
    if idx.len() <= LEAF {
        return;
    }
    let mid = idx.len() / 2;
    let axis = depth % dim;
    idx.select_nth_unstable_by(mid, |&a, &b| {
        pts[a as usize].coords()[axis].total_cmp(&pts[b as usize].coords()[axis])
    });
    let (left, right) = idx.split_at_mut(mid);
    build(pts, left, depth + 1, dim);
    build(pts, &mut right[1..], depth + 1, dim);
}
