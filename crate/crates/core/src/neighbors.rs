//! Exact Euclidean k-nearest-neighbor search with a ball tree.
//!
//! Construction splits on the dimension of largest spread at the median
//! (ties by lower point index), so the tree is a pure function of its input.
//! Queries exclude the query point by index, not by distance: duplicate
//! points remain eligible neighbors of each other.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};

pub const DEFAULT_LEAF_SIZE: usize = 16;

pub fn euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn euclidean_slice(a: &[f64], b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone)]
pub struct Node {
    pub centroid: Vec<f64>,
    pub radius: f64,
    /// Range into [`BallTree::order`] covered by this node.
    pub start: usize,
    pub end: usize,
    pub children: Option<(usize, usize)>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct BallTree<'a> {
    points: ArrayView2<'a, f64>,
    leaf_size: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// A neighbor hit: point index and distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> BallTree<'a> {
    pub fn new(points: ArrayView2<'a, f64>) -> Result<Self> {
        Self::with_leaf_size(points, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(points: ArrayView2<'a, f64>, leaf_size: usize) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::invalid("cannot build a ball tree over zero points"));
        }
        if leaf_size == 0 {
            return Err(Error::invalid("leaf size must be at least 1"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ball tree points"));
        }
        let mut tree = BallTree {
            points,
            leaf_size,
            order: (0..points.nrows()).collect(),
            nodes: Vec::new(),
        };
        tree.build(0, points.nrows());
        Ok(tree)
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let d = self.points.ncols();
        let count = (end - start) as f64;
        let mut centroid = vec![0.0; d];
        for &i in &self.order[start..end] {
            for (c, v) in centroid.iter_mut().zip(self.points.row(i)) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= count);
        let radius = self.order[start..end]
            .iter()
            .map(|&i| euclidean_slice(&centroid, self.points.row(i)))
            .fold(0.0, f64::max);

        let id = self.nodes.len();
        self.nodes.push(Node {
            centroid,
            radius,
            start,
            end,
            children: None,
        });
        if end - start <= self.leaf_size {
            return id;
        }

        let split_dim = (0..d)
            .map(|j| {
                let (lo, hi) = self.order[start..end]
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(self.points[[i, j]]), hi.max(self.points[[i, j]]))
                    });
                (j, hi - lo)
            })
            // first dimension wins ties
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            })
            .0;
        let points = self.points;
        self.order[start..end].sort_by(|&a, &b| {
            points[[a, split_dim]]
                .total_cmp(&points[[b, split_dim]])
                .then(a.cmp(&b))
        });
        let mid = start + (end - start) / 2;
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    pub fn points(&self) -> ArrayView2<'a, f64> {
        self.points
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Point indices in tree order; node `n` covers `order()[n.start..n.end]`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k` nearest indexed points to point `query_index`, itself excluded,
    /// ascending by distance with ties broken by lower index.
    pub fn knn(&self, query_index: usize, k: usize) -> Result<Vec<Neighbor>> {
        if query_index >= self.len() {
            return Err(Error::invalid(format!(
                "query index {query_index} out of range for {} points",
                self.len()
            )));
        }
        if k == 0 || k >= self.len() {
            return Err(Error::invalid(format!(
                "k must lie in 1..={}, got {k}",
                self.len() - 1
            )));
        }
        let q = self.points.row(query_index).to_vec();
        Ok(self.search(&q, k, Some(query_index)))
    }

    /// The `k` nearest indexed points to an arbitrary query point.
    pub fn knn_point(&self, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if query.len() != self.points.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.points.ncols(),
                got: query.len(),
            });
        }
        if query.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("query point"));
        }
        if k == 0 || k > self.len() {
            return Err(Error::invalid(format!(
                "k must lie in 1..={}, got {k}",
                self.len()
            )));
        }
        Ok(self.search(query, k, None))
    }

    fn search(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        let mut heap: BinaryHeap<Neighbor> = BinaryHeap::with_capacity(k + 1);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let to_center = node
                .centroid
                .iter()
                .zip(query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            // slack absorbs rounding in the triangle inequality
            let lower = to_center - node.radius - 1e-12 * (1.0 + to_center);
            if heap.len() == k && lower > heap.peek().expect("non-empty").distance {
                continue;
            }
            match node.children {
                None => {
                    for &i in &self.order[node.start..node.end] {
                        if Some(i) == exclude {
                            continue;
                        }
                        let cand = Neighbor {
                            index: i,
                            distance: euclidean_slice(query, self.points.row(i)),
                        };
                        if heap.len() < k {
                            heap.push(cand);
                        } else if cand < *heap.peek().expect("non-empty") {
                            heap.pop();
                            heap.push(cand);
                        }
                    }
                }
                Some((l, r)) => {
                    let dl = self.center_dist(l, query);
                    let dr = self.center_dist(r, query);
                    // push the farther child first so the nearer one is explored first
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        heap.into_sorted_vec()
    }

    fn center_dist(&self, id: usize, query: &[f64]) -> f64 {
        self.nodes[id]
            .centroid
            .iter()
            .zip(query)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }
}
