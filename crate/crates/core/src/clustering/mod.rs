//! Soft and hard k-means over node positions, plus boundary-node reassignment.

mod hard;
mod soft;

pub use hard::{hard_kmeans, HardKMeansResult};
pub use soft::{soft_kmeans, SoftKMeansResult};

use crate::error::{Error, Result};
use crate::geometry::{NodeId, Point2D};

/// `k x n` soft-assignment probabilities, stored row-major (one row per cluster).
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    k: usize,
    n: usize,
    z: Vec<f64>,
}

impl MembershipMatrix {
    /// Build from explicit rows; each row is one cluster's weights over all nodes.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::Parameter("membership needs at least one cluster".into()));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parameter("membership rows differ in length".into()));
        }
        Ok(Self { k, n, z: rows.into_iter().flatten().collect() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, cluster: usize, node: usize) -> f64 {
        self.z[cluster * self.n + node]
    }

    pub fn row(&self, cluster: usize) -> &[f64] {
        &self.z[cluster * self.n..(cluster + 1) * self.n]
    }

    pub fn column(&self, node: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.k).map(move |v| self.get(v, node))
    }

    pub fn row_sum(&self, cluster: usize) -> f64 {
        self.row(cluster).iter().sum()
    }

    pub fn column_sum(&self, node: usize) -> f64 {
        self.column(node).sum()
    }

    /// Largest absolute entry-wise difference; shapes must match.
    pub fn max_abs_diff(&self, other: &MembershipMatrix) -> f64 {
        debug_assert_eq!((self.k, self.n), (other.k, other.n));
        self.z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// The two most probable clusters for `node` as `(cluster, probability)`,
    /// lower cluster index first on ties. `None` when `k < 2`.
    pub fn top_two(&self, node: usize) -> Option<((usize, f64), (usize, f64))> {
        if self.k < 2 {
            return None;
        }
        let mut first = (0, self.get(0, node));
        let mut second = (usize::MAX, f64::NEG_INFINITY);
        for v in 1..self.k {
            let p = self.get(v, node);
            if p > first.1 {
                second = first;
                first = (v, p);
            } else if p > second.1 {
                second = (v, p);
            }
        }
        Some((first, second))
    }

    /// Whether entries, columns and rows satisfy the probabilistic constraints.
    pub fn check_constraints(&self, column_tol: f64) -> bool {
        self.z.iter().all(|&p| (0.0..=1.0).contains(&p))
            && (0..self.n).all(|j| (self.column_sum(j) - 1.0).abs() <= column_tol)
            && (0..self.k).all(|v| self.row_sum(v) > 0.0)
    }
}

/// Softmax of `-beta * ||x_j - mu_v||^2` over clusters, per node.
///
/// Each column is shifted by its largest exponent before exponentiation.
pub fn membership(nodes: &[Point2D], centers: &[Point2D], beta: f64) -> Result<MembershipMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("beta must be > 0, got {beta}")));
    }
    let k = centers.len();
    if k == 0 {
        return Err(Error::Parameter("membership needs at least one center".into()));
    }
    let n = nodes.len();
    let mut z = vec![0.0; k * n];
    let mut expo = vec![0.0; k];
    for (j, x) in nodes.iter().enumerate() {
        for (v, mu) in centers.iter().enumerate() {
            expo[v] = -beta * x.distance_squared(*mu);
        }
        let max = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for e in expo.iter_mut() {
            *e = (*e - max).exp();
            total += *e;
        }
        for v in 0..k {
            z[v * n + j] = expo[v] / total;
        }
    }
    Ok(MembershipMatrix { k, n, z })
}

/// Membership-weighted mean of node positions, one per cluster.
pub fn update_centers(nodes: &[Point2D], z: &MembershipMatrix) -> Result<Vec<Point2D>> {
    (0..z.k())
        .map(|v| {
            let (mut w, mut sx, mut sy) = (0.0, 0.0, 0.0);
            for (j, x) in nodes.iter().enumerate() {
                let p = z.get(v, j);
                w += p;
                sx += p * x.x;
                sy += p * x.y;
            }
            if w > 0.0 {
                Ok(Point2D::new(sx / w, sy / w))
            } else {
                Err(Error::DegenerateCluster { cluster: v })
            }
        })
        .collect()
}

/// Membership-weighted sum of squared node-to-center distances (m^2).
pub fn cost(nodes: &[Point2D], z: &MembershipMatrix, centers: &[Point2D]) -> f64 {
    centers
        .iter()
        .enumerate()
        .map(|(v, mu)| {
            nodes
                .iter()
                .enumerate()
                .map(|(j, x)| z.get(v, j) * x.distance_squared(*mu))
                .sum::<f64>()
        })
        .sum()
}

/// A crisp partition of nodes into `k` clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub clusters: Vec<Vec<NodeId>>,
    pub centers: Vec<Point2D>,
}

impl ClusterAssignment {
    /// Build from per-node labels. Every cluster in `0..centers.len()` must be non-empty.
    pub fn from_labels(labels: Vec<usize>, centers: Vec<Point2D>) -> Result<Self> {
        let k = centers.len();
        let mut clusters = vec![Vec::new(); k];
        for (j, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(Error::Parameter(format!("label {label} out of range for k = {k}")));
            }
            clusters[label].push(NodeId(j));
        }
        if let Some(cluster) = clusters.iter().position(Vec::is_empty) {
            return Err(Error::EmptyCluster { cluster });
        }
        Ok(Self { labels, clusters, centers })
    }

    /// Like [`from_labels`](Self::from_labels) but drops empty clusters and renumbers the rest.
    pub fn from_labels_compacting(labels: Vec<usize>, centers: Vec<Point2D>) -> Self {
        let k = centers.len();
        let mut used = vec![false; k];
        for &l in &labels {
            used[l] = true;
        }
        let mut remap = vec![usize::MAX; k];
        let mut kept = Vec::new();
        for v in 0..k {
            if used[v] {
                remap[v] = kept.len();
                kept.push(centers[v]);
            }
        }
        let labels = labels.into_iter().map(|l| remap[l]).collect();
        Self::from_labels(labels, kept).expect("every kept cluster has a member")
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// Largest cluster size over smallest.
    pub fn size_ratio(&self) -> f64 {
        let sizes = self.sizes();
        let max = sizes.iter().copied().max().unwrap_or(0) as f64;
        let min = sizes.iter().copied().min().unwrap_or(0) as f64;
        max / min
    }

    fn rebuild_clusters(&mut self) {
        for c in &mut self.clusters {
            c.clear();
        }
        for (j, &l) in self.labels.iter().enumerate() {
            self.clusters[l].push(NodeId(j));
        }
    }
}

/// Label each node with its most probable cluster (lowest index on ties).
pub fn form_clusters(z: &MembershipMatrix, centers: &[Point2D]) -> Result<ClusterAssignment> {
    if centers.len() != z.k() {
        return Err(Error::Parameter("center count differs from membership rows".into()));
    }
    let labels = (0..z.n())
        .map(|j| {
            let mut best = 0;
            for v in 1..z.k() {
                if z.get(v, j) > z.get(best, j) {
                    best = v;
                }
            }
            best
        })
        .collect();
    ClusterAssignment::from_labels(labels, centers.to_vec())
}

/// Move boundary nodes from a larger cluster into a smaller neighbor.
///
/// A node is a boundary node when its two largest membership probabilities
/// differ by less than `threshold`. Nodes are visited in ascending index
/// order with live cluster sizes. A boundary node sitting in one of its two
/// most probable clusters moves to the other one when that shrinks the size
/// gap, i.e. its cluster holds at least two more nodes than the target.
/// Passes repeat until none moves; every move lowers the sum of squared
/// cluster sizes, so this terminates, and the result is a fixed point.
pub fn reassign_boundary(
    assignment: &ClusterAssignment,
    z: &MembershipMatrix,
    threshold: f64,
) -> ClusterAssignment {
    let mut out = assignment.clone();
    if z.k() < 2 || threshold <= 0.0 {
        return out;
    }
    let mut sizes = out.sizes();
    loop {
        let mut moved = false;
        for j in 0..out.labels.len() {
            let Some(((a, pa), (b, pb))) = z.top_two(j) else {
                continue;
            };
            if pa - pb >= threshold {
                continue;
            }
            let current = out.labels[j];
            let target = if current == a {
                b
            } else if current == b {
                a
            } else {
                continue;
            };
            if sizes[current] >= sizes[target] + 2 {
                sizes[current] -= 1;
                sizes[target] += 1;
                out.labels[j] = target;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    out.rebuild_clusters();
    out
}
