use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::geometry::Point2D;

#[derive(Debug, Clone)]
pub struct HardKMeansResult {
    pub assignment: ClusterAssignment,
    pub iterations: usize,
    pub converged: bool,
}

fn nearest(x: Point2D, centers: &[Point2D]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (v, c) in centers.iter().enumerate() {
        let d = x.distance_squared(*c);
        if d < best_d {
            best_d = d;
            best = v;
        }
    }
    best
}

/// Lloyd's algorithm: nearest-center assignment, then mean update.
///
/// An empty cluster is re-seeded at the node lying farthest from its own
/// center, which is moved into the empty cluster before the mean update.
pub fn hard_kmeans(
    nodes: &[Point2D],
    initial_centers: &[Point2D],
    convergence_eps: f64,
    r_max: usize,
) -> Result<HardKMeansResult> {
    let k = initial_centers.len();
    if r_max == 0 {
        return Err(Error::Parameter("r_max must be >= 1".into()));
    }
    if k == 0 || k > nodes.len() {
        return Err(Error::Parameter(format!(
            "hard k-means needs 1 <= k <= n, got k = {k}, n = {}",
            nodes.len()
        )));
    }
    let mut centers = initial_centers.to_vec();
    let mut labels: Vec<usize> = vec![usize::MAX; nodes.len()];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < r_max {
        iterations += 1;
        let mut next: Vec<usize> = nodes.iter().map(|&x| nearest(x, &centers)).collect();

        let mut sizes = vec![0usize; k];
        for &l in &next {
            sizes[l] += 1;
        }
        for v in 0..k {
            if sizes[v] > 0 {
                continue;
            }
            let far = (0..nodes.len())
                .filter(|&j| sizes[next[j]] > 1)
                .max_by(|&a, &b| {
                    let da = nodes[a].distance_squared(centers[next[a]]);
                    let db = nodes[b].distance_squared(centers[next[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .expect("k <= n leaves a donor cluster");
            sizes[next[far]] -= 1;
            sizes[v] = 1;
            next[far] = v;
            centers[v] = nodes[far];
        }

        let mut sums = vec![(0.0, 0.0); k];
        for (j, &l) in next.iter().enumerate() {
            sums[l].0 += nodes[j].x;
            sums[l].1 += nodes[j].y;
        }
        let updated: Vec<Point2D> = sums
            .iter()
            .zip(&sizes)
            .map(|(&(sx, sy), &s)| Point2D::new(sx / s as f64, sy / s as f64))
            .collect();
        let shift = centers
            .iter()
            .zip(&updated)
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max);
        let stable = next == labels;
        labels = next;
        centers = updated;
        if stable && shift < convergence_eps {
            converged = true;
            break;
        }
    }

    Ok(HardKMeansResult {
        assignment: ClusterAssignment::from_labels(labels, centers)?,
        iterations,
        converged,
    })
}
