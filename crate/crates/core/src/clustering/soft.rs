use super::{cost, membership, update_centers, MembershipMatrix};
use crate::error::{Error, Result};
use crate::geometry::Point2D;

#[derive(Debug, Clone)]
pub struct SoftKMeansResult {
    /// Membership evaluated at the final centers.
    pub membership: MembershipMatrix,
    pub centers: Vec<Point2D>,
    pub iterations: usize,
    pub converged: bool,
    /// Weighted cost after each center update, with the membership that produced it.
    pub cost_history: Vec<f64>,
}

impl SoftKMeansResult {
    pub fn final_cost(&self) -> f64 {
        self.cost_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Alternate membership and center updates until both settle.
///
/// Iteration `t` computes the membership at the current centers, moves the
/// centers to the weighted means, then evaluates the membership at the new
/// centers. The run has converged when the largest membership change and the
/// largest center displacement are both below `convergence_eps`. Otherwise it
/// stops after `r_max` iterations with `converged == false`; re-seeding is the
/// caller's decision.
pub fn soft_kmeans(
    nodes: &[Point2D],
    initial_centers: &[Point2D],
    beta: f64,
    convergence_eps: f64,
    r_max: usize,
) -> Result<SoftKMeansResult> {
    if r_max == 0 {
        return Err(Error::Parameter("r_max must be >= 1".into()));
    }
    if nodes.is_empty() {
        return Err(Error::Parameter("soft k-means needs at least one node".into()));
    }
    let mut centers = initial_centers.to_vec();
    let mut z = membership(nodes, &centers, beta)?;
    let mut cost_history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < r_max {
        iterations += 1;
        let next_centers = update_centers(nodes, &z)?;
        cost_history.push(cost(nodes, &z, &next_centers));
        let shift = centers
            .iter()
            .zip(&next_centers)
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max);
        let next_z = membership(nodes, &next_centers, beta)?;
        let z_change = z.max_abs_diff(&next_z);
        centers = next_centers;
        z = next_z;
        if z_change < convergence_eps && shift < convergence_eps {
            converged = true;
            break;
        }
    }

    Ok(SoftKMeansResult { membership: z, centers, iterations, converged, cost_history })
}
