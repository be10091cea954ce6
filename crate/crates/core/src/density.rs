//! Density-peaks analysis for picking initial cluster centers.
//!
//! Each node gets a local density `rho` (a Gaussian KDE by default, or the
//! classic neighbor count within a cutoff `d_c`) and a separation `delta`: the
//! distance to the nearest node of higher density, or the farthest node for
//! the densest one. Centers are nodes with a large `gamma = rho * delta`.
//!
//! Ties in density are broken by node index: among equal `rho`, the lower
//! index counts as denser. This makes the "higher density" set non-empty for
//! every node except exactly one.

use std::f64::consts::PI;

use log::warn;

use crate::config::{Bandwidth, DensityMode, NetworkConfig};
use crate::error::{Error, Result};
use crate::geometry::{NodeId, Point2D};

/// Gaussian KDE evaluated at `query`: `1/(n h^2) * sum_t phi(dx/h) * phi(dy/h)`.
pub fn kde_pdf(query: Point2D, points: &[Point2D], bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Parameter(format!("bandwidth must be > 0, got {bandwidth}")));
    }
    if points.is_empty() {
        return Err(Error::Parameter("kde_pdf needs at least one sample point".into()));
    }
    Ok(kde_unchecked(query, points, bandwidth))
}

#[inline]
fn std_normal(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

fn kde_unchecked(query: Point2D, points: &[Point2D], h: f64) -> f64 {
    let sum: f64 = points
        .iter()
        .map(|p| std_normal((p.x - query.x) / h) * std_normal((p.y - query.y) / h))
        .sum();
    sum / (points.len() as f64 * h * h)
}

/// Silverman's rule for two dimensions: `h = sigma * n^(-1/6)`, with `sigma`
/// the mean of the per-axis sample standard deviations. Falls back to 1 m for
/// degenerate inputs (a single node, or all nodes coincident).
pub fn silverman_bandwidth(points: &[Point2D]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 1.0;
    }
    let nf = n as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
    let (mx, my) = (mx / nf, my / nf);
    let (vx, vy) = points.iter().fold((0.0, 0.0), |(a, b), p| {
        (a + (p.x - mx).powi(2), b + (p.y - my).powi(2))
    });
    let sigma = 0.5 * ((vx / (nf - 1.0)).sqrt() + (vy / (nf - 1.0)).sqrt());
    let h = sigma * nf.powf(-1.0 / 6.0);
    if h > 0.0 && h.is_finite() {
        h
    } else {
        1.0
    }
}

pub fn resolve_bandwidth(bandwidth: Bandwidth, points: &[Point2D]) -> f64 {
    match bandwidth {
        Bandwidth::Auto => silverman_bandwidth(points),
        Bandwidth::Fixed(h) => h,
    }
}

/// Number of other nodes strictly closer than `d_c`, per node.
pub fn local_density_cutoff(nodes: &[Point2D], d_c: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].x.total_cmp(&nodes[b].x).then(a.cmp(&b)));

    let mut counts = vec![0u32; nodes.len()];
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            // Euclidean distance is never below the x gap.
            if nodes[j].x - nodes[i].x > d_c {
                break;
            }
            if nodes[i].distance(nodes[j]) < d_c {
                counts[i] += 1;
                counts[j] += 1;
            }
        }
    }
    counts.into_iter().map(f64::from).collect()
}

/// KDE density at each node, self term included.
pub fn local_density_kde(nodes: &[Point2D], bandwidth: f64) -> Result<Vec<f64>> {
    nodes.iter().map(|&q| kde_pdf(q, nodes, bandwidth)).collect()
}

/// Cutoff distance giving a mean neighbor count of `neighbor_fraction * n`.
///
/// Candidates are the midpoints between consecutive sorted pairwise distances;
/// bisection returns the smallest candidate whose mean cutoff density reaches
/// the target. When the target demands every other node as a neighbor the
/// largest pairwise distance is returned.
pub fn select_cutoff_dc(nodes: &[Point2D], neighbor_fraction: f64) -> Result<f64> {
    let n = nodes.len();
    if n < 2 {
        return Err(Error::Parameter("cutoff selection needs at least two nodes".into()));
    }
    if !(neighbor_fraction > 0.0 && neighbor_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "neighbor_fraction must lie in (0, 1), got {neighbor_fraction}"
        )));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            dists.push(nodes[i].distance(nodes[j]));
        }
    }
    dists.sort_by(f64::total_cmp);
    let max = *dists.last().expect("n >= 2");

    let target = neighbor_fraction * n as f64;
    if target >= (n - 1) as f64 || dists.len() == 1 {
        return Ok(max);
    }

    let candidate = |j: usize| 0.5 * (dists[j - 1] + dists[j]);
    let mean_at = |dc: f64| local_density_cutoff(nodes, dc).iter().sum::<f64>() / n as f64;

    let (mut lo, mut hi) = (1, dists.len() - 1);
    if mean_at(candidate(hi)) < target {
        return Ok(max);
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if mean_at(candidate(mid)) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidate(lo))
}

/// Density priority: higher `rho` first, lower index first among equal `rho`.
fn density_order(rho: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));
    order
}

/// Distance to the nearest denser node; the densest node gets its largest
/// distance to any node. A lone node gets 0.
pub fn delta_distances(nodes: &[Point2D], rho: &[f64]) -> Vec<f64> {
    assert_eq!(nodes.len(), rho.len(), "nodes and rho must have equal length");
    let order = density_order(rho);
    let mut delta = vec![0.0; nodes.len()];
    let Some((&top, rest)) = order.split_first() else {
        return delta;
    };
    delta[top] = nodes
        .iter()
        .map(|p| nodes[top].distance(*p))
        .fold(0.0, f64::max);
    for (pos, &i) in rest.iter().enumerate() {
        // order[..=pos] holds exactly the nodes that outrank i.
        delta[i] = order[..=pos]
            .iter()
            .map(|&j| nodes[i].distance(nodes[j]))
            .fold(f64::INFINITY, f64::min);
    }
    delta
}

/// Per-node `rho`, `delta` and their product.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub rho: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl DensityProfile {
    pub fn new(nodes: &[Point2D], rho: Vec<f64>) -> Self {
        let delta = delta_distances(nodes, &rho);
        let gamma = rho.iter().zip(&delta).map(|(r, d)| r * d).collect();
        Self { rho, delta, gamma }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Indices sorted by descending `gamma`, lower index first on ties.
    pub fn gamma_ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.gamma[b].total_cmp(&self.gamma[a]).then(a.cmp(&b)));
        idx
    }
}

/// Output of initial-center selection.
#[derive(Debug, Clone)]
pub struct CenterSelection {
    pub centers: Vec<Point2D>,
    /// Indices into the node slice the selection was run on.
    pub center_ids: Vec<NodeId>,
    pub k: usize,
    /// Density-peak candidates (local maxima).
    pub candidates: Vec<NodeId>,
    /// Profile over `candidates`, parallel to it.
    pub profile: DensityProfile,
    /// Density of every node.
    pub rho_all: Vec<f64>,
    pub cutoff_dc: f64,
    pub bandwidth: f64,
    pub warnings: Vec<String>,
}

/// Nodes whose density is not exceeded by any node within `d_c`.
pub fn local_maxima(nodes: &[Point2D], rho: &[f64], d_c: f64) -> Vec<usize> {
    (0..nodes.len())
        .filter(|&i| {
            (0..nodes.len()).all(|j| j == i || nodes[i].distance(nodes[j]) >= d_c || rho[j] <= rho[i])
        })
        .collect()
}

/// Pick `k` from a descending `gamma` sequence at its largest ratio gap
/// `gamma[j-1] / gamma[j]`, scanning `j` in `1..=limit`. Ties resolve to the smaller `k`.
pub fn knee_k(sorted_gamma: &[f64], limit: usize) -> usize {
    let mut best_k = 1;
    let mut best_ratio = f64::NEG_INFINITY;
    for j in 1..=limit.min(sorted_gamma.len().saturating_sub(1)) {
        let (hi, lo) = (sorted_gamma[j - 1], sorted_gamma[j]);
        let ratio = if lo > 0.0 {
            hi / lo
        } else if hi > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if ratio > best_ratio {
            best_ratio = ratio;
            best_k = j;
        }
    }
    best_k
}

/// Initial centers and cluster count from density peaks.
///
/// Density is computed over all nodes, candidates are restricted to local
/// maxima within `d_c`, and `delta` / `gamma` are computed inside that
/// candidate set. With `forced_k` the top-`gamma` candidates are returned;
/// if there are fewer candidates than `forced_k`, the ranking falls back to
/// all nodes.
pub fn select_initial_centers(
    nodes: &[Point2D],
    config: &NetworkConfig,
    forced_k: Option<usize>,
) -> Result<CenterSelection> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::Parameter("cannot select centers from zero nodes".into()));
    }
    if forced_k == Some(0) {
        return Err(Error::Parameter("forced_k must be >= 1".into()));
    }
    let bandwidth = resolve_bandwidth(config.kde_bandwidth, nodes);
    if n == 1 {
        let rho = match config.density_mode {
            DensityMode::Kde => local_density_kde(nodes, bandwidth)?,
            DensityMode::Cutoff => vec![0.0],
        };
        return Ok(CenterSelection {
            centers: vec![nodes[0]],
            center_ids: vec![NodeId(0)],
            k: 1,
            candidates: vec![NodeId(0)],
            profile: DensityProfile::new(nodes, rho.clone()),
            rho_all: rho,
            cutoff_dc: 0.0,
            bandwidth,
            warnings: Vec::new(),
        });
    }

    let mut warnings = Vec::new();
    let d_c = select_cutoff_dc(nodes, config.dc_neighbor_fraction)?;
    let rho = match config.density_mode {
        DensityMode::Kde => local_density_kde(nodes, bandwidth)?,
        DensityMode::Cutoff => local_density_cutoff(nodes, d_c),
    };

    let candidates = local_maxima(nodes, &rho, d_c);
    let cand_points: Vec<Point2D> = candidates.iter().map(|&i| nodes[i]).collect();
    let cand_rho: Vec<f64> = candidates.iter().map(|&i| rho[i]).collect();
    let profile = DensityProfile::new(&cand_points, cand_rho);
    let ranking = profile.gamma_ranking();

    let chosen: Vec<usize> = match forced_k {
        Some(k) if k <= candidates.len() => ranking[..k].iter().map(|&r| candidates[r]).collect(),
        Some(k) => {
            let k_eff = k.min(n);
            let msg = format!(
                "forced_k = {k} exceeds the {} density peaks; ranking all {n} nodes instead",
                candidates.len()
            );
            warn!("{msg}");
            warnings.push(msg);
            if k_eff < k {
                let msg = format!("forced_k = {k} exceeds node count {n}; using k = {n}");
                warn!("{msg}");
                warnings.push(msg);
            }
            let full = DensityProfile::new(nodes, rho.clone());
            full.gamma_ranking()[..k_eff].to_vec()
        }
        None => {
            let sorted: Vec<f64> = ranking.iter().map(|&r| profile.gamma[r]).collect();
            let limit = (candidates.len() - 1).min(n.div_ceil(5));
            let k = knee_k(&sorted, limit);
            ranking[..k].iter().map(|&r| candidates[r]).collect()
        }
    };

    Ok(CenterSelection {
        centers: chosen.iter().map(|&i| nodes[i]).collect(),
        center_ids: chosen.iter().map(|&i| NodeId(i)).collect(),
        k: chosen.len(),
        candidates: candidates.into_iter().map(NodeId).collect(),
        profile,
        rho_all: rho,
        cutoff_dc: d_c,
        bandwidth,
        warnings,
    })
}
