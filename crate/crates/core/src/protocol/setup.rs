use log::warn;
use rand::seq::index::sample;

use super::{select_multi_chs, ClusterState, LeachElection, ProtocolKind, SwitchPolicy};
use crate::clustering::{
    form_clusters, hard_kmeans, membership, reassign_boundary, soft_kmeans, ClusterAssignment,
    MembershipMatrix, SoftKMeansResult,
};
use crate::config::{DensityMode, NetworkConfig};
use crate::density::{select_initial_centers, CenterSelection};
use crate::energy::{debit, rx_energy, tx_energy, RadioParams};
use crate::error::{Error, Result};
use crate::geometry::{NodeId, Point2D};
use crate::node::SensorNode;
use crate::rng::SimRng;

/// Everything a set-up phase reads or advances besides the nodes.
pub struct SetupContext<'a> {
    pub config: &'a NetworkConfig,
    pub radio: &'a RadioParams,
    /// Cluster count for the baselines; the density-seeded variant uses
    /// `config.forced_k` or its own estimate.
    pub k: usize,
    pub rng: &'a mut SimRng,
    pub leach: &'a mut LeachElection,
}

#[derive(Debug, Clone)]
pub struct SetupOutcome {
    pub state: ClusterState,
    /// Density-peaks output of this set-up, for the density-seeded variant.
    pub selection: Option<CenterSelection>,
    /// Control energy drawn from the nodes.
    pub energy_drawn: f64,
    pub warnings: Vec<String>,
}

/// Form clusters among the alive nodes and elect their heads.
///
/// The centralized variants first charge every alive node one control packet
/// to the base station and one back, then cluster whoever survived that.
/// LEACH charges advertisement and join messages after its election.
pub fn run_setup_phase(
    nodes: &mut [SensorNode],
    kind: ProtocolKind,
    ctx: &mut SetupContext<'_>,
) -> Result<SetupOutcome> {
    let mut warnings = Vec::new();
    let mut energy_drawn = 0.0;
    let config = ctx.config;

    if kind != ProtocolKind::Leach {
        for node in nodes.iter_mut().filter(|n| n.alive) {
            let d = node.position.distance(config.bs_position);
            let cost = tx_energy(config.control_bits, d, ctx.radio) + rx_energy(config.control_bits, ctx.radio);
            energy_drawn += debit(node, cost);
        }
    }

    let alive: Vec<NodeId> = nodes.iter().filter(|n| n.alive).map(|n| n.id).collect();
    if alive.is_empty() {
        return Ok(SetupOutcome {
            state: ClusterState::empty(nodes.len(), kind.switch_policy()),
            selection: None,
            energy_drawn,
            warnings,
        });
    }
    let points: Vec<Point2D> = alive.iter().map(|id| nodes[id.index()].position).collect();
    let k_target = match kind {
        ProtocolKind::ISKMeans => config.forced_k,
        _ => Some(ctx.k),
    };
    let k = k_target.map(|k| {
        if k > alive.len() {
            let msg = format!("requested k = {k} exceeds {} alive nodes; using k = {}", alive.len(), alive.len());
            warn!("{msg}");
            warnings.push(msg);
        }
        k.clamp(1, alive.len())
    });

    let (state, selection) = match kind {
        ProtocolKind::ISKMeans => {
            let out = cluster_layout(&points, config, k)?;
            warnings.extend(out.warnings);
            let clusters = to_global(&out.assignment, &alive);
            let state = select_multi_chs(&clusters, &out.assignment.centers, nodes, config.ch_constant, SwitchPolicy::Threshold);
            (state, Some(out.selection))
        }
        ProtocolKind::SoftKMeansVanilla => {
            let init = random_centers(&points, k.unwrap_or(1), ctx.rng);
            let (assignment, _) = soft_partition(&points, &init, config, &mut warnings);
            let clusters = to_global(&assignment, &alive);
            let state = select_multi_chs(&clusters, &assignment.centers, nodes, usize::MAX, SwitchPolicy::Threshold);
            (state, None)
        }
        ProtocolKind::HardKMeans => {
            let init = random_centers(&points, k.unwrap_or(1), ctx.rng);
            let assignment = hard_partition(&points, &init, config)?;
            let clusters = to_global(&assignment, &alive);
            let ch_lists = clusters
                .iter()
                .zip(&assignment.centers)
                .map(|(members, mu)| vec![nearest_to(members, *mu, nodes)])
                .collect();
            let state = ClusterState::new(clusters, assignment.centers.clone(), ch_lists, nodes.len(), SwitchPolicy::OnDeath);
            (state, None)
        }
        ProtocolKind::Leach => {
            let (state, drawn) = leach_setup(nodes, &alive, ctx);
            energy_drawn += drawn;
            (state, None)
        }
    };
    state.apply_roles(nodes);
    Ok(SetupOutcome { state, selection, energy_drawn, warnings })
}

fn to_global(assignment: &ClusterAssignment, alive: &[NodeId]) -> Vec<Vec<NodeId>> {
    assignment
        .clusters
        .iter()
        .map(|c| c.iter().map(|local| alive[local.index()]).collect())
        .collect()
}

fn nearest_to(members: &[NodeId], target: Point2D, nodes: &[SensorNode]) -> NodeId {
    *members
        .iter()
        .min_by(|a, b| {
            let da = nodes[a.index()].position.distance_squared(target);
            let db = nodes[b.index()].position.distance_squared(target);
            da.total_cmp(&db).then(a.cmp(b))
        })
        .expect("clusters are non-empty")
}

/// `k` distinct alive nodes as initial centers.
fn random_centers(points: &[Point2D], k: usize, rng: &mut SimRng) -> Vec<Point2D> {
    let mut idx = sample(rng, points.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| points[i]).collect()
}

/// Crisp labels from `z`, dropping clusters that received no node and
/// renormalizing the remaining membership columns.
fn compact(z: &MembershipMatrix, centers: &[Point2D]) -> (ClusterAssignment, MembershipMatrix) {
    match form_clusters(z, centers) {
        Ok(a) => (a, z.clone()),
        Err(_) => {
            let labels: Vec<usize> = (0..z.n())
                .map(|j| {
                    (1..z.k()).fold(0, |best, v| if z.get(v, j) > z.get(best, j) { v } else { best })
                })
                .collect();
            let mut used = vec![false; z.k()];
            labels.iter().for_each(|&l| used[l] = true);
            let assignment = ClusterAssignment::from_labels_compacting(labels, centers.to_vec());
            let kept: Vec<usize> = (0..z.k()).filter(|&v| used[v]).collect();
            let rows: Vec<Vec<f64>> = kept
                .iter()
                .map(|&v| {
                    (0..z.n())
                        .map(|j| {
                            let col: f64 = kept.iter().map(|&u| z.get(u, j)).sum();
                            z.get(v, j) / col
                        })
                        .collect()
                })
                .collect();
            let z = MembershipMatrix::from_rows(rows).expect("kept rows are rectangular");
            (assignment, z)
        }
    }
}

fn hard_partition(points: &[Point2D], init: &[Point2D], config: &NetworkConfig) -> Result<ClusterAssignment> {
    Ok(hard_kmeans(points, init, config.convergence_eps, config.r_max)?.assignment)
}

/// Soft k-means from `init`; falls back to Lloyd's algorithm if a cluster degenerates.
fn soft_partition(
    points: &[Point2D],
    init: &[Point2D],
    config: &NetworkConfig,
    warnings: &mut Vec<String>,
) -> (ClusterAssignment, MembershipMatrix) {
    match soft_kmeans(points, init, config.beta, config.convergence_eps, config.r_max) {
        Ok(res) => compact(&res.membership, &res.centers),
        Err(e) => hard_fallback(points, init, config, warnings, e),
    }
}

fn hard_fallback(
    points: &[Point2D],
    init: &[Point2D],
    config: &NetworkConfig,
    warnings: &mut Vec<String>,
    cause: Error,
) -> (ClusterAssignment, MembershipMatrix) {
    let msg = format!("soft k-means failed ({cause}); using hard k-means");
    warn!("{msg}");
    warnings.push(msg);
    let assignment = hard_kmeans(points, init, config.convergence_eps, config.r_max)
        .expect("init has between 1 and n centers")
        .assignment;
    let z = membership(points, &assignment.centers, config.beta).expect("valid beta and centers");
    (assignment, z)
}

/// Result of the density-seeded clustering pipeline on a bare layout.
#[derive(Debug, Clone)]
pub struct LayoutClustering {
    pub selection: CenterSelection,
    pub membership: MembershipMatrix,
    /// Crisp clusters before boundary reassignment.
    pub initial: ClusterAssignment,
    /// Clusters after boundary reassignment.
    pub assignment: ClusterAssignment,
    pub warnings: Vec<String>,
}

/// Density peaks, soft k-means, crisp labels and boundary reassignment.
///
/// A soft k-means run that hits the iteration cap is repeated once from
/// cut-off density seeds and the lower-cost result is kept. If both runs
/// degenerate the partition comes from Lloyd's algorithm on the same seeds.
pub fn cluster_layout(points: &[Point2D], config: &NetworkConfig, k: Option<usize>) -> Result<LayoutClustering> {
    let mut warnings = Vec::new();
    let warnings = &mut warnings;
    let selection = select_initial_centers(points, config, k)?;
    warnings.extend(selection.warnings.iter().cloned());
    let first = soft_kmeans(points, &selection.centers, config.beta, config.convergence_eps, config.r_max);

    let mut chosen: std::result::Result<SoftKMeansResult, Error> = first;
    let mut chosen_selection = selection;
    let needs_retry = !matches!(&chosen, Ok(r) if r.converged);
    if needs_retry {
        let mut alt = config.clone();
        alt.density_mode = DensityMode::Cutoff;
        let msg = "soft k-means did not converge; re-seeding with cut-off densities".to_string();
        warn!("{msg}");
        warnings.push(msg);
        let alt_selection = select_initial_centers(points, &alt, k)?;
        let second = soft_kmeans(points, &alt_selection.centers, config.beta, config.convergence_eps, config.r_max);
        let take_second = match (&chosen, &second) {
            (Ok(a), Ok(b)) => b.final_cost() < a.final_cost(),
            (Err(_), Ok(_)) => true,
            _ => false,
        };
        if take_second {
            chosen = second;
            chosen_selection = alt_selection;
        }
    }

    let (assignment, z) = match chosen {
        Ok(res) => compact(&res.membership, &res.centers),
        Err(e) => hard_fallback(points, &chosen_selection.centers, config, warnings, e),
    };
    let reassigned = reassign_boundary(&assignment, &z, config.reassign_threshold);
    Ok(LayoutClustering {
        selection: chosen_selection,
        membership: z,
        initial: assignment,
        assignment: reassigned,
        warnings: std::mem::take(warnings),
    })
}

/// Self-election, nearest-head membership and the advertisement/join exchange.
fn leach_setup(nodes: &mut [SensorNode], alive: &[NodeId], ctx: &mut SetupContext<'_>) -> (ClusterState, f64) {
    let config = ctx.config;
    let mut heads = ctx.leach.elect(nodes, ctx.rng);
    if heads.is_empty() {
        // Nobody volunteered: every node reports straight to the base station.
        heads = alive.to_vec();
    }
    let mut clusters: Vec<Vec<NodeId>> = heads.iter().map(|&h| vec![h]).collect();
    for &id in alive {
        if heads.contains(&id) {
            continue;
        }
        let p = nodes[id.index()].position;
        let v = (0..heads.len())
            .min_by(|&a, &b| {
                let da = p.distance_squared(nodes[heads[a].index()].position);
                let db = p.distance_squared(nodes[heads[b].index()].position);
                da.total_cmp(&db)
            })
            .expect("at least one head");
        clusters[v].push(id);
    }
    for c in &mut clusters {
        c.sort_unstable();
    }

    let bits = config.control_bits;
    let mut drawn = 0.0;
    for (v, &h) in heads.iter().enumerate() {
        let hp = nodes[h.index()].position;
        let members: Vec<NodeId> = clusters[v].iter().copied().filter(|&m| m != h).collect();
        let range = members
            .iter()
            .map(|m| nodes[m.index()].position.distance(hp))
            .fold(0.0, f64::max);
        let head_cost = tx_energy(bits, range, ctx.radio) + members.len() as f64 * rx_energy(bits, ctx.radio);
        drawn += debit(&mut nodes[h.index()], head_cost);
        for m in members {
            let d = nodes[m.index()].position.distance(hp);
            let cost = rx_energy(bits, ctx.radio) + tx_energy(bits, d, ctx.radio);
            drawn += debit(&mut nodes[m.index()], cost);
        }
    }

    let centers = heads.iter().map(|h| nodes[h.index()].position).collect();
    let ch_lists = heads.iter().map(|&h| vec![h]).collect();
    (ClusterState::new(clusters, centers, ch_lists, nodes.len(), SwitchPolicy::Fixed), drawn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, PROTOCOL_STREAM};
    use rand::Rng;

    fn blobs(seed: u64) -> Vec<SensorNode> {
        let mut rng = stream(seed, 9);
        (0..40)
            .map(|i| {
                let cx = if i < 20 { 20.0 } else { 80.0 };
                let p = Point2D::new(cx + rng.random_range(-5.0..5.0), 50.0 + rng.random_range(-5.0..5.0));
                SensorNode::new(i, p, 0.2)
            })
            .collect()
    }

    fn run(nodes: &mut [SensorNode], kind: ProtocolKind, config: &NetworkConfig, k: usize) -> SetupOutcome {
        let radio = RadioParams::from_config(config);
        let mut rng = stream(1, PROTOCOL_STREAM);
        let mut leach = LeachElection::new(nodes.len(), k);
        let mut ctx = SetupContext { config, radio: &radio, k, rng: &mut rng, leach: &mut leach };
        run_setup_phase(nodes, kind, &mut ctx).unwrap()
    }

    #[test]
    fn two_blobs_give_two_headed_clusters() {
        let config = NetworkConfig { forced_k: Some(2), ..NetworkConfig::default() };
        let mut nodes = blobs(4);
        let out = run(&mut nodes, ProtocolKind::ISKMeans, &config, 2);
        assert_eq!(out.state.k(), 2);
        assert!(out.state.ch_lists.iter().all(|l| !l.is_empty()));
        out.state.check_invariants(&nodes).unwrap();
        for members in &out.state.clusters {
            let left = members.iter().filter(|id| id.index() < 20).count();
            assert!(left == 0 || left == members.len());
        }
    }

    #[test]
    fn every_variant_partitions_the_alive_nodes() {
        let config = NetworkConfig::default();
        for kind in ProtocolKind::ALL {
            let mut nodes = blobs(2);
            nodes[3].energy = 0.0;
            nodes[3].alive = false;
            let out = run(&mut nodes, kind, &config, 3);
            out.state.check_invariants(&nodes).unwrap();
            let covered: usize = out.state.clusters.iter().map(Vec::len).sum();
            assert_eq!(covered, 39, "{kind}");
            assert_eq!(out.state.labels[3], None);
            assert!(out.energy_drawn > 0.0);
        }
    }

    #[test]
    fn sole_survivor_heads_itself() {
        let config = NetworkConfig::default();
        for kind in ProtocolKind::ALL {
            let mut nodes = blobs(5);
            for n in nodes.iter_mut().skip(1) {
                n.energy = 0.0;
                n.alive = false;
            }
            let out = run(&mut nodes, kind, &config, 4);
            assert_eq!(out.state.clusters, vec![vec![NodeId(0)]], "{kind}");
            assert_eq!(out.state.active_ch(0), NodeId(0));
        }
    }

    #[test]
    fn centralized_control_cost() {
        let config = NetworkConfig::default();
        let radio = RadioParams::from_config(&config);
        let mut nodes = vec![SensorNode::new(0, Point2D::new(50.0, 50.0), 0.2)];
        let out = run(&mut nodes, ProtocolKind::HardKMeans, &config, 1);
        let expected = tx_energy(100, 100.0, &radio) + rx_energy(100, &radio);
        assert!((out.energy_drawn - expected).abs() < 1e-18);
    }
}
