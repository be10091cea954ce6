//! Round-based cluster protocols.
//!
//! A run alternates a set-up phase, which partitions the alive nodes and
//! elects cluster heads, with steady rounds in which members report to their
//! active head and heads forward aggregated data to the base station. A
//! `RESTART` event from any cluster sends the whole network back to set-up.

mod leach;
mod setup;
mod simulate;
mod steady;
mod switch;

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::{NodeId, Point2D};
use crate::node::{Role, SensorNode};

pub use leach::LeachElection;
pub use setup::{cluster_layout, run_setup_phase, LayoutClustering, SetupContext, SetupOutcome};
pub use simulate::{simulate, simulate_layout, Simulation, SimulationOutput};
pub use steady::{head_round_energy, run_steady_round};
pub use switch::maybe_switch_ch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    /// Density-seeded soft k-means with boundary reassignment and multiple rotating heads.
    ISKMeans,
    /// Soft k-means from random centers with one head per cluster.
    SoftKMeansVanilla,
    /// Lloyd's k-means with one fixed head per cluster.
    HardKMeans,
    Leach,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [
        ProtocolKind::ISKMeans,
        ProtocolKind::SoftKMeansVanilla,
        ProtocolKind::HardKMeans,
        ProtocolKind::Leach,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::ISKMeans => "is-kmeans",
            ProtocolKind::SoftKMeansVanilla => "soft-kmeans",
            ProtocolKind::HardKMeans => "hard-kmeans",
            ProtocolKind::Leach => "leach",
        }
    }

    /// When an active head hands over.
    pub fn switch_policy(self) -> SwitchPolicy {
        match self {
            ProtocolKind::ISKMeans | ProtocolKind::SoftKMeansVanilla => SwitchPolicy::Threshold,
            ProtocolKind::HardKMeans => SwitchPolicy::OnDeath,
            ProtocolKind::Leach => SwitchPolicy::Fixed,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "is-kmeans" | "iskmeans" | "is-k-means" => Ok(ProtocolKind::ISKMeans),
            "soft-kmeans" | "soft-k-means" | "vanilla" => Ok(ProtocolKind::SoftKMeansVanilla),
            "hard-kmeans" | "hard-k-means" | "kmeans" => Ok(ProtocolKind::HardKMeans),
            "leach" => Ok(ProtocolKind::Leach),
            other => Err(Error::Parameter(format!(
                "unknown protocol `{other}` (expected is-kmeans, soft-kmeans, hard-kmeans or leach)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchPolicy {
    /// Hand over when the head's round-over-round residual ratio drops below the switch threshold.
    Threshold,
    /// Keep the head until it dies.
    OnDeath,
    /// Never hand over; the protocol re-elects every round.
    Fixed,
}

/// Clusters of the current set-up phase and their head schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub clusters: Vec<Vec<NodeId>>,
    pub centers: Vec<Point2D>,
    /// Cluster of every deployed node; `None` for nodes left out of the set-up.
    pub labels: Vec<Option<usize>>,
    /// Head candidates per cluster in activation order.
    pub ch_lists: Vec<Vec<NodeId>>,
    pub active_ch_index: Vec<usize>,
    /// Residual of each active head at the start of the current round.
    pub last_round_ch_energy: Vec<f64>,
    pub policy: SwitchPolicy,
    /// Set once a cluster has emitted `RESTART`.
    pub restart_requested: bool,
}

impl ClusterState {
    /// Assemble a state with every cluster starting at its first head.
    pub fn new(
        clusters: Vec<Vec<NodeId>>,
        centers: Vec<Point2D>,
        ch_lists: Vec<Vec<NodeId>>,
        n_total: usize,
        policy: SwitchPolicy,
    ) -> Self {
        let mut labels = vec![None; n_total];
        for (v, members) in clusters.iter().enumerate() {
            for id in members {
                labels[id.index()] = Some(v);
            }
        }
        let k = clusters.len();
        Self {
            clusters,
            centers,
            labels,
            ch_lists,
            active_ch_index: vec![0; k],
            last_round_ch_energy: vec![0.0; k],
            policy,
            restart_requested: false,
        }
    }

    /// A state with no clusters, used once every node is dead.
    pub fn empty(n_total: usize, policy: SwitchPolicy) -> Self {
        Self::new(Vec::new(), Vec::new(), Vec::new(), n_total, policy)
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn active_ch(&self, cluster: usize) -> NodeId {
        self.ch_lists[cluster][self.active_ch_index[cluster]]
    }

    /// Write each node's role according to the head schedules.
    pub fn apply_roles(&self, nodes: &mut [SensorNode]) {
        for node in nodes.iter_mut() {
            node.role = Role::Member;
        }
        for v in 0..self.k() {
            for (i, id) in self.ch_lists[v].iter().enumerate() {
                nodes[id.index()].role = if i == self.active_ch_index[v] {
                    Role::ClusterHead
                } else if i > self.active_ch_index[v] {
                    Role::CandidateCH
                } else {
                    Role::Member
                };
            }
        }
    }

    /// Check the structural invariants against the node states, returning a
    /// description of the first violation.
    pub fn check_invariants(&self, nodes: &[SensorNode]) -> std::result::Result<(), String> {
        let k = self.k();
        if self.ch_lists.len() != k || self.active_ch_index.len() != k || self.centers.len() != k {
            return Err("per-cluster vectors differ in length".into());
        }
        let mut seen_ch = vec![false; nodes.len()];
        for v in 0..k {
            let any_alive = self.clusters[v].iter().any(|id| nodes[id.index()].alive);
            if any_alive && self.ch_lists[v].is_empty() {
                return Err(format!("cluster {v} has alive nodes but no heads"));
            }
            if self.ch_lists[v].is_empty() {
                continue;
            }
            if self.active_ch_index[v] >= self.ch_lists[v].len() {
                return Err(format!("cluster {v} active index out of bounds"));
            }
            for id in &self.ch_lists[v] {
                if self.labels[id.index()] != Some(v) {
                    return Err(format!("head {id} is not a member of cluster {v}"));
                }
                if std::mem::replace(&mut seen_ch[id.index()], true) {
                    return Err(format!("head {id} listed twice"));
                }
            }
        }
        let mut covered = vec![false; nodes.len()];
        for members in &self.clusters {
            for id in members {
                if std::mem::replace(&mut covered[id.index()], true) {
                    return Err(format!("node {id} is in two clusters"));
                }
            }
        }
        Ok(())
    }
}

/// Total residual energy of the alive nodes among `members`.
pub fn cluster_energy<'a>(members: impl IntoIterator<Item = &'a SensorNode>) -> f64 {
    members
        .into_iter()
        .filter(|n| n.alive)
        .map(|n| n.energy)
        .sum()
}

/// Mean residual energy of the alive nodes among `members`.
pub fn cluster_avg_energy<'a>(members: impl IntoIterator<Item = &'a SensorNode>) -> Result<f64> {
    let (sum, count) = members
        .into_iter()
        .filter(|n| n.alive)
        .fold((0.0, 0usize), |(s, c), n| (s + n.energy, c + 1));
    if count == 0 {
        Err(Error::UndefinedAverage)
    } else {
        Ok(sum / count as f64)
    }
}

/// Number of head slots for a cluster of `size` alive nodes.
pub fn ch_slot_count(size: usize, ch_constant: usize) -> usize {
    size.div_ceil(ch_constant.max(1)).max(1)
}

/// Elect the head schedule of every cluster.
///
/// Alive members are visited from nearest to farthest from the cluster
/// center and admitted while their residual exceeds the cluster mean. Slots
/// left open are filled by the highest-energy remaining members, nearer ones
/// first on ties. Clusters without alive nodes are dropped with a warning.
pub fn select_multi_chs(
    clusters: &[Vec<NodeId>],
    centers: &[Point2D],
    nodes: &[SensorNode],
    ch_constant: usize,
    policy: SwitchPolicy,
) -> ClusterState {
    let mut kept_clusters = Vec::new();
    let mut kept_centers = Vec::new();
    let mut ch_lists = Vec::new();

    for (v, members) in clusters.iter().enumerate() {
        let mu = centers[v];
        let mut alive: Vec<&SensorNode> = members
            .iter()
            .map(|id| &nodes[id.index()])
            .filter(|n| n.alive)
            .collect();
        let Ok(mean) = cluster_avg_energy(alive.iter().copied()) else {
            warn!("cluster {v} has no alive nodes; excluded from head election");
            continue;
        };
        let p = ch_slot_count(alive.len(), ch_constant);
        alive.sort_by(|a, b| {
            a.position
                .distance_squared(mu)
                .total_cmp(&b.position.distance_squared(mu))
                .then(a.id.cmp(&b.id))
        });

        let mut chosen: Vec<NodeId> = alive
            .iter()
            .filter(|n| n.energy > mean)
            .take(p)
            .map(|n| n.id)
            .collect();
        if chosen.len() < p {
            let mut rest: Vec<&&SensorNode> =
                alive.iter().filter(|n| !chosen.contains(&n.id)).collect();
            // `alive` is already distance-ordered, so a stable sort keeps nearer nodes first.
            rest.sort_by(|a, b| b.energy.total_cmp(&a.energy));
            let missing = p - chosen.len();
            chosen.extend(rest.into_iter().take(missing).map(|n| n.id));
        }

        kept_clusters.push(members.clone());
        kept_centers.push(mu);
        ch_lists.push(chosen);
    }

    ClusterState::new(kept_clusters, kept_centers, ch_lists, nodes.len(), policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: usize, x: f64, y: f64, e: f64) -> SensorNode {
        SensorNode::new(id, Point2D::new(x, y), e)
    }

    #[test]
    fn energy_sums_and_means() {
        let nodes = [node(0, 0.0, 0.0, 0.2), node(1, 0.0, 0.0, 0.2), node(2, 0.0, 0.0, 0.2)];
        assert!((cluster_energy(&nodes) - 0.6).abs() < 1e-15);
        assert_eq!(cluster_energy(std::iter::empty()), 0.0);
        let mixed = [node(0, 0.0, 0.0, 0.1), node(1, 0.0, 0.0, 0.0), node(2, 0.0, 0.0, 0.3)];
        assert!((cluster_energy(&mixed) - 0.4).abs() < 1e-15);
        assert!((cluster_avg_energy(&mixed).unwrap() - 0.2).abs() < 1e-15);
        let three = [node(0, 0.0, 0.0, 0.2), node(1, 0.0, 0.0, 0.2), node(2, 0.0, 0.0, 0.05)];
        assert!((cluster_avg_energy(&three).unwrap() - 0.15).abs() < 1e-15);
        let dead = [node(0, 0.0, 0.0, 0.0)];
        assert!(matches!(cluster_avg_energy(&dead), Err(Error::UndefinedAverage)));
    }

    #[test]
    fn slot_counts() {
        assert_eq!(ch_slot_count(30, 10), 3);
        assert_eq!(ch_slot_count(1, 10), 1);
        assert_eq!(ch_slot_count(10, 10), 1);
        assert_eq!(ch_slot_count(11, 10), 2);
    }

    #[test]
    fn thirty_node_cluster_gets_three_heads() {
        let nodes: Vec<SensorNode> = (0..30)
            .map(|i| node(i, i as f64, 0.0, 0.1 + 0.001 * (i % 7) as f64))
            .collect();
        let ids: Vec<NodeId> = (0..30).map(NodeId).collect();
        let state = select_multi_chs(&[ids], &[Point2D::new(0.0, 0.0)], &nodes, 10, SwitchPolicy::Threshold);
        assert_eq!(state.ch_lists[0].len(), 3);
        let mean = cluster_avg_energy(&nodes).unwrap();
        for id in &state.ch_lists[0] {
            assert!(nodes[id.index()].energy > mean);
        }
        // Mean is 0.10283 J, so nodes with i % 7 >= 3 qualify, nearest first.
        assert_eq!(state.ch_lists[0], vec![NodeId(3), NodeId(4), NodeId(5)]);
        state.check_invariants(&nodes).unwrap();
    }

    #[test]
    fn lone_node_heads_itself() {
        let nodes = [node(0, 3.0, 3.0, 0.2)];
        let state = select_multi_chs(&[vec![NodeId(0)]], &[Point2D::new(0.0, 0.0)], &nodes, 10, SwitchPolicy::Threshold);
        assert_eq!(state.ch_lists, vec![vec![NodeId(0)]]);
    }

    #[test]
    fn equal_energy_falls_back_to_nearest() {
        let nodes: Vec<SensorNode> = (0..25).map(|i| node(i, 25.0 - i as f64, 0.0, 0.2)).collect();
        let ids: Vec<NodeId> = (0..25).map(NodeId).collect();
        let state = select_multi_chs(&[ids], &[Point2D::new(0.0, 0.0)], &nodes, 10, SwitchPolicy::Threshold);
        assert_eq!(state.ch_lists[0], vec![NodeId(24), NodeId(23), NodeId(22)]);
    }

    #[test]
    fn dead_cluster_is_excluded() {
        let nodes = [node(0, 0.0, 0.0, 0.0), node(1, 5.0, 0.0, 0.2)];
        let state = select_multi_chs(
            &[vec![NodeId(0)], vec![NodeId(1)]],
            &[Point2D::new(0.0, 0.0), Point2D::new(5.0, 0.0)],
            &nodes,
            10,
            SwitchPolicy::Threshold,
        );
        assert_eq!(state.k(), 1);
        assert_eq!(state.labels, vec![None, Some(0)]);
    }

    #[test]
    fn protocol_names_round_trip() {
        for kind in ProtocolKind::ALL {
            assert_eq!(kind.as_str().parse::<ProtocolKind>().unwrap(), kind);
        }
        assert!("vleach".parse::<ProtocolKind>().is_err());
    }
}
