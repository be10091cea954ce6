use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::geometry::{NodeId, Point2D};
use crate::rng::{self, LAYOUT_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Member,
    /// The currently active head of its cluster.
    ClusterHead,
    /// Elected as a head but waiting for its turn.
    CandidateCH,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Member => "member",
            Role::ClusterHead => "ch",
            Role::CandidateCH => "candidate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    pub id: NodeId,
    pub position: Point2D,
    /// Residual energy in joules, never negative.
    pub energy: f64,
    pub alive: bool,
    pub role: Role,
}

impl SensorNode {
    pub fn new(id: usize, position: Point2D, energy: f64) -> Self {
        Self {
            id: NodeId(id),
            position,
            energy,
            alive: energy > 0.0,
            role: Role::Member,
        }
    }
}

/// Place `n_nodes` nodes uniformly over the configured rectangle.
///
/// The layout is drawn from the seed's layout stream only, so every protocol
/// simulated with the same seed sees the same field.
pub fn deploy_uniform(config: &NetworkConfig, seed: u64) -> Result<Vec<SensorNode>> {
    if !(config.area_width > 0.0 && config.area_height > 0.0) {
        return Err(Error::Config(format!(
            "deployment area {} x {} has zero extent",
            config.area_width, config.area_height
        )));
    }
    if config.n_nodes == 0 {
        return Err(Error::Config("n_nodes must be >= 1".into()));
    }
    let mut rng = rng::stream(seed, LAYOUT_STREAM);
    Ok((0..config.n_nodes)
        .map(|i| {
            let x = rng.random::<f64>() * config.area_width;
            let y = rng.random::<f64>() * config.area_height;
            SensorNode::new(i, Point2D::new(x, y), config.initial_energy)
        })
        .collect())
}

pub fn positions(nodes: &[SensorNode]) -> Vec<Point2D> {
    nodes.iter().map(|n| n.position).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_gets_initial_energy() {
        let cfg = NetworkConfig { n_nodes: 1, ..NetworkConfig::default() };
        let nodes = deploy_uniform(&cfg, 3).unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0].energy, 0.2);
        assert!(nodes[0].alive);
        assert_eq!(nodes[0].role, Role::Member);
        assert_eq!(nodes[0].id, NodeId(0));
    }

    #[test]
    fn deterministic_and_in_bounds() {
        let cfg = NetworkConfig::default();
        let a = deploy_uniform(&cfg, 42).unwrap();
        let b = deploy_uniform(&cfg, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|n| (0.0..=100.0).contains(&n.position.x)
            && (0.0..=100.0).contains(&n.position.y)));
        let c = deploy_uniform(&cfg, 43).unwrap();
        assert_ne!(positions(&a), positions(&c));
    }

    #[test]
    fn zero_area_is_rejected() {
        let cfg = NetworkConfig { area_height: 0.0, ..NetworkConfig::default() };
        assert!(matches!(deploy_uniform(&cfg, 1), Err(Error::Config(_))));
    }
}
