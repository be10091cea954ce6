//! Per-round logs and network-lifetime metrics.

use crate::geometry::NodeId;
use crate::node::Role;

/// Something notable that happened during a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// `cluster` handed its active head role from `from` to `to`.
    Switch { cluster: usize, from: NodeId, to: NodeId },
    /// `cluster` ran out of head candidates and asked for re-clustering.
    Restart { cluster: usize },
    Death { node: NodeId },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Switch { .. } => "SWITCH",
            Event::Restart { .. } => "RESTART",
            Event::Death { .. } => "DEATH",
        }
    }
}

/// State of the network at the end of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub round: usize,
    /// Residual joules of every deployed node.
    pub residual: Vec<f64>,
    pub alive_count: usize,
    pub events: Vec<Event>,
    /// Alive members per cluster.
    pub per_cluster_sizes: Vec<usize>,
    pub labels: Vec<Option<usize>>,
    pub roles: Vec<Role>,
    /// Energy actually withdrawn from nodes this round, set-up included.
    pub energy_drawn: f64,
}

/// A lifetime milestone; `censored` means it was never reached and `round`
/// holds the total number of simulated rounds instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Milestone {
    pub round: usize,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeMetrics {
    /// First node death.
    pub fnd: Milestone,
    /// Half of the nodes dead.
    pub hnd: Milestone,
    /// Network considered dead (`death_fraction_for_lnd` of nodes gone).
    pub lnd: Milestone,
    /// `(checkpoint round, energy variance)`.
    pub ev_by_round: Vec<(usize, f64)>,
    pub total_rounds: usize,
}

/// Population variance of residual energies, dead nodes included at 0 J.
pub fn energy_variance(residual: &[f64]) -> f64 {
    // Welford's update.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &e) in residual.iter().enumerate() {
        let delta = e - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (e - mean);
    }
    if residual.is_empty() {
        0.0
    } else {
        (m2 / residual.len() as f64).max(0.0)
    }
}

/// FND, HND and LND from a run's logs, plus energy variance at `checkpoints`.
///
/// HND is the first round with at least `ceil(n/2)` dead nodes and LND the
/// first round with at least `death_fraction * n` dead. A checkpoint past the
/// end of the run samples the final state, since energies no longer change.
pub fn lifetime_metrics(
    logs: &[RoundLog],
    death_fraction: f64,
    checkpoints: &[usize],
) -> LifetimeMetrics {
    let total_rounds = logs.last().map_or(0, |l| l.round);
    let n = logs.first().map_or(0, |l| l.residual.len());

    let first_round = |dead_needed: f64| -> Milestone {
        logs.iter()
            .find(|l| (n - l.alive_count) as f64 >= dead_needed)
            .map_or(Milestone { round: total_rounds, censored: true }, |l| Milestone {
                round: l.round,
                censored: false,
            })
    };

    let fnd = first_round(1.0);
    let hnd = first_round(n.div_ceil(2).max(1) as f64);
    let lnd = first_round((death_fraction * n as f64 - 1e-9).max(1.0));

    let ev_by_round = checkpoints
        .iter()
        .filter_map(|&r| {
            let log = logs.iter().rev().find(|l| l.round <= r).or(logs.first())?;
            Some((r, energy_variance(&log.residual)))
        })
        .collect();

    LifetimeMetrics { fnd, hnd, lnd, ev_by_round, total_rounds }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(round: usize, residual: Vec<f64>) -> RoundLog {
        let alive_count = residual.iter().filter(|&&e| e > 0.0).count();
        let n = residual.len();
        RoundLog {
            round,
            residual,
            alive_count,
            events: Vec::new(),
            per_cluster_sizes: Vec::new(),
            labels: vec![None; n],
            roles: vec![Role::Member; n],
            energy_drawn: 0.0,
        }
    }

    #[test]
    fn variance_examples() {
        assert_eq!(energy_variance(&[0.2, 0.2, 0.2]), 0.0);
        assert!((energy_variance(&[0.0, 0.2]) - 0.01).abs() < 1e-17);
        let base = [0.1, 0.05, 0.3, 0.0];
        let shifted: Vec<f64> = base.iter().map(|e| e + 7.0).collect();
        assert!((energy_variance(&base) - energy_variance(&shifted)).abs() < 1e-12);
    }

    #[test]
    fn no_deaths_is_censored() {
        let logs: Vec<RoundLog> = (1..=5).map(|r| log(r, vec![0.1; 4])).collect();
        let m = lifetime_metrics(&logs, 0.85, &[3]);
        for ms in [m.fnd, m.hnd, m.lnd] {
            assert_eq!(ms, Milestone { round: 5, censored: true });
        }
        assert_eq!(m.total_rounds, 5);
    }

    #[test]
    fn lone_node_collapses_milestones() {
        let mut logs: Vec<RoundLog> = (1..7).map(|r| log(r, vec![0.1])).collect();
        logs.push(log(7, vec![0.0]));
        let m = lifetime_metrics(&logs, 0.85, &[]);
        let died = Milestone { round: 7, censored: false };
        assert_eq!((m.fnd, m.hnd, m.lnd), (died, died, died));
    }

    #[test]
    fn constructed_death_schedule() {
        let mut logs = Vec::new();
        let mut energy = vec![0.2; 100];
        for r in 1..=90 {
            match r {
                10 => energy[0] = 0.0,
                50 => energy[1..50].iter_mut().for_each(|e| *e = 0.0),
                80 => energy[50..85].iter_mut().for_each(|e| *e = 0.0),
                _ => {}
            }
            logs.push(log(r, energy.clone()));
        }
        let m = lifetime_metrics(&logs, 0.85, &[20, 200]);
        assert_eq!(m.fnd.round, 10);
        assert_eq!(m.hnd.round, 50);
        assert_eq!(m.lnd.round, 80);
        assert!(!m.lnd.censored);
        assert_eq!(m.ev_by_round[1].1, energy_variance(&logs[89].residual));
    }
}
