use super::{ClusterState, SwitchPolicy};
use crate::config::NetworkConfig;
use crate::energy::{debit, tx_energy, RadioParams};
use crate::geometry::NodeId;
use crate::metrics::Event;
use crate::node::SensorNode;

/// Farthest alive cluster member from `from`, or 0 m if it is alone.
fn broadcast_range(state: &ClusterState, cluster: usize, from: NodeId, nodes: &[SensorNode]) -> f64 {
    let origin = nodes[from.index()].position;
    state.clusters[cluster]
        .iter()
        .filter(|id| **id != from && nodes[id.index()].alive)
        .map(|id| nodes[id.index()].position.distance(origin))
        .fold(0.0, f64::max)
}

fn next_alive(state: &ClusterState, cluster: usize, nodes: &[SensorNode]) -> Option<usize> {
    let list = &state.ch_lists[cluster];
    (state.active_ch_index[cluster] + 1..list.len()).find(|&i| nodes[list[i].index()].alive)
}

/// Advance to the next alive head of `cluster`, or request re-clustering if none is left.
/// Returns the emitted event and the control energy drawn.
pub(super) fn hand_over(
    state: &mut ClusterState,
    cluster: usize,
    nodes: &mut [SensorNode],
    config: &NetworkConfig,
    radio: &RadioParams,
) -> (Event, f64) {
    let from = state.active_ch(cluster);
    let from_alive = nodes[from.index()].alive;
    match next_alive(state, cluster, nodes) {
        Some(i) => {
            state.active_ch_index[cluster] = i;
            let to = state.active_ch(cluster);
            // The outgoing head announces the change; if it has died the incoming one does.
            let speaker = if from_alive { from } else { to };
            let range = broadcast_range(state, cluster, speaker, nodes);
            let drawn = debit(&mut nodes[speaker.index()], tx_energy(config.control_bits, range, radio));
            (Event::Switch { cluster, from, to }, drawn)
        }
        None => {
            state.restart_requested = true;
            let drawn = if from_alive {
                let d = nodes[from.index()].position.distance(config.bs_position);
                debit(&mut nodes[from.index()], tx_energy(config.control_bits, d, radio))
            } else {
                0.0
            };
            (Event::Restart { cluster }, drawn)
        }
    }
}

/// End-of-round head rotation.
///
/// Under [`SwitchPolicy::Threshold`] a cluster hands over when the ratio of
/// its active head's residual now to its residual at the start of the round
/// falls below `switch_threshold`; a head that died counts as ratio 0.
/// [`SwitchPolicy::OnDeath`] hands over only on death and
/// [`SwitchPolicy::Fixed`] never does. Returns the events and the control
/// energy drawn.
pub fn maybe_switch_ch(
    state: &mut ClusterState,
    nodes: &mut [SensorNode],
    config: &NetworkConfig,
    radio: &RadioParams,
) -> (Vec<Event>, f64) {
    let mut events = Vec::new();
    let mut drawn = 0.0;
    for v in 0..state.k() {
        if state.ch_lists[v].is_empty() {
            continue;
        }
        let ch = &nodes[state.active_ch(v).index()];
        let current = if ch.alive { ch.energy } else { 0.0 };
        let last = state.last_round_ch_energy[v];
        let wants = match state.policy {
            SwitchPolicy::Threshold => last > 0.0 && current / last < config.switch_threshold,
            SwitchPolicy::OnDeath => !ch.alive,
            SwitchPolicy::Fixed => false,
        };
        if wants {
            let (event, e) = hand_over(state, v, nodes, config, radio);
            events.push(event);
            drawn += e;
        }
    }
    (events, drawn)
}
