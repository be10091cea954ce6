use log::warn;

use super::switch::hand_over;
use super::{maybe_switch_ch, ClusterState};
use crate::config::NetworkConfig;
use crate::energy::{ch_round_energy, debit, member_round_energy, rx_energy, tx_energy, RadioParams};
use crate::metrics::{Event, RoundLog};
use crate::node::SensorNode;

/// Energy an active head spends in one round with `g` reporting members.
pub fn head_round_energy(g: usize, d_to_bs: f64, config: &NetworkConfig, radio: &RadioParams) -> f64 {
    let bits = config.packet_bits;
    let c = config.aggregation_ratio_c;
    if config.ch_includes_own_data {
        let sent = (g + 1) as f64;
        sent * c * tx_energy(bits, d_to_bs, radio)
            + sent * c * bits as f64 * radio.e_da
            + g as f64 * rx_energy(bits, radio)
    } else if g == 0 {
        if config.lone_ch_transmits {
            member_round_energy(bits, d_to_bs, radio)
        } else {
            0.0
        }
    } else {
        ch_round_energy(g, bits, c, d_to_bs, radio)
    }
}

fn check_range(what: &str, d: f64, config: &NetworkConfig) {
    if d > config.max_comm_range {
        warn!("{what} link of {d:.1} m exceeds the {} m radio range", config.max_comm_range);
    }
}

/// One data round: members report, heads aggregate and forward, heads rotate.
///
/// A cluster whose active head died during the previous round first moves
/// to its next alive head. All debits of the round are applied before the
/// rotation check, and `DEATH` events cover the nodes that died in this call.
pub fn run_steady_round(
    round: usize,
    nodes: &mut [SensorNode],
    state: &mut ClusterState,
    config: &NetworkConfig,
    radio: &RadioParams,
) -> RoundLog {
    let alive_before: Vec<bool> = nodes.iter().map(|n| n.alive).collect();
    let mut events = Vec::new();
    let mut drawn = 0.0;

    for v in 0..state.k() {
        let any_alive = state.clusters[v].iter().any(|id| nodes[id.index()].alive);
        if any_alive && !state.ch_lists[v].is_empty() && !nodes[state.active_ch(v).index()].alive {
            let (event, e) = hand_over(state, v, nodes, config, radio);
            events.push(event);
            drawn += e;
        }
    }

    for v in 0..state.k() {
        if state.ch_lists[v].is_empty() {
            continue;
        }
        let ch = state.active_ch(v);
        state.last_round_ch_energy[v] = nodes[ch.index()].energy;
        if !nodes[ch.index()].alive {
            continue;
        }
        let ch_pos = nodes[ch.index()].position;
        let mut g = 0;
        for &m in &state.clusters[v] {
            if m == ch || !nodes[m.index()].alive {
                continue;
            }
            let d = nodes[m.index()].position.distance(ch_pos);
            check_range("member-to-head", d, config);
            drawn += debit(&mut nodes[m.index()], member_round_energy(config.packet_bits, d, radio));
            g += 1;
        }
        let d_bs = ch_pos.distance(config.bs_position);
        check_range("head-to-base-station", d_bs, config);
        drawn += debit(&mut nodes[ch.index()], head_round_energy(g, d_bs, config, radio));
    }

    let (switch_events, e) = maybe_switch_ch(state, nodes, config, radio);
    events.extend(switch_events);
    drawn += e;
    state.apply_roles(nodes);

    events.extend(
        nodes
            .iter()
            .filter(|n| alive_before[n.id.index()] && !n.alive)
            .map(|n| Event::Death { node: n.id }),
    );
    round_log(round, nodes, state, events, drawn)
}

/// Snapshot the network after a round.
pub(super) fn round_log(
    round: usize,
    nodes: &[SensorNode],
    state: &ClusterState,
    events: Vec<Event>,
    energy_drawn: f64,
) -> RoundLog {
    RoundLog {
        round,
        residual: nodes.iter().map(|n| n.energy).collect(),
        alive_count: nodes.iter().filter(|n| n.alive).count(),
        events,
        per_cluster_sizes: state
            .clusters
            .iter()
            .map(|c| c.iter().filter(|id| nodes[id.index()].alive).count())
            .collect(),
        labels: nodes
            .iter()
            .map(|n| if n.alive { state.labels[n.id.index()] } else { None })
            .collect(),
        roles: nodes.iter().map(|n| n.role).collect(),
        energy_drawn,
    }
}
