//! First-order radio model.
//!
//! Transmitting `l` bits over `d` meters costs `l*E_elec + l*eps_fs*d^2` below
//! the crossover distance `d0 = sqrt(eps_fs/eps_mp)` and `l*E_elec + l*eps_mp*d^4`
//! above it. Receiving costs `l*E_elec`.

use crate::config::NetworkConfig;
use crate::node::SensorNode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub e_elec: f64,
    pub eps_fs: f64,
    pub eps_mp: f64,
    pub e_da: f64,
    /// Free-space / multipath crossover, always `sqrt(eps_fs / eps_mp)`.
    pub d0: f64,
}

impl RadioParams {
    pub fn new(e_elec: f64, eps_fs: f64, eps_mp: f64, e_da: f64) -> Self {
        Self {
            e_elec,
            eps_fs,
            eps_mp,
            e_da,
            d0: (eps_fs / eps_mp).sqrt(),
        }
    }

    pub fn from_config(config: &NetworkConfig) -> Self {
        Self::new(config.e_elec, config.eps_fs, config.eps_mp, config.e_da)
    }
}

pub fn tx_energy(bits: u64, d: f64, p: &RadioParams) -> f64 {
    let l = bits as f64;
    if d <= p.d0 {
        l * p.e_elec + l * p.eps_fs * d * d
    } else {
        l * p.e_elec + l * p.eps_mp * d * d * d * d
    }
}

pub fn rx_energy(bits: u64, p: &RadioParams) -> f64 {
    bits as f64 * p.e_elec
}

/// Cluster-head cost for one round with `g` members:
/// `g*c*E_T(l, d_bs) + g*(c*l*E_DA + E_R(l))`.
pub fn ch_round_energy(g: usize, bits: u64, c: f64, d_to_bs: f64, p: &RadioParams) -> f64 {
    let g = g as f64;
    g * c * tx_energy(bits, d_to_bs, p) + g * (c * bits as f64 * p.e_da + rx_energy(bits, p))
}

/// A member node's cost for one round: one packet to its cluster head.
pub fn member_round_energy(bits: u64, d_to_ch: f64, p: &RadioParams) -> f64 {
    tx_energy(bits, d_to_ch, p)
}

/// Withdraw `amount` joules, clamping at zero. Returns the energy actually drawn.
pub fn debit(node: &mut SensorNode, amount: f64) -> f64 {
    debug_assert!(amount >= 0.0, "negative debit {amount}");
    let drawn = amount.min(node.energy);
    node.energy -= drawn;
    if node.energy <= 0.0 {
        node.energy = 0.0;
        node.alive = false;
    }
    drawn
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;
    use proptest::prelude::*;

    fn table1() -> RadioParams {
        RadioParams::from_config(&NetworkConfig::default())
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-12)
    }

    #[test]
    fn crossover_distance() {
        let d0 = table1().d0;
        assert!((87.6..=88.0).contains(&d0), "d0 = {d0}");
    }

    #[test]
    fn transmit_receive_examples() {
        let p = table1();
        assert!(close(tx_energy(4000, 50.0, &p), 300e-6));
        assert_eq!(tx_energy(0, 50.0, &p), 0.0);
        assert!(close(rx_energy(4000, &p), 200e-6));
        assert_eq!(rx_energy(0, &p), 0.0);
        assert!(close(member_round_energy(4000, 20.0, &p), 216e-6));
        assert!(close(member_round_energy(4000, 0.0, &p), 200e-6));
    }

    #[test]
    fn branches_agree_at_crossover() {
        let p = table1();
        let l = 4000.0;
        let fs = l * p.e_elec + l * p.eps_fs * p.d0.powi(2);
        let mp = l * p.e_elec + l * p.eps_mp * p.d0.powi(4);
        assert!((fs - mp).abs() <= 1e-15 * fs);
    }

    #[test]
    fn cluster_head_examples() {
        let p = table1();
        assert_eq!(ch_round_energy(0, 4000, 1.0, 50.0, &p), 0.0);
        assert!(close(ch_round_energy(1, 4000, 1.0, 50.0, &p), 520e-6));
        let one = ch_round_energy(3, 4000, 0.5, 120.0, &p);
        let two = ch_round_energy(6, 4000, 0.5, 120.0, &p);
        assert!(close(two, 2.0 * one));
    }

    #[test]
    fn debit_clamps() {
        let mut n = SensorNode::new(0, Point2D::default(), 0.2);
        let drawn = debit(&mut n, 520e-6);
        assert_eq!(drawn, 520e-6);
        assert!((n.energy - 0.19948).abs() < 1e-15);
        assert!(n.alive);

        let before = n.clone();
        assert_eq!(debit(&mut n, 0.0), 0.0);
        assert_eq!(n, before);

        let drawn = debit(&mut n, 5.0);
        assert_eq!(drawn, before.energy);
        assert_eq!(n.energy, 0.0);
        assert!(!n.alive);
    }

    proptest! {
        #[test]
        fn monotone_in_bits_and_distance(l in 0u64..10_000, d in 0.0..400.0f64, dl in 0u64..100, dd in 0.0..50.0f64) {
            let p = table1();
            let base = tx_energy(l, d, &p);
            prop_assert!(tx_energy(l + dl, d, &p) >= base);
            prop_assert!(tx_energy(l, d + dd, &p) >= base * (1.0 - 1e-15));
            prop_assert!(rx_energy(l, &p) <= base);
        }

        #[test]
        fn member_cost_strictly_increasing(d in 0.0..400.0f64, dd in 1e-3..50.0f64) {
            let p = table1();
            prop_assert!(member_round_energy(4000, d + dd, &p) > member_round_energy(4000, d, &p));
        }
    }
}
