use rand::Rng;

use crate::geometry::NodeId;
use crate::node::SensorNode;
use crate::rng::SimRng;

/// Threshold self-election with epoch-based eligibility.
///
/// With desired head fraction `p = k / n`, a node that has not been head in
/// the current epoch of `round(1/p)` rounds elects itself in round `r` with
/// probability `p / (1 - p * (r mod epoch))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeachElection {
    n: usize,
    k: usize,
    p: f64,
    epoch: usize,
    round: usize,
    eligible: Vec<bool>,
}

impl LeachElection {
    pub fn new(n_total: usize, k: usize) -> Self {
        let n = n_total.max(1);
        let k = k.clamp(1, n);
        let p = k as f64 / n as f64;
        Self {
            n,
            k,
            p,
            epoch: ((1.0 / p).round() as usize).max(1),
            round: 0,
            eligible: vec![true; n_total],
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Election threshold for the next call to [`elect`](Self::elect).
    pub fn threshold(&self) -> f64 {
        // p / (1 - p*r) written as k / (n - k*r) to stay exact at the epoch end.
        let r = self.round % self.epoch;
        match self.n.checked_sub(self.k * r) {
            Some(denom) if denom > self.k => self.k as f64 / denom as f64,
            _ => 1.0,
        }
    }

    /// Run one election. Every alive node draws once, in id order.
    pub fn elect(&mut self, nodes: &[SensorNode], rng: &mut SimRng) -> Vec<NodeId> {
        if self.round % self.epoch == 0 {
            self.eligible.iter_mut().for_each(|e| *e = true);
        }
        let t = self.threshold();
        let mut heads = Vec::new();
        for node in nodes.iter().filter(|n| n.alive) {
            let u: f64 = rng.random();
            let i = node.id.index();
            if self.eligible[i] && u < t {
                self.eligible[i] = false;
                heads.push(node.id);
            }
        }
        self.round += 1;
        heads
    }
}
