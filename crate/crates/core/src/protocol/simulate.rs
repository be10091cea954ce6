use super::steady::round_log;
use super::{run_setup_phase, run_steady_round, ClusterState, LeachElection, ProtocolKind, SetupContext};
use crate::config::NetworkConfig;
use crate::density::{select_initial_centers, CenterSelection};
use crate::energy::RadioParams;
use crate::error::Result;
use crate::geometry::Point2D;
use crate::metrics::{lifetime_metrics, Event, LifetimeMetrics, RoundLog};
use crate::node::{deploy_uniform, positions, SensorNode};
use crate::rng::{self, SimRng, PROTOCOL_STREAM};

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub kind: ProtocolKind,
    pub seed: u64,
    pub layout: Vec<Point2D>,
    pub initial_energy: f64,
    pub logs: Vec<RoundLog>,
    pub metrics: LifetimeMetrics,
    /// Density-peaks result of the first set-up, when the variant computes one.
    pub initial_selection: Option<CenterSelection>,
    pub warnings: Vec<String>,
}

impl SimulationOutput {
    pub fn events(&self) -> impl Iterator<Item = (usize, &Event)> {
        self.logs.iter().flat_map(|l| l.events.iter().map(move |e| (l.round, e)))
    }

    pub fn total_energy_drawn(&self) -> f64 {
        self.logs.iter().map(|l| l.energy_drawn).sum()
    }
}

/// A run in progress, advanced one round at a time.
pub struct Simulation {
    config: NetworkConfig,
    kind: ProtocolKind,
    seed: u64,
    radio: RadioParams,
    nodes: Vec<SensorNode>,
    layout: Vec<Point2D>,
    state: Option<ClusterState>,
    rng: SimRng,
    leach: LeachElection,
    k: usize,
    round: usize,
    finished: bool,
    initial_selection: Option<CenterSelection>,
    warnings: Vec<String>,
    logs: Vec<RoundLog>,
}

impl Simulation {
    /// Deploy a fresh uniform field for `seed`.
    pub fn new(config: &NetworkConfig, kind: ProtocolKind, seed: u64) -> Result<Self> {
        config.validate()?;
        let nodes = deploy_uniform(config, seed)?;
        Self::with_nodes(config, kind, nodes, seed)
    }

    /// Run on a given field. Node ids must equal their positions in `nodes`.
    pub fn with_nodes(config: &NetworkConfig, kind: ProtocolKind, nodes: Vec<SensorNode>, seed: u64) -> Result<Self> {
        config.validate()?;
        if nodes.is_empty() {
            return Err(crate::error::Error::Config("cannot simulate an empty field".into()));
        }
        if nodes.iter().enumerate().any(|(i, n)| n.id.index() != i) {
            return Err(crate::error::Error::Parameter("node ids must be 0..n in order".into()));
        }
        let layout = positions(&nodes);
        // The baselines use the requested cluster count, or the density-peaks
        // estimate on the initial field.
        let k = match config.forced_k {
            Some(k) => k,
            None => select_initial_centers(&layout, config, None)?.k,
        };
        let finished = nodes.iter().all(|n| !n.alive);
        Ok(Self {
            radio: RadioParams::from_config(config),
            leach: LeachElection::new(nodes.len(), k),
            config: config.clone(),
            kind,
            seed,
            nodes,
            layout,
            state: None,
            rng: rng::stream(seed, PROTOCOL_STREAM),
            k,
            round: 0,
            finished,
            initial_selection: None,
            warnings: Vec::new(),
            logs: Vec::new(),
        })
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn state(&self) -> Option<&ClusterState> {
        self.state.as_ref()
    }

    pub fn logs(&self) -> &[RoundLog] {
        &self.logs
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn network_dead(&self, alive: usize) -> bool {
        let n = self.nodes.len() as f64;
        alive == 0 || (alive as f64) < (1.0 - self.config.death_fraction_for_lnd) * n - 1e-9
    }

    /// Simulate one round, re-clustering first when needed. Returns `None` once finished.
    pub fn step(&mut self) -> Result<Option<&RoundLog>> {
        if self.finished {
            return Ok(None);
        }
        self.round += 1;
        let alive_before: Vec<bool> = self.nodes.iter().map(|n| n.alive).collect();

        let needs_setup = self.kind == ProtocolKind::Leach
            || self.state.as_ref().is_none_or(|s| s.restart_requested);
        let mut setup_energy = 0.0;
        if needs_setup {
            let mut ctx = SetupContext {
                config: &self.config,
                radio: &self.radio,
                k: self.k,
                rng: &mut self.rng,
                leach: &mut self.leach,
            };
            let outcome = run_setup_phase(&mut self.nodes, self.kind, &mut ctx)?;
            setup_energy = outcome.energy_drawn;
            if self.round == 1 {
                self.initial_selection = outcome.selection;
            }
            self.warnings.extend(outcome.warnings.into_iter().map(|w| format!("round {}: {w}", self.round)));
            self.state = Some(outcome.state);
        }
        let state = self.state.as_mut().expect("set-up ran at least once");

        let setup_deaths: Vec<Event> = self
            .nodes
            .iter()
            .filter(|n| alive_before[n.id.index()] && !n.alive)
            .map(|n| Event::Death { node: n.id })
            .collect();
        let mut log = if self.nodes.iter().any(|n| n.alive) {
            run_steady_round(self.round, &mut self.nodes, state, &self.config, &self.radio)
        } else {
            round_log(self.round, &self.nodes, state, Vec::new(), 0.0)
        };
        log.energy_drawn += setup_energy;
        if !setup_deaths.is_empty() {
            let mut events = setup_deaths;
            events.append(&mut log.events);
            log.events = events;
        }

        self.finished = self.network_dead(log.alive_count) || self.round >= self.config.max_rounds;
        self.logs.push(log);
        Ok(self.logs.last())
    }

    pub fn run(mut self) -> Result<SimulationOutput> {
        while self.step()?.is_some() {}
        let metrics = lifetime_metrics(&self.logs, self.config.death_fraction_for_lnd, &self.config.ev_checkpoints);
        Ok(SimulationOutput {
            kind: self.kind,
            seed: self.seed,
            layout: self.layout,
            initial_energy: self.config.initial_energy,
            logs: self.logs,
            metrics,
            initial_selection: self.initial_selection,
            warnings: self.warnings,
        })
    }
}

/// Deploy, then alternate set-up and steady rounds until the network is dead
/// or the round cap is reached.
pub fn simulate(config: &NetworkConfig, kind: ProtocolKind, seed: u64) -> Result<SimulationOutput> {
    Simulation::new(config, kind, seed)?.run()
}

/// [`simulate`] on a given field instead of a random deployment.
pub fn simulate_layout(
    config: &NetworkConfig,
    kind: ProtocolKind,
    layout: &[Point2D],
    seed: u64,
) -> Result<SimulationOutput> {
    let nodes = layout
        .iter()
        .enumerate()
        .map(|(i, &p)| SensorNode::new(i, p, config.initial_energy))
        .collect();
    Simulation::with_nodes(config, kind, nodes, seed)?.run()
}
