//! Network and algorithm configuration.
//!
//! The on-disk format is flat `key = value` text with `#` comments. Keys are
//! the field names of [`NetworkConfig`]; anything not mentioned keeps its
//! scenario-1 default.
//!
//! ```text
//! # scenario 2
//! area_width = 200
//! area_height = 200
//! bs_position = 100, 200
//! initial_energy = 1.0
//! forced_k = 6
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Point2D;

/// How local density is computed when choosing initial centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    /// Gaussian kernel density estimate at each node.
    Kde,
    /// Neighbor count within the cutoff distance.
    Cutoff,
}

impl FromStr for DensityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kde" => Ok(Self::Kde),
            "cutoff" => Ok(Self::Cutoff),
            other => Err(Error::Config(format!("density_mode: unknown value `{other}`"))),
        }
    }
}

impl DensityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Kde => "kde",
            Self::Cutoff => "cutoff",
        }
    }
}

/// KDE bandwidth: fixed in meters or Silverman's rule of thumb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        parse_f64("kde_bandwidth", s).map(Self::Fixed)
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(h) => write!(f, "{h}"),
        }
    }
}

/// All physical constants and algorithm hyperparameters of a run, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub bs_position: Point2D,
    pub n_nodes: usize,
    /// Joules per node at deployment.
    pub initial_energy: f64,
    pub packet_bits: u64,
    pub control_bits: u64,
    /// J/bit, shared by transmitter and receiver circuitry.
    pub e_elec: f64,
    /// J/bit/m^2.
    pub eps_fs: f64,
    /// J/bit/m^4.
    pub eps_mp: f64,
    /// J/bit spent aggregating.
    pub e_da: f64,
    pub aggregation_ratio_c: f64,
    /// Soft k-means stiffness.
    pub beta: f64,
    pub dc_neighbor_fraction: f64,
    pub kde_bandwidth: Bandwidth,
    pub density_mode: DensityMode,
    /// Top-two membership gap below which a boundary node may move.
    pub reassign_threshold: f64,
    /// Nodes per cluster head slot.
    pub ch_constant: usize,
    pub switch_threshold: f64,
    pub convergence_eps: f64,
    pub r_max: usize,
    pub death_fraction_for_lnd: f64,
    pub rng_seed: u64,
    /// Cluster count override; `None` lets the density-peaks step decide.
    pub forced_k: Option<usize>,
    /// Link validity range in meters. Violations are logged only.
    pub max_comm_range: f64,
    /// Hard cap on simulated rounds.
    pub max_rounds: usize,
    /// A cluster head without members still sends its own packet to the base station.
    pub lone_ch_transmits: bool,
    /// Count the cluster head's own packet in the transmit and aggregation terms.
    pub ch_includes_own_data: bool,
    /// Rounds at which energy variance is sampled.
    pub ev_checkpoints: Vec<usize>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::scenario1()
    }
}

impl NetworkConfig {
    /// 100 x 100 m field, base station at (50, 150), 0.2 J per node.
    pub fn scenario1() -> Self {
        Self {
            area_width: 100.0,
            area_height: 100.0,
            bs_position: Point2D::new(50.0, 150.0),
            n_nodes: 100,
            initial_energy: 0.2,
            packet_bits: 4000,
            control_bits: 100,
            e_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            e_da: 5e-9,
            aggregation_ratio_c: 1.0,
            beta: 0.2,
            dc_neighbor_fraction: 0.02,
            kde_bandwidth: Bandwidth::Auto,
            density_mode: DensityMode::Kde,
            reassign_threshold: 0.15,
            ch_constant: 10,
            switch_threshold: 0.9,
            convergence_eps: 1e-4,
            r_max: 100,
            death_fraction_for_lnd: 0.85,
            rng_seed: 1,
            forced_k: None,
            max_comm_range: 250.0,
            max_rounds: 10_000,
            lone_ch_transmits: true,
            ch_includes_own_data: false,
            ev_checkpoints: vec![200, 400, 600, 800, 1000, 1200, 1400],
        }
    }

    /// 200 x 200 m field, base station at (100, 200), 1 J per node, six clusters.
    pub fn scenario2() -> Self {
        Self {
            area_width: 200.0,
            area_height: 200.0,
            bs_position: Point2D::new(100.0, 200.0),
            initial_energy: 1.0,
            forced_k: Some(6),
            ev_checkpoints: vec![100, 200, 300, 400, 500, 600],
            ..Self::scenario1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite and > 0, got {v}")))
            }
        }
        fn open_unit(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        }

        positive("area_width", self.area_width)?;
        positive("area_height", self.area_height)?;
        if !self.bs_position.is_finite() {
            return Err(Error::Config("bs_position must be finite".into()));
        }
        if self.n_nodes == 0 {
            return Err(Error::Config("n_nodes must be >= 1".into()));
        }
        positive("initial_energy", self.initial_energy)?;
        positive("e_elec", self.e_elec)?;
        positive("eps_fs", self.eps_fs)?;
        positive("eps_mp", self.eps_mp)?;
        positive("e_da", self.e_da)?;
        if !(self.aggregation_ratio_c > 0.0 && self.aggregation_ratio_c <= 1.0) {
            return Err(Error::Config(format!(
                "aggregation_ratio_c must lie in (0, 1], got {}",
                self.aggregation_ratio_c
            )));
        }
        positive("beta", self.beta)?;
        open_unit("dc_neighbor_fraction", self.dc_neighbor_fraction)?;
        if let Bandwidth::Fixed(h) = self.kde_bandwidth {
            positive("kde_bandwidth", h)?;
        }
        if !(0.0..=1.0).contains(&self.reassign_threshold) {
            return Err(Error::Config(format!(
                "reassign_threshold must lie in [0, 1], got {}",
                self.reassign_threshold
            )));
        }
        if self.ch_constant == 0 {
            return Err(Error::Config("ch_constant must be >= 1".into()));
        }
        open_unit("switch_threshold", self.switch_threshold)?;
        positive("convergence_eps", self.convergence_eps)?;
        if self.r_max == 0 {
            return Err(Error::Config("r_max must be >= 1".into()));
        }
        if !(self.death_fraction_for_lnd > 0.0 && self.death_fraction_for_lnd <= 1.0) {
            return Err(Error::Config(format!(
                "death_fraction_for_lnd must lie in (0, 1], got {}",
                self.death_fraction_for_lnd
            )));
        }
        if self.forced_k == Some(0) {
            return Err(Error::Config("forced_k must be >= 1".into()));
        }
        positive("max_comm_range", self.max_comm_range)?;
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be >= 1".into()));
        }
        if self.ev_checkpoints.iter().any(|&r| r == 0) {
            return Err(Error::Config("ev_checkpoints must be >= 1".into()));
        }
        Ok(())
    }

    /// Crossover distance between the free-space and multipath amplifier models.
    pub fn d0(&self) -> f64 {
        (self.eps_fs / self.eps_mp).sqrt()
    }

    /// Parse `key = value` text on top of the scenario-1 defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::scenario1();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Set one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "area_width" => self.area_width = parse_f64(key, value)?,
            "area_height" => self.area_height = parse_f64(key, value)?,
            "bs_position" => self.bs_position = parse_point(key, value)?,
            "n_nodes" => self.n_nodes = parse_int(key, value)?,
            "initial_energy" => self.initial_energy = parse_f64(key, value)?,
            "packet_bits" => self.packet_bits = parse_int(key, value)?,
            "control_bits" => self.control_bits = parse_int(key, value)?,
            "e_elec" => self.e_elec = parse_f64(key, value)?,
            "eps_fs" => self.eps_fs = parse_f64(key, value)?,
            "eps_mp" => self.eps_mp = parse_f64(key, value)?,
            "e_da" => self.e_da = parse_f64(key, value)?,
            "aggregation_ratio_c" => self.aggregation_ratio_c = parse_f64(key, value)?,
            "beta" => self.beta = parse_f64(key, value)?,
            "dc_neighbor_fraction" => self.dc_neighbor_fraction = parse_f64(key, value)?,
            "kde_bandwidth" => self.kde_bandwidth = value.parse()?,
            "density_mode" => self.density_mode = value.parse()?,
            "reassign_threshold" => self.reassign_threshold = parse_f64(key, value)?,
            "ch_constant" => self.ch_constant = parse_int(key, value)?,
            "switch_threshold" => self.switch_threshold = parse_f64(key, value)?,
            "convergence_eps" => self.convergence_eps = parse_f64(key, value)?,
            "r_max" => self.r_max = parse_int(key, value)?,
            "death_fraction_for_lnd" => self.death_fraction_for_lnd = parse_f64(key, value)?,
            "rng_seed" => self.rng_seed = parse_int(key, value)?,
            "forced_k" => {
                self.forced_k = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_int(key, value)?)
                }
            }
            "max_comm_range" => self.max_comm_range = parse_f64(key, value)?,
            "max_rounds" => self.max_rounds = parse_int(key, value)?,
            "lone_ch_transmits" => self.lone_ch_transmits = parse_bool(key, value)?,
            "ch_includes_own_data" => self.ch_includes_own_data = parse_bool(key, value)?,
            "ev_checkpoints" => {
                self.ev_checkpoints = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_int(key, s))
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Render every field in the file format; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let forced_k = self
            .forced_k
            .map_or_else(|| "auto".to_string(), |k| k.to_string());
        let checkpoints = self
            .ev_checkpoints
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        macro_rules! line {
            ($key:literal, $val:expr) => {
                let _ = writeln!(s, "{} = {}", $key, $val);
            };
        }
        line!("area_width", self.area_width);
        line!("area_height", self.area_height);
        line!("bs_position", format_args!("{}, {}", self.bs_position.x, self.bs_position.y));
        line!("n_nodes", self.n_nodes);
        line!("initial_energy", self.initial_energy);
        line!("packet_bits", self.packet_bits);
        line!("control_bits", self.control_bits);
        line!("e_elec", self.e_elec);
        line!("eps_fs", self.eps_fs);
        line!("eps_mp", self.eps_mp);
        line!("e_da", self.e_da);
        line!("aggregation_ratio_c", self.aggregation_ratio_c);
        line!("beta", self.beta);
        line!("dc_neighbor_fraction", self.dc_neighbor_fraction);
        line!("kde_bandwidth", self.kde_bandwidth);
        line!("density_mode", self.density_mode.as_str());
        line!("reassign_threshold", self.reassign_threshold);
        line!("ch_constant", self.ch_constant);
        line!("switch_threshold", self.switch_threshold);
        line!("convergence_eps", self.convergence_eps);
        line!("r_max", self.r_max);
        line!("death_fraction_for_lnd", self.death_fraction_for_lnd);
        line!("rng_seed", self.rng_seed);
        line!("forced_k", forced_k);
        line!("max_comm_range", self.max_comm_range);
        line!("max_rounds", self.max_rounds);
        line!("lone_ch_transmits", self.lone_ch_transmits);
        line!("ch_includes_own_data", self.ch_includes_own_data);
        line!("ev_checkpoints", checkpoints);
        s
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a number")))
}

fn parse_int<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a non-negative integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: `{value}` is not a boolean"))),
    }
}

fn parse_point(key: &str, value: &str) -> Result<Point2D> {
    let inner = value.trim().trim_start_matches('(').trim_end_matches(')');
    let (x, y) = inner
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("{key}: expected `x, y`, got `{value}`")))?;
    Ok(Point2D::new(parse_f64(key, x)?, parse_f64(key, y)?))
}
