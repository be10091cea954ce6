//! Command-line interface.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::batch::run_batch;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::output;
use crate::protocol::{cluster_layout, simulate, ProtocolKind};

#[derive(Debug, Parser)]
#[command(name = "wsnsim", version, about = "Clustered wireless sensor network lifetime simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one protocol on one seeded field.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "is-kmeans")]
        protocol: ProtocolKind,
        /// Overrides rng_seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Simulate several protocols over several seeds and summarize.
    Batch {
        #[command(flatten)]
        common: Common,
        /// Comma list and inclusive ranges, e.g. `1..20` or `1,2,5..8`.
        #[arg(long, default_value = "1..20")]
        seeds: String,
        #[arg(long, value_delimiter = ',', default_value = "is-kmeans,leach,hard-kmeans")]
        protocols: Vec<ProtocolKind>,
        /// Energy-variance sampling rounds, comma separated.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<usize>>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Cluster a layout file without simulating.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// CSV with columns node_id,x_m,y_m.
        #[arg(long)]
        layout: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Check a configuration file and print the resolved values.
    ValidateConfig {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` configuration file; omitted keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Density estimator: kde or cutoff.
    #[arg(long)]
    density: Option<String>,
    /// KDE bandwidth in meters, or `auto`.
    #[arg(long)]
    bandwidth: Option<String>,
    /// Fixed cluster count, or `auto`.
    #[arg(long)]
    k: Option<String>,
    /// Target neighbor fraction for the cutoff distance.
    #[arg(long)]
    dc_fraction: Option<String>,
    /// Soft k-means stiffness.
    #[arg(long)]
    beta: Option<String>,
    /// Membership gap below which a node counts as a boundary node.
    #[arg(long)]
    reassign_threshold: Option<String>,
    /// Soft k-means convergence tolerance for memberships and centers.
    #[arg(long)]
    eps: Option<String>,
    /// Soft k-means iteration cap.
    #[arg(long)]
    max_iter: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<NetworkConfig> {
        let mut config = match &self.config {
            Some(path) => NetworkConfig::from_file(path)?,
            None => NetworkConfig::default(),
        };
        let overrides = [
            ("density_mode", &self.density),
            ("kde_bandwidth", &self.bandwidth),
            ("forced_k", &self.k),
            ("dc_neighbor_fraction", &self.dc_fraction),
            ("beta", &self.beta),
            ("reassign_threshold", &self.reassign_threshold),
            ("convergence_eps", &self.eps),
            ("r_max", &self.max_iter),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parse `1..20`, `3`, `1,4,7..9` into seeds.
pub fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    let bad = || Error::Parameter(format!("invalid seed list `{list}`"));
    let mut seeds = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
                if b < a {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, protocol, seed, out_dir } => {
            let config = common.resolve()?;
            let seed = seed.unwrap_or(config.rng_seed);
            let out = simulate(&config, protocol, seed)?;
            ensure_dir(&out_dir)?;
            output::write_rounds(&out_dir.join("rounds.csv"), &out.logs)?;
            output::write_metrics(
                &out_dir.join("metrics.csv"),
                &output::metric_rows(protocol.as_str(), seed, &out.metrics),
            )?;
            output::write_events(&out_dir.join("events.csv"), &out.logs)?;
            output::write_decision_graph(
                &out_dir.join("decision_graph.csv"),
                &out.layout,
                out.initial_selection.as_ref(),
            )?;
            output::write_layout(&out_dir.join("layout.csv"), &out.layout)?;
            let m = &out.metrics;
            println!(
                "{protocol} seed {seed}: FND {} HND {} LND {} over {} rounds",
                m.fnd.round, m.hnd.round, m.lnd.round, m.total_rounds
            );
        }
        Command::Batch { common, seeds, protocols, checkpoints, out_dir } => {
            let mut config = common.resolve()?;
            if let Some(cp) = checkpoints {
                config.ev_checkpoints = cp;
                config.validate()?;
            }
            let seeds = parse_seeds(&seeds)?;
            let report = run_batch(&config, &protocols, &seeds)?;
            ensure_dir(&out_dir)?;
            output::write_summary(&out_dir.join("summary.csv"), &report)?;
            output::write_batch_runs(&out_dir.join("metrics.csv"), &report)?;
            for r in &report.runs {
                if let Err(e) = &r.result {
                    eprintln!("warning: {} seed {} failed: {e}", r.kind, r.seed);
                }
            }
            for row in report.summary.iter().filter(|r| matches!(r.metric.as_str(), "fnd" | "hnd" | "lnd")) {
                println!("{:<12} {:<4} mean {:>9.2} std {:>8.2} ({} runs, {} censored)", row.kind, row.metric, row.mean, row.std, row.runs, row.censored);
            }
        }
        Command::Cluster { common, layout, out_dir } => {
            let config = common.resolve()?;
            let points = output::read_layout(&layout)?;
            let result = cluster_layout(&points, &config, config.forced_k)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            ensure_dir(&out_dir)?;
            output::write_assignment(&out_dir.join("assignment.csv"), &points, &result.assignment)?;
            output::write_decision_graph(&out_dir.join("decision_graph.csv"), &points, Some(&result.selection))?;
            println!("{} nodes in {} clusters, sizes {:?}", points.len(), result.assignment.k(), result.assignment.sizes());
        }
        Command::ValidateConfig { common } => {
            let config = common.resolve()?;
            print!("{}", config.to_text());
        }
    }
    Ok(())
}

/// Run the CLI on `argv` (including the program name) and return the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
