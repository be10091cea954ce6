//! Energy-balanced clustering for wireless sensor networks.
//!
//! The crate partitions a sensor field with density-seeded soft k-means,
//! elects several rotating cluster heads per cluster, and simulates
//! round-by-round energy use under the first-order radio model. LEACH,
//! Lloyd's k-means and unseeded soft k-means are included as baselines.
//!
//! ```
//! use wsnsim::{simulate, NetworkConfig, ProtocolKind};
//!
//! let config = NetworkConfig { n_nodes: 20, initial_energy: 0.01, ..NetworkConfig::default() };
//! let run = simulate(&config, ProtocolKind::ISKMeans, 7).unwrap();
//! assert!(run.metrics.fnd.round <= run.metrics.lnd.round);
//! ```

pub mod batch;
pub mod cli;
pub mod clustering;
pub mod config;
pub mod density;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod node;
pub mod output;
pub mod protocol;
pub mod rng;

pub use batch::{run_batch, BatchReport};
pub use config::{Bandwidth, DensityMode, NetworkConfig};
pub use error::{Error, Result};
pub use geometry::{NodeId, Point2D};
pub use metrics::{energy_variance, lifetime_metrics, Event, LifetimeMetrics, RoundLog};
pub use node::SensorNode;
pub use protocol::{simulate, ProtocolKind};
