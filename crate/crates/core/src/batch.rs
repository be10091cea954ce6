//! Multi-seed, multi-protocol experiment runner.

use rayon::prelude::*;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::metrics::LifetimeMetrics;
use crate::protocol::{simulate, ProtocolKind};

/// Outcome of one `(protocol, seed)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub kind: ProtocolKind,
    pub seed: u64,
    /// The run's metrics, or the error message if it failed.
    pub result: std::result::Result<LifetimeMetrics, String>,
}

/// Aggregate of one metric for one protocol over the successful runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub kind: ProtocolKind,
    /// `fnd`, `hnd`, `lnd`, `total_rounds` or `ev@<round>`.
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub runs: usize,
    /// Runs in which the milestone was never reached.
    pub censored: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    /// Cells in `(kind, seed)` input order.
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

impl BatchReport {
    pub fn row(&self, kind: ProtocolKind, metric: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.kind == kind && r.metric == metric)
    }

    pub fn mean(&self, kind: ProtocolKind, metric: &str) -> Option<f64> {
        self.row(kind, metric).map(|r| r.mean)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Run every `(kind, seed)` pair and aggregate the lifetime metrics.
///
/// Cells run in parallel; results are collected in input order so the
/// report does not depend on scheduling. A failing cell is recorded and the
/// batch carries on.
pub fn run_batch(config: &NetworkConfig, kinds: &[ProtocolKind], seeds: &[u64]) -> Result<BatchReport> {
    if kinds.is_empty() || seeds.is_empty() {
        return Err(Error::Parameter("a batch needs at least one protocol and one seed".into()));
    }
    config.validate()?;
    let cells: Vec<(ProtocolKind, u64)> = kinds
        .iter()
        .flat_map(|&k| seeds.iter().map(move |&s| (k, s)))
        .collect();
    let runs: Vec<RunRecord> = cells
        .par_iter()
        .map(|&(kind, seed)| RunRecord {
            kind,
            seed,
            result: simulate(config, kind, seed).map(|o| o.metrics).map_err(|e| e.to_string()),
        })
        .collect();

    let mut summary = Vec::new();
    for &kind in kinds {
        let ok: Vec<&LifetimeMetrics> = runs
            .iter()
            .filter(|r| r.kind == kind)
            .filter_map(|r| r.result.as_ref().ok())
            .collect();
        let failed = runs.iter().filter(|r| r.kind == kind && r.result.is_err()).count();
        let mut push = |metric: String, values: Vec<f64>, censored: usize| {
            let (mean, std) = mean_std(&values);
            summary.push(SummaryRow { kind, metric, mean, std, runs: values.len(), censored, failed });
        };
        for name in ["fnd", "hnd", "lnd"] {
            let pick = |m: &LifetimeMetrics| match name {
                "fnd" => m.fnd,
                "hnd" => m.hnd,
                _ => m.lnd,
            };
            let values = ok.iter().map(|m| pick(m).round as f64).collect();
            let censored = ok.iter().filter(|m| pick(m).censored).count();
            push(name.to_string(), values, censored);
        }
        push("total_rounds".into(), ok.iter().map(|m| m.total_rounds as f64).collect(), 0);
        for (i, &cp) in config.ev_checkpoints.iter().enumerate() {
            let values = ok.iter().map(|m| m.ev_by_round[i].1).collect();
            // A checkpoint past the end of a run samples its final state.
            let censored = ok.iter().filter(|m| cp > m.total_rounds).count();
            push(format!("ev@{cp}"), values, censored);
        }
    }
    Ok(BatchReport { runs, summary })
}
