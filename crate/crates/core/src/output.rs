//! CSV tables.
//!
//! | file | columns |
//! |---|---|
//! | `rounds.csv` | `round,node_id,residual_j,alive,cluster,role` |
//! | `metrics.csv` | `protocol,seed,metric,value,censored` |
//! | `events.csv` | `round,event,cluster,node_id,from,to` |
//! | `decision_graph.csv` | `node_id,x_m,y_m,rho,delta,gamma,center` |
//! | `layout.csv` | `node_id,x_m,y_m` |
//! | `assignment.csv` | `node_id,x_m,y_m,cluster` |
//! | `summary.csv` | `protocol,metric,mean,std,runs,censored,failed` |
//!
//! Floats are written in shortest round-trip form, so reading a table and
//! writing it back reproduces the file byte for byte.

use std::fs::File;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::batch::{BatchReport, SummaryRow};
use crate::clustering::ClusterAssignment;
use crate::density::CenterSelection;
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::metrics::{Event, LifetimeMetrics, RoundLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub round: usize,
    pub node_id: usize,
    pub residual_j: f64,
    pub alive: bool,
    pub cluster: Option<usize>,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub protocol: String,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub round: usize,
    pub event: String,
    pub cluster: Option<usize>,
    pub node_id: Option<usize>,
    pub from: Option<usize>,
    pub to: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRow {
    pub node_id: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub rho: f64,
    pub delta: f64,
    pub gamma: f64,
    pub center: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutRow {
    pub node_id: usize,
    pub x_m: f64,
    pub y_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub node_id: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCsvRow {
    pub protocol: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
    pub censored: usize,
    pub failed: usize,
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

/// Write `rows` with a header, even when there are none.
pub fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

pub fn round_rows(logs: &[RoundLog]) -> impl Iterator<Item = RoundRow> + '_ {
    logs.iter().flat_map(|log| {
        (0..log.residual.len()).map(move |i| RoundRow {
            round: log.round,
            node_id: i,
            residual_j: log.residual[i],
            alive: log.residual[i] > 0.0,
            cluster: log.labels[i],
            role: if log.residual[i] > 0.0 { log.roles[i].as_str() } else { "dead" }.to_string(),
        })
    })
}

pub const ROUNDS_HEADER: [&str; 6] = ["round", "node_id", "residual_j", "alive", "cluster", "role"];
pub const METRICS_HEADER: [&str; 5] = ["protocol", "seed", "metric", "value", "censored"];
pub const EVENTS_HEADER: [&str; 6] = ["round", "event", "cluster", "node_id", "from", "to"];
pub const DECISION_HEADER: [&str; 7] = ["node_id", "x_m", "y_m", "rho", "delta", "gamma", "center"];
pub const LAYOUT_HEADER: [&str; 3] = ["node_id", "x_m", "y_m"];
pub const ASSIGNMENT_HEADER: [&str; 4] = ["node_id", "x_m", "y_m", "cluster"];
pub const SUMMARY_HEADER: [&str; 7] = ["protocol", "metric", "mean", "std", "runs", "censored", "failed"];

pub fn write_rounds(path: &Path, logs: &[RoundLog]) -> Result<()> {
    write_rows(path, &ROUNDS_HEADER, round_rows(logs))
}

pub fn read_rounds(path: &Path) -> Result<Vec<RoundRow>> {
    read_rows(path)
}

pub fn metric_rows(protocol: &str, seed: u64, m: &LifetimeMetrics) -> Vec<MetricRow> {
    let row = |metric: String, value: f64, censored: bool| MetricRow {
        protocol: protocol.to_string(),
        seed,
        metric,
        value,
        censored,
    };
    let mut rows = vec![
        row("fnd".into(), m.fnd.round as f64, m.fnd.censored),
        row("hnd".into(), m.hnd.round as f64, m.hnd.censored),
        row("lnd".into(), m.lnd.round as f64, m.lnd.censored),
        row("total_rounds".into(), m.total_rounds as f64, false),
    ];
    rows.extend(
        m.ev_by_round
            .iter()
            .map(|&(r, ev)| row(format!("ev@{r}"), ev, r > m.total_rounds)),
    );
    rows
}

pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    write_rows(path, &METRICS_HEADER, rows)
}

pub fn event_rows(logs: &[RoundLog]) -> Vec<EventRow> {
    logs.iter()
        .flat_map(|l| {
            l.events.iter().map(move |e| {
                let mut row = EventRow {
                    round: l.round,
                    event: e.kind().to_string(),
                    cluster: None,
                    node_id: None,
                    from: None,
                    to: None,
                };
                match *e {
                    Event::Switch { cluster, from, to } => {
                        row.cluster = Some(cluster);
                        row.from = Some(from.index());
                        row.to = Some(to.index());
                    }
                    Event::Restart { cluster } => row.cluster = Some(cluster),
                    Event::Death { node } => row.node_id = Some(node.index()),
                }
                row
            })
        })
        .collect()
}

pub fn write_events(path: &Path, logs: &[RoundLog]) -> Result<()> {
    write_rows(path, &EVENTS_HEADER, event_rows(logs))
}

/// `(rho, delta)` of the density-peak candidates, marking the chosen centers.
pub fn decision_rows(layout: &[Point2D], selection: Option<&CenterSelection>) -> Vec<DecisionRow> {
    let Some(sel) = selection else {
        return Vec::new();
    };
    sel.candidates
        .iter()
        .enumerate()
        .map(|(i, id)| DecisionRow {
            node_id: id.index(),
            x_m: layout[id.index()].x,
            y_m: layout[id.index()].y,
            rho: sel.profile.rho[i],
            delta: sel.profile.delta[i],
            gamma: sel.profile.gamma[i],
            center: sel.center_ids.contains(id),
        })
        .collect()
}

pub fn write_decision_graph(path: &Path, layout: &[Point2D], selection: Option<&CenterSelection>) -> Result<()> {
    write_rows(path, &DECISION_HEADER, decision_rows(layout, selection))
}

pub fn write_layout(path: &Path, layout: &[Point2D]) -> Result<()> {
    write_rows(
        path,
        &LAYOUT_HEADER,
        layout.iter().enumerate().map(|(i, p)| LayoutRow { node_id: i, x_m: p.x, y_m: p.y }),
    )
}

/// Read a layout file; node ids must be `0..n` in order.
pub fn read_layout(path: &Path) -> Result<Vec<Point2D>> {
    let rows: Vec<LayoutRow> = read_rows(path)?;
    for (i, row) in rows.iter().enumerate() {
        if row.node_id != i {
            return Err(Error::Config(format!(
                "{}: row {} has node_id {}, expected {i}",
                path.display(),
                i + 1,
                row.node_id
            )));
        }
        if !(row.x_m.is_finite() && row.y_m.is_finite()) {
            return Err(Error::Config(format!("{}: node {i} has a non-finite coordinate", path.display())));
        }
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("{}: layout has no nodes", path.display())));
    }
    Ok(rows.into_iter().map(|r| Point2D::new(r.x_m, r.y_m)).collect())
}

pub fn write_assignment(path: &Path, layout: &[Point2D], assignment: &ClusterAssignment) -> Result<()> {
    write_rows(
        path,
        &ASSIGNMENT_HEADER,
        layout.iter().enumerate().map(|(i, p)| AssignmentRow {
            node_id: i,
            x_m: p.x,
            y_m: p.y,
            cluster: assignment.labels[i],
        }),
    )
}

pub fn summary_rows(rows: &[SummaryRow]) -> Vec<SummaryCsvRow> {
    rows.iter()
        .map(|r| SummaryCsvRow {
            protocol: r.kind.as_str().to_string(),
            metric: r.metric.clone(),
            mean: r.mean,
            std: r.std,
            runs: r.runs,
            censored: r.censored,
            failed: r.failed,
        })
        .collect()
}

pub fn write_summary(path: &Path, report: &BatchReport) -> Result<()> {
    write_rows(path, &SUMMARY_HEADER, summary_rows(&report.summary))
}

/// Per-run metrics of a batch; failed runs are skipped.
pub fn write_batch_runs(path: &Path, report: &BatchReport) -> Result<()> {
    let rows: Vec<MetricRow> = report
        .runs
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|m| metric_rows(r.kind.as_str(), r.seed, m)))
        .flatten()
        .collect();
    write_metrics(path, &rows)
}
