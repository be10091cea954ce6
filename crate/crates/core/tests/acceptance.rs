//! Acceptance criteria, one line each.
//!
//! Runs without the libtest harness so that every criterion reports, pass or
//! fail, and the process exits non-zero if any failed.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use wsnsim::clustering::{membership, soft_kmeans, update_centers, MembershipMatrix};
use wsnsim::density::{delta_distances, local_density_cutoff, select_cutoff_dc, select_initial_centers};
use wsnsim::energy::RadioParams;
use wsnsim::node::{deploy_uniform, positions};
use wsnsim::output::write_rounds;
use wsnsim::protocol::{
    ch_slot_count, cluster_layout, run_setup_phase, run_steady_round, simulate, LeachElection, ProtocolKind,
    SetupContext,
};
use wsnsim::rng::{stream, PROTOCOL_STREAM};
use wsnsim::{run_batch, NetworkConfig, Point2D, SensorNode};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(budget: Duration, elapsed: Duration) -> bool {
    elapsed <= budget
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_points(r: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Point2D> {
    (0..n).map(|_| Point2D::new(r.random::<f64>() * side, r.random::<f64>() * side)).collect()
}

fn euclid(a: Point2D, b: Point2D) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

// 1
fn membership_constraints() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut bad = 0;
    for _ in 0..1000 {
        let n = r.random_range(1..=200);
        let k = r.random_range(1..=10);
        let beta = 10f64.powf(r.random_range(-3.0..1.0));
        let nodes = uniform_points(&mut r, n, 100.0);
        let centers = uniform_points(&mut r, k, 100.0);
        let z = membership(&nodes, &centers, beta).expect("valid instance");
        let columns_ok = (0..n).all(|j| (z.column(j).sum::<f64>() - 1.0).abs() <= 1e-9);
        let entries_ok = (0..k).all(|v| z.row(v).iter().all(|&p| (0.0..=1.0).contains(&p)));
        let rows_ok = (0..k).all(|v| z.row_sum(v) < n as f64 + 1e-9);
        if !(columns_ok && entries_ok && rows_ok) {
            bad += 1;
        }
    }
    let t = start.elapsed();
    outcome(bad == 0 && within(Duration::from_secs(5), t), format!("{bad}/1000 violations, {t:.2?} (budget 5 s)"))
}

fn oracle_cutoff(nodes: &[Point2D], d_c: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| (0..nodes.len()).filter(|&j| j != i && euclid(nodes[i], nodes[j]) < d_c).count() as f64)
        .collect()
}

fn oracle_delta(nodes: &[Point2D], rho: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    if n == 1 {
        return vec![0.0];
    }
    let outranks = |j: usize, i: usize| rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
    (0..n)
        .map(|i| {
            let higher: Vec<usize> = (0..n).filter(|&j| j != i && outranks(j, i)).collect();
            if higher.is_empty() {
                (0..n).map(|j| euclid(nodes[i], nodes[j])).fold(0.0, f64::max)
            } else {
                higher.iter().map(|&j| euclid(nodes[i], nodes[j])).fold(f64::INFINITY, f64::min)
            }
        })
        .collect()
}

// 2
fn density_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng(202);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = r.random_range(1..=200);
        let nodes = uniform_points(&mut r, n, 100.0);
        let d_c = if n > 1 && r.random_bool(0.5) {
            select_cutoff_dc(&nodes, 0.02).expect("n >= 2")
        } else {
            r.random_range(0.5..40.0)
        };
        let rho = local_density_cutoff(&nodes, d_c);
        if rho != oracle_cutoff(&nodes, d_c) {
            mismatches += 1;
        }
        // Tied integer densities and distinct random densities.
        if delta_distances(&nodes, &rho) != oracle_delta(&nodes, &rho) {
            mismatches += 1;
        }
        let distinct: Vec<f64> = (0..n).map(|_| r.random()).collect();
        if delta_distances(&nodes, &distinct) != oracle_delta(&nodes, &distinct) {
            mismatches += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        mismatches == 0 && within(Duration::from_secs(10), t),
        format!("{mismatches} mismatching layouts of 100, {t:.2?} (budget 10 s)"),
    )
}

// 3
fn crossover_distance() -> Outcome {
    let d0 = RadioParams::from_config(&NetworkConfig::scenario1()).d0;
    outcome((87.6..=88.0).contains(&d0), format!("d0 = {d0:.4} m"))
}

// 4
fn energy_conservation() -> Outcome {
    let start = Instant::now();
    let config = NetworkConfig::scenario1();
    let worst = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let kind = ProtocolKind::ALL[i as usize % 4];
            let out = simulate(&config, kind, 1000 + i).expect("simulation runs");
            let initial = config.initial_energy * config.n_nodes as f64;
            let residual: f64 = out.logs.last().unwrap().residual.iter().sum();
            ((initial - residual) - out.total_energy_drawn()).abs() / initial
        })
        .reduce(|| 0.0, f64::max);
    let t = start.elapsed();
    outcome(
        worst <= 1e-9 && within(Duration::from_secs(120), t),
        format!("worst relative imbalance {worst:.2e} over 50 runs, {t:.2?} (budget 2 min)"),
    )
}

fn free_energy(nodes: &[Point2D], z: &MembershipMatrix, centers: &[Point2D], beta: f64) -> f64 {
    let mut f = 0.0;
    for v in 0..z.k() {
        for (j, x) in nodes.iter().enumerate() {
            let p = z.get(v, j);
            f += p * x.distance_squared(centers[v]);
            if p > 0.0 {
                f += p * p.ln() / beta;
            }
        }
    }
    f
}

// 5
fn cost_monotonicity() -> Outcome {
    let start = Instant::now();
    let config = NetworkConfig::scenario1();
    let mut r = rng(505);
    let mut rising = 0;
    let mut free_rising = 0;
    for _ in 0..200 {
        let n = r.random_range(20..=150);
        let k = r.random_range(2..=8);
        let nodes = uniform_points(&mut r, n, 100.0);
        let init: Vec<Point2D> = rand::seq::index::sample(&mut r, n, k).iter().map(|i| nodes[i]).collect();
        let res = soft_kmeans(&nodes, &init, config.beta, config.convergence_eps, config.r_max).expect("runs");
        let h = &res.cost_history;
        if h.windows(2).any(|w| w[1] > w[0] + 1e-10 * w[0].abs().max(1.0)) {
            rising += 1;
        }

        // Companion: the same iteration replayed on the free energy J - H(Z)/beta.
        let mut centers = init.clone();
        let mut z = membership(&nodes, &centers, config.beta).unwrap();
        let mut prev = f64::INFINITY;
        for _ in 0..res.iterations {
            centers = update_centers(&nodes, &z).unwrap();
            let f = free_energy(&nodes, &z, &centers, config.beta);
            z = membership(&nodes, &centers, config.beta).unwrap();
            if f > prev + 1e-10 * prev.abs().max(1.0) {
                free_rising += 1;
                break;
            }
            prev = f;
        }
    }
    let t = start.elapsed();
    outcome(
        rising == 0 && within(Duration::from_secs(30), t),
        format!(
            "weighted cost rose in {rising}/200 runs; free energy rose in {free_rising}/200, {t:.2?} (budget 30 s)"
        ),
    )
}

// 6
fn two_blob_centers() -> Outcome {
    let config = NetworkConfig::scenario1();
    let noise = Normal::new(0.0, 3.0).unwrap();
    let mut good = 0;
    for seed in 0..20 {
        let mut r = rng(600 + seed);
        let nodes: Vec<Point2D> = (0..20)
            .map(|i| {
                let cx = if i < 10 { 25.0 } else { 75.0 };
                Point2D::new(cx + noise.sample(&mut r), 50.0 + noise.sample(&mut r))
            })
            .collect();
        let sel = select_initial_centers(&nodes, &config, None).expect("selection runs");
        let left = sel.center_ids.iter().filter(|id| id.index() < 10).count();
        if sel.k == 2 && left == 1 {
            good += 1;
        }
    }
    outcome(good >= 19, format!("{good}/20 seeds with k = 2 and one center per blob (need 19)"))
}

fn head_gap(config: &NetworkConfig, layout: &[SensorNode], kind: ProtocolKind, seed: u64) -> Option<f64> {
    let radio = RadioParams::from_config(config);
    let mut nodes = layout.to_vec();
    let mut rng = stream(seed, PROTOCOL_STREAM);
    let mut leach = LeachElection::new(nodes.len(), 2);
    let mut ctx = SetupContext { config, radio: &radio, k: 2, rng: &mut rng, leach: &mut leach };
    let mut state = run_setup_phase(&mut nodes, kind, &mut ctx).ok()?.state;
    if state.k() != 2 {
        return None;
    }
    // One clustering, ten data rounds; re-clustering requests are not acted on.
    for round in 1..=10 {
        run_steady_round(round, &mut nodes, &mut state, config, &radio);
    }
    let mean_head = |v: usize| {
        let list = &state.ch_lists[v];
        list.iter().map(|id| nodes[id.index()].energy).sum::<f64>() / list.len() as f64
    };
    Some((mean_head(0) - mean_head(1)).abs())
}

// 7
fn reassignment_balance() -> Outcome {
    let config = NetworkConfig { n_nodes: 28, forced_k: Some(2), ..NetworkConfig::scenario1() };
    let mut ratio_ok = 0;
    let mut gap_ok = 0;
    let mut worst = Vec::new();
    for seed in 1..=20u64 {
        let layout = deploy_uniform(&config, seed).unwrap();
        let pts = positions(&layout);
        let c = cluster_layout(&pts, &config, Some(2)).expect("clustering runs");
        if c.assignment.size_ratio() <= c.initial.size_ratio() {
            ratio_ok += 1;
        }
        let is = head_gap(&config, &layout, ProtocolKind::ISKMeans, seed);
        let hard = head_gap(&config, &layout, ProtocolKind::HardKMeans, seed);
        match (is, hard) {
            (Some(a), Some(b)) if a < b => gap_ok += 1,
            _ => worst.push(seed),
        }
    }
    outcome(
        ratio_ok == 20 && gap_ok >= 18,
        format!(
            "size ratio not worse in {ratio_ok}/20; smaller head energy gap in {gap_ok}/20 (need 18), other seeds {worst:?}"
        ),
    )
}

fn scenario1_batch() -> (wsnsim::BatchReport, Duration) {
    let config = NetworkConfig {
        forced_k: Some(4),
        ev_checkpoints: vec![200, 400, 600, 800, 1000],
        ..NetworkConfig::scenario1()
    };
    let start = Instant::now();
    let seeds: Vec<u64> = (1..=20).collect();
    let kinds = [ProtocolKind::ISKMeans, ProtocolKind::Leach, ProtocolKind::HardKMeans];
    let report = run_batch(&config, &kinds, &seeds).expect("batch runs");
    (report, start.elapsed())
}

// 8
fn fnd_ordering(report: &wsnsim::BatchReport, t: Duration) -> Outcome {
    let is = report.mean(ProtocolKind::ISKMeans, "fnd").unwrap();
    let leach = report.mean(ProtocolKind::Leach, "fnd").unwrap();
    let hard = report.mean(ProtocolKind::HardKMeans, "fnd").unwrap();
    let ratio = is / hard;
    outcome(
        is > leach && leach > hard && ratio >= 5.0 && within(Duration::from_secs(600), t),
        format!("mean FND is-kmeans {is:.1}, leach {leach:.1}, hard-kmeans {hard:.1}, ratio {ratio:.1}, {t:.2?} (budget 10 min)"),
    )
}

// 9
fn ev_ordering(report: &wsnsim::BatchReport, checkpoints: &[usize]) -> Outcome {
    let mut failing = Vec::new();
    let mut cells = Vec::new();
    for cp in checkpoints {
        let key = format!("ev@{cp}");
        let is = report.mean(ProtocolKind::ISKMeans, &key).unwrap();
        let leach = report.mean(ProtocolKind::Leach, &key).unwrap();
        let hard = report.mean(ProtocolKind::HardKMeans, &key).unwrap();
        cells.push(format!("{cp}: {is:.2e}/{leach:.2e}/{hard:.2e}"));
        if !(is < leach && is < hard) {
            failing.push(*cp);
        }
    }
    outcome(
        failing.is_empty(),
        format!("EV is-kmeans/leach/hard-kmeans {}; failing checkpoints {failing:?}", cells.join(", ")),
    )
}

// 10
fn slot_counts() -> Outcome {
    let mut bad = 0;
    for constant in [5usize, 10, 20] {
        for size in 1..=100usize {
            let expected = std::cmp::max(1, (size as f64 / constant as f64).ceil() as usize);
            if ch_slot_count(size, constant) != expected {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{bad}/300 mismatches"))
}

// 11
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = NetworkConfig::scenario1();
    let mut differing = Vec::new();
    for kind in ProtocolKind::ALL {
        for seed in [1u64, 17] {
            let files: Vec<Vec<u8>> = (0..3)
                .map(|i| {
                    let path = dir.path().join(format!("{kind}-{seed}-{i}.csv"));
                    write_rounds(&path, &simulate(&config, kind, seed).unwrap().logs).unwrap();
                    std::fs::read(&path).unwrap()
                })
                .collect();
            if files[0] != files[1] || files[1] != files[2] {
                differing.push(format!("{kind}/{seed}"));
            }
        }
    }
    outcome(differing.is_empty(), format!("8 (protocol, seed) pairs x 3 runs; differing {differing:?}"))
}

// 12
fn scenario2_smoke() -> Outcome {
    let start = Instant::now();
    let config = NetworkConfig::scenario2();
    let kinds = [ProtocolKind::ISKMeans, ProtocolKind::Leach, ProtocolKind::HardKMeans];
    let cells: Vec<(ProtocolKind, u64)> = kinds.iter().flat_map(|&k| (1..=20u64).map(move |s| (k, s))).collect();
    let runs: Vec<(ProtocolKind, bool, f64, usize, Vec<f64>)> = cells
        .par_iter()
        .map(|&(kind, seed)| {
            let out = simulate(&config, kind, seed).expect("simulation runs");
            let initial = config.initial_energy * config.n_nodes as f64;
            let residual: f64 = out.logs.last().unwrap().residual.iter().sum();
            let imbalance = ((initial - residual) - out.total_energy_drawn()).abs() / initial;
            let completed = !out.metrics.lnd.censored;
            let ev = out.metrics.ev_by_round.iter().map(|&(_, e)| e).collect();
            (kind, completed, imbalance, out.metrics.fnd.round, ev)
        })
        .collect();
    let completed = runs.iter().filter(|r| r.1).count();
    let worst = runs.iter().map(|r| r.2).fold(0.0, f64::max);
    let mean = |kind: ProtocolKind, f: &dyn Fn(&(ProtocolKind, bool, f64, usize, Vec<f64>)) -> f64| {
        let v: Vec<f64> = runs.iter().filter(|r| r.0 == kind).map(f).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let fnd: Vec<f64> = kinds.iter().map(|&k| mean(k, &|r| r.3 as f64)).collect();
    let fnd_ok = fnd[0] > fnd[1] && fnd[1] > fnd[2];
    let mut ev_failing = Vec::new();
    for (i, cp) in config.ev_checkpoints.iter().enumerate() {
        let ev: Vec<f64> = kinds.iter().map(|&k| mean(k, &|r| r.4[i])).collect();
        if !(ev[0] < ev[1] && ev[0] < ev[2]) {
            ev_failing.push(format!("{cp}: {:.3}/{:.3}/{:.3}", ev[0], ev[1], ev[2]));
        }
    }
    let t = start.elapsed();
    outcome(
        completed == runs.len() && worst <= 1e-9 && fnd_ok && ev_failing.is_empty(),
        format!(
            "{completed}/{} runs completed, worst imbalance {worst:.1e}, mean FND {:.1}/{:.1}/{:.1}, \
             EV ordering failing at {ev_failing:?}, {t:.2?}",
            runs.len(),
            fnd[0],
            fnd[1],
            fnd[2]
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, o: Outcome| {
        println!("criterion {id:>2} {:<4} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    record(1, "membership constraints", membership_constraints());
    record(2, "density oracle equivalence", density_oracles());
    record(3, "crossover distance", crossover_distance());
    record(4, "energy conservation", energy_conservation());
    record(5, "cost monotonicity", cost_monotonicity());
    record(6, "two-blob center selection", two_blob_centers());
    record(7, "reassignment balance", reassignment_balance());
    let (report, t) = scenario1_batch();
    record(8, "FND ordering", fnd_ordering(&report, t));
    record(9, "EV ordering", ev_ordering(&report, &[200, 400, 600, 800, 1000]));
    record(10, "head slot count", slot_counts());
    record(11, "determinism", determinism());
    record(12, "scenario 2 smoke", scenario2_smoke());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
