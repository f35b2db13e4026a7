//! Scoring learned structures against the generating network, plus the
//! parameter-sweep harness used for the sensitivity experiments.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{learn, DbnStructure};
use crate::mine::mine_frequent;
use crate::sim::{simulate, GroundTruth, NetworkSpec};

/// Default threshold grid for sensitivity sweeps.
pub const DEFAULT_THETA_GRID: [f64; 5] = [0.002, 0.008, 0.014, 0.026, 0.038];
/// Default epsilon grid for sensitivity sweeps.
pub const DEFAULT_EPSILON_GRID: [f64; 4] = [0.00001, 0.0001, 0.001, 0.01];

/// Whether an edge match must also agree on the delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayMode {
    Exact,
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub from: String,
    pub to: String,
    pub delay: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub mine_s: f64,
    pub search_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub matched: Vec<EdgeRef>,
    pub missed: Vec<EdgeRef>,
    pub spurious: Vec<EdgeRef>,
    pub timing: Timing,
}

impl ScoreReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn edge_key(from: usize, to: usize, delay: u64, mode: DelayMode) -> (usize, usize, u64) {
    match mode {
        DelayMode::Exact => (from, to, delay),
        DelayMode::Ignore => (from, to, 0),
    }
}

/// Score a learned structure against ground truth. Precision is 100 when both
/// sides are empty and 0 when edges were learned for an empty truth would be
/// impossible, so the remaining convention is: no learned edges against a
/// non-empty truth reports precision 0 and recall 0.
pub fn precision_recall(
    learned: &DbnStructure,
    truth: &GroundTruth,
    mode: DelayMode,
) -> Result<ScoreReport> {
    if learned.labels != truth.labels {
        return Err(Error::AlphabetMismatch(format!(
            "learned over {:?}..., truth over {:?}...",
            learned.labels.first(),
            truth.labels.first()
        )));
    }
    let labels = &truth.labels;
    let learned_keys: BTreeSet<(usize, usize, u64)> = learned
        .edges()
        .iter()
        .map(|&(f, t, d, _)| edge_key(f, t, d, mode))
        .collect();
    let truth_keys: BTreeSet<(usize, usize, u64)> = truth
        .edges
        .iter()
        .map(|&(f, t, d)| edge_key(f, t, d, mode))
        .collect();

    let as_ref = |&(f, t, d): &(usize, usize, u64)| EdgeRef {
        from: labels[f].clone(),
        to: labels[t].clone(),
        delay: d,
    };
    // report truth delays for matched/missed, learned delays for spurious
    let matched: Vec<EdgeRef> = truth
        .edges
        .iter()
        .filter(|&&(f, t, d)| learned_keys.contains(&edge_key(f, t, d, mode)))
        .map(|e| as_ref(e))
        .collect();
    let missed: Vec<EdgeRef> = truth
        .edges
        .iter()
        .filter(|&&(f, t, d)| !learned_keys.contains(&edge_key(f, t, d, mode)))
        .map(|e| as_ref(e))
        .collect();
    let spurious: Vec<EdgeRef> = learned
        .edges()
        .iter()
        .filter(|&&(f, t, d, _)| !truth_keys.contains(&edge_key(f, t, d, mode)))
        .map(|&(f, t, d, _)| as_ref(&(f, t, d)))
        .collect();

    let n_matched = truth_keys.intersection(&learned_keys).count() as f64;
    let precision = if learned_keys.is_empty() {
        if truth_keys.is_empty() {
            100.0
        } else {
            0.0
        }
    } else {
        100.0 * n_matched / learned_keys.len() as f64
    };
    let recall = if truth_keys.is_empty() {
        100.0
    } else {
        100.0 * n_matched / truth_keys.len() as f64
    };
    Ok(ScoreReport {
        precision,
        recall,
        matched,
        missed,
        spurious,
        timing: Timing::default(),
    })
}

/// Fraction of nodes that are the target of at least one edge.
pub fn density(truth: &GroundTruth) -> f64 {
    if truth.nodes == 0 {
        return 0.0;
    }
    let targets: BTreeSet<usize> = truth.edges.iter().map(|&(_, t, _)| t).collect();
    targets.len() as f64 / truth.nodes as f64
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub thetas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub cells: Vec<Vec<ScoreReport>>,
}

impl SweepGrid {
    /// Plot-ready CSV, rows in (theta index, epsilon index) order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,epsilon,precision,recall,time_mine_s,time_search_s\n");
        for (i, theta) in self.thetas.iter().enumerate() {
            for (j, eps) in self.epsilons.iter().enumerate() {
                let c = &self.cells[i][j];
                let _ = writeln!(
                    out,
                    "{theta},{eps},{},{},{},{}",
                    c.precision, c.recall, c.timing.mine_s, c.timing.search_s
                );
            }
        }
        out
    }
}

fn run_theta_row(
    spec: &NetworkSpec,
    duration_s: f64,
    theta: f64,
    epsilons: &[f64],
    window: u64,
    k: usize,
    sim_seed: u64,
    mode: DelayMode,
) -> Result<Vec<ScoreReport>> {
    let (stream, truth) = simulate(spec, duration_s, sim_seed)?;
    let t0 = Instant::now();
    let table = mine_frequent(&stream, window, theta, k)?;
    let mine_s = t0.elapsed().as_secs_f64();
    epsilons
        .iter()
        .map(|&eps| {
            let t1 = Instant::now();
            let learned = learn(&table, &stream, eps)?;
            let search_s = t1.elapsed().as_secs_f64();
            let mut report = precision_recall(&learned, &truth, mode)?;
            report.timing = Timing {
                mine_s,
                search_s,
                total_s: mine_s + search_s,
            };
            Ok(report)
        })
        .collect()
}

/// One full pipeline run for a single `(theta, epsilon)` cell. The simulation
/// seed is used as-is, matching what [`sweep`] derives for that cell's row.
pub fn sweep_cell(
    spec: &NetworkSpec,
    duration_s: f64,
    theta: f64,
    epsilon: f64,
    window: u64,
    k: usize,
    sim_seed: u64,
    mode: DelayMode,
) -> Result<ScoreReport> {
    Ok(run_theta_row(spec, duration_s, theta, &[epsilon], window, k, sim_seed, mode)?
        .pop()
        .unwrap())
}

/// Sensitivity sweep: one simulate + mine per theta (seeded `seed + index`),
/// one learn + score per `(theta, epsilon)` cell.
pub fn sweep(
    spec: &NetworkSpec,
    duration_s: f64,
    thetas: &[f64],
    epsilons: &[f64],
    window: u64,
    k: usize,
    seed: u64,
    mode: DelayMode,
) -> Result<SweepGrid> {
    if thetas.is_empty() || epsilons.is_empty() {
        return Err(Error::InvalidParam("sweep grids must be non-empty".into()));
    }
    let cells: Vec<Vec<ScoreReport>> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            run_theta_row(
                spec,
                duration_s,
                theta,
                epsilons,
                window,
                k,
                seed.wrapping_add(i as u64),
                mode,
            )
        })
        .collect::<Result<_>>()?;
    Ok(SweepGrid {
        thetas: thetas.to_vec(),
        epsilons: epsilons.to_vec(),
        cells,
    })
}
