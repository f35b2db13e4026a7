//! Structure search: pick, per event type, the parent set with maximal mutual
//! information among candidates derived from frequent episodes, preferring a
//! smaller subset whenever it gives up less than epsilon bits.
//!
//! Candidates for a child are the prefixes of frequent episodes ending in that
//! child, with parent delays the cumulative gaps back from the child. The
//! sweep runs from the largest parent sets down to single parents, keeping one
//! hash entry per child: a first candidate is stored as-is; a candidate one
//! level below the stored entry replaces it when it is a subset costing less
//! than epsilon bits or when it improves the score outright; within a level
//! the higher score wins, ties going to the lexicographically first candidate.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::count::CountCache;
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::marginal::mutual_information;
use crate::mine::FrequencyTable;
use crate::stream::EventStream;

/// A chosen parent set for one child.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentSet {
    pub child: usize,
    /// `(type, delay)` pairs, delays >= 1, canonical order (earliest first).
    pub parents: Vec<(usize, u64)>,
    pub mi: f64,
    /// Size of the frequent episode the set came from.
    pub source_level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnParams {
    pub window: u64,
    pub theta: f64,
    pub epsilon: f64,
    pub max_parents: usize,
}

/// The learned network: one optional parent set per event type. Delays are
/// always >= 1, so the unrolled graph is acyclic by construction.
#[derive(Debug, Clone)]
pub struct DbnStructure {
    pub params: LearnParams,
    pub labels: Vec<String>,
    pub parents: Vec<Option<ParentSet>>,
}

impl DbnStructure {
    /// All learned edges as `(from, to, delay, mi)`, deterministic order.
    pub fn edges(&self) -> Vec<(usize, usize, u64, f64)> {
        let mut out = Vec::new();
        for ps in self.parents.iter().flatten() {
            for &(ty, d) in &ps.parents {
                out.push((ty, ps.child, d, ps.mi));
            }
        }
        out.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        out
    }

    pub fn num_edges(&self) -> usize {
        self.parents
            .iter()
            .flatten()
            .map(|ps| ps.parents.len())
            .sum()
    }

    pub fn to_json(&self) -> DbnJson {
        DbnJson {
            params: ParamsJson {
                w: self.params.window,
                theta: self.params.theta,
                epsilon: self.params.epsilon,
                k: self.params.max_parents,
            },
            nodes: self.labels.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(from, to, delay, mi)| EdgeJson {
                    from: self.labels[from].clone(),
                    to: self.labels[to].clone(),
                    delay,
                    mi,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsJson {
    #[serde(rename = "W")]
    pub w: u64,
    pub theta: f64,
    pub epsilon: f64,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub delay: u64,
    pub mi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DbnJson {
    pub params: ParamsJson,
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

/// One candidate parent set: the episode prefix, as `(type, delay)` pairs.
fn prefix_parents(ep: &Episode) -> Vec<(usize, u64)> {
    let offsets = ep.offsets();
    let span = ep.span();
    (0..ep.len() - 1)
        .map(|i| (ep.types()[i], span - offsets[i]))
        .collect()
}

/// Candidate parent sets for `child`, one per frequent episode of size >= 2
/// ending in it whose final gap is at least one tick. Returned grouped by
/// parent-set size, each group in deterministic episode order.
pub fn candidates_for(child: usize, table: &FrequencyTable) -> Vec<(usize, Vec<Vec<(usize, u64)>>)> {
    let mut out = Vec::new();
    for size in 2..=table.max_size() {
        let sets: Vec<Vec<(usize, u64)>> = table
            .episodes_ending_in(child, size)
            .into_iter()
            .filter(|ep| *ep.delays().last().unwrap() >= 1)
            .map(prefix_parents)
            .collect();
        if !sets.is_empty() {
            out.push((size - 1, sets));
        }
    }
    out
}

fn is_subset(small: &[(usize, u64)], big: &[(usize, u64)]) -> bool {
    small.iter().all(|p| big.contains(p))
}

fn best_parents_for(
    child: usize,
    table: &FrequencyTable,
    counts: &CountCache,
    epsilon: f64,
    k: usize,
) -> Result<Option<ParentSet>> {
    let mut stored: Option<(Vec<(usize, u64)>, f64, usize)> = None;
    for i in (1..=k).rev() {
        for ep in table.episodes_ending_in(child, i + 1) {
            if *ep.delays().last().unwrap() < 1 {
                continue;
            }
            let parents = prefix_parents(ep);
            match &stored {
                None => {
                    let mi = mutual_information(child, &parents, counts)?.bits;
                    stored = Some((parents, mi, i));
                }
                Some((sp, smi, slevel)) => {
                    if *slevel == i + 1 {
                        let mi = mutual_information(child, &parents, counts)?.bits;
                        if (smi - mi < epsilon && is_subset(&parents, sp)) || mi > *smi {
                            stored = Some((parents, mi, i));
                        }
                    } else if *slevel == i {
                        let mi = mutual_information(child, &parents, counts)?.bits;
                        if mi > *smi {
                            stored = Some((parents, mi, i));
                        }
                    }
                    // a level gap leaves the stored entry untouched
                }
            }
        }
    }
    Ok(stored.map(|(parents, mi, level)| ParentSet {
        child,
        source_level: level + 1,
        parents,
        mi,
    }))
}

/// Learn the network from a mined table. Window, threshold and maximum parent
/// count are the ones the table was mined with; event types with no usable
/// frequent episode become roots.
pub fn learn(table: &FrequencyTable, stream: &EventStream, epsilon: f64) -> Result<DbnStructure> {
    if epsilon < 0.0 {
        return Err(Error::InvalidParam(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let k = table.max_size() - 1;
    let counts = CountCache::from_table(stream, table);
    let parents: Vec<Option<ParentSet>> = (0..stream.alphabet().len())
        .into_par_iter()
        .map(|child| best_parents_for(child, table, &counts, epsilon, k))
        .collect::<Result<_>>()?;
    Ok(DbnStructure {
        params: LearnParams {
            window: table.window(),
            theta: table.theta(),
            epsilon,
            max_parents: k,
        },
        labels: stream.alphabet().labels().to_vec(),
        parents,
    })
}

fn dot_ident(label: &str) -> String {
    let plain = !label.is_empty()
        && label
            .chars()
            .enumerate()
            .all(|(i, c)| c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit()));
    if plain {
        label.to_string()
    } else {
        format!("\"{}\"", label.replace('"', "\\\""))
    }
}

/// Render the learned network as a DOT digraph, edge labels carrying delays.
pub fn to_dot(structure: &DbnStructure) -> String {
    let mut out = String::from("digraph dbn {\n  rankdir=LR;\n");
    for label in &structure.labels {
        let _ = writeln!(out, "  {};", dot_ident(label));
    }
    for (from, to, delay, _) in structure.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            dot_ident(&structure.labels[from]),
            dot_ident(&structure.labels[to]),
            delay
        );
    }
    out.push_str("}\n");
    out
}
