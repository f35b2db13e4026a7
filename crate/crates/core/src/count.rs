//! Distinct-occurrence counting for fixed-delay episodes.
//!
//! An occurrence is fully determined by its start tick: node `i` must occur at
//! `start + offset(i)`. The frequency of an episode is the size of a largest
//! set of pairwise event-disjoint occurrences, restricted to occurrences whose
//! last event falls strictly after the history window `W`. Only episodes with
//! a repeated event type can produce overlapping occurrences; for those a
//! small sliding-frontier search computes the exact maximum.

use std::collections::HashMap;

use dashmap::DashMap;

use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::mine::FrequencyTable;
use crate::stream::EventStream;

/// All start ticks at which `ep` occurs, ascending. No window filtering.
pub fn occurrence_starts(stream: &EventStream, ep: &Episode) -> Vec<u64> {
    if ep.is_degenerate() {
        return Vec::new();
    }
    let idx = stream.index();
    let offsets = ep.offsets();
    // scan anchored on the position with the fewest occurrences
    let (anchor_pos, anchor_ty) = ep
        .types()
        .iter()
        .copied()
        .enumerate()
        .min_by_key(|&(_, ty)| idx.ticks(ty).len())
        .unwrap();
    let anchor_off = offsets[anchor_pos];
    let mut out = Vec::new();
    'next: for &t in idx.ticks(anchor_ty) {
        if t < anchor_off {
            continue;
        }
        let start = t - anchor_off;
        if start == 0 {
            continue; // ticks are 1-based
        }
        for (pos, (&ty, &off)) in ep.types().iter().zip(&offsets).enumerate() {
            if pos == anchor_pos {
                continue;
            }
            if !idx.contains(ty, start + off) {
                continue 'next;
            }
        }
        out.push(start);
    }
    out
}

/// Distinct-occurrence count under window `W`: occurrences must terminate
/// strictly after `W`, and the count is the maximum number of pairwise
/// event-disjoint occurrences.
pub fn count_distinct(stream: &EventStream, ep: &Episode, w: u64) -> Result<u64> {
    let span = ep.span();
    if span > w {
        return Err(Error::SpanExceedsWindow { span, window: w });
    }
    if ep.is_degenerate() {
        return Ok(0);
    }
    let starts = occurrence_starts(stream, ep);
    // termination = start + span; keep termination > W
    let min_start = w.saturating_sub(span) + 1;
    let first = starts.partition_point(|&s| s < min_start);
    Ok(max_disjoint(&starts[first..], ep))
}

/// Positive offset differences between same-type nodes. Two occurrences at
/// starts s < s' share an event iff s' - s is in this set.
fn conflict_deltas(ep: &Episode) -> Vec<u64> {
    let offsets = ep.offsets();
    let mut by_type: HashMap<usize, Vec<u64>> = HashMap::new();
    for (&ty, &off) in ep.types().iter().zip(&offsets) {
        by_type.entry(ty).or_default().push(off);
    }
    let mut deltas = Vec::new();
    for offs in by_type.values() {
        for i in 0..offs.len() {
            for j in 0..offs.len() {
                if offs[i] < offs[j] {
                    deltas.push(offs[j] - offs[i]);
                }
            }
        }
    }
    deltas.sort_unstable();
    deltas.dedup();
    deltas
}

/// Exact maximum set of pairwise-disjoint occurrences over the given start
/// ticks (ascending). Linear when no two starts can conflict.
pub(crate) fn max_disjoint(starts: &[u64], ep: &Episode) -> u64 {
    if starts.is_empty() {
        return 0;
    }
    let deltas = conflict_deltas(ep);
    if deltas.is_empty() {
        return starts.len() as u64;
    }
    let conflicts = |a: u64, b: u64| deltas.binary_search(&(b - a)).is_ok();
    let any_conflict = starts.iter().enumerate().any(|(i, &s)| {
        starts[i + 1..]
            .iter()
            .take_while(|&&t| t - s <= *deltas.last().unwrap())
            .any(|&t| conflicts(s, t))
    });
    if !any_conflict {
        return starts.len() as u64;
    }

    // Sliding-frontier search: process starts left to right keeping, per
    // partial solution, only the chosen starts still close enough to conflict
    // with anything later. Identical frontiers are merged keeping the best
    // count, and blocks separated by more than the largest delta are
    // independent.
    let max_delta = *deltas.last().unwrap();
    let mut total = 0u64;
    let mut block_start = 0;
    for i in 0..starts.len() {
        if i + 1 == starts.len() || starts[i + 1] - starts[i] > max_delta {
            total += max_disjoint_block(&starts[block_start..=i], max_delta, &conflicts);
            block_start = i + 1;
        }
    }
    total
}

fn max_disjoint_block(starts: &[u64], max_delta: u64, conflicts: &dyn Fn(u64, u64) -> bool) -> u64 {
    let mut states: HashMap<Vec<u64>, u64> = HashMap::new();
    states.insert(Vec::new(), 0);
    for &s in starts {
        let mut next: HashMap<Vec<u64>, u64> = HashMap::new();
        for (frontier, count) in states {
            let mut pruned: Vec<u64> = frontier
                .iter()
                .copied()
                .filter(|&f| s - f <= max_delta)
                .collect();
            // skip s
            merge_state(&mut next, pruned.clone(), count);
            // take s if compatible
            if pruned.iter().all(|&f| !conflicts(f, s)) {
                pruned.push(s);
                merge_state(&mut next, pruned, count + 1);
            }
        }
        states = next;
    }
    states.into_values().max().unwrap_or(0)
}

fn merge_state(map: &mut HashMap<Vec<u64>, u64>, key: Vec<u64>, count: u64) {
    map.entry(key)
        .and_modify(|c| *c = (*c).max(count))
        .or_insert(count);
}

/// Memoizing count store used by the marginal computations, seeded from a
/// mined frequency table. Values are deterministic, so concurrent writers can
/// only ever race on identical values.
pub struct CountCache<'a> {
    stream: &'a EventStream,
    w: u64,
    cache: DashMap<Episode, u64>,
}

impl<'a> CountCache<'a> {
    pub fn new(stream: &'a EventStream, w: u64) -> Self {
        Self {
            stream,
            w,
            cache: DashMap::new(),
        }
    }

    /// Seed the cache with every count already paid for during mining.
    pub fn from_table(stream: &'a EventStream, table: &FrequencyTable) -> Self {
        let cache = DashMap::new();
        for (ep, count) in table.iter() {
            cache.insert(ep.clone(), count);
        }
        Self {
            stream,
            w: table.window(),
            cache,
        }
    }

    pub fn window(&self) -> u64 {
        self.w
    }

    pub fn stream(&self) -> &EventStream {
        self.stream
    }

    /// Cached count if present, otherwise counted now and memoized.
    pub fn count(&self, ep: &Episode) -> Result<u64> {
        if let Some(c) = self.cache.get(ep) {
            return Ok(*c);
        }
        let c = count_distinct(self.stream, ep, self.w)?;
        self.cache.insert(ep.clone(), c);
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }
}
