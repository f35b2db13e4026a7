//! Frequent fixed-delay episode mining by leftward pattern growth.
//!
//! Episodes grow by prepending `A -δ->` to an already-frequent episode, with
//! the new episode counted only on the projected start ticks of the episode it
//! extends. Growth therefore never rescans the whole stream, and every
//! occurrence of the grown episode terminates at the same tick as the
//! occurrence it contains, so the "terminates strictly after W" rule is
//! inherited for free.
//!
//! Simultaneous prefixes are canonicalized: a zero-delay extension must be
//! lexicographically smaller than the current first type. Equal types at zero
//! delay would map two nodes onto one event and can never occur, so they are
//! skipped outright.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::count::max_disjoint;
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::stream::EventStream;

/// Mined episodes with their distinct-occurrence counts.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    window: u64,
    horizon: u64,
    theta: f64,
    max_size: usize,
    entries: HashMap<Episode, u64>,
}

impl FrequencyTable {
    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Largest mined episode size, k+1.
    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, ep: &Episode) -> Option<u64> {
        self.entries.get(ep).copied()
    }

    pub fn contains(&self, ep: &Episode) -> bool {
        self.entries.contains_key(ep)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Episode, u64)> {
        self.entries.iter().map(|(e, &c)| (e, c))
    }

    /// count / (T - W); zero on a degenerate horizon.
    pub fn relative(&self, count: u64) -> f64 {
        if self.horizon > self.window {
            count as f64 / (self.horizon - self.window) as f64
        } else {
            0.0
        }
    }

    /// All episodes in deterministic order: size, then types, then delays.
    pub fn sorted_episodes(&self) -> Vec<&Episode> {
        let mut eps: Vec<&Episode> = self.entries.keys().collect();
        eps.sort_by(|a, b| a.cmp_canonical(b));
        eps
    }

    /// Frequent episodes of exactly `size`, deterministic order.
    pub fn episodes_of_size(&self, size: usize) -> Vec<&Episode> {
        let mut eps: Vec<&Episode> = self.entries.keys().filter(|e| e.len() == size).collect();
        eps.sort_by(|a, b| a.cmp_canonical(b));
        eps
    }

    /// Frequent episodes of `size` whose last node is `child`, deterministic order.
    pub fn episodes_ending_in(&self, child: usize, size: usize) -> Vec<&Episode> {
        let mut eps: Vec<&Episode> = self
            .entries
            .keys()
            .filter(|e| e.len() == size && e.last_type() == child)
            .collect();
        eps.sort_by(|a, b| a.cmp_canonical(b));
        eps
    }

    /// Tab-separated dump: episode, count, relative frequency.
    pub fn to_tsv(&self, stream: &EventStream) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# window={} theta={} k={} horizon={}",
            self.window,
            self.theta,
            self.max_size.saturating_sub(1),
            self.horizon
        );
        for ep in self.sorted_episodes() {
            let count = self.entries[ep];
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                ep.display(stream.alphabet()),
                count,
                self.relative(count)
            );
        }
        out
    }
}

struct GrowScratch {
    /// match tally per (type, delay) slot
    counts: Vec<u32>,
    /// slots touched in the current pass
    dirty: Vec<u32>,
    /// slot -> candidate index (+1), 0 = none
    candidate_of: Vec<u32>,
    stride: usize,
}

impl GrowScratch {
    fn new(num_types: usize, window: u64) -> Self {
        let stride = window as usize + 1;
        Self {
            counts: vec![0; num_types * stride],
            dirty: Vec::new(),
            candidate_of: vec![0; num_types * stride],
            stride,
        }
    }
}

struct Miner<'a> {
    stream: &'a EventStream,
    window: u64,
    bar: f64,
    max_size: usize,
    results: Vec<(Episode, u64)>,
}

impl<'a> Miner<'a> {
    fn grow(&mut self, alpha: &Episode, starts: &[u64], scratch: &mut GrowScratch) {
        if alpha.len() >= self.max_size {
            return;
        }
        let slack = self.window - alpha.span();
        let first_type = alpha.first_type();
        let idx = self.stream.index();

        // pass 1: tally realized extensions over the projected starts
        debug_assert!(scratch.dirty.is_empty());
        for &t in starts {
            let lo = t.saturating_sub(slack);
            for s in lo..=t {
                for &ty in idx.types_at(s) {
                    let delta = t - s;
                    if delta == 0 && ty as usize >= first_type {
                        continue;
                    }
                    let slot = ty as usize * scratch.stride + delta as usize;
                    if scratch.counts[slot] == 0 {
                        scratch.dirty.push(slot as u32);
                    }
                    scratch.counts[slot] += 1;
                }
            }
        }

        // keep slots whose raw match count can clear the bar
        let mut candidates: Vec<u32> = scratch
            .dirty
            .iter()
            .copied()
            .filter(|&slot| scratch.counts[slot as usize] as f64 > self.bar)
            .collect();
        candidates.sort_unstable();
        for &slot in &scratch.dirty {
            scratch.counts[slot as usize] = 0;
        }
        scratch.dirty.clear();
        if candidates.is_empty() {
            return;
        }

        // pass 2: collect projected start lists for the surviving slots
        for (i, &slot) in candidates.iter().enumerate() {
            scratch.candidate_of[slot as usize] = i as u32 + 1;
        }
        let mut proj: Vec<Vec<u64>> = vec![Vec::new(); candidates.len()];
        for &t in starts {
            let lo = t.saturating_sub(slack);
            for s in lo..=t {
                for &ty in idx.types_at(s) {
                    let delta = t - s;
                    if delta == 0 && ty as usize >= first_type {
                        continue;
                    }
                    let slot = ty as usize * scratch.stride + delta as usize;
                    let c = scratch.candidate_of[slot];
                    if c != 0 {
                        proj[c as usize - 1].push(s);
                    }
                }
            }
        }
        for &slot in &candidates {
            scratch.candidate_of[slot as usize] = 0;
        }

        for (i, slot) in candidates.into_iter().enumerate() {
            let ty = slot as usize / scratch.stride;
            let delta = (slot as usize % scratch.stride) as u64;
            let beta = alpha.extend_left(ty, delta);
            let beta_starts = &proj[i];
            debug_assert!(beta_starts.windows(2).all(|w| w[0] < w[1]));
            let count = max_disjoint(beta_starts, &beta);
            if count as f64 > self.bar {
                self.results.push((beta.clone(), count));
                self.grow(&beta, beta_starts, scratch);
            }
        }
    }
}

/// Mine every fixed-delay episode of size 1..=k+1 with span <= `window` and
/// distinct-occurrence count strictly above `theta * (T - W)`.
pub fn mine_frequent(
    stream: &EventStream,
    window: u64,
    theta: f64,
    k: usize,
) -> Result<FrequencyTable> {
    if window == 0 {
        return Err(Error::InvalidParam("window must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParam(format!(
            "theta must be in [0, 1], got {theta}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParam("max parent-set size must be >= 1".into()));
    }
    let horizon = stream.horizon();
    let max_size = k + 1;
    let mut table = FrequencyTable {
        window,
        horizon,
        theta,
        max_size,
        entries: HashMap::new(),
    };
    if horizon <= window {
        return Ok(table); // no occurrence can terminate after W
    }
    let bar = theta * (horizon - window) as f64;

    let num_types = stream.alphabet().len();
    let per_type: Vec<Vec<(Episode, u64)>> = (0..num_types)
        .into_par_iter()
        .map(|ty| {
            let ticks = stream.index().ticks(ty);
            let first = ticks.partition_point(|&t| t <= window);
            let starts = &ticks[first..];
            let count = starts.len() as u64;
            if count as f64 <= bar {
                return Vec::new();
            }
            let mut miner = Miner {
                stream,
                window,
                bar,
                max_size,
                results: vec![(Episode::single(ty), count)],
            };
            let mut scratch = GrowScratch::new(num_types, window);
            miner.grow(&Episode::single(ty), starts, &mut scratch);
            miner.results
        })
        .collect();

    for results in per_type {
        for (ep, count) in results {
            table.entries.insert(ep, count);
        }
    }
    Ok(table)
}
