//! Fixed-delay episodes: an ordered list of event types with exact integer
//! inter-event delays. `A -3-> B -5-> C` means a B exactly 3 ticks after an A
//! and a C exactly 5 ticks after that B.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::stream::Alphabet;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Episode {
    types: Vec<usize>,
    delays: Vec<u64>,
}

impl Episode {
    pub fn new(types: Vec<usize>, delays: Vec<u64>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidParam("episode needs at least one node".into()));
        }
        if delays.len() + 1 != types.len() {
            return Err(Error::InvalidParam(format!(
                "{} types need {} delays, got {}",
                types.len(),
                types.len() - 1,
                delays.len()
            )));
        }
        Ok(Self { types, delays })
    }

    pub fn single(type_id: usize) -> Self {
        Self {
            types: vec![type_id],
            delays: Vec::new(),
        }
    }

    /// Prepend a node `delay` ticks before the current first node.
    pub fn extend_left(&self, type_id: usize, delay: u64) -> Self {
        let mut types = Vec::with_capacity(self.types.len() + 1);
        types.push(type_id);
        types.extend_from_slice(&self.types);
        let mut delays = Vec::with_capacity(self.delays.len() + 1);
        delays.push(delay);
        delays.extend_from_slice(&self.delays);
        Self { types, delays }
    }

    /// The episode with the first node removed (what this one was grown from).
    pub fn suffix(&self) -> Option<Self> {
        if self.types.len() <= 1 {
            return None;
        }
        Some(Self {
            types: self.types[1..].to_vec(),
            delays: self.delays[1..].to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        false // an episode always has at least one node
    }

    pub fn types(&self) -> &[usize] {
        &self.types
    }

    pub fn delays(&self) -> &[u64] {
        &self.delays
    }

    pub fn last_type(&self) -> usize {
        *self.types.last().unwrap()
    }

    pub fn first_type(&self) -> usize {
        self.types[0]
    }

    /// Sum of delays: the episode's temporal footprint.
    pub fn span(&self) -> u64 {
        self.delays.iter().sum()
    }

    /// Offset of each node from the episode start tick.
    pub fn offsets(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.types.len());
        let mut acc = 0;
        out.push(0);
        for &d in &self.delays {
            acc += d;
            out.push(acc);
        }
        out
    }

    /// True when two nodes map to the same `(type, offset)`, i.e. the same
    /// event. Such an episode has no injective occurrence and always counts 0.
    pub fn is_degenerate(&self) -> bool {
        let offs = self.offsets();
        let mut seen: Vec<(usize, u64)> = self.types.iter().copied().zip(offs).collect();
        seen.sort_unstable();
        seen.windows(2).any(|w| w[0] == w[1])
    }

    /// Ordering used for all deterministic output: size first, then types,
    /// then delays.
    pub fn cmp_canonical(&self, other: &Self) -> Ordering {
        self.types
            .len()
            .cmp(&other.types.len())
            .then_with(|| self.types.cmp(&other.types))
            .then_with(|| self.delays.cmp(&other.delays))
    }

    /// Render with alphabet labels, e.g. `A -3-> B -5-> C`.
    pub fn display(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (i, &ty) in self.types.iter().enumerate() {
            if i > 0 {
                out.push_str(&format!(" -{}-> ", self.delays[i - 1]));
            }
            out.push_str(alphabet.label(ty));
        }
        out
    }
}
