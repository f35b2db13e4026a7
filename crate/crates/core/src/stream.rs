//! Event streams: ingest, discretization, and the indicator view of the data.
//!
//! A stream is a time-ordered multiset of `(event type, tick)` pairs over a
//! finite alphabet. Ticks are 1-based positive integers. At most one event per
//! `(type, tick)` pair is kept: the data model is a binary indicator process,
//! so multiplicity at a single tick is unrepresentable and duplicates are
//! collapsed on ingest.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Ordered set of event-type names. The ordering is fixed at construction and
/// defines the canonical type order used everywhere else (tie-breaking in the
/// miner, zero-delay canonicalization, output ordering).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

/// Deterministic label generator: single letters for small alphabets,
/// zero-padded `nXXX` otherwise so lexicographic and index order agree.
pub fn default_labels(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n)
            .map(|i| char::from(b'A' + i as u8).to_string())
            .collect()
    } else {
        let width = n.to_string().len();
        (0..n).map(|i| format!("n{i:0width$}")).collect()
    }
}

/// One event: an alphabet index and a 1-based tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub type_id: usize,
    pub tick: u64,
}

/// Per-type occurrence index with O(1) membership queries, plus a per-tick
/// bucket view used by the miner's backward window scans.
#[derive(Debug, Clone)]
pub struct OccurrenceIndex {
    ticks_by_type: Vec<Vec<u64>>,
    // one bitset per type over ticks 0..=horizon
    present: Vec<Vec<u64>>,
    // CSR layout of events grouped by tick, types ascending within a tick
    tick_offsets: Vec<u32>,
    tick_types: Vec<u32>,
}

impl OccurrenceIndex {
    fn build(num_types: usize, horizon: u64, events: &[Event]) -> Self {
        let words = (horizon as usize + 2 + 63) / 64;
        let mut ticks_by_type = vec![Vec::new(); num_types];
        let mut present = vec![vec![0u64; words]; num_types];
        let mut tick_offsets = vec![0u32; horizon as usize + 2];
        let mut tick_types = Vec::with_capacity(events.len());
        for e in events {
            ticks_by_type[e.type_id].push(e.tick);
            present[e.type_id][(e.tick / 64) as usize] |= 1 << (e.tick % 64);
            tick_offsets[e.tick as usize + 1] += 1;
        }
        for i in 1..tick_offsets.len() {
            tick_offsets[i] += tick_offsets[i - 1];
        }
        // events are sorted by (tick, type), so a single pass fills CSR in order
        for e in events {
            tick_types.push(e.type_id as u32);
        }
        Self {
            ticks_by_type,
            present,
            tick_offsets,
            tick_types,
        }
    }

    /// Sorted ticks at which `type_id` occurs.
    pub fn ticks(&self, type_id: usize) -> &[u64] {
        &self.ticks_by_type[type_id]
    }

    /// Exact membership query.
    #[inline]
    pub fn contains(&self, type_id: usize, tick: u64) -> bool {
        if type_id >= self.present.len() {
            return false;
        }
        let w = (tick / 64) as usize;
        match self.present[type_id].get(w) {
            Some(word) => word & (1 << (tick % 64)) != 0,
            None => false,
        }
    }

    /// Type ids of all events at `tick`, ascending.
    #[inline]
    pub fn types_at(&self, tick: u64) -> &[u32] {
        let t = tick as usize;
        if t + 1 >= self.tick_offsets.len() {
            return &[];
        }
        let lo = self.tick_offsets[t] as usize;
        let hi = self.tick_offsets[t + 1] as usize;
        &self.tick_types[lo..hi]
    }
}

/// An immutable, indexed event stream.
#[derive(Debug, Clone)]
pub struct EventStream {
    alphabet: Alphabet,
    events: Vec<Event>,
    horizon: u64,
    index: OccurrenceIndex,
}

impl EventStream {
    /// Build a stream from raw `(type_id, tick)` pairs. Events are sorted,
    /// duplicates collapsed, and the horizon T taken from the last event
    /// unless `horizon` extends past it.
    pub fn new(
        alphabet: Alphabet,
        mut raw: Vec<(usize, u64)>,
        horizon: Option<u64>,
    ) -> Result<Self> {
        for &(ty, tick) in &raw {
            if ty >= alphabet.len() {
                return Err(Error::InvalidParam(format!(
                    "type id {ty} outside alphabet of size {}",
                    alphabet.len()
                )));
            }
            if tick == 0 {
                return Err(Error::TickOutOfRange { tick: 0, max: u64::MAX });
            }
        }
        raw.sort_unstable_by_key(|&(ty, tick)| (tick, ty));
        raw.dedup();
        let last = raw.last().map(|&(_, t)| t).unwrap_or(0);
        let horizon = match horizon {
            Some(h) if h < last => return Err(Error::HorizonBeforeLastEvent { horizon: h, last }),
            Some(h) => h,
            None => last,
        };
        let events: Vec<Event> = raw
            .into_iter()
            .map(|(type_id, tick)| Event { type_id, tick })
            .collect();
        let index = OccurrenceIndex::build(alphabet.len(), horizon, &events);
        Ok(Self {
            alphabet,
            events,
            horizon,
            index,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The horizon T: the last event's tick, or the explicit override.
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn index(&self) -> &OccurrenceIndex {
        &self.index
    }

    /// The event-indicator value for type `j` at tick `t`.
    pub fn indicator(&self, j: usize, t: u64) -> Result<bool> {
        if t == 0 || t > self.horizon {
            return Err(Error::TickOutOfRange {
                tick: t,
                max: self.horizon,
            });
        }
        if j >= self.alphabet.len() {
            return Err(Error::InvalidParam(format!(
                "type id {j} outside alphabet of size {}",
                self.alphabet.len()
            )));
        }
        Ok(self.index.contains(j, t))
    }

    /// Serialize as the event CSV (integer ticks). The horizon is written as
    /// a comment so that a silent tail survives a round-trip.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# horizon={}", self.horizon);
        out.push_str("time,label\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{}", e.tick, self.alphabet.label(e.type_id));
        }
        out
    }
}

/// How incoming times are mapped onto ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeMode {
    /// Times are already integer ticks (1-based).
    Ticks,
    /// Times are seconds; `tick = floor(t / bin_width) + 1`.
    Seconds { bin_width: f64 },
}

/// Where the alphabet comes from during parsing.
#[derive(Debug, Clone)]
pub enum AlphabetMode {
    /// Alphabet is the lexicographically sorted set of labels seen.
    Discover,
    /// Labels must come from this alphabet; anything else is an error.
    Fixed(Alphabet),
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub time: TimeMode,
    pub alphabet: AlphabetMode,
    /// Optional horizon override; a `# horizon=` comment in the input is used
    /// when this is `None`.
    pub horizon: Option<u64>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            time: TimeMode::Ticks,
            alphabet: AlphabetMode::Discover,
            horizon: None,
        }
    }
}

/// Map real-valued seconds onto 1-based ticks: `floor(t / bin_width) + 1`.
pub fn discretize(times: &[f64], bin_width: f64) -> Result<Vec<u64>> {
    if !(bin_width > 0.0) {
        return Err(Error::InvalidParam(format!(
            "bin width must be > 0, got {bin_width}"
        )));
    }
    times
        .iter()
        .map(|&t| {
            if t < 0.0 || !t.is_finite() {
                Err(Error::NegativeTime(t))
            } else {
                Ok((t / bin_width).floor() as u64 + 1)
            }
        })
        .collect()
}

/// Parse the event CSV (`time,label` header, one event per line, `#` comments
/// allowed). Returns the collapsed, sorted stream.
pub fn parse_events<R: BufRead>(reader: R, opts: &ParseOptions) -> Result<EventStream> {
    let mut header_seen = false;
    let mut rows: Vec<(String, u64)> = Vec::new();
    let mut embedded_horizon: Option<u64> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(h) = rest.trim().strip_prefix("horizon=") {
                embedded_horizon = h.trim().parse::<u64>().ok();
            }
            continue;
        }
        if !header_seen {
            let head: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if head != ["time", "label"] {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header `time,label`, got `{trimmed}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let mut parts = trimmed.splitn(2, ',');
        let time_s = parts.next().unwrap_or("").trim();
        let label = parts
            .next()
            .ok_or_else(|| Error::Parse {
                line: lineno,
                msg: "missing label field".into(),
            })?
            .trim();
        if label.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "empty label".into(),
            });
        }
        let tick = match opts.time {
            TimeMode::Ticks => time_s.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid tick `{time_s}`"),
            })?,
            TimeMode::Seconds { bin_width } => {
                let t = time_s.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("invalid time `{time_s}`"),
                })?;
                match discretize(&[t], bin_width) {
                    Ok(v) => v[0],
                    Err(_) => {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("negative time `{time_s}`"),
                        })
                    }
                }
            }
        };
        if tick == 0 {
            return Err(Error::Parse {
                line: lineno,
                msg: "tick must be >= 1".into(),
            });
        }
        rows.push((label.to_string(), tick));
    }
    if !header_seen && !rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "missing `time,label` header".into(),
        });
    }

    let alphabet = match &opts.alphabet {
        AlphabetMode::Fixed(a) => a.clone(),
        AlphabetMode::Discover => {
            let mut labels: Vec<&str> = rows.iter().map(|(l, _)| l.as_str()).collect();
            labels.sort_unstable();
            labels.dedup();
            Alphabet::new(labels)?
        }
    };
    let mut raw = Vec::with_capacity(rows.len());
    for (i, (label, tick)) in rows.iter().enumerate() {
        let id = alphabet.id(label).ok_or_else(|| Error::UnknownLabel {
            line: i + 2, // approximate: header + 1-based data row
            label: label.clone(),
        })?;
        raw.push((id, *tick));
    }
    EventStream::new(alphabet, raw, opts.horizon.or(embedded_horizon))
}

/// Convenience wrapper over [`parse_events`] for in-memory text.
pub fn parse_events_str(text: &str, opts: &ParseOptions) -> Result<EventStream> {
    parse_events(std::io::Cursor::new(text.as_bytes()), opts)
}
