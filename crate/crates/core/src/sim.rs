//! Event-stream generator: inhomogeneous-Poisson units whose per-tick firing
//! rate is a sigmoid of delayed, possibly higher-order, excitatory input.
//!
//! Unit `i` fires in tick `t` with probability `min(1, lambda_i(t) * dt)`
//! where `lambda_i(t) = rate_ceiling / (1 + exp(offset - I_i(t)))` and
//! `I_i(t)` sums a weight for every interaction term whose sources all fired
//! at their configured delays. With no input the rate is
//! `ceiling * sigma(-offset)`; topology builders size the ceiling so that this
//! baseline equals the requested rate while calibrated weights can still push
//! an armed unit to any conditional firing probability below one.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{default_labels, Alphabet, EventStream};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SourceTap {
    pub node: usize,
    pub delay_ticks: u64,
}

/// One interaction term: all sources must have fired at their delays for the
/// weight to contribute to the target's input.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Term {
    pub target: usize,
    pub sources: Vec<SourceTap>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NetworkSpec {
    pub nodes: usize,
    /// Sigmoid numerator: the rate ceiling an infinitely driven unit reaches.
    pub base_rate_hz: f64,
    pub sigmoid_offset: f64,
    pub tick_s: f64,
    pub terms: Vec<Term>,
}

fn sigma(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::InvalidParam("network needs at least one node".into()));
        }
        if !(self.tick_s > 0.0) {
            return Err(Error::InvalidParam(format!("tick_s must be > 0, got {}", self.tick_s)));
        }
        if !(self.base_rate_hz > 0.0) || !self.base_rate_hz.is_finite() {
            return Err(Error::InvalidParam(format!(
                "base_rate_hz must be positive and finite, got {}",
                self.base_rate_hz
            )));
        }
        for term in &self.terms {
            if term.target >= self.nodes {
                return Err(Error::InvalidParam(format!(
                    "term target {} outside 0..{}",
                    term.target, self.nodes
                )));
            }
            if term.sources.is_empty() {
                return Err(Error::InvalidParam("term needs at least one source".into()));
            }
            if !term.weight.is_finite() {
                return Err(Error::InvalidParam("term weight must be finite".into()));
            }
            for s in &term.sources {
                if s.node >= self.nodes {
                    return Err(Error::InvalidParam(format!(
                        "term source {} outside 0..{}",
                        s.node, self.nodes
                    )));
                }
                if s.delay_ticks == 0 {
                    return Err(Error::InvalidParam("source delays must be >= 1 tick".into()));
                }
            }
        }
        Ok(())
    }

    /// Per-tick firing probability of an undriven unit.
    pub fn baseline_probability(&self) -> f64 {
        (self.base_rate_hz * self.tick_s * sigma(-self.sigmoid_offset)).min(1.0)
    }

    /// Per-tick firing probability of a unit whose input sums to `input`.
    pub fn fire_probability(&self, input: f64) -> f64 {
        (self.base_rate_hz * self.tick_s * sigma(input - self.sigmoid_offset)).min(1.0)
    }

    /// Weight making a single active term fire its target with the requested
    /// conditional probability: `target = ceiling*dt * sigma(beta - offset)`.
    pub fn calibrate_weight(&self, target: f64) -> Result<f64> {
        if !(0.0 < target && target < 1.0) {
            return Err(Error::InvalidParam(format!(
                "conditional probability must be in (0, 1), got {target}"
            )));
        }
        let ceiling = self.base_rate_hz * self.tick_s;
        if ceiling <= target {
            return Err(Error::InfeasibleWeight { target, ceiling });
        }
        Ok(self.sigmoid_offset - (ceiling / target - 1.0).ln())
    }

    pub fn labels(&self) -> Vec<String> {
        default_labels(self.nodes)
    }

    pub fn ground_truth(&self) -> GroundTruth {
        let mut edges: Vec<(usize, usize, u64)> = Vec::new();
        let mut order = vec![0usize; self.nodes];
        for term in &self.terms {
            for s in &term.sources {
                edges.push((s.node, term.target, s.delay_ticks));
            }
            order[term.target] = order[term.target].max(term.sources.len());
        }
        edges.sort_unstable();
        edges.dedup();
        GroundTruth {
            nodes: self.nodes,
            labels: self.labels(),
            edges,
            order_by_target: order,
        }
    }
}

/// The generating network's edge set, the evaluation target.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub nodes: usize,
    pub labels: Vec<String>,
    /// `(source, target, delay)`, sorted.
    pub edges: Vec<(usize, usize, u64)>,
    /// Largest term arity feeding each node (0 for roots).
    pub order_by_target: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TruthEdgeJson {
    from: String,
    to: String,
    delay: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TruthJson {
    nodes: Vec<String>,
    edges: Vec<TruthEdgeJson>,
}

impl GroundTruth {
    pub fn to_json_string(&self) -> Result<String> {
        let json = TruthJson {
            nodes: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(f, t, d)| TruthEdgeJson {
                    from: self.labels[f].clone(),
                    to: self.labels[t].clone(),
                    delay: d,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: TruthJson = serde_json::from_str(text)?;
        let alphabet = Alphabet::new(json.nodes.clone())?;
        let mut edges = Vec::with_capacity(json.edges.len());
        let mut order = vec![0usize; json.nodes.len()];
        for e in &json.edges {
            let f = alphabet
                .id(&e.from)
                .ok_or_else(|| Error::AlphabetMismatch(format!("unknown node `{}`", e.from)))?;
            let t = alphabet
                .id(&e.to)
                .ok_or_else(|| Error::AlphabetMismatch(format!("unknown node `{}`", e.to)))?;
            edges.push((f, t, e.delay));
            order[t] += 1; // arity is not serialized; in-degree is a usable stand-in
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self {
            nodes: json.nodes.len(),
            labels: json.nodes,
            edges,
            order_by_target: order,
        })
    }
}

/// Drive the network for `duration_s` seconds under a fixed seed.
pub fn simulate(spec: &NetworkSpec, duration_s: f64, seed: u64) -> Result<(EventStream, GroundTruth)> {
    spec.validate()?;
    if !(duration_s > 0.0) {
        return Err(Error::InvalidParam(format!(
            "duration must be > 0, got {duration_s}"
        )));
    }
    let ticks = (duration_s / spec.tick_s).round() as u64;
    if ticks == 0 {
        return Err(Error::InvalidParam("duration shorter than one tick".into()));
    }
    let mut terms_of: Vec<Vec<&Term>> = vec![Vec::new(); spec.nodes];
    for term in &spec.terms {
        terms_of[term.target].push(term);
    }

    let words = (ticks as usize + 2 + 63) / 64;
    let mut fired: Vec<Vec<u64>> = vec![vec![0u64; words]; spec.nodes];
    let mut events: Vec<(usize, u64)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clamped_ticks = 0u64;

    for t in 1..=ticks {
        for i in 0..spec.nodes {
            let mut input = 0.0;
            for term in &terms_of[i] {
                let active = term.sources.iter().all(|s| {
                    t > s.delay_ticks && {
                        let tk = t - s.delay_ticks;
                        fired[s.node][(tk / 64) as usize] & (1 << (tk % 64)) != 0
                    }
                });
                if active {
                    input += term.weight;
                }
            }
            let raw = spec.base_rate_hz * spec.tick_s * sigma(input - spec.sigmoid_offset);
            if raw > 1.0 {
                clamped_ticks += 1;
            }
            let p = raw.min(1.0);
            if rng.gen::<f64>() < p {
                fired[i][(t / 64) as usize] |= 1 << (t % 64);
                events.push((i, t));
            }
        }
    }
    if clamped_ticks > 0 {
        log::warn!(
            "firing probability exceeded 1 in {clamped_ticks} node-ticks; weights look mis-tuned"
        );
    }
    let alphabet = Alphabet::new(spec.labels())?;
    let stream = EventStream::new(alphabet, events, Some(ticks))?;
    Ok((stream, spec.ground_truth()))
}

/// Label-shuffle surrogate: every event keeps its tick and receives a uniform
/// random label, redrawn on collision so per-tick event counts are preserved.
pub fn surrogate(stream: &EventStream, seed: u64) -> EventStream {
    let m = stream.alphabet().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: HashSet<(usize, u64)> = HashSet::with_capacity(stream.len());
    let mut events = Vec::with_capacity(stream.len());
    for e in stream.events() {
        loop {
            let label = rng.gen_range(0..m);
            if taken.insert((label, e.tick)) {
                events.push((label, e.tick));
                break;
            }
        }
    }
    EventStream::new(stream.alphabet().clone(), events, Some(stream.horizon()))
        .expect("relabeled events stay in range")
}

/// Shared generation parameters for the topology builders.
#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    /// Conditional firing probability of a target whose term is active.
    pub conditional: f64,
    /// Undriven firing rate every unit should exhibit, in Hz.
    pub baseline_hz: f64,
    pub sigmoid_offset: f64,
    pub tick_s: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            conditional: 0.8,
            baseline_hz: 20.0,
            sigmoid_offset: 6.0,
            tick_s: 0.001,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TopologyKind {
    /// First-order linear chain `0 -> 1 -> ... -> n-1`; `closed` adds the
    /// wrap-around edge, making every node driven.
    Chain { nodes: usize, delay: u64, closed: bool },
    /// Two components: a first-order 4-chain and a 4-unit cascade whose third
    /// and fourth units need two resp. three of their predecessors.
    HigherOrderChain { include_chain_component: bool },
    /// Groups of synchronously firing units strung together behind a
    /// pacemaker; every member of a group listens to all members of the
    /// previous one at the same delay.
    Synfire { groups: usize, group_size: usize, delay: u64 },
    /// A root fans out to relays at staggered delays; join units fire only
    /// when specific relay pairs hit their exact lags.
    Polychronous,
    /// Random net: `density * nodes` units get a generating term of up to
    /// `max_order` sources wired so that multi-source terms share a common
    /// ancestor and stay arm-able.
    Random { nodes: usize, density: f64, max_order: usize, seed: u64 },
}

fn base_spec(nodes: usize, p: &GenParams) -> Result<NetworkSpec> {
    if !(0.0 < p.conditional && p.conditional < 1.0) {
        return Err(Error::InvalidParam(format!(
            "conditional probability must be in (0,1), got {}",
            p.conditional
        )));
    }
    if !(p.baseline_hz > 0.0) || !(p.tick_s > 0.0) {
        return Err(Error::InvalidParam("baseline rate and tick must be > 0".into()));
    }
    // ceiling such that sigma(-offset) of it reproduces the baseline rate
    let base_rate_hz = p.baseline_hz * (1.0 + p.sigmoid_offset.exp());
    let spec = NetworkSpec {
        nodes,
        base_rate_hz,
        sigmoid_offset: p.sigmoid_offset,
        tick_s: p.tick_s,
        terms: Vec::new(),
    };
    let ceiling = spec.base_rate_hz * spec.tick_s;
    if ceiling <= p.conditional {
        return Err(Error::InfeasibleWeight {
            target: p.conditional,
            ceiling,
        });
    }
    Ok(spec)
}

pub fn make_topology(kind: &TopologyKind, p: &GenParams) -> Result<NetworkSpec> {
    match *kind {
        TopologyKind::Chain { nodes, delay, closed } => {
            if nodes < 2 {
                return Err(Error::InvalidParam("chain needs >= 2 nodes".into()));
            }
            if delay == 0 {
                return Err(Error::InvalidParam("chain delay must be >= 1".into()));
            }
            let mut spec = base_spec(nodes, p)?;
            let w = spec.calibrate_weight(p.conditional)?;
            let last = if closed { nodes } else { nodes - 1 };
            for i in 0..last {
                spec.terms.push(Term {
                    target: (i + 1) % nodes,
                    sources: vec![SourceTap { node: i, delay_ticks: delay }],
                    weight: w,
                });
            }
            Ok(spec)
        }
        TopologyKind::HigherOrderChain { include_chain_component } => {
            let (nodes, base) = if include_chain_component { (8, 4) } else { (4, 0) };
            let mut spec = base_spec(nodes, p)?;
            let w = spec.calibrate_weight(p.conditional)?;
            if include_chain_component {
                for i in 0..3usize {
                    spec.terms.push(Term {
                        target: i + 1,
                        sources: vec![SourceTap { node: i, delay_ticks: 1 }],
                        weight: w,
                    });
                }
            }
            let (m, n, o, q) = (base, base + 1, base + 2, base + 3);
            spec.terms.push(Term {
                target: n,
                sources: vec![SourceTap { node: m, delay_ticks: 1 }],
                weight: w,
            });
            spec.terms.push(Term {
                target: o,
                sources: vec![
                    SourceTap { node: m, delay_ticks: 2 },
                    SourceTap { node: n, delay_ticks: 1 },
                ],
                weight: w,
            });
            spec.terms.push(Term {
                target: q,
                sources: vec![
                    SourceTap { node: m, delay_ticks: 3 },
                    SourceTap { node: n, delay_ticks: 2 },
                    SourceTap { node: o, delay_ticks: 1 },
                ],
                weight: w,
            });
            Ok(spec)
        }
        TopologyKind::Synfire { groups, group_size, delay } => {
            if groups < 2 || group_size < 1 || delay == 0 {
                return Err(Error::InvalidParam(
                    "synfire needs >= 2 groups, group size >= 1, delay >= 1".into(),
                ));
            }
            let nodes = 1 + groups * group_size;
            let mut spec = base_spec(nodes, p)?;
            let w = spec.calibrate_weight(p.conditional)?;
            let member = |g: usize, j: usize| 1 + g * group_size + j;
            for j in 0..group_size {
                spec.terms.push(Term {
                    target: member(0, j),
                    sources: vec![SourceTap { node: 0, delay_ticks: delay }],
                    weight: w,
                });
            }
            for g in 1..groups {
                for j in 0..group_size {
                    spec.terms.push(Term {
                        target: member(g, j),
                        sources: (0..group_size)
                            .map(|s| SourceTap { node: member(g - 1, s), delay_ticks: delay })
                            .collect(),
                        weight: w,
                    });
                }
            }
            Ok(spec)
        }
        TopologyKind::Polychronous => {
            // root 0; relays 1..=3 at lags 1,3,5; joins 4..=6 on relay pairs
            let mut spec = base_spec(7, p)?;
            let w = spec.calibrate_weight(p.conditional)?;
            for (relay, delay) in [(1usize, 1u64), (2, 3), (3, 5)] {
                spec.terms.push(Term {
                    target: relay,
                    sources: vec![SourceTap { node: 0, delay_ticks: delay }],
                    weight: w,
                });
            }
            let joins: [(usize, [(usize, u64); 2]); 3] = [
                (4, [(1, 4), (2, 2)]),
                (5, [(2, 3), (3, 1)]),
                (6, [(1, 7), (3, 3)]),
            ];
            for (target, sources) in joins {
                spec.terms.push(Term {
                    target,
                    sources: sources
                        .iter()
                        .map(|&(node, delay_ticks)| SourceTap { node, delay_ticks })
                        .collect(),
                    weight: w,
                });
            }
            Ok(spec)
        }
        TopologyKind::Random { nodes, density, max_order, seed } => {
            if nodes < 4 {
                return Err(Error::InvalidParam("random net needs >= 4 nodes".into()));
            }
            if !(0.0 < density && density <= 1.0) {
                return Err(Error::InvalidParam(format!(
                    "density must be in (0,1], got {density}"
                )));
            }
            if !(1..=3).contains(&max_order) {
                return Err(Error::InvalidParam("max_order must be 1..=3".into()));
            }
            let mut spec = base_spec(nodes, p)?;
            let w = spec.calibrate_weight(p.conditional)?;
            let n_targets = ((density * nodes as f64).round() as usize).clamp(1, nodes - 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ids: Vec<usize> = (0..nodes).collect();
            ids.shuffle(&mut rng);
            let targets: Vec<usize> = ids[..n_targets].to_vec();
            let roots: Vec<usize> = ids[n_targets..].to_vec();

            // anchor = (ancestral root, lag from it, chain depth)
            let mut anchor: Vec<Option<(usize, u64, usize)>> = vec![None; nodes];
            for &r in &roots {
                anchor[r] = Some((r, 0, 0));
            }
            let mut placed: Vec<usize> = roots.clone();
            for &t in &targets {
                let want = rng.gen_range(1..=max_order);
                let mut sources: Vec<(usize, u64)> = Vec::new();
                if want > 1 {
                    // members anchored to a shared root, shallow enough to
                    // co-fire dependably, close enough in lag to fit a window
                    let mut by_root: Vec<(usize, Vec<usize>)> = Vec::new();
                    for &v in &placed {
                        let (r, _, depth) = anchor[v].unwrap();
                        if depth <= 2 {
                            match by_root.iter_mut().find(|(root, _)| *root == r) {
                                Some((_, vs)) => vs.push(v),
                                None => by_root.push((r, vec![v])),
                            }
                        }
                    }
                    let mut feasible: Vec<&(usize, Vec<usize>)> =
                        by_root.iter().filter(|(_, vs)| vs.len() >= want).collect();
                    feasible.sort_by_key(|(r, _)| *r);
                    if let Some((_, group)) = feasible.choose(&mut rng) {
                        let mut group = group.clone();
                        group.shuffle(&mut rng);
                        let mut chosen: Vec<usize> = Vec::new();
                        for v in group {
                            let lag = anchor[v].unwrap().1;
                            let spread_ok = chosen
                                .iter()
                                .all(|&c| anchor[c].unwrap().1.abs_diff(lag) <= 4);
                            if spread_ok {
                                chosen.push(v);
                                if chosen.len() == want {
                                    break;
                                }
                            }
                        }
                        if chosen.len() == want {
                            let max_lag = chosen.iter().map(|&c| anchor[c].unwrap().1).max().unwrap();
                            let t_lag = max_lag + rng.gen_range(1..=2);
                            for &c in &chosen {
                                sources.push((c, t_lag - anchor[c].unwrap().1));
                            }
                        }
                    }
                }
                if sources.is_empty() {
                    // first-order fallback
                    let src = *placed.choose(&mut rng).unwrap();
                    let delay = rng.gen_range(1..=3);
                    sources.push((src, delay));
                }
                sources.sort_unstable();
                let (src0, d0) = sources[0];
                let (r, lag0, depth0) = anchor[src0].unwrap();
                let depth = sources
                    .iter()
                    .map(|&(s, _)| anchor[s].unwrap().2)
                    .max()
                    .unwrap();
                anchor[t] = Some((r, lag0 + d0, depth0.max(depth) + 1));
                spec.terms.push(Term {
                    target: t,
                    sources: sources
                        .into_iter()
                        .map(|(node, delay_ticks)| SourceTap { node, delay_ticks })
                        .collect(),
                    weight: w,
                });
                placed.push(t);
            }
            spec.terms.sort_by_key(|t| t.target);
            Ok(spec)
        }
    }
}
