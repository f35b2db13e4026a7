//! Marginal probabilities of indicator sets from episode counts, and the
//! mutual-information score built on them.
//!
//! A set of event indicators `{X_j1(t-d1), ..., child X_j(t)}` corresponds
//! one-to-one to a fixed-delay episode. The all-ones probability is the
//! episode's distinct-occurrence count normalized by (T - W); every other
//! assignment comes from the inclusion-exclusion formula over super-sets.
//! Distinct-occurrence counts are not perfectly consistent marginals, so small
//! negative cells can appear; they are clamped to zero and the distribution
//! renormalized, with a flag recording that the repair fired.

use crate::count::CountCache;
use crate::episode::Episode;
use crate::error::{Error, Result};

/// A child indicator plus member indicators at fixed delays before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorSet {
    child: usize,
    members: Vec<(usize, u64)>,
}

impl IndicatorSet {
    /// `members` are `(type, delay-before-child)` pairs; the child sits at
    /// delay 0. Duplicate indicators are rejected.
    pub fn new(child: usize, members: Vec<(usize, u64)>) -> Result<Self> {
        let mut seen: Vec<(usize, u64)> = members.clone();
        seen.push((child, 0));
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParam(
                "duplicate indicator in set".into(),
            ));
        }
        Ok(Self { child, members })
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn members(&self) -> &[(usize, u64)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len() + 1
    }

    /// All indicators in canonical temporal order (earliest first: delay
    /// descending, ties by type ascending). The child is included.
    pub fn items(&self) -> Vec<(usize, u64)> {
        let mut items: Vec<(usize, u64)> = self.members.clone();
        items.push((self.child, 0));
        items.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        items
    }

    /// Index of the child within [`Self::items`].
    pub fn child_index(&self) -> usize {
        self.items()
            .iter()
            .position(|&(ty, d)| ty == self.child && d == 0)
            .unwrap()
    }
}

/// The fixed-delay episode associated with an indicator set: types in temporal
/// order, delays the successive differences of the offsets.
pub fn episode_of(set: &IndicatorSet) -> Episode {
    episode_of_items(&set.items()).expect("indicator set is non-empty")
}

fn episode_of_items(items: &[(usize, u64)]) -> Option<Episode> {
    if items.is_empty() {
        return None;
    }
    let types: Vec<usize> = items.iter().map(|&(ty, _)| ty).collect();
    let delays: Vec<u64> = items.windows(2).map(|w| w[0].1 - w[1].1).collect();
    Some(Episode::new(types, delays).expect("delay count matches"))
}

/// Joint distribution over the binary assignments of an indicator set.
/// Assignment bit `j` corresponds to item `j` of the canonical order.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    items: Vec<(usize, u64)>,
    child_index: usize,
    probs: Vec<f64>,
    clamped: bool,
    pre_clamp_sum: f64,
}

impl JointDistribution {
    pub fn items(&self) -> &[(usize, u64)] {
        &self.items
    }

    pub fn child_index(&self) -> usize {
        self.child_index
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Whether any inclusion-exclusion cell went negative and was repaired.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Sum over all assignments before the clamp repair; 1 up to rounding.
    pub fn pre_clamp_sum(&self) -> f64 {
        self.pre_clamp_sum
    }

    pub fn prob(&self, assignment: usize) -> f64 {
        self.probs[assignment]
    }

    /// Debug dump, one `assignment,probability` row per line. The leftmost
    /// character of the assignment is the earliest indicator.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("assignment,probability\n");
        let n = self.items.len();
        for (mask, p) in self.probs.iter().enumerate() {
            let bits: String = (0..n)
                .map(|j| if mask >> j & 1 == 1 { '1' } else { '0' })
                .collect();
            out.push_str(&format!("{bits},{p}\n"));
        }
        out
    }
}

/// Probability of the all-ones assignment: `f(episode) / (T - W)`.
pub fn all_ones_probability(set: &IndicatorSet, counts: &CountCache) -> Result<f64> {
    let t = counts.stream().horizon();
    let w = counts.window();
    if t <= w {
        return Err(Error::DegenerateHorizon { horizon: t, window: w });
    }
    let count = counts.count(&episode_of(set))?;
    Ok(count as f64 / (t - w) as f64)
}

/// Full joint over the set's 2^l assignments via inclusion-exclusion.
pub fn joint_distribution(set: &IndicatorSet, counts: &CountCache) -> Result<JointDistribution> {
    let t = counts.stream().horizon();
    let w = counts.window();
    if t <= w {
        return Err(Error::DegenerateHorizon { horizon: t, window: w });
    }
    let items = set.items();
    let l = items.len();
    for &(_, d) in &items {
        if d > w {
            return Err(Error::InvalidParam(format!(
                "indicator delay {d} exceeds window {w}"
            )));
        }
    }
    let norm = (t - w) as f64;
    let full: usize = (1 << l) - 1;

    // relative frequency of every sub-set's episode; the empty set has
    // frequency 1 by convention
    let mut rel = vec![0.0f64; 1 << l];
    rel[0] = 1.0;
    for mask in 1..=full {
        let sub: Vec<(usize, u64)> = (0..l).filter(|&j| mask >> j & 1 == 1).map(|j| items[j]).collect();
        let ep = episode_of_items(&sub).unwrap();
        rel[mask] = counts.count(&ep)? as f64 / norm;
    }

    let mut probs = vec![0.0f64; 1 << l];
    for ones in 0..=full {
        let comp = full & !ones;
        let mut extra = comp;
        let mut p = 0.0;
        loop {
            let sup = ones | extra;
            let sign = if (sup.count_ones() - ones.count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            p += sign * rel[sup];
            if extra == 0 {
                break;
            }
            extra = (extra - 1) & comp;
        }
        probs[ones] = p;
    }

    let pre_clamp_sum: f64 = probs.iter().sum();
    let mut clamped = false;
    for p in probs.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
            clamped = true;
        }
    }
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        for p in probs.iter_mut() {
            *p /= total;
        }
    }
    Ok(JointDistribution {
        child_index: set.child_index(),
        items,
        probs,
        clamped,
        pre_clamp_sum,
    })
}

/// Mutual information in bits between the variables selected by `group_mask`
/// and the rest, computed from one joint table. `0 log 0 := 0`.
pub fn mi_between(probs: &[f64], group_mask: usize) -> f64 {
    let n = probs.len();
    let rest_mask = (n - 1) & !group_mask;
    let mut p_group = vec![0.0f64; n];
    let mut p_rest = vec![0.0f64; n];
    for (mask, &p) in probs.iter().enumerate() {
        p_group[mask & group_mask] += p;
        p_rest[mask & rest_mask] += p;
    }
    let mut mi = 0.0;
    for (mask, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let denom = p_group[mask & group_mask] * p_rest[mask & rest_mask];
        if denom > 0.0 {
            mi += p * (p / denom).log2();
        }
    }
    mi
}

/// Outcome of a mutual-information evaluation.
#[derive(Debug, Clone, Copy)]
pub struct MiScore {
    pub bits: f64,
    /// Child never or always fires in the estimated joint.
    pub degenerate: bool,
    /// The underlying joint needed the clamp repair.
    pub clamped: bool,
    /// Number of assignments in the joint (2^(parents + 1)).
    pub assignments: usize,
}

/// Mutual information between a child indicator and a parent set, all
/// probabilities taken from a single joint table.
pub fn mutual_information(
    child: usize,
    parents: &[(usize, u64)],
    counts: &CountCache,
) -> Result<MiScore> {
    for &(_, d) in parents {
        if d < 1 {
            return Err(Error::InvalidParam(
                "parent delay must be >= 1 tick".into(),
            ));
        }
    }
    let set = IndicatorSet::new(child, parents.to_vec())?;
    let joint = joint_distribution(&set, counts)?;
    let child_bit = 1usize << joint.child_index();
    let mut p_child_one = 0.0;
    for (mask, &p) in joint.probs().iter().enumerate() {
        if mask & child_bit != 0 {
            p_child_one += p;
        }
    }
    if p_child_one <= 0.0 || p_child_one >= 1.0 {
        return Ok(MiScore {
            bits: 0.0,
            degenerate: true,
            clamped: joint.clamped(),
            assignments: joint.probs().len(),
        });
    }
    let bits = mi_between(joint.probs(), child_bit).max(0.0);
    Ok(MiScore {
        bits,
        degenerate: false,
        clamped: joint.clamped(),
        assignments: joint.probs().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{Alphabet, EventStream};

    fn stream_from(pairs: &[(usize, u64)], labels: &[&str], horizon: u64) -> EventStream {
        let alphabet = Alphabet::new(labels.iter().copied()).unwrap();
        EventStream::new(alphabet, pairs.to_vec(), Some(horizon)).unwrap()
    }

    #[test]
    fn episode_of_reference_sets() {
        // {A at t-8, B at t-5, child C at t} -> A -3-> B -5-> C
        let set = IndicatorSet::new(2, vec![(0, 8), (1, 5)]).unwrap();
        let ep = episode_of(&set);
        assert_eq!(ep.types(), &[0, 1, 2]);
        assert_eq!(ep.delays(), &[3, 5]);

        // lone child
        let set = IndicatorSet::new(3, vec![]).unwrap();
        assert_eq!(episode_of(&set).types(), &[3]);

        // zero-delay tie broken by type order: {M@2, N@2, child O} -> M -0-> N -2-> O
        let set = IndicatorSet::new(2, vec![(1, 2), (0, 2)]).unwrap();
        let ep = episode_of(&set);
        assert_eq!(ep.types(), &[0, 1, 2]);
        assert_eq!(ep.delays(), &[0, 2]);
    }

    #[test]
    fn singleton_joint_is_complementary() {
        // 30 events past the window over T-W = 1000 ticks
        let mut events: Vec<(usize, u64)> = (1..=30).map(|i| (0, 30 + i * 30)).collect();
        events.push((0, 25)); // inside the window, must not be counted
        let s = stream_from(&events, &["A"], 1030);
        let cache = CountCache::new(&s, 30);
        let set = IndicatorSet::new(0, vec![]).unwrap();
        assert!((all_ones_probability(&set, &cache).unwrap() - 0.03).abs() < 1e-12);
        let joint = joint_distribution(&set, &cache).unwrap();
        assert!((joint.prob(1) - 0.03).abs() < 1e-12);
        assert!((joint.prob(0) - 0.97).abs() < 1e-12);
        assert!(!joint.clamped());
    }

    #[test]
    fn empty_stream_probability_is_zero() {
        let s = stream_from(&[], &["A"], 100);
        let cache = CountCache::new(&s, 10);
        let set = IndicatorSet::new(0, vec![]).unwrap();
        assert_eq!(all_ones_probability(&set, &cache).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_horizon_errors() {
        let s = stream_from(&[(0, 3)], &["A"], 5);
        let cache = CountCache::new(&s, 5);
        let set = IndicatorSet::new(0, vec![]).unwrap();
        assert!(matches!(
            all_ones_probability(&set, &cache),
            Err(Error::DegenerateHorizon { .. })
        ));
    }

    /// Brute-force joint over anchored windows, for cross-checking.
    fn histogram_joint(s: &EventStream, set: &IndicatorSet, w: u64) -> Vec<f64> {
        let items = set.items();
        let t_max = s.horizon();
        let mut probs = vec![0.0f64; 1 << items.len()];
        for t in (w + 1)..=t_max {
            let mut mask = 0usize;
            for (j, &(ty, d)) in items.iter().enumerate() {
                if t > d && s.index().contains(ty, t - d) {
                    mask |= 1 << j;
                }
            }
            probs[mask] += 1.0;
        }
        let norm = (t_max - w) as f64;
        for p in probs.iter_mut() {
            *p /= norm;
        }
        probs
    }

    #[test]
    fn pair_joint_matches_window_enumeration_exactly() {
        // events confined to the interior so occurrence counts and window
        // counts agree term by term
        let mut events = Vec::new();
        for t in (20..=80u64).step_by(7) {
            events.push((0, t));
        }
        for t in (22..=80u64).step_by(5) {
            events.push((1, t));
        }
        let s = stream_from(&events, &["A", "B"], 100);
        let w = 10;
        let cache = CountCache::new(&s, w);
        let set = IndicatorSet::new(1, vec![(0, 3)]).unwrap();
        let joint = joint_distribution(&set, &cache).unwrap();
        let oracle = histogram_joint(&s, &set, w);
        for (a, b) in joint.probs().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!((joint.pre_clamp_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn joint_always_sums_to_one() {
        let events: Vec<(usize, u64)> = vec![
            (0, 12),
            (0, 19),
            (0, 33),
            (1, 14),
            (1, 22),
            (1, 33),
            (2, 15),
            (2, 40),
        ];
        let s = stream_from(&events, &["A", "B", "C"], 60);
        let cache = CountCache::new(&s, 8);
        let set = IndicatorSet::new(2, vec![(0, 3), (1, 1), (0, 7)]).unwrap();
        let joint = joint_distribution(&set, &cache).unwrap();
        assert!((joint.pre_clamp_sum() - 1.0).abs() < 1e-9);
        let total: f64 = joint.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(joint.probs().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn independent_indicators_have_near_zero_mi() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut events = Vec::new();
        for t in 1..=10_000u64 {
            if rng.gen::<f64>() < 0.3 {
                events.push((0, t));
            }
            if rng.gen::<f64>() < 0.3 {
                events.push((1, t));
            }
        }
        let s = stream_from(&events, &["A", "B"], 10_000);
        let cache = CountCache::new(&s, 10);
        let mi = mutual_information(1, &[(0, 4)], &cache).unwrap();
        assert!(!mi.degenerate);
        assert!(mi.bits < 0.01, "expected near-zero MI, got {}", mi.bits);
    }

    #[test]
    fn deterministic_link_reaches_binary_entropy() {
        // B fires at t iff A fired at t-3; margins keep all counts aligned
        let a_ticks: Vec<u64> = (1..100).map(|i| 10 * i).collect();
        let mut events: Vec<(usize, u64)> = a_ticks.iter().map(|&t| (0, t)).collect();
        events.extend(a_ticks.iter().map(|&t| (1, t + 3)));
        let s = stream_from(&events, &["A", "B"], 1000);
        let cache = CountCache::new(&s, 5);
        let mi = mutual_information(1, &[(0, 3)], &cache).unwrap();
        let p: f64 = 99.0 / 995.0;
        let entropy = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        assert!(!mi.clamped);
        assert!((mi.bits - entropy).abs() < 1e-9, "{} vs {entropy}", mi.bits);
    }

    #[test]
    fn mi_matches_histogram_oracle_on_two_parents() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut events = Vec::new();
        for t in 10..=190u64 {
            if rng.gen::<f64>() < 0.2 {
                events.push((0, t));
            }
            if rng.gen::<f64>() < 0.2 {
                events.push((1, t));
            }
            // child depends on parent 0 two ticks back
            let armed = events.iter().any(|&(ty, tk)| ty == 0 && tk + 2 == t);
            if rng.gen::<f64>() < if armed { 0.7 } else { 0.05 } {
                events.push((2, t));
            }
        }
        let s = stream_from(&events, &["A", "B", "C"], 200);
        let w = 6;
        let cache = CountCache::new(&s, w);
        let parents = [(0usize, 2u64), (1usize, 4u64)];
        let mi = mutual_information(2, &parents, &cache).unwrap();
        let set = IndicatorSet::new(2, parents.to_vec()).unwrap();
        let oracle_probs = histogram_joint(&s, &set, w);
        let child_bit = 1usize << set.child_index();
        let oracle_mi = mi_between(&oracle_probs, child_bit);
        let tol = if mi.clamped { 0.05 } else { 0.02 };
        assert!(
            (mi.bits - oracle_mi).abs() < tol,
            "{} vs {oracle_mi}",
            mi.bits
        );
    }

    #[test]
    fn mi_is_symmetric_and_nonnegative() {
        let events: Vec<(usize, u64)> = vec![
            (0, 11),
            (0, 15),
            (0, 22),
            (1, 13),
            (1, 17),
            (1, 24),
        ];
        let s = stream_from(&events, &["A", "B"], 40);
        let cache = CountCache::new(&s, 6);
        let set = IndicatorSet::new(1, vec![(0, 2)]).unwrap();
        let joint = joint_distribution(&set, &cache).unwrap();
        let child_bit = 1usize << joint.child_index();
        let full = joint.probs().len() - 1;
        let a = mi_between(joint.probs(), child_bit);
        let b = mi_between(joint.probs(), full & !child_bit);
        assert!((a - b).abs() < 1e-12);
        assert!(a >= 0.0);
    }

    #[test]
    fn histogram_mi_is_monotone_in_the_parent_set() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut events = Vec::new();
        for t in 1..=300u64 {
            for ty in 0..3usize {
                if rng.gen::<f64>() < 0.25 {
                    events.push((ty, t));
                }
            }
        }
        let s = stream_from(&events, &["A", "B", "C"], 300);
        let w = 5;
        let small = IndicatorSet::new(2, vec![(0, 2)]).unwrap();
        let big = IndicatorSet::new(2, vec![(0, 2), (1, 3)]).unwrap();
        let mi_small = mi_between(
            &histogram_joint(&s, &small, w),
            1usize << small.child_index(),
        );
        let mi_big = mi_between(&histogram_joint(&s, &big, w), 1usize << big.child_index());
        assert!(mi_big >= mi_small - 1e-9);
    }

    #[test]
    fn degenerate_child_flags_and_returns_zero() {
        let events: Vec<(usize, u64)> = vec![(0, 12), (0, 20)];
        let s = stream_from(&events, &["A", "B"], 40);
        let cache = CountCache::new(&s, 5);
        let mi = mutual_information(1, &[(0, 2)], &cache).unwrap();
        assert!(mi.degenerate);
        assert_eq!(mi.bits, 0.0);
    }

    #[test]
    fn joint_csv_dump_has_all_assignments() {
        let s = stream_from(&[(0, 12), (1, 14)], &["A", "B"], 30);
        let cache = CountCache::new(&s, 5);
        let set = IndicatorSet::new(1, vec![(0, 2)]).unwrap();
        let joint = joint_distribution(&set, &cache).unwrap();
        let csv = joint.to_csv();
        assert_eq!(csv.lines().count(), 5); // header + 4 assignments
    }
}
