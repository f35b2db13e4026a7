//! Property tests: the counting core against an exhaustive oracle, round-trip
//! identities, distribution validity, and thread-count independence.

use proptest::prelude::*;

use edbn::{
    count_distinct, joint_distribution, mine_frequent, parse_events_str, Alphabet, CountCache,
    Episode, EventStream, IndicatorSet, ParseOptions,
};

/// Exhaustive maximum set of pairwise event-disjoint occurrences, written
/// against the raw event list rather than the library's index or counting
/// path: candidate occurrences are materialized as explicit event sets and a
/// branch-and-bound search picks the largest packing.
fn oracle_count(events: &[(usize, u64)], types: &[usize], delays: &[u64], w: u64) -> u64 {
    let span: u64 = delays.iter().sum();
    assert!(span <= w);
    let mut offsets = vec![0u64];
    for &d in delays {
        offsets.push(offsets.last().unwrap() + d);
    }
    let positions: Vec<(usize, u64)> = types.iter().copied().zip(offsets.clone()).collect();
    {
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return 0; // two nodes on one event: no injective occurrence
        }
    }
    let t_max = events.iter().map(|&(_, t)| t).max().unwrap_or(0);
    let mut occurrences: Vec<Vec<(usize, u64)>> = Vec::new();
    for start in 1..=t_max {
        if start + span <= w {
            continue;
        }
        let occ: Vec<(usize, u64)> = positions
            .iter()
            .map(|&(ty, off)| (ty, start + off))
            .collect();
        if occ.iter().all(|e| events.contains(e)) {
            occurrences.push(occ);
        }
    }

    fn search(
        occ: &[Vec<(usize, u64)>],
        idx: usize,
        used: &mut Vec<(usize, u64)>,
        best: &mut u64,
        current: u64,
    ) {
        if current + (occ.len() - idx) as u64 <= *best {
            return;
        }
        if idx == occ.len() {
            *best = (*best).max(current);
            return;
        }
        if occ[idx].iter().all(|e| !used.contains(e)) {
            let before = used.len();
            used.extend_from_slice(&occ[idx]);
            search(occ, idx + 1, used, best, current + 1);
            used.truncate(before);
        }
        search(occ, idx + 1, used, best, current);
    }
    let mut best = 0;
    search(&occurrences, 0, &mut Vec::new(), &mut best, 0);
    best
}

fn build_stream(m: usize, events: &[(usize, u64)]) -> EventStream {
    let labels: Vec<String> = (0..m).map(|i| format!("T{i}")).collect();
    let alphabet = Alphabet::new(labels).unwrap();
    let horizon = events.iter().map(|&(_, t)| t).max().unwrap_or(0) + 10;
    EventStream::new(alphabet, events.to_vec(), Some(horizon)).unwrap()
}

prop_compose! {
    fn arb_case()(
        m in 1usize..=4,
    )(
        m in Just(m),
        events in prop::collection::vec((0usize..m, 1u64..=30), 0..=30),
        types in prop::collection::vec(0usize..m, 1..=4),
        raw_delays in prop::collection::vec(0u64..=4, 0..=3),
        extra in 0u64..=3,
    ) -> (usize, Vec<(usize, u64)>, Vec<usize>, Vec<u64>, u64) {
        let delays: Vec<u64> = raw_delays.iter().take(types.len().saturating_sub(1)).copied().collect();
        let mut types = types;
        types.truncate(delays.len() + 1);
        let span: u64 = delays.iter().sum();
        let w = (span + extra).min(12).max(span);
        (m, events, types, delays, w)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn counting_matches_exhaustive_oracle((m, events, types, delays, w) in arb_case()) {
        let stream = build_stream(m, &events);
        let deduped: Vec<(usize, u64)> = {
            let mut e = events.clone();
            e.sort_unstable_by_key(|&(ty, t)| (t, ty));
            e.dedup();
            e
        };
        let ep = Episode::new(types.clone(), delays.clone()).unwrap();
        let got = count_distinct(&stream, &ep, w).unwrap();
        let want = oracle_count(&deduped, &types, &delays, w);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn csv_roundtrip_is_identity(events in prop::collection::vec((0usize..3, 1u64..=50), 0..=40)) {
        let stream = build_stream(3, &events);
        let text = stream.to_csv();
        let back = parse_events_str(&text, &ParseOptions::default()).unwrap();
        let labeled = |s: &EventStream| -> Vec<(String, u64)> {
            s.events()
                .iter()
                .map(|e| (s.alphabet().label(e.type_id).to_string(), e.tick))
                .collect()
        };
        prop_assert_eq!(labeled(&stream), labeled(&back));
        prop_assert_eq!(stream.horizon(), back.horizon());
        // a second round-trip is exact, ids included
        let again = parse_events_str(&back.to_csv(), &ParseOptions::default()).unwrap();
        prop_assert_eq!(back.events(), again.events());
    }

    #[test]
    fn joint_distributions_stay_normalized(
        events in prop::collection::vec((0usize..3, 1u64..=60), 1..=40),
        member_delays in prop::collection::vec((0usize..3, 0u64..=6), 0..=3),
        child in 0usize..3,
    ) {
        let stream = build_stream(3, &events);
        let w = 7u64;
        prop_assume!(stream.horizon() > w);
        let mut members = member_delays;
        members.sort_unstable();
        members.dedup();
        members.retain(|&(ty, d)| !(ty == child && d == 0));
        let set = IndicatorSet::new(child, members).unwrap();
        let cache = CountCache::new(&stream, w);
        let joint = joint_distribution(&set, &cache).unwrap();
        prop_assert!((joint.pre_clamp_sum() - 1.0).abs() < 1e-9, "pre-clamp sum {}", joint.pre_clamp_sum());
        let total: f64 = joint.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(joint.probs().iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
    }

    #[test]
    fn mining_ignores_thread_count(events in prop::collection::vec((0usize..3, 1u64..=60), 5..=40)) {
        let stream = build_stream(3, &events);
        let mine_sorted = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let table = mine_frequent(&stream, 6, 0.05, 3).unwrap();
                let mut rows: Vec<(Vec<usize>, Vec<u64>, u64)> = table
                    .iter()
                    .map(|(e, c)| (e.types().to_vec(), e.delays().to_vec(), c))
                    .collect();
                rows.sort();
                rows
            })
        };
        prop_assert_eq!(mine_sorted(1), mine_sorted(4));
    }
}
