//! Temporary probe for experiment operating points. Run with
//! `cargo test -p edbn --test scratch_probe -- --ignored --nocapture`.

use edbn::{
    learn, make_topology, mine_frequent, precision_recall, simulate, surrogate, DelayMode,
    GenParams, TopologyKind,
};

#[test]
#[ignore]
fn probe_higher_order_chain() {
    let spec = make_topology(
        &TopologyKind::HigherOrderChain { include_chain_component: true },
        &GenParams::default(),
    )
    .unwrap();
    for seed in 1..=8u64 {
        let (stream, truth) = simulate(&spec, 60.0, seed).unwrap();
        let table = mine_frequent(&stream, 10, 0.002, 3).unwrap();
        print!("seed {seed}: events={} freq={} |", stream.len(), table.len());
        for eps in [0.0001, 0.00001, 0.01] {
            let learned = learn(&table, &stream, eps).unwrap();
            let r = precision_recall(&learned, &truth, DelayMode::Exact).unwrap();
            print!(" eps={eps}: P={:.1} R={:.1} |", r.precision, r.recall);
        }
        println!();
    }
}

#[test]
#[ignore]
fn probe_ring_chain() {
    let spec = make_topology(
        &TopologyKind::Chain { nodes: 50, delay: 1, closed: true },
        &GenParams::default(),
    )
    .unwrap();
    for seed in [21u64, 22] {
        let (stream, truth) = simulate(&spec, 60.0, seed).unwrap();
        print!("seed {seed} (events {}):", stream.len());
        for theta in [0.002, 0.008, 0.014, 0.026, 0.038] {
            let t0 = std::time::Instant::now();
            let table = mine_frequent(&stream, 10, theta, 3).unwrap();
            let learned = learn(&table, &stream, 0.0005).unwrap();
            let r = precision_recall(&learned, &truth, DelayMode::Exact).unwrap();
            print!(
                " θ={theta}: P={:.1} R={:.1} f={} {:.1}s |",
                r.precision,
                r.recall,
                table.len(),
                t0.elapsed().as_secs_f64()
            );
        }
        println!();
    }
    // low conditional probability, high threshold: nothing frequent
    let weak = make_topology(
        &TopologyKind::Chain { nodes: 50, delay: 1, closed: true },
        &GenParams { conditional: 0.4, ..GenParams::default() },
    )
    .unwrap();
    let (stream, truth) = simulate(&weak, 60.0, 23).unwrap();
    let table = mine_frequent(&stream, 10, 0.038, 3).unwrap();
    let learned = learn(&table, &stream, 0.0005).unwrap();
    let r = precision_recall(&learned, &truth, DelayMode::Exact).unwrap();
    println!(
        "cond=0.4 θ=0.038: frequent={} edges={} P={} R={}",
        table.len(),
        learned.num_edges(),
        r.precision,
        r.recall
    );
}

#[test]
#[ignore]
fn probe_polychronous() {
    let spec = make_topology(&TopologyKind::Polychronous, &GenParams::default()).unwrap();
    for seed in [31u64, 32, 33, 34] {
        let (stream, truth) = simulate(&spec, 60.0, seed).unwrap();
        print!("seed {seed}:");
        for theta in [0.002, 0.014] {
            let table = mine_frequent(&stream, 10, theta, 3).unwrap();
            let learned = learn(&table, &stream, 0.0005).unwrap();
            let r = precision_recall(&learned, &truth, DelayMode::Exact).unwrap();
            print!(" θ={theta}: P={:.1} R={:.1} |", r.precision, r.recall);
        }
        println!();
    }
}

#[test]
#[ignore]
fn probe_random_net_and_surrogates() {
    let spec = make_topology(
        &TopologyKind::Random { nodes: 125, density: 0.4, max_order: 3, seed: 404 },
        &GenParams::default(),
    )
    .unwrap();
    let t0 = std::time::Instant::now();
    let (stream, truth) = simulate(&spec, 120.0, 81).unwrap();
    let sim_s = t0.elapsed().as_secs_f64();
    let t1 = std::time::Instant::now();
    let table = mine_frequent(&stream, 10, 0.002, 3).unwrap();
    let mine_s = t1.elapsed().as_secs_f64();
    let t2 = std::time::Instant::now();
    let learned = learn(&table, &stream, 0.0005).unwrap();
    let search_s = t2.elapsed().as_secs_f64();
    let r = precision_recall(&learned, &truth, DelayMode::Exact).unwrap();
    println!(
        "random125: events={} freq={} P={:.2} R={:.2} sim={sim_s:.1}s mine={mine_s:.1}s search={search_s:.1}s",
        stream.len(),
        table.len(),
        r.precision,
        r.recall
    );
    println!("truth edges {}, learned {}", truth.edges.len(), learned.num_edges());

    // surrogate scan
    let mut worst = 0usize;
    for i in 0..25u64 {
        let shuffled = surrogate(&stream, 1000 + i);
        let table = mine_frequent(&shuffled, 10, 0.0015, 3).unwrap();
        let learned = learn(&table, &shuffled, 0.0005).unwrap();
        worst = worst.max(learned.num_edges());
        if learned.num_edges() > 0 {
            println!("surrogate {i}: {} edges!", learned.num_edges());
        }
    }
    println!("surrogates done, max edges = {worst}");
}
