//! Search classes for the smallest arrow witnesses, and build a chained
//! witness handling two simultaneous colorings at once.
//!
//! Run with: `cargo run --example witness_search`

use ramseykit::arrow::{chain_witness, find_witness, ArrowMode, WitnessOutcome};
use ramseykit::class::preset;
use ramseykit::structure::build::{chain, complete_graph};
use ramseykit::structure::Structure;

fn main() {
    let budget = 50_000_000;
    let orders = preset("linear-orders").unwrap();
    let completes = preset("complete-graphs").unwrap();

    let searches: [(&str, &ramseykit::class::ClassSpec, Structure, Structure); 2] = [
        ("linear orders, B = chain3, A = chain2", &orders, chain(3), chain(2)),
        ("complete graphs, B = K3, A = K2", &completes, complete_graph(3), complete_graph(2)),
    ];
    for (label, spec, b, a) in searches {
        match find_witness(spec, &b, &a, 2, 1, 8, ArrowMode::Copies, budget).unwrap() {
            WitnessOutcome::Found { c, certificate } => println!(
                "{label}: witness of size {} ({} nodes searched)",
                c.size(),
                certificate.stats.nodes
            ),
            WitnessOutcome::NotFoundUpTo { cap } => println!("{label}: none up to {cap}"),
            WitnessOutcome::Undecided { .. } => println!("{label}: undecided"),
        }
    }

    // A chain absorbing a pair coloring and a point coloring simultaneously.
    let oracle = |b: &Structure, a: &Structure, k: u32| {
        find_witness(&orders, b, a, k, 1, 12, ArrowMode::Copies, budget)
    };
    let w = chain_witness(&[(chain(2), 2), (chain(1), 2)], &chain(3), oracle, 100, 0).unwrap();
    let sizes: Vec<usize> = w.chain.iter().map(Structure::size).collect();
    println!("chained witness sizes: {sizes:?} (verified on {} sampled coloring families)", w.samples_verified);
}
