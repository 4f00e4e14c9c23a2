//! Order-expansion analyses: admissible orders, forgetfulness, the ordering
//! property, reasonableness, and the order-forgetful order search.
//!
//! Run with: `cargo run --example order_expansions`

use ramseykit::expansion::{
    check_ordering_property, check_reasonable, expansion_preset, find_order_forgetful,
    is_forgetful, ForgetfulOutcome, OrderForgetfulOutcome,
};
use ramseykit::structure::build::{cycle_graph, directed_cycle, path_graph};

fn main() {
    for name in ["ordered-pure-sets", "ordered-betweenness", "ordered-cyclic", "ordered-graphs"] {
        let spec = expansion_preset(name).unwrap();
        match is_forgetful(&spec, 4).unwrap() {
            ForgetfulOutcome::Pass => println!("{name}: forgetful up to size 4"),
            ForgetfulOutcome::Counterexample { base, first, second } => println!(
                "{name}: not forgetful; a member of size {} carries orders {} and {} with non-isomorphic expansions",
                base.size(),
                first.to_text(),
                second.to_text()
            ),
        }
    }

    let og = expansion_preset("ordered-graphs").unwrap();
    println!(
        "ordered P3 has {} admissible orders in {} isomorphism classes",
        og.admissible_orders(&path_graph(3)).unwrap().len(),
        ramseykit::expansion::expansion_class_count(&og, &path_graph(3)).unwrap()
    );
    println!(
        "reasonable(ordered-graphs, n=3): {}",
        check_reasonable(&og, 3).unwrap().passed()
    );
    let rows = check_ordering_property(&og, 2, 6).unwrap();
    for row in rows.iter().filter(|r| r.a.size() == 2) {
        println!(
            "ordering property for a size-2 graph: witness {}",
            row.witness.as_ref().map_or("none".into(), |b| format!("of size {}", b.size()))
        );
    }

    let dg = expansion_preset("digraphs-edge-compatible").unwrap();
    println!(
        "edge-compatible orders on the directed 3-cycle: {}",
        dg.admissible_orders(&directed_cycle(3)).unwrap().len()
    );

    // No order makes all four induced paths of the 4-cycle isomorphic.
    match find_order_forgetful(&cycle_graph(4), &[path_graph(3)]).unwrap() {
        OrderForgetfulOutcome::Found(o) => println!("C4/P3 order-forgetful: {}", o.to_text()),
        OrderForgetfulOutcome::NotFound => {
            println!("C4/P3: no order-forgetful order exists (exhaustive over 24 orders)")
        }
    }
}
