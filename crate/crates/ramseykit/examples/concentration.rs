//! The measure-concentration cover experiment: refine cylinders around the
//! obstruction set and watch the exact measures shrink by the proof-shape
//! ratio at every level.
//!
//! Run with: `cargo run --example concentration`

use ramseykit::ergodic::{concentration_experiment, step_bound, uniform_random_ordering, BadTriple};
use ramseykit::expansion::{expansion_preset, ChainOrder};
use ramseykit::structure::build::pure_set;

fn main() {
    let spec = expansion_preset("ordered-pure-sets").unwrap();
    let ambient = pure_set(6);
    let ro = uniform_random_ordering(&spec, 6).unwrap();
    // The obstruction: embed a rooted point below a second point; an ambient
    // order is bad when the root has nothing above it.
    let triple = BadTriple {
        a_dom: vec![0],
        b: pure_set(2),
        b_order: ChainOrder::natural(2),
        a_map: vec![0],
    };
    let report = concentration_experiment(&spec, &ambient, &triple, 4, &ro).unwrap();
    println!(
        "bad orders: {} of 720, measure {}/{}",
        report.tracked_bad_count,
        report.tracked_bad_measure.numer(),
        report.tracked_bad_measure.denom()
    );
    for cover in &report.levels {
        println!(
            "level {}: {:>2} cylinders, total measure {}/{}",
            cover.level,
            cover.sets.len(),
            cover.total.numer(),
            cover.total.denom()
        );
    }
    for (n, ratio) in report.step_ratios.iter().enumerate() {
        let bound = step_bound(triple.a_dom.len(), n);
        println!(
            "step {n}: ratio {}/{} <= bound {}/{} : {}",
            ratio.numer(),
            ratio.denom(),
            bound.numer(),
            bound.denom(),
            *ratio <= bound
        );
    }
}
