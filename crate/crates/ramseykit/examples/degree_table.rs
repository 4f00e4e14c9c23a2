//! Audit Ramsey-degree bounds across the catalog and run the power-of-two
//! check on the distilled class claims.
//!
//! Run with: `cargo run --example degree_table`

use ramseykit::class::preset;
use ramseykit::cli::degree_line;
use ramseykit::degree::{degree_bounds, power_of_two_audit, DegreeCaps, DegreeClaim};

fn main() {
    let caps = DegreeCaps { b_cap: 3, c_cap: 8, k_cap: 2, budget: 50_000_000 };
    let mut records = Vec::new();
    for name in ["linear-orders", "betweenness", "pure-sets", "cyclic", "separation"] {
        let spec = preset(name).unwrap();
        println!("== {name}");
        for rep in spec.member_reps(3).unwrap().into_iter().filter(|r| r.size() >= 1) {
            let record = degree_bounds(&spec, &rep, caps).unwrap();
            println!("  size {}: {}", rep.size(), degree_line(&record));
            records.push(record);
        }
    }
    println!();
    let report = power_of_two_audit(&records);
    for row in &report.rows {
        let claim = match &row.claim {
            DegreeClaim::EstablishedAtCaps(d) => format!("embedding degree {d} (exact at caps)"),
            DegreeClaim::GrowthObserved(seq) => format!("per-size lower bounds still growing: {seq:?}"),
            DegreeClaim::InconclusiveAtCaps => "inconclusive at caps".to_string(),
        };
        println!(
            "{:>14}: {claim}{}",
            row.class_name,
            if row.flagged { "  <-- FLAGGED" } else { "" }
        );
    }
    println!("audit pass: {}", report.pass());
}
