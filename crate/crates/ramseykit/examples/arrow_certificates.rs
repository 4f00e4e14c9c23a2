//! Decide arrow relations at Ramsey scale and print their certificates.
//!
//! Run with: `cargo run --example arrow_certificates`

use ramseykit::arrow::{certificate_text, check_arrow, ArrowMode, ArrowQuery};
use ramseykit::structure::build::{chain, complete_graph};

fn main() {
    let instances = [
        ("K6 -> (K3)^{K2}_{2,1}", complete_graph(6), complete_graph(3), complete_graph(2)),
        ("K5 -> (K3)^{K2}_{2,1}", complete_graph(5), complete_graph(3), complete_graph(2)),
        ("chain6 -> (chain3)^{chain2}_{2,1}", chain(6), chain(3), chain(2)),
        ("chain5 -> (chain3)^{chain2}_{2,1}", chain(5), chain(3), chain(2)),
    ];
    for (label, c, b, a) in instances {
        let q = ArrowQuery { c, b, a, colors: 2, allowed: 1, mode: ArrowMode::Copies };
        let out = check_arrow(&q, 50_000_000).expect("query in range");
        let stats = out.stats();
        println!("== {label}");
        println!("   nodes={} symmetry={}", stats.nodes, stats.symmetry_factor);
        match out.certificate() {
            Some(cert) => print!("{}", certificate_text(&q, cert).unwrap()),
            None => println!("undecided (budget)"),
        }
        println!();
    }
}
