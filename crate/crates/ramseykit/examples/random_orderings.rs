//! Consistent random orderings as exact linear programs: feasibility,
//! uniqueness probes, and a class where no consistent ordering exists.
//!
//! Run with: `cargo run --example random_orderings`

use ramseykit::ergodic::{consistency_polytope, is_consistent, uniform_random_ordering};
use ramseykit::expansion::expansion_preset;

fn main() {
    for name in ["ordered-pure-sets", "ordered-graphs", "ordered-betweenness", "ordered-cyclic"] {
        let spec = expansion_preset(name).unwrap();
        let ro = uniform_random_ordering(&spec, 4).unwrap();
        let consistent = is_consistent(&ro, &spec, 4).unwrap().passed();
        println!("{name}: uniform consistent up to size 4: {consistent}");
    }
    println!();
    for (name, n) in [("ordered-pure-sets", 3), ("ordered-graphs", 3), ("ordered-cyclic", 4)] {
        let spec = expansion_preset(name).unwrap();
        let report = consistency_polytope(&spec, n, 20_000).unwrap();
        print!(
            "{name} polytope at n={n}: {} variables, {} constraints -> ",
            report.variables, report.constraints
        );
        if !report.feasible {
            println!("infeasible (no consistent random ordering)");
            continue;
        }
        println!(
            "feasible{}",
            match report.unique {
                Some(true) => ", unique solution",
                Some(false) => ", multiple solutions",
                None => "",
            }
        );
        if let Some(solution) = report.solution {
            for (rep, dist) in solution.members().filter(|(r, _)| r.size() == 2) {
                let masses: Vec<String> =
                    dist.iter().map(|p| format!("{}/{}", p.numer(), p.denom())).collect();
                println!("  masses on the size-2 member (size {}): {}", rep.size(), masses.join(", "));
            }
        }
    }
}
