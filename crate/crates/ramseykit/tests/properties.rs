//! Property tests over randomly generated small structures.

use proptest::prelude::*;
use ramseykit::arrow::{check_arrow, verify_certificate, ArrowMode, ArrowQuery};
use ramseykit::canon::canonical_form;
use ramseykit::embedding::{automorphisms, copies, embeddings};
use ramseykit::signature::Signature;
use ramseykit::structure::{build, Structure};

/// A random graph on `n` vertices from an edge bitmask.
fn graph_from_mask(n: usize, mask: u64) -> Structure {
    let sig = Signature::of(&[("E", 2)]);
    let mut tuples = Vec::new();
    let mut bit = 0;
    for u in 0..n as u8 {
        for v in u + 1..n as u8 {
            if mask & (1 << bit) != 0 {
                tuples.push(vec![u, v]);
                tuples.push(vec![v, u]);
            }
            bit += 1;
        }
    }
    Structure::new(sig, n, vec![tuples]).unwrap()
}

fn small_graph() -> impl Strategy<Value = Structure> {
    (1usize..=6, any::<u64>()).prop_map(|(n, mask)| graph_from_mask(n, mask))
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<u8>> {
    Just((0..n as u8).collect::<Vec<u8>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canon_is_relabeling_invariant(g in small_graph(), seed in any::<u64>()) {
        let n = g.size();
        let perm = {
            // Derive a permutation from the seed by sorting keyed indices.
            let mut idx: Vec<u8> = (0..n as u8).collect();
            idx.sort_by_key(|&v| seed.rotate_left(v as u32 * 7) ^ v as u64);
            idx
        };
        prop_assert_eq!(canonical_form(&g.relabel(&perm)).canon, canonical_form(&g).canon);
    }

    #[test]
    fn embedding_count_law(g in small_graph(), h in small_graph()) {
        prop_assume!(g.size() <= h.size());
        let embs = embeddings(&g, &h).unwrap().len();
        let auts = automorphisms(&g).len();
        let cops = copies(&g, &h).unwrap().len();
        prop_assert_eq!(embs, auts * cops);
    }

    #[test]
    fn text_round_trip(g in small_graph()) {
        prop_assert_eq!(Structure::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn relabeled_text_round_trip(g in small_graph(), p in (1usize..=6).prop_flat_map(permutation)) {
        prop_assume!(p.len() == g.size());
        let r = g.relabel(&p);
        prop_assert_eq!(Structure::parse(&r.to_text()).unwrap(), r);
    }

    #[test]
    fn failing_certificates_reverify(c in small_graph(), k in 2u32..=3, d in 0u32..=1) {
        prop_assume!(c.size() <= 5);
        let q = ArrowQuery {
            c,
            b: build::path_graph(3),
            a: build::complete_graph(2),
            colors: k,
            allowed: d,
            mode: ArrowMode::Copies,
        };
        let out = check_arrow(&q, 10_000_000).unwrap();
        if let Some(cert) = out.certificate() {
            if cert.bad_coloring.is_some() {
                prop_assert!(verify_certificate(&q, cert).unwrap());
            }
        }
    }
}
