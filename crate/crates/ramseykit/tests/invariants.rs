//! Cross-module invariants that tie the subsystems together.

mod common;

use common::*;
use ramseykit::class::preset;
use ramseykit::degree::expansion_count;
use ramseykit::embedding::embeddings;
use ramseykit::ergodic::{
    cylinder_measure, is_consistent, is_consistent_generators, uniform_random_ordering,
    RandomOrdering,
};
use ramseykit::expansion::{
    expansion_preset, find_order_forgetful, is_forgetful, order_forgetful_for, ChainOrder,
    OrderForgetfulOutcome,
};
use ramseykit::lp::Rat;
use ramseykit::structure::build::*;
use num_traits::{One, Zero};

#[test]
fn forgetful_implies_single_expansion_class() {
    for name in ["ordered-pure-sets", "ordered-betweenness", "ordered-cyclic", "ordered-separation"]
    {
        let spec = expansion_preset(name).unwrap();
        assert!(is_forgetful(&spec, 4).unwrap().passed(), "{name}");
        for member in spec.base().member_reps(4).unwrap() {
            if member.size() == 0 {
                continue;
            }
            let counts = expansion_count(&member, &spec).unwrap();
            assert_eq!(counts.classes, 1, "{name}: member of size {}", member.size());
        }
    }
}

#[test]
fn forgetful_presets_have_equal_cylinder_masses() {
    for name in ["ordered-pure-sets", "ordered-betweenness"] {
        let spec = expansion_preset(name).unwrap();
        let ro = uniform_random_ordering(&spec, 4).unwrap();
        assert!(is_consistent(&ro, &spec, 4).unwrap().passed());
        for (rep, dist) in ro.members() {
            for mass in dist {
                assert_eq!(mass, &dist[0], "{name}: unequal masses on size {}", rep.size());
            }
        }
    }
}

#[test]
fn generator_consistency_matches_full_quantifier() {
    // The generator set (automorphisms + one-point extensions) decides
    // consistency exactly like the full embedding quantifier at n <= 4.
    for name in ["ordered-pure-sets", "ordered-graphs"] {
        let spec = expansion_preset(name).unwrap();
        let uniform = uniform_random_ordering(&spec, 4).unwrap();
        assert_eq!(
            is_consistent_generators(&uniform, &spec, 4).unwrap().passed(),
            is_consistent(&uniform, &spec, 4).unwrap().passed(),
            "{name}: uniform"
        );
        let skewed = RandomOrdering::build(&spec, 3, |_, orders| {
            let mut dist = vec![Rat::zero(); orders.len()];
            dist[0] = Rat::one();
            dist
        })
        .unwrap();
        assert_eq!(
            is_consistent_generators(&skewed, &spec, 3).unwrap().passed(),
            is_consistent(&skewed, &spec, 3).unwrap().passed(),
            "{name}: point mass"
        );
    }
}

#[test]
fn cylinder_masses_sum_to_one_per_domain() {
    let spec = expansion_preset("ordered-graphs").unwrap();
    let ambient = complete_graph(4);
    let ro = uniform_random_ordering(&spec, 4).unwrap();
    for dom in [vec![0u8, 1], vec![0, 1, 2], vec![1, 3]] {
        let mut sum = Rat::zero();
        for perm in all_permutations(dom.len()) {
            let asc: Vec<u8> = perm.iter().map(|&i| dom[i as usize]).collect();
            let order = ChainOrder::from_asc(asc);
            sum += cylinder_measure(&order, &ambient, &spec, &ro).unwrap().value;
        }
        assert!(sum.is_one(), "domain {dom:?} sums to {sum}");
    }
}

#[test]
fn order_forgetful_witnesses_restrict_downward() {
    // An order that works for a structure keeps working on every induced
    // substructure (the copies only get fewer).
    let b = complete_graph(5);
    let order = match find_order_forgetful(&b, &[complete_graph(2), complete_graph(3)]).unwrap() {
        OrderForgetfulOutcome::Found(o) => o,
        OrderForgetfulOutcome::NotFound => panic!("cliques admit every order"),
    };
    for drop in 0..5u8 {
        let keep: Vec<u8> = (0..5).filter(|&v| v != drop).collect();
        let (sub, _) = b.induced(&keep).unwrap();
        let restricted = order.restrict(&keep);
        let local: Vec<u8> = restricted
            .asc()
            .iter()
            .map(|v| keep.iter().position(|x| x == v).unwrap() as u8)
            .collect();
        let local_order = ChainOrder::from_asc(local);
        for a in [complete_graph(2), complete_graph(3)] {
            assert!(order_forgetful_for(&sub, &a, &local_order).unwrap());
        }
    }
}

#[test]
fn order_forgetful_closed_under_reversal() {
    // Pure sets and graphs are closed under order reversal; reversing a
    // witness keeps it a witness.
    let b = pure_set(5);
    let targets = [pure_set(2), pure_set(3)];
    if let OrderForgetfulOutcome::Found(order) = find_order_forgetful(&b, &targets).unwrap() {
        let reversed = ChainOrder::from_asc(order.asc().iter().rev().copied().collect());
        for a in &targets {
            assert!(order_forgetful_for(&b, a, &reversed).unwrap());
        }
    } else {
        panic!("pure sets admit every order");
    }
}

#[test]
fn reduct_presets_match_their_generating_chains() {
    // Betweenness members embed into each other exactly like chains do, and
    // the embedding counts reflect the order/reversal symmetry.
    let betw = preset("betweenness").unwrap();
    let members = betw.member_reps(5).unwrap();
    for (i, small) in members.iter().enumerate() {
        for big in &members[i..] {
            let count = embeddings(small, big).unwrap().len();
            if small.size() >= 2 {
                // choose(m, k) images, 2 embeddings each (order + reversal).
                let choose = {
                    let (m, k) = (big.size(), small.size());
                    factorial(m) / (factorial(k) * factorial(m - k))
                };
                assert_eq!(count, 2 * choose, "{} into {}", small.size(), big.size());
            }
        }
    }
}
