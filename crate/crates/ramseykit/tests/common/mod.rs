//! Shared brute-force oracles for the integration suites. Everything here is
//! deliberately independent of the library's search paths: plain loops over
//! permutations and colorings, checked against definitions.

use ramseykit::embedding::{copies, embeddings, Embedding};
use ramseykit::structure::Structure;

pub fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

pub fn next_permutation(p: &mut [u8]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All permutations of `[n]` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    let mut p: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

/// Number of automorphisms, counted by trying every permutation.
pub fn brute_aut_count(s: &Structure) -> usize {
    all_permutations(s.size()).into_iter().filter(|p| &s.relabel(p) == s).count()
}

/// Exhaustive copy-mode arrow oracle: enumerates all `k^m` colorings of the
/// copies of `a` in `c` in lexicographic order and returns the first bad one
/// (every copy of `b` sees more than `d` colors), or `None` when the arrow
/// holds. Only usable for small instances; that is the point.
pub fn brute_first_bad_coloring(
    c: &Structure,
    b: &Structure,
    a: &Structure,
    k: u32,
    d: u32,
) -> Option<Vec<u32>> {
    let a_copies = copies(a, c).expect("same signature");
    let b_copies = copies(b, c).expect("same signature");
    let m = a_copies.len();
    assert!(
        (k as u64).checked_pow(m as u32).map_or(false, |total| total <= 1 << 22),
        "oracle instance too large"
    );
    let groups: Vec<Vec<usize>> = b_copies
        .iter()
        .map(|bc| {
            a_copies
                .iter()
                .enumerate()
                .filter(|(_, ac)| ac.iter().all(|v| bc.contains(v)))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let total = (k as u64).pow(m as u32);
    'outer: for code in 0..total {
        // Object 0 occupies the most significant digit: numeric order over
        // codes is lexicographic order over coloring vectors.
        let mut coloring = vec![0u32; m];
        let mut rest = code;
        for i in (0..m).rev() {
            coloring[i] = (rest % k as u64) as u32;
            rest /= k as u64;
        }
        if b_copies.is_empty() {
            return Some(coloring);
        }
        for g in &groups {
            let mut mask = 0u64;
            for &i in g {
                mask |= 1 << coloring[i];
            }
            if mask.count_ones() <= d {
                continue 'outer;
            }
        }
        return Some(coloring);
    }
    None
}

/// Direct amalgamation oracle: searches the given pool for a member and a
/// pair of embeddings agreeing on the base.
pub fn brute_amalgam(
    pool: &[Structure],
    a: &Structure,
    b0: &Structure,
    b1: &Structure,
    a0: &Embedding,
    a1: &Embedding,
) -> Option<(Structure, Embedding, Embedding)> {
    for c in pool {
        for e0 in embeddings(b0, c).expect("same signature") {
            for e1 in embeddings(b1, c).expect("same signature") {
                let left = a0.then(&e0).expect("composable");
                let right = a1.then(&e1).expect("composable");
                if left.map() == right.map() {
                    return Some((c.clone(), e0, e1));
                }
            }
        }
        let _ = a;
    }
    None
}
