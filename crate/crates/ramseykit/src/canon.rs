//! Canonical forms via color refinement and individualization.
//!
//! The canonical form of a structure is the lexicographically least relational
//! encoding over all relabelings compatible with iterated color refinement.
//! Two structures are isomorphic exactly when their canonical forms are equal.

use crate::structure::Structure;

/// A structure together with the relabeling that produced it and a digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    /// The canonical representative; isomorphism-invariant.
    pub canon: Structure,
    /// `input.relabel(&relabeling) == canon`.
    pub relabeling: Vec<u8>,
    /// 64-bit FNV-1a digest of the canonical encoding.
    pub hash: u64,
}

/// One round of color refinement. Returns dense color ids; the id order
/// refines the input color order, so refinement is monotone.
fn refine_step(s: &Structure, colors: &[u32]) -> Vec<u32> {
    let n = s.size();
    // Signature of a vertex: old color plus, for every tuple of every
    // relation through it, the position it occupies and the color pattern.
    let mut sigs: Vec<(u32, Vec<(u16, u8, Vec<u32>)>)> =
        colors.iter().map(|&c| (c, Vec::new())).collect();
    for rel in 0..s.signature().len() {
        for t in s.tuples(rel) {
            let pattern: Vec<u32> = t.iter().map(|&e| colors[e as usize]).collect();
            for (j, &e) in t.iter().enumerate() {
                sigs[e as usize].1.push((rel as u16, j as u8, pattern.clone()));
            }
        }
    }
    for sig in &mut sigs {
        sig.1.sort();
    }
    let mut sorted: Vec<&(u32, Vec<(u16, u8, Vec<u32>)>)> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut out = vec![0u32; n];
    for (v, sig) in sigs.iter().enumerate() {
        out[v] = sorted.binary_search(&sig).expect("own signature present") as u32;
    }
    out
}

fn refine_to_fixpoint(s: &Structure, mut colors: Vec<u32>) -> Vec<u32> {
    loop {
        let next = refine_step(s, &colors);
        if next == colors {
            return colors;
        }
        colors = next;
    }
}

fn class_count(colors: &[u32]) -> usize {
    let mut seen: Vec<u32> = colors.to_vec();
    seen.sort();
    seen.dedup();
    seen.len()
}

/// Smallest color value whose class has more than one vertex.
fn first_non_singleton(colors: &[u32]) -> Option<u32> {
    let mut counts = std::collections::BTreeMap::new();
    for &c in colors {
        *counts.entry(c).or_insert(0u32) += 1;
    }
    counts.into_iter().find(|&(_, k)| k > 1).map(|(c, _)| c)
}

fn search(s: &Structure, colors: Vec<u32>, best: &mut Option<(Structure, Vec<u8>)>) {
    let n = s.size();
    if class_count(&colors) == n {
        // Discrete: vertex with color rank i gets label i.
        let mut order: Vec<u8> = (0..n as u8).collect();
        order.sort_by_key(|&v| colors[v as usize]);
        let mut perm = vec![0u8; n];
        for (rank, &v) in order.iter().enumerate() {
            perm[v as usize] = rank as u8;
        }
        let candidate = s.relabel(&perm);
        if best.as_ref().map_or(true, |(b, _)| candidate < *b) {
            *best = Some((candidate, perm));
        }
        return;
    }
    let cell = first_non_singleton(&colors).expect("non-discrete partition has a cell");
    for v in 0..n as u8 {
        if colors[v as usize] != cell {
            continue;
        }
        // Individualize v: give it a fresh color just below its cell.
        let mut branched: Vec<u32> = colors.iter().map(|&c| 2 * c + 1).collect();
        branched[v as usize] = 2 * cell;
        search(s, refine_to_fixpoint(s, branched), best);
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn digest(s: &Structure) -> u64 {
    let mut bytes = vec![s.size() as u8];
    for (rel, decl) in s.signature().relations().iter().enumerate() {
        bytes.push(0xff);
        bytes.extend(decl.name.bytes());
        bytes.push(decl.arity);
        for t in s.tuples(rel) {
            bytes.push(0xfe);
            bytes.extend_from_slice(t);
        }
    }
    fnv1a(bytes)
}

/// Computes the canonical form. Deterministic and isomorphism-invariant.
pub fn canonical_form(s: &Structure) -> CanonicalForm {
    if s.size() == 0 {
        return CanonicalForm { canon: s.clone(), relabeling: Vec::new(), hash: digest(s) };
    }
    let colors = refine_to_fixpoint(s, vec![0; s.size()]);
    let mut best: Option<(Structure, Vec<u8>)> = None;
    search(s, colors, &mut best);
    let (canon, relabeling) = best.expect("at least one leaf");
    let hash = digest(&canon);
    CanonicalForm { canon, relabeling, hash }
}

/// Isomorphism test through canonical forms.
pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    a.signature() == b.signature()
        && a.size() == b.size()
        && canonical_form(a).canon == canonical_form(b).canon
}
