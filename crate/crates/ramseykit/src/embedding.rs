//! Embeddings between finite relational structures.
//!
//! An embedding is an injective map that preserves and reflects every
//! relation (strong / induced semantics): a tuple is in a source relation
//! exactly when its image is in the target relation. Enumeration order is
//! lexicographic in the map read as a tuple, and every consumer in the crate
//! relies on that order for reproducibility.

use std::cmp::Ordering;
use std::fmt;

use crate::structure::{ModelError, Structure};

/// An injective relation-preserving-and-reflecting map between structures.
#[derive(Clone, PartialEq, Eq)]
pub struct Embedding {
    source: Structure,
    target: Structure,
    map: Vec<u8>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Embedding{:?}", self.map)
    }
}

impl PartialOrd for Embedding {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Embedding {
    fn cmp(&self, other: &Self) -> Ordering {
        self.map
            .cmp(&other.map)
            .then_with(|| self.source.cmp(&other.source))
            .then_with(|| self.target.cmp(&other.target))
    }
}

impl Embedding {
    /// Validates that `map` is an embedding of `source` into `target`.
    pub fn new(source: Structure, target: Structure, map: Vec<u8>) -> Result<Self, ModelError> {
        if source.signature() != target.signature() {
            return Err(ModelError::SignatureMismatch);
        }
        if map.len() != source.size() {
            return Err(ModelError::MapLengthMismatch { got: map.len(), want: source.size() });
        }
        let mut seen = 0u64;
        for &v in &map {
            if v as usize >= target.size() {
                return Err(ModelError::IndexOutOfRange { index: v, n: target.size() });
            }
            if seen & (1 << v) != 0 {
                return Err(ModelError::NotInjective);
            }
            seen |= 1 << v;
        }
        for (rel, decl) in source.signature().relations().iter().enumerate() {
            let arity = decl.arity as usize;
            let mut tuple = vec![0u8; arity];
            let mut image = vec![0u8; arity];
            if !check_all_tuples(&source, &target, &map, rel, arity, &mut tuple, &mut image, 0) {
                return Err(ModelError::NotAnEmbedding(decl.name.clone()));
            }
        }
        Ok(Embedding { source, target, map })
    }

    /// The identity embedding of a structure into itself.
    pub fn identity(s: &Structure) -> Self {
        Embedding {
            source: s.clone(),
            target: s.clone(),
            map: (0..s.size() as u8).collect(),
        }
    }

    pub fn source(&self) -> &Structure {
        &self.source
    }

    pub fn target(&self) -> &Structure {
        &self.target
    }

    pub fn map(&self) -> &[u8] {
        &self.map
    }

    pub fn apply(&self, v: u8) -> u8 {
        self.map[v as usize]
    }

    /// The image as a sorted vertex list.
    pub fn image(&self) -> Vec<u8> {
        let mut im = self.map.clone();
        im.sort();
        im
    }

    /// Composition `other . self` for `self: A -> B`, `other: B -> C`.
    pub fn then(&self, other: &Embedding) -> Result<Embedding, ModelError> {
        if self.target != other.source {
            return Err(ModelError::SignatureMismatch);
        }
        let map = self.map.iter().map(|&v| other.map[v as usize]).collect();
        Ok(Embedding { source: self.source.clone(), target: other.target.clone(), map })
    }

    pub fn is_bijective(&self) -> bool {
        self.source.size() == self.target.size()
    }
}

#[allow(clippy::too_many_arguments)]
fn check_all_tuples(
    source: &Structure,
    target: &Structure,
    map: &[u8],
    rel: usize,
    arity: usize,
    tuple: &mut [u8],
    image: &mut [u8],
    depth: usize,
) -> bool {
    if depth == arity {
        return source.contains(rel, tuple) == target.contains(rel, image);
    }
    for v in 0..source.size() as u8 {
        tuple[depth] = v;
        image[depth] = map[v as usize];
        if !check_all_tuples(source, target, map, rel, arity, tuple, image, depth + 1) {
            return false;
        }
    }
    true
}

struct Enumerator<'a> {
    source: &'a Structure,
    target: &'a Structure,
    /// For each source vertex `i`, every relation tuple over `[i+1]` that
    /// mentions `i`, so a partial map is validated incrementally.
    constraints: Vec<Vec<(usize, Vec<u8>)>>,
    pinned: Vec<Option<u8>>,
    map: Vec<u8>,
    used: u64,
    out: Vec<Embedding>,
}

impl<'a> Enumerator<'a> {
    fn new(source: &'a Structure, target: &'a Structure) -> Self {
        let n = source.size();
        let mut constraints: Vec<Vec<(usize, Vec<u8>)>> = vec![Vec::new(); n];
        for (rel, decl) in source.signature().relations().iter().enumerate() {
            let arity = decl.arity as usize;
            for i in 0..n as u8 {
                let mut tuple = vec![0u8; arity];
                collect_tuples(i, rel, arity, &mut tuple, 0, &mut constraints[i as usize]);
            }
        }
        Enumerator {
            source,
            target,
            constraints,
            pinned: vec![None; n],
            map: Vec::with_capacity(n),
            used: 0,
            out: Vec::new(),
        }
    }

    fn feasible(&self, i: usize, w: u8) -> bool {
        let mut image = Vec::new();
        for (rel, t) in &self.constraints[i] {
            image.clear();
            image.extend(t.iter().map(|&e| {
                if e as usize == i {
                    w
                } else {
                    self.map[e as usize]
                }
            }));
            if self.source.contains(*rel, t) != self.target.contains(*rel, &image) {
                return false;
            }
        }
        true
    }

    fn run(&mut self) {
        let i = self.map.len();
        if i == self.source.size() {
            self.out.push(Embedding {
                source: self.source.clone(),
                target: self.target.clone(),
                map: self.map.clone(),
            });
            return;
        }
        for w in 0..self.target.size() as u8 {
            if self.used & (1 << w) != 0 {
                continue;
            }
            if let Some(p) = self.pinned[i] {
                if p != w {
                    continue;
                }
            }
            if self.feasible(i, w) {
                self.map.push(w);
                self.used |= 1 << w;
                self.run();
                self.map.pop();
                self.used &= !(1 << w);
            }
        }
    }
}

fn collect_tuples(
    pivot: u8,
    rel: usize,
    arity: usize,
    tuple: &mut Vec<u8>,
    depth: usize,
    out: &mut Vec<(usize, Vec<u8>)>,
) {
    if depth == arity {
        if tuple.contains(&pivot) {
            out.push((rel, tuple.clone()));
        }
        return;
    }
    for v in 0..=pivot {
        tuple[depth] = v;
        collect_tuples(pivot, rel, arity, tuple, depth + 1, out);
    }
}

/// All embeddings of `a` into `b`, in lexicographic order of the map tuple.
pub fn embeddings(a: &Structure, b: &Structure) -> Result<Vec<Embedding>, ModelError> {
    embeddings_extending(a, b, &[])
}

/// All embeddings of `a` into `b` that take each pinned source vertex to its
/// prescribed target, in lexicographic order of the map tuple.
pub fn embeddings_extending(
    a: &Structure,
    b: &Structure,
    pins: &[(u8, u8)],
) -> Result<Vec<Embedding>, ModelError> {
    if a.signature() != b.signature() {
        return Err(ModelError::SignatureMismatch);
    }
    if a.size() > b.size() {
        return Ok(Vec::new());
    }
    let mut e = Enumerator::new(a, b);
    let mut pinned = vec![None; a.size()];
    for &(src, tgt) in pins {
        if src as usize >= a.size() {
            return Err(ModelError::IndexOutOfRange { index: src, n: a.size() });
        }
        if tgt as usize >= b.size() {
            return Err(ModelError::IndexOutOfRange { index: tgt, n: b.size() });
        }
        match pinned[src as usize] {
            None => pinned[src as usize] = Some(tgt),
            Some(prev) if prev == tgt => {}
            Some(_) => return Ok(Vec::new()),
        }
    }
    e.pinned = pinned;
    e.run();
    Ok(e.out)
}

/// All automorphisms of `a` (embeddings of `a` into itself), lexicographic.
pub fn automorphisms(a: &Structure) -> Vec<Embedding> {
    embeddings(a, a).expect("same signature")
}

/// The copies of `a` inside `b`: subsets of `b`'s universe inducing a
/// structure isomorphic to `a`, sorted lexicographically as sorted tuples.
pub fn copies(a: &Structure, b: &Structure) -> Result<Vec<Vec<u8>>, ModelError> {
    let mut images: Vec<Vec<u8>> = embeddings(a, b)?.iter().map(|e| e.image()).collect();
    images.sort();
    images.dedup();
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::build::*;

    /// Independent brute-force oracle: all injective maps, full tuple check.
    fn brute_force_embeddings(a: &Structure, b: &Structure) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut map = Vec::new();
        fn rec(a: &Structure, b: &Structure, map: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if map.len() == a.size() {
                if Embedding::new(a.clone(), b.clone(), map.clone()).is_ok() {
                    out.push(map.clone());
                }
                return;
            }
            for w in 0..b.size() as u8 {
                if !map.contains(&w) {
                    map.push(w);
                    rec(a, b, map, out);
                    map.pop();
                }
            }
        }
        rec(a, b, &mut map, &mut out);
        out
    }

    #[test]
    fn k2_into_k3_has_six() {
        // Oracle: all 6 injective maps from 2 into 3 preserve the edge.
        let got = embeddings(&complete_graph(2), &complete_graph(3)).unwrap();
        assert_eq!(got.len(), 6);
        let oracle = brute_force_embeddings(&complete_graph(2), &complete_graph(3));
        assert_eq!(got.iter().map(|e| e.map().to_vec()).collect::<Vec<_>>(), oracle);
    }

    #[test]
    fn k2_into_path3_has_four() {
        // Oracle: of the 6 injective maps, exactly (0,1),(1,0),(1,2),(2,1) hit edges.
        let got = embeddings(&complete_graph(2), &path_graph(3)).unwrap();
        let maps: Vec<Vec<u8>> = got.iter().map(|e| e.map().to_vec()).collect();
        assert_eq!(maps, vec![vec![0, 1], vec![1, 0], vec![1, 2], vec![2, 1]]);
        assert_eq!(maps, brute_force_embeddings(&complete_graph(2), &path_graph(3)));
    }

    #[test]
    fn identity_is_always_present() {
        for s in [complete_graph(3), path_graph(4), chain(3), pure_set(2)] {
            let es = embeddings(&s, &s).unwrap();
            assert!(es.contains(&Embedding::identity(&s)));
        }
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphisms(&complete_graph(3)).len(), 6); // oracle: all 6 perms work
        assert_eq!(automorphisms(&path_graph(3)).len(), 2); // oracle: id and the flip
        assert_eq!(automorphisms(&pure_set(1)).len(), 1);
        assert_eq!(automorphisms(&chain(4)).len(), 1); // orders are rigid
    }

    #[test]
    fn automorphisms_form_a_group() {
        let auts = automorphisms(&path_graph(3));
        for a in &auts {
            for b in &auts {
                let c = a.then(b).unwrap();
                assert!(auts.contains(&c));
            }
        }
    }

    #[test]
    fn copy_counts() {
        // 6 embeddings / |Aut(K2)| = 2.
        assert_eq!(copies(&complete_graph(2), &complete_graph(3)).unwrap().len(), 3);
        // A in A: the full universe only.
        let p = path_graph(3);
        assert_eq!(copies(&p, &p).unwrap(), vec![vec![0, 1, 2]]);
        // K3 has no induced path on 3 vertices.
        assert_eq!(copies(&path_graph(3), &complete_graph(3)).unwrap().len(), 0);
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        assert!(matches!(
            embeddings(&complete_graph(2), &chain(3)),
            Err(ModelError::SignatureMismatch)
        ));
    }

    #[test]
    fn embeddings_reflect_relations() {
        // The path 0-1-2 does not embed into K3 (an induced non-edge is required).
        assert!(embeddings(&path_graph(3), &complete_graph(3)).unwrap().is_empty());
    }

    #[test]
    fn composition_lands_in_embeddings() {
        let k2 = complete_graph(2);
        let k3 = complete_graph(3);
        let k4 = complete_graph(4);
        let ab = embeddings(&k2, &k3).unwrap();
        let bc = embeddings(&k3, &k4).unwrap();
        let ac = embeddings(&k2, &k4).unwrap();
        for e in &ab {
            for f in &bc {
                assert!(ac.contains(&e.then(f).unwrap()));
            }
        }
    }

    #[test]
    fn pinned_enumeration_filters_and_respects_order() {
        let k2 = complete_graph(2);
        let k4 = complete_graph(4);
        let pinned = embeddings_extending(&k2, &k4, &[(0, 2)]).unwrap();
        let maps: Vec<Vec<u8>> = pinned.iter().map(|e| e.map().to_vec()).collect();
        assert_eq!(maps, vec![vec![2, 0], vec![2, 1], vec![2, 3]]);
        // Contradictory pins yield nothing.
        assert!(embeddings_extending(&k2, &k4, &[(0, 2), (0, 3)]).unwrap().is_empty());
    }

    #[test]
    fn chain_embeddings_are_monotone_subsets() {
        // Embeddings of the 2-chain into the 4-chain are exactly the 6 increasing pairs.
        let got = embeddings(&chain(2), &chain(4)).unwrap();
        assert_eq!(got.len(), 6);
        for e in got {
            assert!(e.map()[0] < e.map()[1]);
        }
    }
}
