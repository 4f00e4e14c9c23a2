//! Finite relational structures on universes `[n]` with `n <= 64`.
//!
//! Relations of arity up to 3 are stored as packed 64-bit sets for fast
//! membership tests; wider relations fall back to sorted tuple lists. The
//! sorted tuple lists are the canonical representation: equality, ordering,
//! hashing and the text format all go through them, so two structures compare
//! equal exactly when they have the same signature, size and tuples.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::embedding::Embedding;
use crate::signature::{RelationDecl, Signature, ORDER_SYMBOL};

/// Hard cap on universe size; relations pack into single 64-bit words.
pub const MAX_UNIVERSE: usize = 64;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("universe size {0} exceeds the cap of {MAX_UNIVERSE}")]
    UniverseTooLarge(usize),
    #[error("tuple entry {entry} out of range for universe of size {n}")]
    TupleOutOfRange { entry: u8, n: usize },
    #[error("tuple of length {got} for relation `{rel}` of arity {want}")]
    ArityMismatch { rel: String, got: usize, want: usize },
    #[error("relation `{0}` is flagged as an order but is not a strict linear order")]
    NotALinearOrder(String),
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("subset index {index} out of range for universe of size {n}")]
    IndexOutOfRange { index: u8, n: usize },
    #[error("map has length {got}, expected {want}")]
    MapLengthMismatch { got: usize, want: usize },
    #[error("map is not injective")]
    NotInjective,
    #[error("map does not preserve and reflect relation `{0}`")]
    NotAnEmbedding(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Rel {
    /// Bit `v` set iff `(v)` is in the relation.
    Unary(u64),
    /// Row `u` is the bitmask of `v` with `(u, v)` in the relation.
    Binary(Vec<u64>),
    /// Row `u * n + v` is the bitmask of `w` with `(u, v, w)` in the relation.
    Ternary(Vec<u64>),
    /// Arity >= 4.
    Wide(BTreeSet<Vec<u8>>),
}

impl Rel {
    fn build(n: usize, arity: usize, tuples: &[Vec<u8>]) -> Rel {
        match arity {
            1 => {
                let mut bits = 0u64;
                for t in tuples {
                    bits |= 1 << t[0];
                }
                Rel::Unary(bits)
            }
            2 => {
                let mut rows = vec![0u64; n];
                for t in tuples {
                    rows[t[0] as usize] |= 1 << t[1];
                }
                Rel::Binary(rows)
            }
            3 => {
                let mut rows = vec![0u64; n * n];
                for t in tuples {
                    rows[t[0] as usize * n + t[1] as usize] |= 1 << t[2];
                }
                Rel::Ternary(rows)
            }
            _ => Rel::Wide(tuples.iter().cloned().collect()),
        }
    }

    fn contains(&self, n: usize, t: &[u8]) -> bool {
        match self {
            Rel::Unary(bits) => bits & (1 << t[0]) != 0,
            Rel::Binary(rows) => rows[t[0] as usize] & (1 << t[1]) != 0,
            Rel::Ternary(rows) => rows[t[0] as usize * n + t[1] as usize] & (1 << t[2]) != 0,
            Rel::Wide(set) => set.contains(t),
        }
    }
}

#[derive(Debug)]
struct StructureData {
    sig: Signature,
    n: usize,
    /// Sorted tuple lists, one per relation symbol, in signature order.
    tuples: Vec<Vec<Vec<u8>>>,
    fast: Vec<Rel>,
}

/// A finite relational structure. Cheap to clone (shared immutable payload).
#[derive(Clone)]
pub struct Structure(Arc<StructureData>);

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.sig == other.0.sig
                && self.0.n == other.0.n
                && self.0.tuples == other.0.tuples)
    }
}

impl Eq for Structure {}

impl PartialOrd for Structure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Structure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .sig
            .cmp(&other.0.sig)
            .then_with(|| self.0.n.cmp(&other.0.n))
            .then_with(|| self.0.tuples.cmp(&other.0.tuples))
    }
}

impl Hash for Structure {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.n.hash(state);
        self.0.tuples.hash(state);
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure(n={}", self.0.n)?;
        for (decl, ts) in self.0.sig.relations().iter().zip(&self.0.tuples) {
            write!(f, ", {}={:?}", decl.name, ts)?;
        }
        write!(f, ")")
    }
}

impl Structure {
    /// Builds a structure, validating ranges, arities and order axioms.
    pub fn new(
        sig: Signature,
        n: usize,
        relations: Vec<Vec<Vec<u8>>>,
    ) -> Result<Structure, ModelError> {
        if n > MAX_UNIVERSE {
            return Err(ModelError::UniverseTooLarge(n));
        }
        assert_eq!(relations.len(), sig.len(), "one tuple list per relation symbol");
        let mut tuples = Vec::with_capacity(relations.len());
        let mut fast = Vec::with_capacity(relations.len());
        for (decl, ts) in sig.relations().iter().zip(relations) {
            let arity = decl.arity as usize;
            let mut ts: Vec<Vec<u8>> = ts;
            for t in &ts {
                if t.len() != arity {
                    return Err(ModelError::ArityMismatch {
                        rel: decl.name.clone(),
                        got: t.len(),
                        want: arity,
                    });
                }
                for &e in t {
                    if e as usize >= n {
                        return Err(ModelError::TupleOutOfRange { entry: e, n });
                    }
                }
            }
            ts.sort();
            ts.dedup();
            fast.push(Rel::build(n, arity, &ts));
            tuples.push(ts);
        }
        let s = Structure(Arc::new(StructureData { sig, n, tuples, fast }));
        for (idx, decl) in s.0.sig.relations().iter().enumerate() {
            if decl.is_order && !s.is_strict_linear_order(idx) {
                return Err(ModelError::NotALinearOrder(decl.name.clone()));
            }
        }
        Ok(s)
    }

    pub fn signature(&self) -> &Signature {
        &self.0.sig
    }

    pub fn size(&self) -> usize {
        self.0.n
    }

    pub fn contains(&self, rel: usize, t: &[u8]) -> bool {
        self.0.fast[rel].contains(self.0.n, t)
    }

    /// The sorted tuple list of one relation.
    pub fn tuples(&self, rel: usize) -> &[Vec<u8>] {
        &self.0.tuples[rel]
    }

    /// Checks that relation `rel` is an irreflexive, transitive, total binary
    /// relation on the universe.
    pub fn is_strict_linear_order(&self, rel: usize) -> bool {
        if self.0.sig.arity(rel) != 2 {
            return false;
        }
        let n = self.0.n as u8;
        for u in 0..n {
            if self.contains(rel, &[u, u]) {
                return false;
            }
            for v in 0..n {
                if u == v {
                    continue;
                }
                let uv = self.contains(rel, &[u, v]);
                let vu = self.contains(rel, &[v, u]);
                if uv == vu {
                    return false; // totality + antisymmetry
                }
                for w in 0..n {
                    if w == u || w == v {
                        continue;
                    }
                    if uv && self.contains(rel, &[v, w]) && !self.contains(rel, &[u, w]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Relabels the universe: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[u8]) -> Structure {
        debug_assert_eq!(perm.len(), self.0.n);
        let relations = self
            .0
            .tuples
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|t| t.iter().map(|&e| perm[e as usize]).collect())
                    .collect()
            })
            .collect();
        Structure::new(self.0.sig.clone(), self.0.n, relations)
            .expect("relabeling preserves validity")
    }

    /// The induced substructure on `subset` (which need not be sorted), with
    /// the order-preserving bijection onto `[|subset|]`, together with the
    /// inclusion embedding back into `self`.
    pub fn induced(&self, subset: &[u8]) -> Result<(Structure, Embedding), ModelError> {
        let mut sub: Vec<u8> = subset.to_vec();
        sub.sort();
        sub.dedup();
        for &v in &sub {
            if v as usize >= self.0.n {
                return Err(ModelError::IndexOutOfRange { index: v, n: self.0.n });
            }
        }
        let mut pos = vec![u8::MAX; self.0.n];
        for (i, &v) in sub.iter().enumerate() {
            pos[v as usize] = i as u8;
        }
        let relations = self
            .0
            .tuples
            .iter()
            .map(|ts| {
                ts.iter()
                    .filter(|t| t.iter().all(|&e| pos[e as usize] != u8::MAX))
                    .map(|t| t.iter().map(|&e| pos[e as usize]).collect())
                    .collect()
            })
            .collect();
        let induced = Structure::new(self.0.sig.clone(), sub.len(), relations)?;
        let inclusion = Embedding::new(induced.clone(), self.clone(), sub)?;
        Ok((induced, inclusion))
    }

    /// Adds a relation to the structure, yielding a structure over the
    /// extended signature. Panics if the extended signature is invalid.
    pub fn with_relation(
        &self,
        decl: RelationDecl,
        tuples: Vec<Vec<u8>>,
    ) -> Result<Structure, ModelError> {
        let mut rels = self.0.sig.relations().to_vec();
        rels.push(decl);
        let sig = Signature::new(rels).expect("extended signature invalid");
        let mut all = self.0.tuples.clone();
        all.push(tuples);
        Structure::new(sig, self.0.n, all)
    }

    /// Drops the relation at `rel`, yielding the reduct.
    pub fn without_relation(&self, rel: usize) -> Structure {
        let mut rels = self.0.sig.relations().to_vec();
        rels.remove(rel);
        let sig = Signature::new(rels).expect("reduct signature invalid");
        let mut all = self.0.tuples.clone();
        all.remove(rel);
        Structure::new(sig, self.0.n, all).expect("reduct invalid")
    }

    /// Serializes to the structure text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("signature: {}\nsize: {}\n", self.0.sig, self.0.n);
        for (decl, ts) in self.0.sig.relations().iter().zip(&self.0.tuples) {
            out.push_str(&decl.name);
            out.push(':');
            for t in ts {
                out.push_str(" (");
                for (i, e) in t.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&e.to_string());
                }
                out.push(')');
            }
            out.push('\n');
        }
        out
    }

    /// Parses the structure text format:
    ///
    /// ```text
    /// signature: E/2 </2,order
    /// size: 3
    /// E: (0,1) (1,0)
    /// <: (0,1) (0,2) (1,2)
    /// ```
    ///
    /// Relation lines may appear in any order and may be omitted (empty
    /// relation). Whitespace is insignificant inside tuple lists.
    pub fn parse(text: &str) -> Result<Structure, ModelError> {
        let mut sig: Option<Signature> = None;
        let mut size: Option<usize> = None;
        let mut rel_lines: Vec<(usize, String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(':').ok_or(ModelError::Parse {
                line: lineno,
                msg: "expected `key: value`".into(),
            })?;
            let key = key.trim();
            let rest = rest.trim();
            match key {
                "signature" => sig = Some(parse_signature(rest, lineno)?),
                "size" => {
                    size = Some(rest.parse().map_err(|_| ModelError::Parse {
                        line: lineno,
                        msg: format!("bad size `{rest}`"),
                    })?)
                }
                _ => rel_lines.push((lineno, key.to_string(), rest.to_string())),
            }
        }
        let sig = sig.ok_or(ModelError::Parse { line: 0, msg: "missing `signature:` line".into() })?;
        let n = size.ok_or(ModelError::Parse { line: 0, msg: "missing `size:` line".into() })?;
        let mut relations: Vec<Vec<Vec<u8>>> = vec![Vec::new(); sig.len()];
        for (lineno, name, body) in rel_lines {
            let idx = sig.index_of(&name).ok_or(ModelError::Parse {
                line: lineno,
                msg: format!("unknown relation `{name}`"),
            })?;
            relations[idx] = parse_tuple_list(&body, lineno)?;
        }
        Structure::new(sig, n, relations)
    }
}

fn parse_signature(text: &str, lineno: usize) -> Result<Signature, ModelError> {
    let mut rels = Vec::new();
    for item in text.split_whitespace() {
        let (name, arity_part) = item.split_once('/').ok_or(ModelError::Parse {
            line: lineno,
            msg: format!("expected `name/arity`, got `{item}`"),
        })?;
        let (arity_str, is_order) = match arity_part.split_once(',') {
            Some((a, flag)) if flag.trim() == "order" => (a, true),
            Some((_, flag)) => {
                return Err(ModelError::Parse {
                    line: lineno,
                    msg: format!("unknown relation flag `{flag}`"),
                })
            }
            None => (arity_part, false),
        };
        let arity: u8 = arity_str.trim().parse().map_err(|_| ModelError::Parse {
            line: lineno,
            msg: format!("bad arity `{arity_str}`"),
        })?;
        rels.push(RelationDecl { name: name.trim().to_string(), arity, is_order });
    }
    Signature::new(rels).map_err(|e| ModelError::Parse { line: lineno, msg: e.to_string() })
}

fn parse_tuple_list(body: &str, lineno: usize) -> Result<Vec<Vec<u8>>, ModelError> {
    let mut tuples = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let open = rest.find('(').ok_or(ModelError::Parse {
            line: lineno,
            msg: "expected `(`".into(),
        })?;
        let close = rest[open..].find(')').ok_or(ModelError::Parse {
            line: lineno,
            msg: "unclosed tuple".into(),
        })? + open;
        let inner = &rest[open + 1..close];
        let mut tuple = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            tuple.push(part.parse().map_err(|_| ModelError::Parse {
                line: lineno,
                msg: format!("bad tuple entry `{part}`"),
            })?);
        }
        tuples.push(tuple);
        rest = rest[close + 1..].trim_start();
    }
    Ok(tuples)
}

/// Builders for the small structures used throughout the crate.
pub mod build {
    use super::*;

    fn graph_sig() -> Signature {
        Signature::of(&[("E", 2)])
    }

    fn graph(n: usize, edges: &[(u8, u8)]) -> Structure {
        let mut tuples = Vec::new();
        for &(u, v) in edges {
            tuples.push(vec![u, v]);
            tuples.push(vec![v, u]);
        }
        Structure::new(graph_sig(), n, vec![tuples]).expect("graph literal")
    }

    /// Complete graph on `n` vertices.
    pub fn complete_graph(n: usize) -> Structure {
        let edges: Vec<(u8, u8)> =
            (0..n as u8).flat_map(|u| (u + 1..n as u8).map(move |v| (u, v))).collect();
        graph(n, &edges)
    }

    /// Edgeless graph on `n` vertices.
    pub fn edgeless_graph(n: usize) -> Structure {
        graph(n, &[])
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path_graph(n: usize) -> Structure {
        let edges: Vec<(u8, u8)> = (1..n as u8).map(|v| (v - 1, v)).collect();
        graph(n, &edges)
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle_graph(n: usize) -> Structure {
        assert!(n >= 3);
        let mut edges: Vec<(u8, u8)> = (1..n as u8).map(|v| (v - 1, v)).collect();
        edges.push((n as u8 - 1, 0));
        graph(n, &edges)
    }

    /// Pure set of `n` points (empty signature).
    pub fn pure_set(n: usize) -> Structure {
        Structure::new(Signature::empty(), n, Vec::new()).expect("pure set")
    }

    /// The `n`-chain: linear order `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Structure {
        let sig = Signature::of(&[(ORDER_SYMBOL, 2)]);
        let tuples: Vec<Vec<u8>> = (0..n as u8)
            .flat_map(|u| (u + 1..n as u8).map(move |v| vec![u, v]))
            .collect();
        Structure::new(sig, n, vec![tuples]).expect("chain")
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0` in the digraph signature `A/2`.
    pub fn directed_cycle(n: usize) -> Structure {
        assert!(n >= 3);
        let sig = Signature::of(&[("A", 2)]);
        let mut tuples: Vec<Vec<u8>> = (1..n as u8).map(|v| vec![v - 1, v]).collect();
        tuples.push(vec![n as u8 - 1, 0]);
        Structure::new(sig, n, vec![tuples]).expect("directed cycle")
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    #[test]
    fn order_validation() {
        let sig = Signature::of(&[(ORDER_SYMBOL, 2)]);
        // 0 < 1, 1 < 2 without 0 < 2 is not transitive-total.
        let bad = Structure::new(sig.clone(), 3, vec![vec![vec![0, 1], vec![1, 2]]]);
        assert!(matches!(bad, Err(ModelError::NotALinearOrder(_))));
        assert!(Structure::new(sig, 3, vec![vec![vec![0, 1], vec![1, 2], vec![0, 2]]]).is_ok());
    }

    #[test]
    fn range_validation() {
        let sig = Signature::of(&[("E", 2)]);
        let bad = Structure::new(sig, 2, vec![vec![vec![0, 2]]]);
        assert!(matches!(bad, Err(ModelError::TupleOutOfRange { .. })));
    }

    #[test]
    fn induced_of_chain_is_chain() {
        // Restricting the order 0 < 1 < 2 to {0, 2} gives the 2-chain.
        let c3 = chain(3);
        let (sub, incl) = c3.induced(&[0, 2]).unwrap();
        assert_eq!(sub, chain(2));
        assert_eq!(incl.map(), &[0, 2]);
    }

    #[test]
    fn induced_full_is_identity() {
        let g = path_graph(3);
        let (sub, incl) = g.induced(&[0, 1, 2]).unwrap();
        assert_eq!(sub, g);
        assert_eq!(incl.map(), &[0, 1, 2]);
    }

    #[test]
    fn induced_k3_minus_vertex_is_k2() {
        let (sub, _) = complete_graph(3).induced(&[0, 1]).unwrap();
        assert_eq!(sub, complete_graph(2));
    }

    #[test]
    fn text_round_trip() {
        let c = chain(3);
        let parsed = Structure::parse(&c.to_text()).unwrap();
        assert_eq!(parsed, c);
        let p = path_graph(4);
        assert_eq!(Structure::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn parse_is_whitespace_insensitive() {
        let text = "signature:  E/2\nsize: 3\nE: ( 0 , 1 ) (1,0)\n";
        let s = Structure::parse(text).unwrap();
        assert!(s.contains(0, &[0, 1]) && s.contains(0, &[1, 0]));
        assert!(!s.contains(0, &[0, 2]));
        assert_eq!(s.size(), 3);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Structure::parse("signature: E/2\nsize: x\n").unwrap_err();
        match err {
            ModelError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn relabel_moves_tuples() {
        let p = path_graph(3); // edges 01, 12
        let r = p.relabel(&[2, 1, 0]); // edges 21, 10
        assert!(r.contains(0, &[2, 1]) && r.contains(0, &[1, 0]));
        assert!(!r.contains(0, &[0, 2]));
    }
}
