//! Finitely-specified hereditary classes of finite relational structures.
//!
//! A class is given by a signature, a list of forbidden induced
//! substructures, and a pack of per-relation axioms. Classes in this form
//! are hereditary by construction. Reduct classes of linearly ordered sets
//! (betweenness, cyclic orientation, separation) and order expansions of a
//! base class are supported through dedicated membership rules.

use rayon::prelude::*;
use thiserror::Error;

use crate::canon::{canonical_form, CanonicalForm};
use crate::embedding::{embeddings, embeddings_extending, Embedding};
use crate::signature::{Signature, ORDER_SYMBOL};
use crate::structure::{build, ModelError, Structure, MAX_UNIVERSE};

#[derive(Debug, Error)]
pub enum ClassError {
    #[error("size {0} exceeds the universe cap of {MAX_UNIVERSE}")]
    SizeCap(usize),
    #[error("axiom `{axiom}` refers to relation `{rel}` which is {problem}")]
    BadAxiom { axiom: String, rel: String, problem: String },
    #[error("forbidden structure does not share the class signature")]
    ForbiddenSignature,
    #[error("enumeration budget exceeded: {0} candidate extensions for one parent")]
    EnumerationBudget(u64),
    #[error("structure does not belong to the class")]
    NotAMember,
    #[error("embedding endpoints do not match the amalgamation instance")]
    BadInstance,
    #[error("witness is not Ramsey enough: no embedding of the base receives both sides")]
    WitnessNotRamseyEnough,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Per-relation axioms. All apply to binary relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomKind {
    LinearOrder,
    Equivalence,
    Irreflexive,
    Symmetric,
    Antisymmetric,
    Total,
}

impl AxiomKind {
    pub fn name(self) -> &'static str {
        match self {
            AxiomKind::LinearOrder => "linear_order",
            AxiomKind::Equivalence => "equivalence",
            AxiomKind::Irreflexive => "irreflexive",
            AxiomKind::Symmetric => "symmetric",
            AxiomKind::Antisymmetric => "antisymmetric",
            AxiomKind::Total => "total",
        }
    }

    pub fn from_name(name: &str) -> Option<AxiomKind> {
        Some(match name {
            "linear_order" => AxiomKind::LinearOrder,
            "equivalence" => AxiomKind::Equivalence,
            "irreflexive" => AxiomKind::Irreflexive,
            "symmetric" => AxiomKind::Symmetric,
            "antisymmetric" => AxiomKind::Antisymmetric,
            "total" => AxiomKind::Total,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub kind: AxiomKind,
    pub rel: String,
}

/// Quantifier-free reducts of finite chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductKind {
    /// Ternary: the middle point of three lies between the outer two.
    Betweenness,
    /// Ternary: cyclic orientation of a triple.
    Cyclic,
    /// 4-ary: the pair `{x, z}` separates `{y, w}` on the circle.
    Separation,
}

impl ReductKind {
    pub fn rel_name(self) -> &'static str {
        match self {
            ReductKind::Betweenness => "B",
            ReductKind::Cyclic => "C",
            ReductKind::Separation => "S",
        }
    }

    pub fn arity(self) -> u8 {
        match self {
            ReductKind::Betweenness | ReductKind::Cyclic => 3,
            ReductKind::Separation => 4,
        }
    }

    pub fn signature(self) -> Signature {
        Signature::of(&[(self.rel_name(), self.arity())])
    }

    /// Relation tuples induced on `[n]` by the order with `rank[v]` = position
    /// of `v`.
    pub fn tuples_of_ranks(self, rank: &[u8]) -> Vec<Vec<u8>> {
        let n = rank.len() as u8;
        let mut out = Vec::new();
        let cyc = |a: u8, b: u8, c: u8| {
            let (ra, rb, rc) = (rank[a as usize], rank[b as usize], rank[c as usize]);
            (ra < rb && rb < rc) || (rb < rc && rc < ra) || (rc < ra && ra < rb)
        };
        match self {
            ReductKind::Betweenness => {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            if a != b && b != c && a != c {
                                let (ra, rb, rc) =
                                    (rank[a as usize], rank[b as usize], rank[c as usize]);
                                if (ra < rb && rb < rc) || (rc < rb && rb < ra) {
                                    out.push(vec![a, b, c]);
                                }
                            }
                        }
                    }
                }
            }
            ReductKind::Cyclic => {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            if a != b && b != c && a != c && cyc(a, b, c) {
                                out.push(vec![a, b, c]);
                            }
                        }
                    }
                }
            }
            ReductKind::Separation => {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for d in 0..n {
                                let distinct = a != b && a != c && a != d && b != c && b != d && c != d;
                                if distinct && (cyc(a, b, c) != cyc(a, d, c)) {
                                    out.push(vec![a, b, c, d]);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// The reduct of the natural chain on `[n]`.
    pub fn of_chain(self, n: usize) -> Structure {
        let ranks: Vec<u8> = (0..n as u8).collect();
        Structure::new(self.signature(), n, vec![self.tuples_of_ranks(&ranks)])
            .expect("chain reduct")
    }
}

/// How membership in the class is decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassRule {
    /// Forbidden induced substructures plus axiom pack.
    Axiomatic,
    /// Exactly the structures isomorphic to a chain reduct of their size.
    ChainReduct(ReductKind),
    /// Structures `(A, <)` with `A` in the base class and `<` any linear order.
    FreeOrderExpansion { base: Box<ClassSpec> },
    /// Structures `(A, <)` whose non-order relation equals the chain reduct
    /// of `<`.
    ReductOrderExpansion(ReductKind),
    /// Structures `(A, <)` with `A` in the base class and `<` extending the
    /// named binary relation.
    OrderExtendsRelation { base: Box<ClassSpec>, rel: String },
    /// Test-only rule: only the natural order `0 < 1 < ... < n-1` is
    /// admissible. Not isomorphism-invariant; used to exercise failure paths
    /// of expansion checks. Never enumerate members of such a class.
    NaturalOrderOnly { base: Box<ClassSpec> },
}

/// A finitely-axiomatized hereditary class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSpec {
    name: String,
    signature: Signature,
    forbidden: Vec<Structure>,
    axioms: Vec<Axiom>,
    rule: ClassRule,
}

impl ClassSpec {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        forbidden: Vec<Structure>,
        axioms: Vec<Axiom>,
    ) -> Result<ClassSpec, ClassError> {
        for f in &forbidden {
            if f.signature() != &signature {
                return Err(ClassError::ForbiddenSignature);
            }
        }
        for ax in &axioms {
            let idx = signature.index_of(&ax.rel).ok_or_else(|| ClassError::BadAxiom {
                axiom: ax.kind.name().into(),
                rel: ax.rel.clone(),
                problem: "not in the signature".into(),
            })?;
            if signature.arity(idx) != 2 {
                return Err(ClassError::BadAxiom {
                    axiom: ax.kind.name().into(),
                    rel: ax.rel.clone(),
                    problem: "not binary".into(),
                });
            }
        }
        Ok(ClassSpec { name: name.into(), signature, forbidden, axioms, rule: ClassRule::Axiomatic })
    }

    pub(crate) fn with_rule(mut self, rule: ClassRule) -> ClassSpec {
        self.rule = rule;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn forbidden(&self) -> &[Structure] {
        &self.forbidden
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn rule(&self) -> &ClassRule {
        &self.rule
    }

    /// Decides membership of a structure in the class.
    pub fn is_member(&self, s: &Structure) -> bool {
        if s.signature() != &self.signature {
            return false;
        }
        match &self.rule {
            ClassRule::Axiomatic => self.axioms_hold(s) && self.avoids_forbidden(s),
            ClassRule::ChainReduct(kind) => {
                canonical_form(s).canon == canonical_form(&kind.of_chain(s.size())).canon
            }
            ClassRule::FreeOrderExpansion { base } => {
                let Some((reduct, order)) = split_order(s) else { return false };
                let _ = order;
                base.is_member(&reduct)
            }
            ClassRule::ReductOrderExpansion(kind) => {
                let Some((reduct, order_ranks)) = split_order_ranks(s) else { return false };
                let rel = reduct
                    .signature()
                    .index_of(kind.rel_name())
                    .expect("reduct relation present");
                let mut want = kind.tuples_of_ranks(&order_ranks);
                want.sort();
                reduct.tuples(rel) == want.as_slice()
            }
            ClassRule::OrderExtendsRelation { base, rel } => {
                let Some((reduct, order_ranks)) = split_order_ranks(s) else { return false };
                if !base.is_member(&reduct) {
                    return false;
                }
                let idx = reduct.signature().index_of(rel).expect("relation present");
                reduct
                    .tuples(idx)
                    .iter()
                    .all(|t| order_ranks[t[0] as usize] < order_ranks[t[1] as usize])
            }
            ClassRule::NaturalOrderOnly { base } => {
                let Some((reduct, order_ranks)) = split_order_ranks(s) else { return false };
                base.is_member(&reduct)
                    && order_ranks.iter().enumerate().all(|(v, &r)| v as u8 == r)
            }
        }
    }

    fn axioms_hold(&self, s: &Structure) -> bool {
        for ax in &self.axioms {
            let rel = self.signature.index_of(&ax.rel).expect("validated");
            let n = s.size() as u8;
            let holds = match ax.kind {
                AxiomKind::LinearOrder => s.is_strict_linear_order(rel),
                AxiomKind::Equivalence => {
                    (0..n).all(|v| s.contains(rel, &[v, v]))
                        && pairs(n).all(|(a, b)| {
                            s.contains(rel, &[a, b]) == s.contains(rel, &[b, a])
                        })
                        && triples(n).all(|(a, b, c)| {
                            !(s.contains(rel, &[a, b]) && s.contains(rel, &[b, c]))
                                || s.contains(rel, &[a, c])
                        })
                }
                AxiomKind::Irreflexive => (0..n).all(|v| !s.contains(rel, &[v, v])),
                AxiomKind::Symmetric => pairs(n)
                    .all(|(a, b)| s.contains(rel, &[a, b]) == s.contains(rel, &[b, a])),
                AxiomKind::Antisymmetric => pairs(n)
                    .all(|(a, b)| !(s.contains(rel, &[a, b]) && s.contains(rel, &[b, a]))),
                AxiomKind::Total => pairs(n)
                    .all(|(a, b)| s.contains(rel, &[a, b]) || s.contains(rel, &[b, a])),
            };
            if !holds {
                return false;
            }
        }
        true
    }

    fn avoids_forbidden(&self, s: &Structure) -> bool {
        self.forbidden
            .iter()
            .all(|f| f.size() > s.size() || embeddings(f, s).map_or(true, |es| es.is_empty()))
    }

    /// One canonical representative per isomorphism class of members of size
    /// at most `n`, sorted by (size, canonical encoding).
    pub fn members(&self, n: usize) -> Result<Vec<CanonicalForm>, ClassError> {
        Ok(self.member_reps(n)?.iter().map(canonical_form).collect())
    }

    /// Like [`ClassSpec::members`], returning the representative structures.
    pub fn member_reps(&self, n: usize) -> Result<Vec<Structure>, ClassError> {
        if n > MAX_UNIVERSE {
            return Err(ClassError::SizeCap(n));
        }
        let mut out = Vec::new();
        for level in self.member_levels(n) {
            out.extend(level?);
        }
        Ok(out)
    }

    /// Representatives size by size: item `k` is the sorted list of canonical
    /// members of size exactly `k`. Lazy, so a consumer that stops early never
    /// pays for the larger sizes.
    pub fn member_levels(&self, cap: usize) -> MemberLevels<'_> {
        MemberLevels { spec: self, size: 0, cap, level: None, base_levels: None, failed: false }
    }

    fn axiomatic_level(
        &self,
        size: usize,
        prev: Option<&[Structure]>,
    ) -> Result<Vec<Structure>, ClassError> {
        if size == 0 {
            let empty =
                Structure::new(self.signature.clone(), 0, vec![Vec::new(); self.signature.len()])?;
            return Ok(if self.is_member(&empty) { vec![empty] } else { Vec::new() });
        }
        let parents = prev.expect("axiomatic levels are built incrementally");
        let nested: Result<Vec<Vec<Structure>>, ClassError> = parents
            .par_iter()
            .map(|parent| {
                let mut found = Vec::new();
                for cand in self.extensions(parent)? {
                    if self.is_member(&cand) {
                        found.push(canonical_form(&cand).canon);
                    }
                }
                Ok(found)
            })
            .collect();
        let mut next: Vec<Structure> = nested?.into_iter().flatten().collect();
        next.sort();
        next.dedup();
        Ok(next)
    }

    /// Admissible-order expansions of the given base representatives.
    fn orders_level(&self, base_reps: &[Structure]) -> Result<Vec<Structure>, ClassError> {
        let mut out = Vec::new();
        for rep in base_reps {
            for order in all_orders(rep.size()) {
                let cand = attach_order(rep, &order);
                if self.is_member(&cand) {
                    out.push(canonical_form(&cand).canon);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// All one-vertex extensions of `parent` that can satisfy the axiom pack;
    /// completeness matters, over-generation is filtered by membership.
    fn extensions(&self, parent: &Structure) -> Result<Vec<Structure>, ClassError> {
        let k = parent.size();
        let new = k as u8;
        let mut per_relation: Vec<Vec<Vec<Vec<u8>>>> = Vec::new();
        for (rel, decl) in self.signature.relations().iter().enumerate() {
            let axioms: Vec<AxiomKind> = self
                .axioms
                .iter()
                .filter(|a| a.rel == decl.name)
                .map(|a| a.kind)
                .collect();
            let choices: Vec<Vec<Vec<u8>>> = if decl.arity == 1 {
                vec![vec![], vec![vec![new]]]
            } else if decl.arity == 2 && axioms.contains(&AxiomKind::LinearOrder) {
                // Insert the new vertex at each position of the parent order.
                let ranks = order_ranks(parent, rel);
                (0..=k)
                    .map(|pos| {
                        let mut ts = Vec::new();
                        for u in 0..new {
                            if (ranks[u as usize] as usize) < pos {
                                ts.push(vec![u, new]);
                            } else {
                                ts.push(vec![new, u]);
                            }
                        }
                        ts
                    })
                    .collect()
            } else if decl.arity == 2 && axioms.contains(&AxiomKind::Equivalence) {
                // Join one existing class (via its least representative) or
                // start a fresh one.
                let mut reps: Vec<u8> = Vec::new();
                for v in 0..new {
                    if !reps.iter().any(|&r| parent.contains(rel, &[r, v])) {
                        reps.push(v);
                    }
                }
                let mut choices = vec![vec![vec![new, new]]];
                for r in reps {
                    let mut ts = vec![vec![new, new]];
                    for v in 0..new {
                        if parent.contains(rel, &[r, v]) {
                            ts.push(vec![v, new]);
                            ts.push(vec![new, v]);
                        }
                    }
                    choices.push(ts);
                }
                choices
            } else if decl.arity == 2 && axioms.contains(&AxiomKind::Symmetric) {
                let loops: &[bool] = if axioms.contains(&AxiomKind::Irreflexive) {
                    &[false]
                } else {
                    &[false, true]
                };
                let mut choices = Vec::new();
                for mask in 0u64..(1 << k) {
                    for &with_loop in loops {
                        let mut ts = Vec::new();
                        for u in 0..new {
                            if mask & (1 << u) != 0 {
                                ts.push(vec![u, new]);
                                ts.push(vec![new, u]);
                            }
                        }
                        if with_loop {
                            ts.push(vec![new, new]);
                        }
                        choices.push(ts);
                    }
                }
                choices
            } else if decl.arity == 2 && axioms.contains(&AxiomKind::Antisymmetric) {
                let options: u64 = if axioms.contains(&AxiomKind::Total) { 2 } else { 3 };
                let total = options.pow(k as u32);
                if total > 1_000_000 {
                    return Err(ClassError::EnumerationBudget(total));
                }
                let mut choices = Vec::new();
                for mut code in 0..total {
                    let mut ts = Vec::new();
                    for u in 0..new {
                        let digit = code % options;
                        code /= options;
                        match digit {
                            0 => ts.push(vec![u, new]),
                            1 => ts.push(vec![new, u]),
                            _ => {}
                        }
                    }
                    choices.push(ts);
                }
                choices
            } else {
                // Generic: all subsets of the new tuples through the vertex.
                let mut delta: Vec<Vec<u8>> = Vec::new();
                let arity = decl.arity as usize;
                let mut tuple = vec![0u8; arity];
                collect_new_tuples(new, arity, &mut tuple, 0, &mut delta);
                if delta.len() > 22 {
                    return Err(ClassError::EnumerationBudget(1u64 << delta.len().min(63)));
                }
                (0u64..(1 << delta.len()))
                    .map(|mask| {
                        delta
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, t)| t.clone())
                            .collect()
                    })
                    .collect()
            };
            per_relation.push(choices);
        }

        let mut total: u64 = 1;
        for c in &per_relation {
            total = total.saturating_mul(c.len() as u64);
            if total > 2_000_000 {
                return Err(ClassError::EnumerationBudget(total));
            }
        }

        let mut out = Vec::new();
        let mut pick = vec![0usize; per_relation.len()];
        loop {
            let relations: Vec<Vec<Vec<u8>>> = self
                .signature
                .relations()
                .iter()
                .enumerate()
                .map(|(rel, _)| {
                    let mut ts: Vec<Vec<u8>> = parent.tuples(rel).to_vec();
                    ts.extend(per_relation[rel][pick[rel]].iter().cloned());
                    ts
                })
                .collect();
            if let Ok(s) = Structure::new(self.signature.clone(), k + 1, relations) {
                out.push(s);
            }
            // Odometer over the per-relation choices.
            let mut idx = 0;
            loop {
                if idx == pick.len() {
                    return Ok(out);
                }
                pick[idx] += 1;
                if pick[idx] < per_relation[idx].len() {
                    break;
                }
                pick[idx] = 0;
                idx += 1;
            }
        }
    }
}

/// Lazy per-size member enumeration; see [`ClassSpec::member_levels`].
pub struct MemberLevels<'a> {
    spec: &'a ClassSpec,
    size: usize,
    cap: usize,
    /// Previous level, for incremental extension.
    level: Option<Vec<Structure>>,
    /// Base-class levels, for order-expansion rules.
    base_levels: Option<Box<MemberLevels<'a>>>,
    failed: bool,
}

impl Iterator for MemberLevels<'_> {
    type Item = Result<Vec<Structure>, ClassError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.size > self.cap {
            return None;
        }
        let size = self.size;
        self.size += 1;
        if size > MAX_UNIVERSE {
            self.failed = true;
            return Some(Err(ClassError::SizeCap(size)));
        }
        let result = match self.spec.rule() {
            ClassRule::Axiomatic => {
                let next = self.spec.axiomatic_level(size, self.level.as_deref());
                if let Ok(level) = &next {
                    self.level = Some(level.clone());
                }
                next
            }
            ClassRule::ChainReduct(kind) => {
                Ok(vec![canonical_form(&kind.of_chain(size)).canon])
            }
            ClassRule::ReductOrderExpansion(kind) => {
                let rep = canonical_form(&kind.of_chain(size)).canon;
                self.spec.orders_level(std::slice::from_ref(&rep))
            }
            ClassRule::FreeOrderExpansion { base }
            | ClassRule::OrderExtendsRelation { base, .. } => {
                let cap = self.cap;
                let iter = self
                    .base_levels
                    .get_or_insert_with(|| Box::new(base.member_levels(cap)));
                match iter.next() {
                    Some(Ok(reps)) => self.spec.orders_level(&reps),
                    Some(Err(e)) => Err(e),
                    None => Ok(Vec::new()),
                }
            }
            ClassRule::NaturalOrderOnly { .. } => {
                panic!("NaturalOrderOnly is a test-only rule; its members are not enumerable")
            }
        };
        if result.is_err() {
            self.failed = true;
        }
        Some(result)
    }
}

fn pairs(n: u8) -> impl Iterator<Item = (u8, u8)> {
    (0..n).flat_map(move |a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
}

fn triples(n: u8) -> impl Iterator<Item = (u8, u8, u8)> {
    (0..n).flat_map(move |a| {
        (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))
    })
}

fn collect_new_tuples(pivot: u8, arity: usize, tuple: &mut Vec<u8>, depth: usize, out: &mut Vec<Vec<u8>>) {
    if depth == arity {
        if tuple.contains(&pivot) {
            out.push(tuple.clone());
        }
        return;
    }
    for v in 0..=pivot {
        tuple[depth] = v;
        collect_new_tuples(pivot, arity, tuple, depth + 1, out);
    }
}

/// `ranks[v]` = number of `u` with `u <rel v`; for a linear order this is the
/// position of `v`.
pub(crate) fn order_ranks_of(s: &Structure, rel: usize) -> Vec<u8> {
    let n = s.size() as u8;
    (0..n)
        .map(|v| (0..n).filter(|&u| s.contains(rel, &[u, v])).count() as u8)
        .collect()
}

fn order_ranks(s: &Structure, rel: usize) -> Vec<u8> {
    order_ranks_of(s, rel)
}

/// Splits `(A, <)` into the reduct and the order, if `<` is present and total.
pub(crate) fn split_order(s: &Structure) -> Option<(Structure, Vec<u8>)> {
    let idx = s.signature().index_of(ORDER_SYMBOL)?;
    if !s.is_strict_linear_order(idx) {
        return None;
    }
    let ranks = order_ranks_of(s, idx);
    Some((s.without_relation(idx), ranks))
}

pub(crate) fn split_order_ranks(s: &Structure) -> Option<(Structure, Vec<u8>)> {
    split_order(s)
}

/// All linear orders on `[n]` as rank vectors, lexicographic in the ascending
/// element listing.
pub(crate) fn all_orders(n: usize) -> Vec<Vec<u8>> {
    let mut perms = Vec::new();
    let mut asc: Vec<u8> = (0..n as u8).collect();
    loop {
        let mut ranks = vec![0u8; n];
        for (pos, &v) in asc.iter().enumerate() {
            ranks[v as usize] = pos as u8;
        }
        perms.push(ranks);
        if !next_perm(&mut asc) {
            return perms;
        }
    }
}

pub(crate) fn next_perm(p: &mut [u8]) -> bool {
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

/// Attaches the order with the given rank vector as the `<` relation.
pub(crate) fn attach_order(base: &Structure, ranks: &[u8]) -> Structure {
    let n = base.size();
    let tuples: Vec<Vec<u8>> = (0..n as u8)
        .flat_map(|u| {
            (0..n as u8)
                .filter(move |&v| ranks[u as usize] < ranks[v as usize])
                .map(move |v| vec![u, v])
        })
        .collect();
    base.with_relation(
        crate::signature::RelationDecl {
            name: ORDER_SYMBOL.to_string(),
            arity: 2,
            is_order: true,
        },
        tuples,
    )
    .expect("order attaches cleanly")
}

fn chain_reduct_class(kind: ReductKind) -> ClassSpec {
    let name = match kind {
        ReductKind::Betweenness => "betweenness",
        ReductKind::Cyclic => "cyclic",
        ReductKind::Separation => "separation",
    };
    ClassSpec::new(name, kind.signature(), Vec::new(), Vec::new())
        .expect("reduct class")
        .with_rule(ClassRule::ChainReduct(kind))
}

/// The built-in preset catalog.
pub fn preset(name: &str) -> Result<ClassSpec, ClassError> {
    let ax = |kind: AxiomKind, rel: &str| Axiom { kind, rel: rel.to_string() };
    match name {
        "pure-sets" => ClassSpec::new(name, Signature::empty(), Vec::new(), Vec::new()),
        "linear-orders" => ClassSpec::new(
            name,
            Signature::of(&[(ORDER_SYMBOL, 2)]),
            Vec::new(),
            vec![ax(AxiomKind::LinearOrder, ORDER_SYMBOL)],
        ),
        "graphs" => ClassSpec::new(
            name,
            Signature::of(&[("E", 2)]),
            Vec::new(),
            vec![ax(AxiomKind::Irreflexive, "E"), ax(AxiomKind::Symmetric, "E")],
        ),
        "complete-graphs" => ClassSpec::new(
            name,
            Signature::of(&[("E", 2)]),
            vec![build::edgeless_graph(2)],
            vec![ax(AxiomKind::Irreflexive, "E"), ax(AxiomKind::Symmetric, "E")],
        ),
        "equivalence" => ClassSpec::new(
            name,
            Signature::of(&[("E", 2)]),
            Vec::new(),
            vec![ax(AxiomKind::Equivalence, "E")],
        ),
        "digraphs" => ClassSpec::new(
            name,
            Signature::of(&[("A", 2)]),
            Vec::new(),
            vec![ax(AxiomKind::Irreflexive, "A"), ax(AxiomKind::Antisymmetric, "A")],
        ),
        "tournaments" => ClassSpec::new(
            name,
            Signature::of(&[("A", 2)]),
            Vec::new(),
            vec![
                ax(AxiomKind::Irreflexive, "A"),
                ax(AxiomKind::Antisymmetric, "A"),
                ax(AxiomKind::Total, "A"),
            ],
        ),
        "betweenness" => Ok(chain_reduct_class(ReductKind::Betweenness)),
        "cyclic" => Ok(chain_reduct_class(ReductKind::Cyclic)),
        "separation" => Ok(chain_reduct_class(ReductKind::Separation)),
        _ => Err(ClassError::UnknownPreset(name.to_string())),
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "pure-sets",
    "linear-orders",
    "graphs",
    "complete-graphs",
    "equivalence",
    "digraphs",
    "tournaments",
    "betweenness",
    "cyclic",
    "separation",
];

impl ClassSpec {
    /// Parses a class spec in the text format:
    ///
    /// ```text
    /// signature: E/2
    /// axioms: irreflexive(E), symmetric(E)
    /// forbidden:
    /// size: 3
    /// E: (0,1) (1,0) (0,2) (2,0) (1,2) (2,1)
    /// --
    /// ```
    ///
    /// A single `preset: <name>` line overrides everything else.
    pub fn parse(text: &str) -> Result<ClassSpec, ClassError> {
        let mut sig: Option<Signature> = None;
        let mut axioms: Vec<Axiom> = Vec::new();
        let mut name = "user-class".to_string();
        let mut forbidden_src: Vec<String> = Vec::new();
        let mut in_forbidden = false;
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("preset:") {
                return preset(rest.trim());
            }
            if in_forbidden {
                if line == "--" {
                    if !current.is_empty() {
                        forbidden_src.push(std::mem::take(&mut current));
                    }
                } else {
                    current.push_str(line);
                    current.push('\n');
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("name:") {
                name = rest.trim().to_string();
            } else if let Some(rest) = line.strip_prefix("signature:") {
                sig = Some(
                    Structure::parse(&format!("signature: {}\nsize: 0\n", rest.trim()))
                        .map_err(|e| ClassError::Parse { line: lineno, msg: e.to_string() })?
                        .signature()
                        .clone(),
                );
            } else if let Some(rest) = line.strip_prefix("axioms:") {
                for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (kind_name, rel) = item
                        .split_once('(')
                        .and_then(|(k, r)| r.strip_suffix(')').map(|r| (k.trim(), r.trim())))
                        .ok_or(ClassError::Parse {
                            line: lineno,
                            msg: format!("expected `axiom(relation)`, got `{item}`"),
                        })?;
                    let kind = AxiomKind::from_name(kind_name).ok_or(ClassError::Parse {
                        line: lineno,
                        msg: format!("unknown axiom `{kind_name}`"),
                    })?;
                    axioms.push(Axiom { kind, rel: rel.to_string() });
                }
            } else if line.starts_with("forbidden:") {
                in_forbidden = true;
            } else {
                return Err(ClassError::Parse {
                    line: lineno,
                    msg: format!("unexpected line `{line}`"),
                });
            }
        }
        if !current.is_empty() {
            forbidden_src.push(current);
        }
        let sig = sig.ok_or(ClassError::Parse { line: 0, msg: "missing `signature:`".into() })?;
        let mut forbidden = Vec::new();
        for src in forbidden_src {
            let with_sig = format!("signature: {}\n{}", sig, src);
            forbidden.push(
                Structure::parse(&with_sig)
                    .map_err(|e| ClassError::Parse { line: 0, msg: e.to_string() })?,
            );
        }
        ClassSpec::new(name, sig, forbidden, axioms)
    }
}

/// Verdict of a bounded existential search: an exhausted cap is reported as
/// not-found-up-to-cap, never as a refutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchVerdict<T> {
    Pass,
    NotFoundUpTo { cap: usize, instance: T },
}

impl<T> SearchVerdict<T> {
    pub fn passed(&self) -> bool {
        matches!(self, SearchVerdict::Pass)
    }
}

/// An unsatisfied joint-embedding instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JepInstance {
    pub a: Structure,
    pub b: Structure,
}

/// An unsatisfied amalgamation instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApInstance {
    pub a: Structure,
    pub b0: Structure,
    pub b1: Structure,
    pub a0: Embedding,
    pub a1: Embedding,
}

/// Outcome of the bounded Fraisse-axiom checks.
#[derive(Debug, Clone)]
pub struct ClassReport {
    pub class_name: String,
    pub checked_size: usize,
    pub witness_cap: usize,
    /// Hereditariness holds by construction of the class form.
    pub hereditary: bool,
    pub jep: SearchVerdict<JepInstance>,
    pub ap: SearchVerdict<ApInstance>,
    /// Isomorphism classes per size, for sizes `0..=checked_size`.
    pub member_counts: Vec<usize>,
}

/// Bounded joint-embedding and amalgamation check: every pair (triple with
/// embeddings) of members of size at most `n` must find its witness among
/// members of size at most `witness_cap`.
pub fn check_jep_ap(
    spec: &ClassSpec,
    n: usize,
    witness_cap: usize,
) -> Result<ClassReport, ClassError> {
    assert!(n <= witness_cap, "witness cap below checked size");
    let small = spec.member_reps(n)?;
    let pool = spec.member_reps(witness_cap)?;
    let member_counts = (0..=n)
        .map(|k| small.iter().filter(|s| s.size() == k).count())
        .collect();

    let mut jep = SearchVerdict::Pass;
    'jep: for a in &small {
        for b in &small {
            let found = pool.iter().any(|c| {
                !embeddings(a, c).expect("same signature").is_empty()
                    && !embeddings(b, c).expect("same signature").is_empty()
            });
            if !found {
                jep = SearchVerdict::NotFoundUpTo {
                    cap: witness_cap,
                    instance: JepInstance { a: a.clone(), b: b.clone() },
                };
                break 'jep;
            }
        }
    }

    let mut instances: Vec<ApInstance> = Vec::new();
    for a in &small {
        for b0 in &small {
            if b0.size() < a.size() {
                continue;
            }
            let a0s = embeddings(a, b0).expect("same signature");
            if a0s.is_empty() {
                continue;
            }
            for b1 in &small {
                if b1.size() < a.size() {
                    continue;
                }
                let a1s = embeddings(a, b1).expect("same signature");
                for a0 in &a0s {
                    for a1 in &a1s {
                        instances.push(ApInstance {
                            a: a.clone(),
                            b0: b0.clone(),
                            b1: b1.clone(),
                            a0: a0.clone(),
                            a1: a1.clone(),
                        });
                    }
                }
            }
        }
    }
    let failed: Option<&ApInstance> = instances
        .par_iter()
        .find_first(|inst| !ap_instance_satisfied(inst, &pool));
    let ap = match failed {
        None => SearchVerdict::Pass,
        Some(inst) => SearchVerdict::NotFoundUpTo { cap: witness_cap, instance: inst.clone() },
    };

    Ok(ClassReport {
        class_name: spec.name.clone(),
        checked_size: n,
        witness_cap,
        hereditary: true,
        jep,
        ap,
        member_counts,
    })
}

fn ap_instance_satisfied(inst: &ApInstance, pool: &[Structure]) -> bool {
    pool.iter().any(|c| amalgam_in(inst, c).is_some())
}

fn amalgam_in(inst: &ApInstance, c: &Structure) -> Option<(Embedding, Embedding)> {
    for b0 in embeddings(&inst.b0, c).expect("same signature") {
        let pins: Vec<(u8, u8)> = (0..inst.a.size() as u8)
            .map(|x| (inst.a1.apply(x), b0.apply(inst.a0.apply(x))))
            .collect();
        if let Some(b1) = embeddings_extending(&inst.b1, c, &pins)
            .expect("same signature")
            .into_iter()
            .next()
        {
            return Some((b0, b1));
        }
    }
    None
}

/// Constructive amalgamation through the coloring of a single structure `c`:
/// color each embedding of `a` into `c` by the set of sides `i` for which it
/// extends along `a_i` to an embedding of `b_i`; a fully-colored embedding
/// yields the amalgam. Errors when no embedding carries both sides, i.e. the
/// supplied witness is not Ramsey enough.
pub fn amalgamate_via_arrow(
    c: &Structure,
    a: &Structure,
    b0: &Structure,
    b1: &Structure,
    a0: &Embedding,
    a1: &Embedding,
) -> Result<(Embedding, Embedding), ClassError> {
    if a0.source() != a || a1.source() != a || a0.target() != b0 || a1.target() != b1 {
        return Err(ClassError::BadInstance);
    }
    for cand in embeddings(a, c)? {
        let pins0: Vec<(u8, u8)> =
            (0..a.size() as u8).map(|x| (a0.apply(x), cand.apply(x))).collect();
        let e0 = embeddings_extending(b0, c, &pins0)?.into_iter().next();
        let Some(e0) = e0 else { continue };
        let pins1: Vec<(u8, u8)> =
            (0..a.size() as u8).map(|x| (a1.apply(x), cand.apply(x))).collect();
        let e1 = embeddings_extending(b1, c, &pins1)?.into_iter().next();
        if let Some(e1) = e1 {
            debug_assert_eq!(
                a0.then(&e0).unwrap().map(),
                a1.then(&e1).unwrap().map(),
                "amalgam legs must agree on the base"
            );
            return Ok((e0, e1));
        }
    }
    Err(ClassError::WitnessNotRamseyEnough)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::build::*;

    #[test]
    fn graph_members_up_to_three() {
        // Oracle: brute force over all edge sets, dedupe by isomorphism
        // (canonical forms are cross-checked against permutations in canon.rs).
        let graphs = preset("graphs").unwrap();
        let ms = graphs.member_reps(3).unwrap();
        let per_size: Vec<usize> = (0..=3).map(|k| ms.iter().filter(|s| s.size() == k).count()).collect();
        assert_eq!(per_size, vec![1, 1, 2, 4]);
        assert_eq!(ms.len(), 8);
    }

    #[test]
    fn linear_order_members_one_per_size() {
        let orders = preset("linear-orders").unwrap();
        let ms = orders.member_reps(4).unwrap();
        assert_eq!(ms.len(), 5); // includes the empty structure
        for (k, m) in ms.iter().enumerate() {
            assert_eq!(m.size(), k);
        }
    }

    #[test]
    fn triangle_free_members() {
        let sig = Signature::of(&[("E", 2)]);
        let tf = ClassSpec::new(
            "triangle-free",
            sig,
            vec![complete_graph(3)],
            vec![
                Axiom { kind: AxiomKind::Irreflexive, rel: "E".into() },
                Axiom { kind: AxiomKind::Symmetric, rel: "E".into() },
            ],
        )
        .unwrap();
        let ms = tf.member_reps(3).unwrap();
        assert_eq!(ms.iter().filter(|s| s.size() == 3).count(), 3); // K3 excluded
    }

    #[test]
    fn members_are_members_and_hereditary() {
        // Spot-check: every returned structure satisfies the predicate and all
        // its one-point deletions are again members.
        for name in ["graphs", "equivalence", "tournaments", "digraphs"] {
            let spec = preset(name).unwrap();
            for m in spec.member_reps(4).unwrap() {
                assert!(spec.is_member(&m), "{name}: {m:?}");
                for drop in 0..m.size() as u8 {
                    let keep: Vec<u8> = (0..m.size() as u8).filter(|&v| v != drop).collect();
                    let (sub, _) = m.induced(&keep).unwrap();
                    assert!(spec.is_member(&sub), "{name} not hereditary at {m:?}");
                }
            }
        }
    }

    #[test]
    fn digraph_and_tournament_counts() {
        // Oracle values: tournaments on 3 vertices split into the transitive
        // one and the 3-cycle; digraphs on 2: none, one arc (both directions
        // isomorphic).
        let t = preset("tournaments").unwrap();
        let ms = t.member_reps(3).unwrap();
        assert_eq!(ms.iter().filter(|s| s.size() == 3).count(), 2);
        let d = preset("digraphs").unwrap();
        let ms = d.member_reps(2).unwrap();
        assert_eq!(ms.iter().filter(|s| s.size() == 2).count(), 2);
        assert!(d.is_member(&directed_cycle(3)));
    }

    #[test]
    fn reduct_presets_have_one_class_per_size() {
        for name in ["betweenness", "cyclic", "separation"] {
            let spec = preset(name).unwrap();
            let ms = spec.member_reps(5).unwrap();
            assert_eq!(ms.len(), 6, "{name}");
            for m in &ms {
                assert!(spec.is_member(m));
            }
        }
    }

    #[test]
    fn betweenness_of_chain_small_counts() {
        // |B| on the 3-chain: triples (0,1,2) and (2,1,0).
        let b3 = ReductKind::Betweenness.of_chain(3);
        assert_eq!(b3.tuples(0).len(), 2);
        let c3 = ReductKind::Cyclic.of_chain(3);
        assert_eq!(c3.tuples(0).len(), 3);
        let s4 = ReductKind::Separation.of_chain(4);
        // Only {0,2} and {1,3} separate each other on the 4-point circle:
        // 2 roles for the separating pair, 2 orders each side.
        assert_eq!(s4.tuples(0).len(), 8);
    }

    #[test]
    fn jep_ap_pass_for_small_presets() {
        for name in ["linear-orders", "graphs", "complete-graphs"] {
            let spec = preset(name).unwrap();
            let report = check_jep_ap(&spec, 3, 6).unwrap();
            assert!(report.hereditary);
            assert!(report.jep.passed(), "{name} JEP");
            assert!(report.ap.passed(), "{name} AP");
        }
    }

    #[test]
    fn free_amalgam_is_a_member_for_graphs() {
        // Free amalgamation oracle: glue B0 and B1 over A with no extra
        // relations; the result must be a member, so AP holds with it.
        let graphs = preset("graphs").unwrap();
        let small = graphs.member_reps(3).unwrap();
        for a in &small {
            for b0 in small.iter().filter(|b| b.size() >= a.size()) {
                for b1 in small.iter().filter(|b| b.size() >= a.size()) {
                    for a0 in embeddings(a, b0).unwrap() {
                        for a1 in embeddings(a, b1).unwrap() {
                            let free = free_amalgam(a, b0, b1, &a0, &a1);
                            assert!(graphs.is_member(&free));
                        }
                    }
                }
            }
        }
    }

    fn free_amalgam(
        a: &Structure,
        b0: &Structure,
        b1: &Structure,
        a0: &Embedding,
        a1: &Embedding,
    ) -> Structure {
        // Vertices: B0 as-is, then B1's vertices outside im(a1).
        let n0 = b0.size();
        let mut b1_map = vec![0u8; b1.size()];
        for x in 0..a.size() as u8 {
            b1_map[a1.apply(x) as usize] = a0.apply(x);
        }
        let mut next = n0 as u8;
        let in_image: Vec<bool> = {
            let mut v = vec![false; b1.size()];
            for x in 0..a.size() as u8 {
                v[a1.apply(x) as usize] = true;
            }
            v
        };
        for (v, &hit) in in_image.iter().enumerate() {
            if !hit {
                b1_map[v] = next;
                next += 1;
            }
        }
        let total = next as usize;
        let relations: Vec<Vec<Vec<u8>>> = (0..a.signature().len())
            .map(|rel| {
                let mut ts: Vec<Vec<u8>> = b0.tuples(rel).to_vec();
                ts.extend(
                    b1.tuples(rel)
                        .iter()
                        .map(|t| t.iter().map(|&e| b1_map[e as usize]).collect::<Vec<u8>>()),
                );
                ts
            })
            .collect();
        Structure::new(a.signature().clone(), total, relations).unwrap()
    }

    #[test]
    fn amalgamate_chains() {
        // A = 1-chain, B0 = B1 = 2-chain, a0 hits the minimum, a1 the maximum.
        let a = chain(1);
        let b = chain(2);
        let c = chain(4);
        let a0 = Embedding::new(a.clone(), b.clone(), vec![0]).unwrap();
        let a1 = Embedding::new(a.clone(), b.clone(), vec![1]).unwrap();
        let (e0, e1) = amalgamate_via_arrow(&c, &a, &b, &b, &a0, &a1).unwrap();
        assert_eq!(a0.then(&e0).unwrap().map(), a1.then(&e1).unwrap().map());
    }

    #[test]
    fn amalgamate_empty_base_reduces_to_joint_embedding() {
        let a = pure_set(0);
        let b = pure_set(2);
        let c = pure_set(4);
        let a0 = Embedding::new(a.clone(), b.clone(), vec![]).unwrap();
        let (e0, e1) = amalgamate_via_arrow(&c, &a, &b, &b, &a0, &a0).unwrap();
        assert_eq!(e0.map().len(), 2);
        assert_eq!(e1.map().len(), 2);
    }

    #[test]
    fn amalgamate_graphs_identifies_shared_vertex() {
        let a = edgeless_graph(1);
        let k2 = complete_graph(2);
        let k3 = complete_graph(3);
        let a0 = Embedding::new(a.clone(), k2.clone(), vec![0]).unwrap();
        let a1 = a0.clone();
        let (e0, e1) = amalgamate_via_arrow(&k3, &a, &k2, &k2, &a0, &a1).unwrap();
        assert_eq!(e0.apply(0), e1.apply(0));
    }

    #[test]
    fn amalgamate_rejects_too_small_witness() {
        // A 1-chain cannot be below one point and above another inside a 1-chain.
        let a = chain(1);
        let b = chain(2);
        let c = chain(1);
        let a0 = Embedding::new(a.clone(), b.clone(), vec![0]).unwrap();
        let a1 = Embedding::new(a.clone(), b.clone(), vec![1]).unwrap();
        assert!(matches!(
            amalgamate_via_arrow(&c, &a, &b, &b, &a0, &a1),
            Err(ClassError::WitnessNotRamseyEnough)
        ));
    }

    #[test]
    fn parse_preset_and_literal() {
        let spec = ClassSpec::parse("preset: graphs\n").unwrap();
        assert_eq!(spec.name(), "graphs");
        let text = "\
name: tf
signature: E/2
axioms: irreflexive(E), symmetric(E)
forbidden:
size: 3
E: (0,1) (1,0) (0,2) (2,0) (1,2) (2,1)
--
";
        let tf = ClassSpec::parse(text).unwrap();
        assert_eq!(tf.forbidden().len(), 1);
        assert!(tf.is_member(&path_graph(3)));
        assert!(!tf.is_member(&complete_graph(3)));
    }

    #[test]
    fn size_cap_is_enforced() {
        let spec = preset("pure-sets").unwrap();
        assert!(matches!(spec.member_reps(65), Err(ClassError::SizeCap(65))));
    }
}
