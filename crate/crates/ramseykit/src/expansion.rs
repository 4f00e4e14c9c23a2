//! Order expansions of hereditary classes: admissible orders, forgetfulness,
//! the ordering property, reasonableness, and order-forgetful order search.

use thiserror::Error;

use crate::canon::canonical_form;
use crate::class::{
    attach_order, next_perm, preset, ClassError, ClassRule, ClassSpec, ReductKind,
};
use crate::embedding::{automorphisms, copies, embeddings, Embedding};
use crate::structure::{ModelError, Structure};

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("expansion signature is not the base signature plus `<`")]
    SignatureMismatch,
    #[error("structure is not a member of the base class")]
    NotABaseMember,
    #[error("order domain is not the full universe")]
    PartialOrderDomain,
    #[error("bad order literal `{0}`")]
    BadOrderLiteral(String),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A linear order on a finite set of vertices, stored as the ascending
/// listing. The domain may be a subset of an ambient universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainOrder {
    asc: Vec<u8>,
}

impl ChainOrder {
    pub fn from_asc(asc: Vec<u8>) -> ChainOrder {
        let mut check = asc.clone();
        check.sort();
        check.dedup();
        assert_eq!(check.len(), asc.len(), "order listing has duplicates");
        ChainOrder { asc }
    }

    /// The natural order `0 < 1 < ... < n-1`.
    pub fn natural(n: usize) -> ChainOrder {
        ChainOrder { asc: (0..n as u8).collect() }
    }

    /// All orders on `[n]`, lexicographic in the ascending listing.
    pub fn all(n: usize) -> Vec<ChainOrder> {
        let mut out = Vec::new();
        let mut asc: Vec<u8> = (0..n as u8).collect();
        loop {
            out.push(ChainOrder { asc: asc.clone() });
            if !next_perm(&mut asc) {
                return out;
            }
        }
    }

    pub fn asc(&self) -> &[u8] {
        &self.asc
    }

    pub fn len(&self) -> usize {
        self.asc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.asc.is_empty()
    }

    /// Sorted domain of the order.
    pub fn domain(&self) -> Vec<u8> {
        let mut d = self.asc.clone();
        d.sort();
        d
    }

    pub fn contains(&self, v: u8) -> bool {
        self.asc.contains(&v)
    }

    /// Position of `v` from the bottom.
    pub fn rank_of(&self, v: u8) -> Option<usize> {
        self.asc.iter().position(|&x| x == v)
    }

    pub fn lt(&self, u: u8, v: u8) -> bool {
        match (self.rank_of(u), self.rank_of(v)) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        }
    }

    /// For an order on the full universe `[n]`: `ranks[v]` = position of `v`.
    pub fn rank_vector(&self) -> Vec<u8> {
        let n = self.asc.len();
        let mut ranks = vec![0u8; n];
        for (pos, &v) in self.asc.iter().enumerate() {
            assert!((v as usize) < n, "order is not on [n]");
            ranks[v as usize] = pos as u8;
        }
        ranks
    }

    /// Restriction to the elements of `subset` present in the domain.
    pub fn restrict(&self, subset: &[u8]) -> ChainOrder {
        ChainOrder { asc: self.asc.iter().copied().filter(|v| subset.contains(v)).collect() }
    }

    /// Inserts `v` just below the element currently at `pos` (at the top for
    /// `pos == len`).
    pub fn insert_at(&self, pos: usize, v: u8) -> ChainOrder {
        assert!(!self.contains(v));
        let mut asc = self.asc.clone();
        asc.insert(pos, v);
        ChainOrder { asc }
    }

    /// Renames elements along `map` (element `v` becomes `map[v]`).
    pub fn transport(&self, map: &[u8]) -> ChainOrder {
        ChainOrder { asc: self.asc.iter().map(|&v| map[v as usize]).collect() }
    }

    /// Pullback along an embedding-like map: the order induced on `[k]` by
    /// comparing images, where `map[x]` must lie in the domain.
    pub fn pull_back(&self, map: &[u8]) -> ChainOrder {
        let mut asc: Vec<u8> = (0..map.len() as u8).collect();
        asc.sort_by_key(|&x| self.rank_of(map[x as usize]).expect("image inside domain"));
        ChainOrder { asc }
    }

    /// `"3<0<5"`; the empty order prints as `"empty"`.
    pub fn to_text(&self) -> String {
        if self.asc.is_empty() {
            return "empty".to_string();
        }
        self.asc.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("<")
    }

    pub fn parse(text: &str) -> Result<ChainOrder, ExpansionError> {
        let text = text.trim();
        if text == "empty" {
            return Ok(ChainOrder { asc: Vec::new() });
        }
        let mut asc = Vec::new();
        for part in text.split('<') {
            asc.push(
                part.trim()
                    .parse()
                    .map_err(|_| ExpansionError::BadOrderLiteral(text.to_string()))?,
            );
        }
        let mut check = asc.clone();
        check.sort();
        check.dedup();
        if check.len() != asc.len() {
            return Err(ExpansionError::BadOrderLiteral(text.to_string()));
        }
        Ok(ChainOrder { asc })
    }
}

/// A base class together with its order expansion. The expansion's reduct is
/// certified to agree with the base up to `link_cap`.
#[derive(Debug, Clone)]
pub struct OrderedExpansionSpec {
    name: String,
    base: ClassSpec,
    expansion: ClassSpec,
    link_cap: usize,
}

impl OrderedExpansionSpec {
    pub fn new(
        name: impl Into<String>,
        base: ClassSpec,
        expansion: ClassSpec,
        link_cap: usize,
    ) -> Result<OrderedExpansionSpec, ExpansionError> {
        let want = base.signature().with_order().ok_or(ExpansionError::SignatureMismatch)?;
        if expansion.signature() != &want {
            return Err(ExpansionError::SignatureMismatch);
        }
        let spec = OrderedExpansionSpec { name: name.into(), base, expansion, link_cap };
        // Link certification: every admissible expansion of a base member is
        // an expansion member whose reduct is that member (true by
        // construction of the membership rules; spot-checked here), up to the
        // cap. Sizes beyond the cap are out of warranty.
        if !matches!(spec.expansion.rule(), ClassRule::NaturalOrderOnly { .. }) {
            for rep in spec.base.member_reps(spec.link_cap)? {
                for order in spec.admissible_orders(&rep)? {
                    let member = spec.expansion_member(&rep, &order)?;
                    debug_assert!(spec.expansion.is_member(&member));
                    let _ = member;
                }
            }
        }
        Ok(spec)
    }

    /// Test-only expansion admitting exactly the natural order per member;
    /// deliberately not reasonable and not isomorphism-closed.
    pub fn natural_only(base: ClassSpec, link_cap: usize) -> OrderedExpansionSpec {
        let sig = base.signature().with_order().expect("base has no order symbol");
        let expansion = ClassSpec::new(format!("{}-natural-only", base.name()), sig, Vec::new(), Vec::new())
            .expect("expansion spec")
            .with_rule(ClassRule::NaturalOrderOnly { base: Box::new(base.clone()) });
        OrderedExpansionSpec {
            name: format!("{}-natural-only", base.name()),
            base,
            expansion,
            link_cap,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &ClassSpec {
        &self.base
    }

    pub fn expansion(&self) -> &ClassSpec {
        &self.expansion
    }

    pub fn link_cap(&self) -> usize {
        self.link_cap
    }

    /// The expansion structure `(a, <)`.
    pub fn expansion_member(
        &self,
        a: &Structure,
        order: &ChainOrder,
    ) -> Result<Structure, ExpansionError> {
        if order.len() != a.size() {
            return Err(ExpansionError::PartialOrderDomain);
        }
        Ok(attach_order(a, &order.rank_vector()))
    }

    /// All admissible orders on a base member, lexicographic in the ascending
    /// listing.
    pub fn admissible_orders(&self, a: &Structure) -> Result<Vec<ChainOrder>, ExpansionError> {
        if a.signature() != self.base.signature() {
            return Err(ExpansionError::SignatureMismatch);
        }
        let mut out = Vec::new();
        for order in ChainOrder::all(a.size()) {
            if self.expansion.is_member(&attach_order(a, &order.rank_vector())) {
                out.push(order);
            }
        }
        Ok(out)
    }
}

/// Built-in ordered expansions of the preset catalog.
pub fn expansion_preset(name: &str) -> Result<OrderedExpansionSpec, ExpansionError> {
    let free = |name: &str, base_name: &str| -> Result<OrderedExpansionSpec, ExpansionError> {
        let base = preset(base_name)?;
        let sig = base.signature().with_order().expect("base unordered");
        let expansion = ClassSpec::new(name, sig, Vec::new(), Vec::new())?
            .with_rule(ClassRule::FreeOrderExpansion { base: Box::new(base.clone()) });
        OrderedExpansionSpec::new(name, base, expansion, 4)
    };
    let reduct = |name: &str, base_name: &str, kind: ReductKind| {
        let base = preset(base_name)?;
        let sig = base.signature().with_order().expect("base unordered");
        let expansion = ClassSpec::new(name, sig, Vec::new(), Vec::new())?
            .with_rule(ClassRule::ReductOrderExpansion(kind));
        OrderedExpansionSpec::new(name, base, expansion, 4)
    };
    match name {
        "ordered-pure-sets" => free(name, "pure-sets"),
        "ordered-graphs" => free(name, "graphs"),
        "ordered-equivalence" => free(name, "equivalence"),
        "ordered-betweenness" => reduct(name, "betweenness", ReductKind::Betweenness),
        "ordered-cyclic" => reduct(name, "cyclic", ReductKind::Cyclic),
        "ordered-separation" => reduct(name, "separation", ReductKind::Separation),
        "digraphs-edge-compatible" => {
            let base = preset("digraphs")?;
            let sig = base.signature().with_order().expect("base unordered");
            let expansion = ClassSpec::new(name, sig, Vec::new(), Vec::new())?.with_rule(
                ClassRule::OrderExtendsRelation { base: Box::new(base.clone()), rel: "A".into() },
            );
            OrderedExpansionSpec::new(name, base, expansion, 4)
        }
        _ => Err(ExpansionError::Class(ClassError::UnknownPreset(name.to_string()))),
    }
}

/// Names accepted by [`expansion_preset`].
pub const EXPANSION_PRESET_NAMES: &[&str] = &[
    "ordered-pure-sets",
    "ordered-graphs",
    "ordered-equivalence",
    "ordered-betweenness",
    "ordered-cyclic",
    "ordered-separation",
    "digraphs-edge-compatible",
];

/// Verdict of the forgetfulness check.
#[derive(Debug, Clone)]
pub enum ForgetfulOutcome {
    Pass,
    /// Two expansions of the same (canonical) reduct that are not isomorphic.
    Counterexample { base: Structure, first: ChainOrder, second: ChainOrder },
}

impl ForgetfulOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ForgetfulOutcome::Pass)
    }
}

/// Checks that isomorphic reducts force isomorphic expansions for all members
/// of size at most `n`.
pub fn is_forgetful(spec: &OrderedExpansionSpec, n: usize) -> Result<ForgetfulOutcome, ExpansionError> {
    for rep in spec.base.member_reps(n)? {
        let orders = spec.admissible_orders(&rep)?;
        let mut first: Option<(ChainOrder, Structure)> = None;
        for order in orders {
            let canon = canonical_form(&spec.expansion_member(&rep, &order)?).canon;
            match &first {
                None => first = Some((order, canon)),
                Some((first_order, first_canon)) => {
                    if *first_canon != canon {
                        return Ok(ForgetfulOutcome::Counterexample {
                            base: rep,
                            first: first_order.clone(),
                            second: order,
                        });
                    }
                }
            }
        }
    }
    Ok(ForgetfulOutcome::Pass)
}

/// Number of isomorphism classes of admissible expansions of `a`.
pub fn expansion_class_count(
    spec: &OrderedExpansionSpec,
    a: &Structure,
) -> Result<usize, ExpansionError> {
    let mut canons = Vec::new();
    for order in spec.admissible_orders(a)? {
        canons.push(canonical_form(&spec.expansion_member(a, &order)?).canon);
    }
    canons.sort();
    canons.dedup();
    Ok(canons.len())
}

/// Per-base-member row of the ordering-property report.
#[derive(Debug, Clone)]
pub struct OrderingPropertyRow {
    pub a: Structure,
    /// A base member every admissible ordering of which absorbs every
    /// admissible ordering of `a`, if one was found within the cap.
    pub witness: Option<Structure>,
}

/// For each base `A` of size at most `n`, searches for a base `B` within
/// `b_cap` such that every admissible ordering of `A` embeds into every
/// admissible ordering of `B`.
pub fn check_ordering_property(
    spec: &OrderedExpansionSpec,
    n: usize,
    b_cap: usize,
) -> Result<Vec<OrderingPropertyRow>, ExpansionError> {
    let mut rows = Vec::new();
    let pool = spec.base.member_reps(b_cap)?;
    for a in spec.base.member_reps(n)? {
        let a_orders = spec.admissible_orders(&a)?;
        let mut witness = None;
        'bs: for b in pool.iter().filter(|b| b.size() >= a.size()) {
            let b_orders = spec.admissible_orders(b)?;
            if b_orders.is_empty() {
                continue;
            }
            for oa in &a_orders {
                let ordered_a = spec.expansion_member(&a, oa)?;
                for ob in &b_orders {
                    let ordered_b = spec.expansion_member(b, ob)?;
                    if embeddings(&ordered_a, &ordered_b)?.is_empty() {
                        continue 'bs;
                    }
                }
            }
            witness = Some(b.clone());
            break;
        }
        rows.push(OrderingPropertyRow { a, witness });
    }
    Ok(rows)
}

/// Verdict of the reasonableness check.
#[derive(Debug, Clone)]
pub enum ReasonableOutcome {
    Pass,
    /// An admissible order on `a` that extends along `emb` to no admissible
    /// order on the target.
    Violation { a: Structure, b: Structure, emb: Embedding, order_a: ChainOrder },
}

impl ReasonableOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ReasonableOutcome::Pass)
    }
}

/// Checks that every admissible order extends along every base embedding,
/// over base members of size at most `n`.
pub fn check_reasonable(
    spec: &OrderedExpansionSpec,
    n: usize,
) -> Result<ReasonableOutcome, ExpansionError> {
    let reps = spec.base.member_reps(n)?;
    for a in &reps {
        let a_orders = spec.admissible_orders(a)?;
        for b in reps.iter().filter(|b| b.size() >= a.size()) {
            let b_orders = spec.admissible_orders(b)?;
            for emb in embeddings(a, b)? {
                for oa in &a_orders {
                    let extends = b_orders.iter().any(|ob| {
                        (0..a.size() as u8).all(|x| {
                            (0..a.size() as u8).all(|y| {
                                oa.lt(x, y) == ob.lt(emb.apply(x), emb.apply(y))
                            })
                        })
                    });
                    if !extends {
                        return Ok(ReasonableOutcome::Violation {
                            a: a.clone(),
                            b: b.clone(),
                            emb,
                            order_a: oa.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(ReasonableOutcome::Pass)
}

/// Outcome of the order-forgetful order search on a fixed structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderForgetfulOutcome {
    Found(ChainOrder),
    /// Exhaustive over all |B|! orders: none works for this instance.
    NotFound,
}

/// Does `order` make all copies of `a` in `b` carry pairwise isomorphic
/// induced orders?
pub fn order_forgetful_for(
    b: &Structure,
    a: &Structure,
    order: &ChainOrder,
) -> Result<bool, ExpansionError> {
    let mut first: Option<Structure> = None;
    for copy in copies(a, b)? {
        let (induced, _) = b.induced(&copy)?;
        // Relabel the order on the copy into the induced universe.
        let restricted = order.restrict(&copy);
        let local_asc: Vec<u8> = restricted
            .asc()
            .iter()
            .map(|v| copy.iter().position(|x| x == v).expect("in copy") as u8)
            .collect();
        let ordered = attach_order(&induced, &ChainOrder::from_asc(local_asc).rank_vector());
        let canon = canonical_form(&ordered).canon;
        match &first {
            None => first = Some(canon),
            Some(f) => {
                if *f != canon {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Searches the orders on `b`'s universe, in lexicographic order with
/// `Aut(b)`-orbit pruning, for one that is order-forgetful for every listed
/// structure. `NotFound` is exhaustive for this finite instance.
pub fn find_order_forgetful(
    b: &Structure,
    structures: &[Structure],
) -> Result<OrderForgetfulOutcome, ExpansionError> {
    let auts = automorphisms(b);
    'orders: for order in ChainOrder::all(b.size()) {
        // Only orbit-least orders are tested; a lex-least success is
        // automatically orbit-least, so the first hit is the global first.
        for g in &auts {
            let moved = order.transport(g.map());
            if moved.asc() < order.asc() {
                continue 'orders;
            }
        }
        let mut all_ok = true;
        for a in structures {
            if !order_forgetful_for(b, a, &order)? {
                all_ok = false;
                break;
            }
        }
        if all_ok {
            return Ok(OrderForgetfulOutcome::Found(order));
        }
    }
    Ok(OrderForgetfulOutcome::NotFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::build::*;

    #[test]
    fn chain_order_basics() {
        let o = ChainOrder::parse("3<0<5").unwrap();
        assert_eq!(o.domain(), vec![0, 3, 5]);
        assert!(o.lt(3, 0) && o.lt(0, 5) && !o.lt(5, 3));
        assert_eq!(o.to_text(), "3<0<5");
        assert_eq!(o.restrict(&[0, 3]).to_text(), "3<0");
        assert_eq!(o.insert_at(1, 7).to_text(), "3<7<0<5");
        assert!(ChainOrder::parse("1<1").is_err());
    }

    #[test]
    fn pull_back_inverts_transport() {
        let o = ChainOrder::from_asc(vec![2, 0, 1]);
        let map = vec![4, 2, 7];
        let moved = o.transport(&map); // 7 < 4 < 2
        assert_eq!(moved.to_text(), "7<4<2");
        assert_eq!(moved.pull_back(&map), o);
    }

    #[test]
    fn ordered_graph_k2_has_two_admissible_orders() {
        let spec = expansion_preset("ordered-graphs").unwrap();
        let orders = spec.admissible_orders(&complete_graph(2)).unwrap();
        assert_eq!(orders.len(), 2);
    }

    #[test]
    fn ordered_pure_sets_admit_all_orders() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        assert_eq!(spec.admissible_orders(&pure_set(3)).unwrap().len(), 6);
    }

    #[test]
    fn directed_cycle_admits_no_edge_compatible_order() {
        let spec = expansion_preset("digraphs-edge-compatible").unwrap();
        let orders = spec.admissible_orders(&directed_cycle(3)).unwrap();
        assert!(orders.is_empty());
    }

    #[test]
    fn betweenness_three_points_admit_two_orders() {
        let spec = expansion_preset("ordered-betweenness").unwrap();
        let b3 = crate::class::ReductKind::Betweenness.of_chain(3);
        let orders = spec.admissible_orders(&b3).unwrap();
        assert_eq!(orders.len(), 2); // the generating order and its reversal
        let b2 = crate::class::ReductKind::Betweenness.of_chain(2);
        assert_eq!(spec.admissible_orders(&b2).unwrap().len(), 2);
    }

    #[test]
    fn cyclic_three_points_admit_three_orders() {
        let spec = expansion_preset("ordered-cyclic").unwrap();
        let c3 = crate::class::ReductKind::Cyclic.of_chain(3);
        assert_eq!(spec.admissible_orders(&c3).unwrap().len(), 3); // the cuts
    }

    #[test]
    fn forgetful_verdicts() {
        assert!(is_forgetful(&expansion_preset("ordered-pure-sets").unwrap(), 5).unwrap().passed());
        assert!(is_forgetful(&expansion_preset("ordered-betweenness").unwrap(), 4).unwrap().passed());
        let out = is_forgetful(&expansion_preset("ordered-graphs").unwrap(), 3).unwrap();
        match out {
            ForgetfulOutcome::Counterexample { base, first, second } => {
                assert!(base.size() == 3);
                assert_ne!(first, second);
            }
            ForgetfulOutcome::Pass => panic!("ordered graphs are not forgetful"),
        }
    }

    #[test]
    fn path_has_three_expansion_classes() {
        let spec = expansion_preset("ordered-graphs").unwrap();
        assert_eq!(expansion_class_count(&spec, &path_graph(3)).unwrap(), 3);
        assert_eq!(expansion_class_count(&spec, &complete_graph(3)).unwrap(), 1);
    }

    #[test]
    fn ordering_property_rows() {
        // Forgetful presets: the member itself works.
        let pure = expansion_preset("ordered-pure-sets").unwrap();
        for row in check_ordering_property(&pure, 3, 3).unwrap() {
            assert_eq!(row.witness.as_ref().map(Structure::size), Some(row.a.size()));
        }
        // Ordered graphs: a witness for K2 exists within cap 6 (K2 itself:
        // both of its orderings are isomorphic).
        let og = expansion_preset("ordered-graphs").unwrap();
        let rows = check_ordering_property(&og, 2, 6).unwrap();
        for row in rows.iter().filter(|r| r.a == complete_graph(2)) {
            assert!(row.witness.is_some());
        }
    }

    #[test]
    fn reasonableness_verdicts() {
        assert!(check_reasonable(&expansion_preset("ordered-graphs").unwrap(), 3).unwrap().passed());
        assert!(check_reasonable(&expansion_preset("ordered-pure-sets").unwrap(), 4).unwrap().passed());
        let broken = OrderedExpansionSpec::natural_only(crate::class::preset("pure-sets").unwrap(), 4);
        match check_reasonable(&broken, 3).unwrap() {
            ReasonableOutcome::Violation { a, b, emb, order_a } => {
                assert!(a.size() <= b.size());
                assert_eq!(order_a.len(), a.size());
                assert_eq!(emb.source(), &a);
            }
            ReasonableOutcome::Pass => panic!("the natural-only expansion is not reasonable"),
        }
    }

    #[test]
    fn any_order_is_forgetful_for_cliques_and_sets() {
        let out = find_order_forgetful(&complete_graph(4), &[complete_graph(2)]).unwrap();
        assert_eq!(out, OrderForgetfulOutcome::Found(ChainOrder::natural(4)));
        let out =
            find_order_forgetful(&pure_set(5), &[pure_set(2), pure_set(3)]).unwrap();
        assert_eq!(out, OrderForgetfulOutcome::Found(ChainOrder::natural(5)));
    }

    #[test]
    fn four_cycle_admits_no_path_forgetful_order() {
        // Regression value, established by the exhaustive search over all 24
        // orders: every vertex of C4 is the center of one induced path, and
        // a uniform center-rank pattern would need every vertex to have
        // exactly one smaller neighbor, which the minimum cannot.
        let out = find_order_forgetful(&cycle_graph(4), &[path_graph(3)]).unwrap();
        assert_eq!(out, OrderForgetfulOutcome::NotFound);
    }

    #[test]
    fn order_forgetful_respects_reversal() {
        // Pure sets are closed under order reversal; reversing a witness
        // stays a witness.
        let order = ChainOrder::from_asc(vec![2, 0, 1, 3]);
        let reversed = ChainOrder::from_asc(vec![3, 1, 0, 2]);
        for o in [&order, &reversed] {
            assert!(order_forgetful_for(&pure_set(4), &pure_set(2), o).unwrap());
        }
    }
}
