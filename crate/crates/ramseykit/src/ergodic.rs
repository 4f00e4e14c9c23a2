//! Consistent random orderings, cylinder measures, and the concentration
//! cover experiment — all in exact rational arithmetic. No floating point
//! enters this module.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::canon::canonical_form;
use crate::class::ClassError;
use crate::embedding::{embeddings, embeddings_extending, Embedding};
use crate::expansion::{ChainOrder, ExpansionError, OrderedExpansionSpec};
use crate::lp::{ExactLp, LpError, Rat};
use crate::structure::{ModelError, Structure};

#[derive(Debug, Error)]
pub enum ErgodicError {
    #[error("member of size {} admits no admissible order", member.size())]
    NoAdmissibleOrders { member: Structure },
    #[error("no distribution stored for a member of size {}", member.size())]
    MissingDistribution { member: Structure },
    #[error("distribution over {got} entries, expected {want}")]
    DistributionLength { got: usize, want: usize },
    #[error("distribution entries must be nonnegative and sum to 1")]
    NotADistribution,
    #[error("pushforward left the admissible order set; the expansion is not hereditary")]
    PushforwardOutsideClass,
    #[error("linear program too large: {vars} variables (cap {cap})")]
    LpTooLarge { vars: usize, cap: usize },
    #[error("bad concentration instance: {0}")]
    BadInstance(String),
    #[error("ambient too small at level {level}: no realizing embedding")]
    AmbientTooSmall { level: usize, partial: Vec<CylinderCover> },
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Per-isomorphism-type probability vectors over admissible orders, indexed
/// consistently with `admissible_orders`' enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomOrdering {
    spec_name: String,
    max_size: usize,
    dists: BTreeMap<Structure, Vec<Rat>>,
}

impl RandomOrdering {
    /// Builds a random ordering by assigning a distribution to every
    /// canonical base member of size at most `n`.
    pub fn build(
        spec: &OrderedExpansionSpec,
        n: usize,
        mut assign: impl FnMut(&Structure, &[ChainOrder]) -> Vec<Rat>,
    ) -> Result<RandomOrdering, ErgodicError> {
        let mut dists = BTreeMap::new();
        for rep in spec.base().member_reps(n)? {
            let orders = spec.admissible_orders(&rep)?;
            if orders.is_empty() {
                return Err(ErgodicError::NoAdmissibleOrders { member: rep });
            }
            let dist = assign(&rep, &orders);
            if dist.len() != orders.len() {
                return Err(ErgodicError::DistributionLength {
                    got: dist.len(),
                    want: orders.len(),
                });
            }
            let sum: Rat = dist.iter().cloned().sum();
            if !sum.is_one() || dist.iter().any(|p| p < &Rat::zero()) {
                return Err(ErgodicError::NotADistribution);
            }
            dists.insert(rep, dist);
        }
        Ok(RandomOrdering { spec_name: spec.name().to_string(), max_size: n, dists })
    }

    pub fn spec_name(&self) -> &str {
        &self.spec_name
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Distribution of a canonical representative.
    pub fn dist(&self, rep: &Structure) -> Option<&[Rat]> {
        self.dists.get(rep).map(Vec::as_slice)
    }

    pub fn members(&self) -> impl Iterator<Item = (&Structure, &[Rat])> {
        self.dists.iter().map(|(s, d)| (s, d.as_slice()))
    }
}

/// The uniform random ordering: every admissible order of a member carries
/// equal mass. Errors when some member has no admissible order, naming it.
pub fn uniform_random_ordering(
    spec: &OrderedExpansionSpec,
    n: usize,
) -> Result<RandomOrdering, ErgodicError> {
    RandomOrdering::build(spec, n, |_, orders| {
        let p = Rat::new(1.into(), (orders.len() as i64).into());
        vec![p; orders.len()]
    })
}

/// Pushforward of the distribution on `b` along an embedding `a -> b`: the
/// distribution of the pulled-back restriction.
fn pushforward(
    spec: &OrderedExpansionSpec,
    ro: &RandomOrdering,
    a: &Structure,
    b: &Structure,
    emb: &Embedding,
) -> Result<Vec<Rat>, ErgodicError> {
    let a_orders = spec.admissible_orders(a)?;
    let b_orders = spec.admissible_orders(b)?;
    let dist_b = ro
        .dist(b)
        .ok_or_else(|| ErgodicError::MissingDistribution { member: b.clone() })?;
    let mut out = vec![Rat::zero(); a_orders.len()];
    for (j, ob) in b_orders.iter().enumerate() {
        let pulled = ob.pull_back(emb.map());
        let i = a_orders
            .iter()
            .position(|oa| oa == &pulled)
            .ok_or(ErgodicError::PushforwardOutsideClass)?;
        out[i] += dist_b[j].clone();
    }
    Ok(out)
}

/// Verdict of the consistency check.
#[derive(Debug, Clone)]
pub enum ConsistencyOutcome {
    Pass,
    /// The pushforward along `emb` disagrees with the marginal on `a`.
    Violation { a: Structure, b: Structure, emb: Embedding },
}

impl ConsistencyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ConsistencyOutcome::Pass)
    }
}

/// Exact consistency check over all pairs of members of size at most `n` and
/// all embeddings between them (automorphisms included).
pub fn is_consistent(
    ro: &RandomOrdering,
    spec: &OrderedExpansionSpec,
    n: usize,
) -> Result<ConsistencyOutcome, ErgodicError> {
    consistency_over(ro, spec, n, |a, b| a.size() <= b.size())
}

/// Consistency on generators only: automorphisms and one-point extensions.
/// Every embedding factors through these, so agreement with the full check
/// is a tested invariant.
pub fn is_consistent_generators(
    ro: &RandomOrdering,
    spec: &OrderedExpansionSpec,
    n: usize,
) -> Result<ConsistencyOutcome, ErgodicError> {
    consistency_over(ro, spec, n, |a, b| {
        b.size() == a.size() + 1 || (a.size() == b.size() && a == b)
    })
}

fn consistency_over(
    ro: &RandomOrdering,
    spec: &OrderedExpansionSpec,
    n: usize,
    pair_filter: impl Fn(&Structure, &Structure) -> bool,
) -> Result<ConsistencyOutcome, ErgodicError> {
    let reps = spec.base().member_reps(n)?;
    for a in &reps {
        let dist_a = ro
            .dist(a)
            .ok_or_else(|| ErgodicError::MissingDistribution { member: a.clone() })?;
        for b in &reps {
            if !pair_filter(a, b) {
                continue;
            }
            for emb in embeddings(a, b)? {
                let pushed = pushforward(spec, ro, a, b, &emb)?;
                if pushed != dist_a {
                    return Ok(ConsistencyOutcome::Violation {
                        a: a.clone(),
                        b: b.clone(),
                        emb,
                    });
                }
            }
        }
    }
    Ok(ConsistencyOutcome::Pass)
}

/// Feasibility and uniqueness of consistent random orderings at level `n`,
/// decided by exact rational linear programming.
#[derive(Debug, Clone)]
pub struct PolytopeReport {
    pub feasible: bool,
    /// `Some(true)` when every coordinate is pinned to a single value.
    pub unique: Option<bool>,
    pub solution: Option<RandomOrdering>,
    pub variables: usize,
    pub constraints: usize,
}

/// Assembles the simplex and pushforward-equality constraints over all
/// members of size `1..=n` and decides feasibility; uniqueness is probed by
/// minimizing and maximizing every coordinate.
pub fn consistency_polytope(
    spec: &OrderedExpansionSpec,
    n: usize,
    var_cap: usize,
) -> Result<PolytopeReport, ErgodicError> {
    let reps: Vec<Structure> =
        spec.base().member_reps(n)?.into_iter().filter(|r| r.size() >= 1).collect();
    let mut orders_of: Vec<Vec<ChainOrder>> = Vec::new();
    let mut offset: Vec<usize> = Vec::new();
    let mut total = 0usize;
    for rep in &reps {
        let orders = spec.admissible_orders(rep)?;
        if orders.is_empty() {
            return Ok(PolytopeReport {
                feasible: false,
                unique: None,
                solution: None,
                variables: 0,
                constraints: 0,
            });
        }
        offset.push(total);
        total += orders.len();
        orders_of.push(orders);
    }
    if total > var_cap {
        return Err(ErgodicError::LpTooLarge { vars: total, cap: var_cap });
    }

    let mut lp = ExactLp::new(total);
    for (ai, _) in reps.iter().enumerate() {
        let mut row = vec![Rat::zero(); total];
        for x in 0..orders_of[ai].len() {
            row[offset[ai] + x] = Rat::one();
        }
        lp.add_eq(row, Rat::one())?;
    }
    for (ai, a) in reps.iter().enumerate() {
        for (bi, b) in reps.iter().enumerate() {
            if a.size() > b.size() {
                continue;
            }
            for emb in embeddings(a, b)? {
                for (i, oa) in orders_of[ai].iter().enumerate() {
                    let mut row = vec![Rat::zero(); total];
                    for (j, ob) in orders_of[bi].iter().enumerate() {
                        if &ob.pull_back(emb.map()) == oa {
                            row[offset[bi] + j] += Rat::one();
                        }
                    }
                    row[offset[ai] + i] -= Rat::one();
                    lp.add_eq(row, Rat::zero())?;
                }
            }
        }
    }

    let constraints = lp.nrows();
    let Some(point) = lp.feasible_point() else {
        return Ok(PolytopeReport {
            feasible: false,
            unique: None,
            solution: None,
            variables: total,
            constraints,
        });
    };
    let mut unique = true;
    let mut pinned = point.clone();
    for j in 0..total {
        let (lo, hi) = lp.coordinate_range(j)?.expect("feasible");
        if lo != hi {
            unique = false;
        } else {
            pinned[j] = lo;
        }
    }
    let solution_values = if unique { pinned } else { point };
    let mut dists = BTreeMap::new();
    for (ai, rep) in reps.iter().enumerate() {
        let slice = solution_values[offset[ai]..offset[ai] + orders_of[ai].len()].to_vec();
        dists.insert(rep.clone(), slice);
    }
    let solution =
        RandomOrdering { spec_name: spec.name().to_string(), max_size: n, dists };
    Ok(PolytopeReport {
        feasible: true,
        unique: Some(unique),
        solution: Some(solution),
        variables: total,
        constraints,
    })
}

/// A cylinder measure evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderMeasure {
    pub value: Rat,
    /// Unset when the queried order is not admissible on its domain (then
    /// the measure is zero by convention and this flag is the warning).
    pub admissible: bool,
}

/// Measure of the cylinder of a partial order: the mass the random ordering
/// gives that order on the substructure induced by its domain, transported
/// along the canonical relabeling.
pub fn cylinder_measure(
    sub: &ChainOrder,
    ambient: &Structure,
    spec: &OrderedExpansionSpec,
    ro: &RandomOrdering,
) -> Result<CylinderMeasure, ErgodicError> {
    let dom = sub.domain();
    let (induced, _) = ambient.induced(&dom)?;
    let local_asc: Vec<u8> = sub
        .asc()
        .iter()
        .map(|v| dom.iter().position(|x| x == v).expect("element of domain") as u8)
        .collect();
    let local = ChainOrder::from_asc(local_asc);
    let orders = spec.admissible_orders(&induced)?;
    if !orders.contains(&local) {
        return Ok(CylinderMeasure { value: Rat::zero(), admissible: false });
    }
    let cf = canonical_form(&induced);
    let transported = local.transport(&cf.relabeling);
    let rep_orders = spec.admissible_orders(&cf.canon)?;
    let idx = rep_orders
        .iter()
        .position(|o| o == &transported)
        .ok_or(ErgodicError::PushforwardOutsideClass)?;
    let dist = ro
        .dist(&cf.canon)
        .ok_or(ErgodicError::MissingDistribution { member: cf.canon.clone() })?;
    Ok(CylinderMeasure { value: dist[idx].clone(), admissible: true })
}

/// One level of the concentration cover: pairwise-disjoint cylinders given
/// by admissible partial orders extending the root, with exact measures.
#[derive(Debug, Clone)]
pub struct CylinderCover {
    pub level: usize,
    pub sets: Vec<ChainOrder>,
    pub measures: Vec<Rat>,
    pub total: Rat,
}

/// The obstruction instance: an embedding `a` of the induced substructure on
/// `a_dom` into `(b, b_order)`, with `b` exceeding the image by one point.
/// An ambient order is bad for the triple when no order-compatible embedding
/// of `(b, b_order)` restores `a_dom` pointwise.
#[derive(Debug, Clone)]
pub struct BadTriple {
    pub a_dom: Vec<u8>,
    pub b: Structure,
    pub b_order: ChainOrder,
    pub a_map: Vec<u8>,
}

/// Report of the cover experiment.
#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    pub levels: Vec<CylinderCover>,
    /// `total[n + 1] / total[n]`, zero once the cover empties.
    pub step_ratios: Vec<Rat>,
    /// Full admissible ambient orders that are bad for the triple and extend
    /// the root cylinder.
    pub tracked_bad_count: usize,
    /// Exact measure of the tracked bad set (sum of full-order masses).
    pub tracked_bad_measure: Rat,
    pub root: ChainOrder,
}

/// The proof-shape bound on one shrink step: `(|A| + n) / (|A| + n + 1)`.
pub fn step_bound(a_size: usize, n: usize) -> Rat {
    Rat::new(((a_size + n) as i64).into(), ((a_size + n + 1) as i64).into())
}

fn order_compatible(emb_map: &[u8], b_order: &ChainOrder, ambient_order: &ChainOrder) -> bool {
    let m = emb_map.len() as u8;
    (0..m).all(|u| {
        (0..m).all(|v| {
            b_order.lt(u, v) == ambient_order.lt(emb_map[u as usize], emb_map[v as usize])
        })
    })
}

/// Runs the cover construction against a concrete ambient member: starting
/// from the cylinder of the reference order on `a_dom`, each level refines
/// every retained cylinder by one new point located through a realizing
/// embedding of `(b, b_order)`, discards the extension that embedding
/// realizes (it contains no bad order), and retains the extensions that
/// still meet the bad set. The result is a finite shadow of the
/// measure-concentration argument: covers stay disjoint, keep covering the
/// tracked bad set, and shrink by at least `(|A|+n)/(|A|+n+1)` per step.
pub fn concentration_experiment(
    spec: &OrderedExpansionSpec,
    ambient: &Structure,
    triple: &BadTriple,
    n_max: usize,
    ro: &RandomOrdering,
) -> Result<ConcentrationReport, ErgodicError> {
    let m = ambient.size();
    let mut a_dom = triple.a_dom.clone();
    a_dom.sort();
    a_dom.dedup();
    if a_dom.len() != triple.a_dom.len() {
        return Err(ErgodicError::BadInstance("duplicate vertices in a_dom".into()));
    }
    let (a_sub, _) = ambient.induced(&a_dom)?;
    if triple.b.size() != a_dom.len() + 1 {
        return Err(ErgodicError::BadInstance(
            "b must extend the image of a by exactly one point".into(),
        ));
    }
    let a_emb = Embedding::new(a_sub.clone(), triple.b.clone(), triple.a_map.clone())?;
    if !spec
        .expansion()
        .is_member(&spec.expansion_member(&triple.b, &triple.b_order)?)
    {
        return Err(ErgodicError::BadInstance("(b, b_order) is not an expansion member".into()));
    }

    // Reference admissible order on the ambient: lexicographically least.
    let full_orders: Vec<ChainOrder> = spec.admissible_orders(ambient)?;
    let reference = full_orders
        .first()
        .cloned()
        .ok_or_else(|| ErgodicError::NoAdmissibleOrders { member: ambient.clone() })?;
    // The instance must embed the reference order on a_dom.
    for (x, &vx) in a_dom.iter().enumerate() {
        for (y, &vy) in a_dom.iter().enumerate() {
            let amb = reference.lt(vx, vy);
            let img = triple.b_order.lt(triple.a_map[x], triple.a_map[y]);
            if amb != img {
                return Err(ErgodicError::BadInstance(
                    "a does not embed the reference order into (b, b_order)".into(),
                ));
            }
        }
    }

    // Base-level candidates for realizing embeddings: b into the ambient,
    // restoring a_dom pointwise.
    let pins: Vec<(u8, u8)> =
        (0..a_dom.len() as u8).map(|x| (a_emb.apply(x), a_dom[x as usize])).collect();
    let candidates = embeddings_extending(&triple.b, ambient, &pins)?;

    let is_bad = |t: &ChainOrder| -> bool {
        !candidates.iter().any(|e| order_compatible(e.map(), &triple.b_order, t))
    };
    let root = reference.restrict(&a_dom);
    let bad_orders: Vec<&ChainOrder> = full_orders
        .iter()
        .filter(|t| t.restrict(&a_dom) == root && is_bad(t))
        .collect();
    let tracked_bad_measure: Rat = {
        let mut sum = Rat::zero();
        for t in &bad_orders {
            sum += cylinder_measure(t, ambient, spec, ro)?.value;
        }
        sum
    };

    let meets_bad =
        |o: &ChainOrder| bad_orders.iter().any(|t| &t.restrict(&o.domain()) == o);

    let measure_of = |sets: &[ChainOrder]| -> Result<(Vec<Rat>, Rat), ErgodicError> {
        let mut ms = Vec::with_capacity(sets.len());
        let mut total = Rat::zero();
        for s in sets {
            let m = cylinder_measure(s, ambient, spec, ro)?;
            debug_assert!(m.admissible);
            total += m.value.clone();
            ms.push(m.value);
        }
        Ok((ms, total))
    };

    let (ms, total) = measure_of(std::slice::from_ref(&root))?;
    let mut levels =
        vec![CylinderCover { level: 0, sets: vec![root.clone()], measures: ms, total }];
    let mut step_ratios = Vec::new();

    for level in 0..n_max {
        let current: Vec<ChainOrder> = levels[level]
            .sets
            .iter()
            .filter(|o| meets_bad(o))
            .cloned()
            .collect();
        let mut next_sets: Vec<ChainOrder> = Vec::new();
        for cyl in &current {
            let dom = cyl.domain();
            // Locate p' and the realized extension through an embedding that
            // lives inside some full admissible order extending the cylinder.
            let mut realized: Option<(u8, ChainOrder)> = None;
            'search: for p in (0..m as u8).filter(|p| !dom.contains(p)) {
                for pos in 0..=cyl.len() {
                    let ext = cyl.insert_at(pos, p);
                    let ext_dom = ext.domain();
                    let extends_to_full =
                        full_orders.iter().any(|t| t.restrict(&ext_dom) == ext);
                    if !extends_to_full {
                        continue;
                    }
                    let realizable = candidates.iter().any(|e| {
                        e.map().iter().all(|v| ext_dom.contains(v))
                            && order_compatible(e.map(), &triple.b_order, &ext)
                    });
                    if realizable {
                        realized = Some((p, ext));
                        break 'search;
                    }
                }
            }
            let Some((p, realized_ext)) = realized else {
                return Err(ErgodicError::AmbientTooSmall { level, partial: levels });
            };
            // All admissible one-point extensions by p'; the realized one is
            // discarded (no bad order lies in its cylinder), the others are
            // retained when they still meet the bad set.
            for pos in 0..=cyl.len() {
                let ext = cyl.insert_at(pos, p);
                let ext_dom = ext.domain();
                if !full_orders.iter().any(|t| t.restrict(&ext_dom) == ext) {
                    continue;
                }
                if ext == realized_ext {
                    debug_assert!(!meets_bad(&ext), "realized extension cannot meet the bad set");
                    continue;
                }
                if meets_bad(&ext) {
                    next_sets.push(ext);
                }
            }
        }
        let (measures, total) = measure_of(&next_sets)?;
        let prev_total = levels[level].total.clone();
        let ratio = if prev_total.is_zero() {
            Rat::zero()
        } else {
            total.clone() / prev_total
        };
        step_ratios.push(ratio);
        levels.push(CylinderCover { level: level + 1, sets: next_sets, measures, total });
    }

    Ok(ConcentrationReport {
        levels,
        step_ratios,
        tracked_bad_count: bad_orders.len(),
        tracked_bad_measure,
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expansion_preset;
    use crate::lp::rat;
    use crate::structure::build::*;

    #[test]
    fn uniform_masses() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let ro = uniform_random_ordering(&spec, 3).unwrap();
        let rep = pure_set(2);
        assert_eq!(ro.dist(&rep).unwrap(), &[rat(1, 2), rat(1, 2)]);
        let rep3 = pure_set(3);
        assert!(ro.dist(&rep3).unwrap().iter().all(|p| *p == rat(1, 6)));
    }

    #[test]
    fn uniform_errors_on_empty_admissible_sets() {
        let spec = expansion_preset("digraphs-edge-compatible").unwrap();
        // Digraph members up to size 3 include the directed 3-cycle, which
        // admits no edge-compatible order.
        let err = uniform_random_ordering(&spec, 3).unwrap_err();
        match err {
            ErgodicError::NoAdmissibleOrders { member } => assert_eq!(member.size(), 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn uniform_is_consistent_on_forgetful_presets() {
        for name in ["ordered-pure-sets", "ordered-betweenness"] {
            let spec = expansion_preset(name).unwrap();
            let ro = uniform_random_ordering(&spec, 4).unwrap();
            assert!(is_consistent(&ro, &spec, 4).unwrap().passed(), "{name}");
        }
    }

    #[test]
    fn uniform_is_consistent_on_free_expansions() {
        let spec = expansion_preset("ordered-graphs").unwrap();
        let ro = uniform_random_ordering(&spec, 4).unwrap();
        assert!(is_consistent(&ro, &spec, 4).unwrap().passed());
    }

    #[test]
    fn point_mass_violates_via_transposition() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let ro = RandomOrdering::build(&spec, 2, |rep, orders| {
            let mut dist = vec![Rat::zero(); orders.len()];
            dist[0] = Rat::one();
            let _ = rep;
            dist
        })
        .unwrap();
        match is_consistent(&ro, &spec, 2).unwrap() {
            ConsistencyOutcome::Violation { a, b, emb } => {
                assert_eq!(a.size(), 2);
                assert_eq!(b.size(), 2);
                assert_eq!(emb.map(), &[1, 0]); // the transposition
            }
            ConsistencyOutcome::Pass => panic!("point mass cannot be consistent"),
        }
    }

    #[test]
    fn generator_check_agrees_with_full() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let uniform = uniform_random_ordering(&spec, 4).unwrap();
        assert!(is_consistent_generators(&uniform, &spec, 4).unwrap().passed());
        assert!(is_consistent(&uniform, &spec, 4).unwrap().passed());
        let point = RandomOrdering::build(&spec, 3, |_, orders| {
            let mut dist = vec![Rat::zero(); orders.len()];
            dist[0] = Rat::one();
            dist
        })
        .unwrap();
        assert!(!is_consistent_generators(&point, &spec, 3).unwrap().passed());
        assert!(!is_consistent(&point, &spec, 3).unwrap().passed());
    }

    #[test]
    fn polytope_pure_sets_unique_uniform() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let report = consistency_polytope(&spec, 3, 10_000).unwrap();
        assert!(report.feasible);
        assert_eq!(report.unique, Some(true));
        let solution = report.solution.unwrap();
        let uniform = uniform_random_ordering(&spec, 3).unwrap();
        for (rep, dist) in solution.members() {
            if rep.size() >= 1 {
                assert_eq!(Some(dist), uniform.dist(rep), "size {}", rep.size());
            }
        }
    }

    #[test]
    fn polytope_ordered_graphs_feasible() {
        let spec = expansion_preset("ordered-graphs").unwrap();
        let report = consistency_polytope(&spec, 3, 10_000).unwrap();
        assert!(report.feasible);
        let uniform = uniform_random_ordering(&spec, 3).unwrap();
        assert!(is_consistent(&uniform, &spec, 3).unwrap().passed());
    }

    #[test]
    fn polytope_infeasible_when_no_orders_exist() {
        let spec = expansion_preset("digraphs-edge-compatible").unwrap();
        let report = consistency_polytope(&spec, 3, 10_000).unwrap();
        assert!(!report.feasible);
    }

    #[test]
    fn cylinder_masses() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let ambient = pure_set(6);
        let ro = uniform_random_ordering(&spec, 6).unwrap();
        let sub = ChainOrder::parse("3<0<5").unwrap();
        let m = cylinder_measure(&sub, &ambient, &spec, &ro).unwrap();
        assert!(m.admissible);
        assert_eq!(m.value, rat(1, 6));
        // Normalization over all orders of a fixed 2-subset.
        let mut sum = Rat::zero();
        for text in ["1<4", "4<1"] {
            let o = ChainOrder::parse(text).unwrap();
            sum += cylinder_measure(&o, &ambient, &spec, &ro).unwrap().value;
        }
        assert_eq!(sum, Rat::one());
    }

    #[test]
    fn inadmissible_cylinder_warns_with_zero() {
        let spec = expansion_preset("digraphs-edge-compatible").unwrap();
        let ambient = directed_cycle(3);
        // Any full order on the 3-cycle is inadmissible.
        let ro = RandomOrdering {
            spec_name: spec.name().to_string(),
            max_size: 3,
            dists: BTreeMap::new(),
        };
        let m =
            cylinder_measure(&ChainOrder::natural(3), &ambient, &spec, &ro).unwrap();
        assert!(!m.admissible);
        assert!(m.value.is_zero());
    }

    #[test]
    fn concentration_on_pure_sets() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let ambient = pure_set(6);
        let ro = uniform_random_ordering(&spec, 6).unwrap();
        let triple = BadTriple {
            a_dom: vec![0],
            b: pure_set(2),
            b_order: ChainOrder::natural(2),
            a_map: vec![0],
        };
        let report = concentration_experiment(&spec, &ambient, &triple, 4, &ro).unwrap();
        assert_eq!(report.levels.len(), 5);
        assert_eq!(report.levels[0].total, Rat::one());
        // Bad orders: those where point 0 is the maximum.
        assert_eq!(report.tracked_bad_count, 120);
        assert_eq!(report.tracked_bad_measure, rat(1, 6));
        for (n, ratio) in report.step_ratios.iter().enumerate() {
            assert!(ratio <= &step_bound(1, n), "step {n}: {ratio} > bound");
        }
        // This instance meets the bound with equality at every step.
        assert_eq!(report.step_ratios[0], rat(1, 2));
        assert_eq!(report.step_ratios[3], rat(4, 5));
        // Covers keep covering the tracked bad set: every bad full order
        // extends some cylinder at every level.
        let bad_fulls: Vec<ChainOrder> = spec
            .admissible_orders(&ambient)
            .unwrap()
            .into_iter()
            .filter(|t| *t.asc().last().unwrap() == 0)
            .collect();
        assert_eq!(bad_fulls.len(), report.tracked_bad_count);
        for cover in &report.levels {
            for t in &bad_fulls {
                assert!(
                    cover.sets.iter().any(|s| t.restrict(&s.domain()) == *s),
                    "level {} loses a bad order",
                    cover.level
                );
            }
            assert!(cover.total >= report.tracked_bad_measure);
        }
    }

    #[test]
    fn concentration_zero_levels_is_the_root() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let ambient = pure_set(4);
        let ro = uniform_random_ordering(&spec, 4).unwrap();
        let triple = BadTriple {
            a_dom: vec![1],
            b: pure_set(2),
            b_order: ChainOrder::natural(2),
            a_map: vec![0],
        };
        let report = concentration_experiment(&spec, &ambient, &triple, 0, &ro).unwrap();
        assert_eq!(report.levels.len(), 1);
        assert_eq!(report.levels[0].sets, vec![ChainOrder::from_asc(vec![1])]);
        assert_eq!(report.levels[0].total, Rat::one());
    }

    #[test]
    fn concentration_fails_when_ambient_exhausted() {
        let spec = expansion_preset("ordered-pure-sets").unwrap();
        let ambient = pure_set(3);
        let ro = uniform_random_ordering(&spec, 3).unwrap();
        let triple = BadTriple {
            a_dom: vec![0],
            b: pure_set(2),
            b_order: ChainOrder::natural(2),
            a_map: vec![0],
        };
        // Levels 0..2 fit inside a 3-set; the next refinement has no p'.
        let err = concentration_experiment(&spec, &ambient, &triple, 4, &ro).unwrap_err();
        match err {
            ErgodicError::AmbientTooSmall { level, partial } => {
                assert_eq!(level, 2);
                assert_eq!(partial.len(), 3);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn concentration_on_ordered_graphs() {
        let spec = expansion_preset("ordered-graphs").unwrap();
        let ambient = complete_graph(5);
        let ro = uniform_random_ordering(&spec, 5).unwrap();
        let triple = BadTriple {
            a_dom: vec![0],
            b: complete_graph(2),
            b_order: ChainOrder::natural(2),
            a_map: vec![0],
        };
        let report = concentration_experiment(&spec, &ambient, &triple, 4, &ro).unwrap();
        for (n, ratio) in report.step_ratios.iter().enumerate() {
            assert!(ratio <= &step_bound(1, n), "step {n}");
        }
        assert_eq!(report.tracked_bad_measure, rat(1, 5));
    }
}
