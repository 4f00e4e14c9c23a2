//! Exact decision of arrow relations with certificates.
//!
//! `check_arrow` decides whether every `k`-coloring of the copies (or
//! embeddings) of `A` in `C` admits a copy of `B` (an embedding `b` of `B`)
//! whose `A`-objects receive at most `d` colors. A negative verdict carries
//! the lexicographically least bad coloring as a certificate, verifiable in
//! polynomial time; a positive verdict records that the backtracking search
//! exhausted all colorings up to color renaming and the automorphisms of `C`.

use thiserror::Error;

use crate::class::{ClassError, ClassSpec};
use crate::embedding::{automorphisms, copies, embeddings};
use crate::structure::{ModelError, Structure};

#[derive(Debug, Error)]
pub enum ArrowError {
    #[error("color count {0} out of range (1..=64)")]
    BadColorCount(u32),
    #[error("structure `{0}` is not rigid")]
    NotRigid(String),
    #[error("search budget exhausted after {nodes} nodes (budget {budget})")]
    Undecided { nodes: u64, budget: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// Whether `A`-objects are copies (substructures) or embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowMode {
    Copies,
    Embeddings,
}

impl ArrowMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ArrowMode::Copies => "copies",
            ArrowMode::Embeddings => "embeddings",
        }
    }
}

/// A single arrow query `C -> (B)^A_{k,d}` (or the embedding variant).
#[derive(Debug, Clone)]
pub struct ArrowQuery {
    pub c: Structure,
    pub b: Structure,
    pub a: Structure,
    pub colors: u32,
    pub allowed: u32,
    pub mode: ArrowMode,
}

/// Search statistics; identical runs produce identical statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchStats {
    /// Extension steps taken by the backtracking search.
    pub nodes: u64,
    /// Order of `Aut(C)`, the group used for symmetry reduction.
    pub symmetry_factor: u64,
    /// Node budget the search ran under.
    pub budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
}

/// Proof object for a decided arrow query.
#[derive(Debug, Clone)]
pub struct ArrowCertificate {
    pub verdict: Verdict,
    /// For a failing query: color of each `A`-object in enumeration order.
    pub bad_coloring: Option<Vec<u32>>,
    pub stats: SearchStats,
}

/// Outcome of `check_arrow`: both verdicts are exact; running out of budget
/// is a first-class third outcome, never coerced into a verdict.
#[derive(Debug, Clone)]
pub enum ArrowOutcome {
    Holds(ArrowCertificate),
    Fails(ArrowCertificate),
    Undecided(SearchStats),
}

impl ArrowOutcome {
    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            ArrowOutcome::Holds(_) => Some(Verdict::Holds),
            ArrowOutcome::Fails(_) => Some(Verdict::Fails),
            ArrowOutcome::Undecided(_) => None,
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, ArrowOutcome::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self, ArrowOutcome::Fails(_))
    }

    pub fn certificate(&self) -> Option<&ArrowCertificate> {
        match self {
            ArrowOutcome::Holds(c) | ArrowOutcome::Fails(c) => Some(c),
            ArrowOutcome::Undecided(_) => None,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            ArrowOutcome::Holds(c) | ArrowOutcome::Fails(c) => &c.stats,
            ArrowOutcome::Undecided(s) => s,
        }
    }
}

/// The query instance prepared for search: `A`-objects in enumeration order,
/// constraint groups (one per `B`-object), and the object permutations
/// induced by `Aut(C)`.
pub struct ArrowInstance {
    /// Printable labels of the `A`-objects, in enumeration order.
    pub labels: Vec<String>,
    /// For each `B`-object, the sorted indices of its `A`-objects.
    pub groups: Vec<Vec<u32>>,
    /// Inverse object permutations from `Aut(C)` (identity excluded).
    inv_perms: Vec<Vec<u32>>,
    /// |Aut(C)|.
    pub aut_order: u64,
}

impl ArrowInstance {
    pub fn prepare(q: &ArrowQuery) -> Result<ArrowInstance, ArrowError> {
        let (labels, object_keys): (Vec<String>, Vec<Vec<u8>>) = match q.mode {
            ArrowMode::Copies => {
                let cs = copies(&q.a, &q.c)?;
                (cs.iter().map(|s| subset_label(s)).collect(), cs)
            }
            ArrowMode::Embeddings => {
                let es = embeddings(&q.a, &q.c)?;
                let maps: Vec<Vec<u8>> = es.iter().map(|e| e.map().to_vec()).collect();
                (maps.iter().map(|m| map_label(m)).collect(), maps)
            }
        };
        let index_of = |key: &Vec<u8>| -> u32 {
            object_keys.binary_search(key).expect("object present") as u32
        };

        let mut groups: Vec<Vec<u32>> = match q.mode {
            ArrowMode::Copies => {
                let b_copies = copies(&q.b, &q.c)?;
                b_copies
                    .iter()
                    .map(|bc| {
                        object_keys
                            .iter()
                            .enumerate()
                            .filter(|(_, a_sub)| a_sub.iter().all(|v| bc.contains(v)))
                            .map(|(i, _)| i as u32)
                            .collect()
                    })
                    .collect()
            }
            ArrowMode::Embeddings => {
                let b_embs = embeddings(&q.b, &q.c)?;
                let ba = embeddings(&q.a, &q.b)?;
                b_embs
                    .iter()
                    .map(|b| {
                        let mut g: Vec<u32> = ba
                            .iter()
                            .map(|a| {
                                let composed: Vec<u8> =
                                    a.map().iter().map(|&v| b.apply(v)).collect();
                                index_of(&composed)
                            })
                            .collect();
                        g.sort();
                        g.dedup();
                        g
                    })
                    .collect()
            }
        };
        groups.sort();
        groups.dedup();

        // Object permutations induced by Aut(C); stored inverted for the
        // minimality test. Skipped when the group is unreasonably large.
        let auts = automorphisms(&q.c);
        let aut_order = auts.len() as u64;
        let mut inv_perms: Vec<Vec<u32>> = Vec::new();
        if aut_order <= 50_000 {
            for g in &auts {
                let perm: Vec<u32> = object_keys
                    .iter()
                    .map(|key| {
                        let mut moved: Vec<u8> =
                            key.iter().map(|&v| g.apply(v)).collect();
                        if q.mode == ArrowMode::Copies {
                            moved.sort();
                        }
                        index_of(&moved)
                    })
                    .collect();
                let mut inv = vec![0u32; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p as usize] = i as u32;
                }
                if inv.iter().enumerate().any(|(i, &p)| i as u32 != p) {
                    inv_perms.push(inv);
                }
            }
            inv_perms.sort();
            inv_perms.dedup();
        }
        Ok(ArrowInstance { labels, groups, inv_perms, aut_order })
    }
}

fn subset_label(s: &[u8]) -> String {
    let inner: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn map_label(m: &[u8]) -> String {
    let inner: Vec<String> = m.iter().map(|v| v.to_string()).collect();
    format!("({})", inner.join(","))
}

struct Searcher<'i> {
    inst: &'i ArrowInstance,
    k: u32,
    d: u32,
    color: Vec<u32>,
    /// Per group: bitmask of used colors and count of colored objects.
    group_used: Vec<u64>,
    group_colored: Vec<u32>,
    /// Groups indexed by object.
    groups_of: Vec<Vec<u32>>,
    nodes: u64,
    budget: u64,
    out_of_budget: bool,
    found: Option<Vec<u32>>,
}

impl<'i> Searcher<'i> {
    fn new(inst: &'i ArrowInstance, k: u32, d: u32, budget: u64) -> Self {
        let n = inst.labels.len();
        let mut groups_of: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (gi, g) in inst.groups.iter().enumerate() {
            for &obj in g {
                groups_of[obj as usize].push(gi as u32);
            }
        }
        Searcher {
            inst,
            k,
            d,
            color: Vec::with_capacity(n),
            group_used: vec![0; inst.groups.len()],
            group_colored: vec![0; inst.groups.len()],
            groups_of,
            nodes: 0,
            budget,
            out_of_budget: false,
            found: None,
        }
    }

    /// A group stays viable while it can still end up with more than `d`
    /// distinct colors.
    fn viable(&self, gi: u32) -> bool {
        let used = self.group_used[gi as usize].count_ones();
        let uncolored =
            self.inst.groups[gi as usize].len() as u32 - self.group_colored[gi as usize];
        used + uncolored.min(self.k - used) > self.d
    }

    /// No automorphism may certify that a strictly smaller coloring lies in
    /// the same orbit as every completion of the current prefix.
    fn orbit_minimal(&self) -> bool {
        let m = self.color.len();
        'next: for inv in &self.inst.inv_perms {
            for p in 0..m {
                let q = inv[p] as usize;
                if q >= m {
                    continue 'next;
                }
                if self.color[q] < self.color[p] {
                    return false;
                }
                if self.color[q] > self.color[p] {
                    continue 'next;
                }
            }
        }
        true
    }

    fn run(&mut self, used_colors: u32) {
        if self.found.is_some() || self.out_of_budget {
            return;
        }
        let i = self.color.len();
        if i == self.inst.labels.len() {
            self.found = Some(self.color.clone());
            return;
        }
        // Colors appear in first-occurrence order: at most one new color.
        let limit = (used_colors + 1).min(self.k);
        'colors: for c in 0..limit {
            if self.nodes >= self.budget {
                self.out_of_budget = true;
                return;
            }
            self.nodes += 1;
            self.color.push(c);
            let mut touched = 0usize;
            for &gi in &self.groups_of[i] {
                self.group_used[gi as usize] |= 1 << c;
                self.group_colored[gi as usize] += 1;
                touched += 1;
                if !self.viable(gi) {
                    self.unwind(i, c, touched);
                    continue 'colors;
                }
            }
            if self.orbit_minimal() {
                self.run(used_colors.max(c + 1));
                if self.found.is_some() || self.out_of_budget {
                    return;
                }
            }
            self.unwind(i, c, touched);
        }
    }

    fn unwind(&mut self, i: usize, c: u32, touched: usize) {
        for &gi in self.groups_of[i].iter().take(touched) {
            self.group_colored[gi as usize] -= 1;
            // Recompute the color set of the group without object i.
            let mut mask = 0u64;
            for &obj in &self.inst.groups[gi as usize] {
                if (obj as usize) < self.color.len() && obj as usize != i {
                    mask |= 1 << self.color[obj as usize];
                }
            }
            let _ = c;
            self.group_used[gi as usize] = mask;
        }
        self.color.pop();
    }
}

/// Decides an arrow query within a node budget.
pub fn check_arrow(q: &ArrowQuery, budget: u64) -> Result<ArrowOutcome, ArrowError> {
    if q.colors == 0 || q.colors > 64 {
        return Err(ArrowError::BadColorCount(q.colors));
    }
    let inst = ArrowInstance::prepare(q)?;
    Ok(check_arrow_prepared(q, &inst, budget))
}

/// Decides a prepared arrow query. Deterministic: the certificate depends
/// only on the query, never on scheduling or budget slack.
pub fn check_arrow_prepared(q: &ArrowQuery, inst: &ArrowInstance, budget: u64) -> ArrowOutcome {
    let stats = |nodes: u64| SearchStats { nodes, symmetry_factor: inst.aut_order, budget };
    // No copy of B at all: no coloring can be good, so the all-zero coloring
    // is the lexicographically least bad one.
    if inst.groups.is_empty() {
        return ArrowOutcome::Fails(ArrowCertificate {
            verdict: Verdict::Fails,
            bad_coloring: Some(vec![0; inst.labels.len()]),
            stats: stats(0),
        });
    }
    // At most k colors exist anywhere.
    if q.allowed >= q.colors {
        return ArrowOutcome::Holds(ArrowCertificate {
            verdict: Verdict::Holds,
            bad_coloring: None,
            stats: stats(0),
        });
    }
    // A B-object without A-objects is monochromatic under any coloring.
    if inst.groups.iter().any(|g| g.is_empty()) {
        return ArrowOutcome::Holds(ArrowCertificate {
            verdict: Verdict::Holds,
            bad_coloring: None,
            stats: stats(0),
        });
    }
    let mut s = Searcher::new(inst, q.colors, q.allowed, budget);
    s.run(0);
    if s.out_of_budget {
        return ArrowOutcome::Undecided(stats(s.nodes));
    }
    match s.found {
        Some(coloring) => ArrowOutcome::Fails(ArrowCertificate {
            verdict: Verdict::Fails,
            bad_coloring: Some(coloring),
            stats: stats(s.nodes),
        }),
        None => ArrowOutcome::Holds(ArrowCertificate {
            verdict: Verdict::Holds,
            bad_coloring: None,
            stats: stats(s.nodes),
        }),
    }
}

/// Re-verifies a failing certificate against the definition: every `B`-object
/// must see at least `d + 1` colors. Holds-certificates re-verify trivially.
pub fn verify_certificate(q: &ArrowQuery, cert: &ArrowCertificate) -> Result<bool, ArrowError> {
    let inst = ArrowInstance::prepare(q)?;
    Ok(match (&cert.verdict, &cert.bad_coloring) {
        (Verdict::Holds, _) => true,
        (Verdict::Fails, None) => false,
        (Verdict::Fails, Some(coloring)) => {
            coloring.len() == inst.labels.len()
                && coloring.iter().all(|&c| c < q.colors)
                && (inst.groups.is_empty()
                    || inst.groups.iter().all(|g| {
                        let mut mask = 0u64;
                        for &obj in g {
                            mask |= 1 << coloring[obj as usize];
                        }
                        mask.count_ones() > q.allowed
                    }))
        }
    })
}

/// Serializes a certificate to the text block format.
pub fn certificate_text(q: &ArrowQuery, cert: &ArrowCertificate) -> Result<String, ArrowError> {
    let mut out = String::new();
    match cert.verdict {
        Verdict::Holds => out.push_str("verdict: holds\n"),
        Verdict::Fails => out.push_str("verdict: fails\n"),
    }
    if let Some(coloring) = &cert.bad_coloring {
        let inst = ArrowInstance::prepare(q)?;
        out.push_str("coloring:\n");
        for (label, color) in inst.labels.iter().zip(coloring) {
            out.push_str(&format!("{label} -> {color}\n"));
        }
    }
    Ok(out)
}

/// On rigid `A` the copy and embedding verdicts must coincide; returns that
/// agreement after checking both exhaustively.
pub fn modes_agree_on_rigid(q: &ArrowQuery, budget: u64) -> Result<bool, ArrowError> {
    if automorphisms(&q.a).len() != 1 {
        return Err(ArrowError::NotRigid(format!("{:?}", q.a)));
    }
    let copies_q = ArrowQuery { mode: ArrowMode::Copies, ..q.clone() };
    let emb_q = ArrowQuery { mode: ArrowMode::Embeddings, ..q.clone() };
    let mut verdicts = Vec::new();
    for query in [&copies_q, &emb_q] {
        match check_arrow(query, budget)? {
            ArrowOutcome::Undecided(stats) => {
                return Err(ArrowError::Undecided { nodes: stats.nodes, budget })
            }
            out => verdicts.push(out.verdict().expect("decided")),
        }
    }
    Ok(verdicts[0] == verdicts[1])
}

/// Result of a bounded witness search.
#[derive(Debug, Clone)]
pub enum WitnessOutcome {
    Found { c: Structure, certificate: ArrowCertificate },
    NotFoundUpTo { cap: usize },
    Undecided { at: Structure, stats: SearchStats },
}

impl WitnessOutcome {
    pub fn found(&self) -> Option<&Structure> {
        match self {
            WitnessOutcome::Found { c, .. } => Some(c),
            _ => None,
        }
    }
}

/// Smallest member `C` of the class (by size, then canonical order) with
/// `C -> (B)^A_{k,d}`, up to the size cap.
pub fn find_witness(
    spec: &ClassSpec,
    b: &Structure,
    a: &Structure,
    k: u32,
    d: u32,
    cap: usize,
    mode: ArrowMode,
    budget: u64,
) -> Result<WitnessOutcome, ArrowError> {
    // Levels are generated lazily: a witness at size s never pays for the
    // enumeration of larger members.
    for level in spec.member_levels(cap) {
        for c in level? {
            if c.size() < b.size() {
                continue;
            }
            let q = ArrowQuery {
                c: c.clone(),
                b: b.clone(),
                a: a.clone(),
                colors: k,
                allowed: d,
                mode,
            };
            match check_arrow(&q, budget)? {
                ArrowOutcome::Holds(certificate) => {
                    return Ok(WitnessOutcome::Found { c, certificate })
                }
                ArrowOutcome::Fails(_) => continue,
                ArrowOutcome::Undecided(stats) => {
                    return Ok(WitnessOutcome::Undecided { at: c, stats })
                }
            }
        }
    }
    Ok(WitnessOutcome::NotFoundUpTo { cap })
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("witness oracle failed at step {step}")]
    OracleFailed { step: usize, partial: Vec<Structure> },
    #[error("simultaneous monochromatic copy missing for sample {sample}")]
    VerificationFailed { sample: usize },
    #[error(transparent)]
    Arrow(#[from] ArrowError),
}

/// A chained witness: `chain[0]` is the goal `B`, and each subsequent entry
/// arrows onto the previous one with a single allowed color for the matching
/// step structure.
#[derive(Debug, Clone)]
pub struct ChainWitness {
    pub chain: Vec<Structure>,
    pub samples_verified: usize,
}

/// Builds a structure `C` such that any simultaneous family of colorings
/// (`k_i` colors of the copies of `A_i`) admits one copy of `B` monochromatic
/// in every coordinate at once. The construction iterates a witness oracle;
/// the simultaneous property is then spot-verified on seeded random coloring
/// families by direct search.
pub fn chain_witness(
    steps: &[(Structure, u32)],
    b: &Structure,
    oracle: impl Fn(&Structure, &Structure, u32) -> Result<WitnessOutcome, ArrowError>,
    samples: usize,
    seed: u64,
) -> Result<ChainWitness, ChainError> {
    use rand::{Rng, SeedableRng};
    let mut chain = vec![b.clone()];
    for (step, (a_i, k_i)) in steps.iter().enumerate() {
        let prev = chain.last().expect("nonempty chain");
        match oracle(prev, a_i, *k_i)? {
            WitnessOutcome::Found { c, .. } => chain.push(c),
            _ => return Err(ChainError::OracleFailed { step, partial: chain }),
        }
    }
    let c = chain.last().expect("nonempty chain").clone();
    let b_copies = copies(b, &c).map_err(ArrowError::from)?;
    let per_step_objects: Vec<Vec<Vec<u8>>> = steps
        .iter()
        .map(|(a_i, _)| copies(a_i, &c).map_err(ArrowError::from))
        .collect::<Result<_, _>>()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for sample in 0..samples {
        let colorings: Vec<Vec<u32>> = steps
            .iter()
            .zip(&per_step_objects)
            .map(|((_, k_i), objs)| (0..objs.len()).map(|_| rng.gen_range(0..*k_i)).collect())
            .collect();
        let witness = b_copies.iter().any(|bc| {
            steps.iter().enumerate().all(|(i, _)| {
                let mut seen: Option<u32> = None;
                for (j, obj) in per_step_objects[i].iter().enumerate() {
                    if obj.iter().all(|v| bc.contains(v)) {
                        match seen {
                            None => seen = Some(colorings[i][j]),
                            Some(c0) if c0 != colorings[i][j] => return false,
                            _ => {}
                        }
                    }
                }
                true
            })
        });
        if !witness {
            return Err(ChainError::VerificationFailed { sample });
        }
    }
    Ok(ChainWitness { chain, samples_verified: samples })
}
