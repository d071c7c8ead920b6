//! Stage-by-stage analyses: stable images, Mittag-Leffler, covering
//! classification, fiber and component models, deck quotients, density.
//!
//! Certification rules, named in report provenance:
//! - `ml-surjective-bondings`: every bonding is onto, so image chains are
//!   constant at the full stage.
//! - `ml-image-chain-repeats`: the tail image chain is a forward iteration
//!   `X <- b(X)`; one observed repeat freezes it forever.
//! - `ml-divisible-core-descent`: an abelian tail chain that has not met the
//!   divisible core by rank stabilization keeps a constant index to it and
//!   never stabilizes.
//! - `covering-constant-tail`: a constant tail thread repeats one coset map;
//!   its injectivity settles every tail pair at once.
//! - `strict-lifting-stationary-step`: with `b` and `s` commuting and `s`
//!   injective, a non-injective pair pushes forward to every later pair.
//! - `fiber-uncountable-stationary` / `pi0-uncountable-stationary`: finite
//!   fibers, stable surjectivity, and certified recurring non-injectivity
//!   give an uncountable limit while the base image stays countable.

use super::*;
use crate::coset::induced_map;
use crate::lattice::divisible_core;
use num_bigint::BigUint;
use num_traits::One;
use std::collections::BTreeSet;

/// Covering classification of the tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    /// All coset maps beyond the stage are injective.
    Covering(usize),
    /// Non-injective coset maps recur forever.
    StrictLifting,
    Unknown,
}

/// Whether the bonding-induced coset maps are eventually injective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventualInjectivity {
    InjectiveFrom(usize),
    NonInjectiveRecurring,
    Unknown,
}

/// Mittag-Leffler property of the stage-group image chains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ml {
    Holds,
    Fails { stage: usize },
    Unknown,
}

/// Observed image chain at one stage: `image_sizes[d]` is the number of
/// cosets hit from stage `stage + d` (so `d = 0` is the full coset count),
/// `None` meaning infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageChain {
    pub stage: usize,
    pub image_sizes: Vec<Option<BigUint>>,
    pub stable_at: Option<usize>,
}

/// Verdict payload of [`Tower::stability_analysis`].
#[derive(Clone, Debug)]
pub struct StabilityVerdict {
    pub chains: Vec<StageChain>,
    pub mittag_leffler: Judged<Ml>,
    pub eventually_injective: Judged<EventualInjectivity>,
    pub classification: Judged<Classification>,
}

/// Limit size class of the fiber model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitCardinality {
    Finite(BigUint),
    Uncountable,
    Unknown,
}

/// Verdict payload of [`Tower::fiber_model`].
#[derive(Clone, Debug)]
pub struct FiberVerdict {
    pub counts: Vec<Option<BigUint>>,
    pub limit: LimitCardinality,
}

/// Verdict payload of [`Tower::pi0_report`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pi0Verdict {
    Trivial,
    CosetCount(BigUint),
    Uncountable,
    Unknown,
}

/// Verdict payload of [`Tower::density`]. `Dense` lists every criterion that
/// fired, in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityVerdict {
    Dense(Vec<String>),
    NotDense { stage: usize },
    Unknown,
}

/// One stage of the deck-transformation tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeckStage {
    /// Quotient of a free abelian stage: invariant factors plus free rank.
    AbelianQuotient { stage: usize, free_rank: usize, torsion: Vec<BigUint> },
    /// Finite quotient of an fp or free stage, described by its order.
    FiniteQuotient { stage: usize, order: BigUint },
    /// Trivial thread: the deck group is the whole stage group.
    FullStage { stage: usize, backend: &'static str, rank: usize },
}

impl DeckStage {
    pub fn stage(&self) -> usize {
        match self {
            DeckStage::AbelianQuotient { stage, .. }
            | DeckStage::FiniteQuotient { stage, .. }
            | DeckStage::FullStage { stage, .. } => *stage,
        }
    }

    pub fn order(&self) -> Option<BigUint> {
        match self {
            DeckStage::AbelianQuotient { free_rank, torsion, .. } => {
                if *free_rank > 0 {
                    None
                } else {
                    Some(torsion.iter().product())
                }
            }
            DeckStage::FiniteQuotient { order, .. } => Some(order.clone()),
            DeckStage::FullStage { rank, .. } => {
                if *rank == 0 {
                    Some(BigUint::from(1u32))
                } else {
                    None
                }
            }
        }
    }
}

/// The tower of deck groups: stage quotients with the tower bondings acting
/// on classes.
#[derive(Clone, Debug)]
pub struct DeckReport {
    pub stages: Vec<DeckStage>,
    pub bonding_display: Vec<String>,
    pub certainty: Certainty,
    pub provenance: String,
}

/// Certified facts about a stationary tail.
struct TailFacts {
    constant: bool,
    /// Some(true): every tail coset map injective, certified.
    /// Some(false): non-injective maps recur, certified.
    injective: Option<bool>,
    noninj_stage: usize,
    noninj_witness: Option<Word>,
    /// Certified answer to "every tail coset map is surjective".
    surjective: Option<bool>,
    /// Certified answer to "every tail coset count is finite".
    counts_finite: Option<bool>,
    /// Minimal k with the group image chain stabilized, when certified.
    ml_stable_at: Option<usize>,
    /// Certified ML failure of the tail group chain.
    ml_fails: bool,
}

/// Everything the stage-by-stage analyses share.
pub(super) struct Analysis {
    pub h: usize,
    pub counts: Vec<Option<BigUint>>,
    pub counts_cert: bool,
    pub chains: Vec<StageChain>,
    pub ml: Judged<Ml>,
    pub ev: Judged<EventualInjectivity>,
    pub class: Judged<Classification>,
    pub witnesses: Vec<Witness>,
    /// Certified stable coset image per stage, when available.
    pub stable: Vec<Option<StableImage>>,
    pub surj_all_cert: bool,
    pub bondings_onto: Option<bool>,
}

#[derive(Clone, Debug)]
pub(super) enum StableImage {
    Ab(Lattice),
    Set(BTreeSet<usize>),
}

pub(super) fn analyze(t: &Tower, horizon: usize) -> Result<Analysis, TowerError> {
    let h = t.last_stage(horizon);
    let mut tables = StageTables::new(t);
    let mut counts = Vec::with_capacity(h + 1);
    for i in 0..=h {
        counts.push(stage_count(t, i, &mut tables)?);
    }

    // explicit pair flags for maps stage i+1 -> i, both endpoints <= h
    let npairs = h;
    let mut pair_injective: Vec<Option<bool>> = Vec::with_capacity(npairs);
    let mut pair_surjective: Vec<Option<bool>> = Vec::with_capacity(npairs);
    for i in 0..npairs {
        let (inj, surj) = pair_flags(t, i, &mut tables)?;
        pair_injective.push(inj);
        pair_surjective.push(surj);
    }

    let tail = match t.tail() {
        Some(_) => Some(tail_facts(t, &mut tables)?),
        None => None,
    };

    let bondings_onto = bondings_onto(t, &mut tables)?;
    let ml = ml_verdict(t, horizon, &tail, bondings_onto);
    let (ev, class, witnesses) = classify(t, horizon, &pair_injective, &tail);
    let (chains, stable) = image_chains(t, h, &tail, &mut tables)?;

    // certified "all coset maps surjective": explicit pairs plus tail rule
    let explicit_surj = pair_surjective.iter().take(t.prefix_len().min(npairs)).all(|f| *f == Some(true));
    let surj_all_cert = match &tail {
        None => pair_surjective.iter().all(|f| *f == Some(true)),
        Some(facts) => explicit_surj && facts.surjective == Some(true),
    };
    let counts_cert = match &tail {
        None => counts.iter().all(|c| c.is_some()),
        Some(facts) => {
            counts[..t.prefix_len().min(h + 1)].iter().all(|c| c.is_some())
                && facts.counts_finite == Some(true)
        }
    };

    Ok(Analysis {
        h,
        counts,
        counts_cert,
        chains,
        ml,
        ev,
        class,
        witnesses,
        stable,
        surj_all_cert,
        bondings_onto,
    })
}

fn stage_count(
    t: &Tower,
    i: usize,
    tables: &mut StageTables,
) -> Result<Option<BigUint>, TowerError> {
    Ok(match t.thread_at(i)? {
        SubgroupHandle::Lattice(l) => l.quotient_info().order,
        SubgroupHandle::Words(_) => Some(BigUint::from(tables.table(i)?.index())),
        SubgroupHandle::Graph(g) => g.index().map(BigUint::from),
    })
}

/// Injectivity and surjectivity of the coset map stage `i+1` -> stage `i`.
fn pair_flags(
    t: &Tower,
    i: usize,
    tables: &mut StageTables,
) -> Result<(Option<bool>, Option<bool>), TowerError> {
    let b = t.bonding_at(i).clone();
    match (t.thread_at(i)?, t.thread_at(i + 1)?) {
        (SubgroupHandle::Lattice(g_lo), SubgroupHandle::Lattice(g_hi)) => {
            let m = hom_matrix(&b);
            let pre = g_lo.preimage(&m);
            let inj = g_hi.contains(&pre);
            let surj = Lattice::full(m.cols()).image(&m).sum(&g_lo).is_full();
            Ok((Some(inj), Some(surj)))
        }
        (SubgroupHandle::Words(_), SubgroupHandle::Words(_)) => {
            let map = {
                let hi = tables.table(i + 1)?.clone();
                let lo = tables.table(i)?;
                match induced_map(&hi, lo, &b) {
                    Ok(map) => map,
                    Err(_) => return Ok((None, None)),
                }
            };
            let lo_index = tables.table(i)?.index();
            let mut seen = vec![false; lo_index];
            let mut inj = true;
            for &c in &map {
                if seen[c] {
                    inj = false;
                }
                seen[c] = true;
            }
            Ok((Some(inj), Some(seen.iter().all(|&s| s))))
        }
        (SubgroupHandle::Graph(lo), SubgroupHandle::Graph(hi)) => {
            match (lo.index(), hi.index()) {
                (Some(_), Some(_)) => {
                    let reps = hi.representatives();
                    let mut seen = vec![false; lo.vertex_count()];
                    let mut inj = true;
                    for w in &reps {
                        let Some(c) = lo.act_word(0, &b.apply(w)) else {
                            return Ok((None, None));
                        };
                        if seen[c] {
                            inj = false;
                        }
                        seen[c] = true;
                    }
                    Ok((Some(inj), Some(seen.iter().all(|&s| s))))
                }
                _ => {
                    // infinite coset spaces; with a trivial thread the map is
                    // the bonding itself, injective iff rank is preserved
                    if lo.is_trivial() && hi.is_trivial() {
                        let image =
                            SubgroupGraph::from_words(b.target(), b.images()).map_err(|source| {
                                TowerError::Folding { stage: i, source }
                            })?;
                        let inj = image.rank() == b.source().rank();
                        let surj = image == SubgroupGraph::full(b.target());
                        Ok((Some(inj), Some(surj)))
                    } else {
                        Ok((None, None))
                    }
                }
            }
        }
        _ => Ok((None, None)),
    }
}

/// Whether every bonding is onto its target stage, certified where decided.
fn bondings_onto(t: &Tower, tables: &mut StageTables) -> Result<Option<bool>, TowerError> {
    let explicit = match t.finite_len() {
        Some(n) => n.saturating_sub(1),
        None => t.prefix_len(),
    };
    let mut all = Some(true);
    for i in 0..explicit {
        match hom_onto(t, i, t.bonding_at(i), tables)? {
            Some(false) => return Ok(Some(false)),
            Some(true) => {}
            None => all = None,
        }
    }
    if let Some(tail) = t.tail() {
        match hom_onto(t, t.prefix_len(), tail.bonding(), tables)? {
            Some(false) => return Ok(Some(false)),
            Some(true) => {}
            None => all = None,
        }
    }
    Ok(all)
}

/// Whether `hom` maps onto the stage group numbered `target_stage`.
fn hom_onto(
    t: &Tower,
    target_stage: usize,
    hom: &GroupHom,
    _tables: &mut StageTables,
) -> Result<Option<bool>, TowerError> {
    Ok(match t.group_at(target_stage) {
        StageGroup::Abelian(a) => {
            let m = hom_matrix(hom);
            Some(Lattice::full(m.cols()).image(&m).is_full() && m.rows() == a.rank())
        }
        StageGroup::Free(a) => {
            let image = SubgroupGraph::from_words(a, hom.images())
                .map_err(|source| TowerError::Folding { stage: target_stage, source })?;
            Some(image == SubgroupGraph::full(a))
        }
        StageGroup::Fp(p) => {
            let budget = EnumerationBudget::with_max_cosets(4096);
            match coset::enumerate(p, hom.images(), &budget) {
                Ok(table) => Some(table.index() == 1),
                Err(_) => None,
            }
        }
    })
}

/// Certified one-step facts about the stationary tail.
fn tail_facts(t: &Tower, tables: &mut StageTables) -> Result<TailFacts, TowerError> {
    let tail = t.tail().unwrap();
    let pl = t.prefix_len();
    let commute = homs_commute(tail.group(), tail.bonding(), tail.step());

    if let Some(ab) = t.abelian_tail() {
        let s_injective = !ab.s.determinant().is_zero();
        let g0 = ab.g0.clone();
        let g1 = ab.thread(1);
        let constant = g1 == g0;

        // tail pair k: injective iff b^{-1}(G_k) <= G_{k+1}
        let mut injective = None;
        let mut noninj_stage = 0;
        let mut noninj_witness = None;
        let scan = if constant { 1 } else { 4 };
        for k in 0..scan {
            let gk = ab.thread(k);
            let gk1 = ab.thread(k + 1);
            let pre = gk.preimage(&ab.b);
            if !gk1.contains(&pre) {
                // transports to every later pair when the thread is constant,
                // or when b and s commute and s is injective
                if constant || (commute && s_injective) {
                    injective = Some(false);
                    noninj_stage = pl + k;
                    noninj_witness = pre
                        .basis_vectors()
                        .into_iter()
                        .find(|v| !gk1.member(v))
                        .map(|v| word_from_vector(tail.group().alphabet(), &v));
                }
                break;
            } else if constant {
                injective = Some(true);
            }
        }

        // surjectivity of tail coset maps: b(S) + G_k = S
        let b_image = Lattice::full(ab.rank).image(&ab.b);
        let surjective = if constant {
            Some(b_image.sum(&g0).is_full())
        } else if b_image.sum(&divisible_core(&ab.s, &g0)).is_full() {
            Some(true)
        } else if !b_image.sum(&g0).is_full() || !b_image.sum(&g1).is_full() {
            Some(false)
        } else {
            None
        };

        let counts_finite = Some(g0.quotient_info().order.is_some() && (s_injective || constant));

        // group image chain b^k(S): stabilizes iff it reaches the divisible
        // core, which happens by rank stabilization or never
        let core = divisible_core(&ab.b, &Lattice::full(ab.rank));
        let mut c = Lattice::full(ab.rank);
        let mut ml_stable_at = None;
        for k in 0..=ab.rank {
            if c == core {
                ml_stable_at = Some(k);
                break;
            }
            c = c.image(&ab.b);
        }
        let ml_fails = ml_stable_at.is_none();

        return Ok(TailFacts {
            constant,
            injective,
            noninj_stage,
            noninj_witness,
            surjective,
            counts_finite,
            ml_stable_at,
            ml_fails,
        });
    }

    // non-abelian tails: the constant-thread case repeats one coset map and
    // is settled by a single computation; otherwise leave flags open
    let thread0 = t.thread_at(pl)?;
    let thread1 = t.thread_at(pl + 1)?;
    let constant = match (&thread0, &thread1) {
        (SubgroupHandle::Graph(a), SubgroupHandle::Graph(b)) => a == b,
        (SubgroupHandle::Words(a), SubgroupHandle::Words(b)) => {
            a == b || {
                let table = tables.table(pl)?.clone();
                b.iter().all(|w| table.member(w))
                    && a.iter().all(|w| {
                        // symmetric containment needs the other table
                        w.alphabet() == table.alphabet() && table.member(w)
                    })
                    && subgroups_equal_fp(t, pl, a, b)?
            }
        }
        _ => false,
    };
    let (mut injective, mut surjective) = (None, None);
    let mut noninj_stage = 0;
    let mut noninj_witness = None;
    if constant {
        let (inj, surj) = pair_flags_at_tail(t, pl, tables)?;
        if let Some(i) = inj {
            injective = Some(i);
            if !i {
                noninj_stage = pl;
                noninj_witness = None;
            }
        }
        surjective = surj;
    }
    let counts_finite = match &thread0 {
        SubgroupHandle::Graph(g) => {
            if constant {
                Some(g.index().is_some())
            } else {
                None
            }
        }
        SubgroupHandle::Words(_) => {
            if constant {
                Some(true)
            } else {
                None
            }
        }
        SubgroupHandle::Lattice(_) => unreachable!("abelian handled above"),
    };

    // tail group chain X <- b(X) with repeat detection
    let mut ml_stable_at = None;
    if let StageGroup::Free(a) = tail.group() {
        let mut x = SubgroupGraph::full(a);
        for k in 0..8 {
            let next = SubgroupGraph::from_words(a, &x.basis().iter().map(|w| tail.bonding().apply(w)).collect::<Vec<_>>())
                .map_err(|source| TowerError::Folding { stage: pl, source })?;
            if next == x {
                ml_stable_at = Some(k);
                break;
            }
            x = next;
        }
    }

    Ok(TailFacts {
        constant,
        injective,
        noninj_stage,
        noninj_witness,
        surjective,
        counts_finite,
        ml_stable_at,
        ml_fails: false,
    })
}

/// Subgroup equality of two fp generator lists via mutual membership.
fn subgroups_equal_fp(
    t: &Tower,
    stage: usize,
    a: &[Word],
    b: &[Word],
) -> Result<bool, TowerError> {
    let StageGroup::Fp(p) = t.group_at(stage) else {
        return Err(TowerError::Unsupported("fp subgroup comparison on a non-fp stage"));
    };
    let ta = coset::enumerate(p, a, &t.budget())
        .map_err(|source| TowerError::Enumeration { stage, source })?;
    let tb = coset::enumerate(p, b, &t.budget())
        .map_err(|source| TowerError::Enumeration { stage, source })?;
    Ok(b.iter().all(|w| ta.member(w)) && a.iter().all(|w| tb.member(w)))
}

/// Pair flags for the first tail pair, reusing the generic machinery.
fn pair_flags_at_tail(
    t: &Tower,
    pl: usize,
    tables: &mut StageTables,
) -> Result<(Option<bool>, Option<bool>), TowerError> {
    pair_flags(t, pl, tables)
}

fn ml_verdict(
    t: &Tower,
    horizon: usize,
    tail: &Option<TailFacts>,
    bondings_onto: Option<bool>,
) -> Judged<Ml> {
    if bondings_onto == Some(true) {
        return Judged::certified(Ml::Holds, "ml-surjective-bondings");
    }
    match tail {
        None => Judged::certified(Ml::Holds, "ml-finite-tower"),
        Some(facts) => {
            if facts.ml_fails {
                Judged::certified(Ml::Fails { stage: t.prefix_len() }, "ml-divisible-core-descent")
            } else if facts.ml_stable_at.is_some() {
                Judged::certified(Ml::Holds, "ml-image-chain-repeats")
            } else {
                Judged::limited(Ml::Unknown, horizon, "ml-horizon")
            }
        }
    }
}

fn classify(
    t: &Tower,
    horizon: usize,
    pair_injective: &[Option<bool>],
    tail: &Option<TailFacts>,
) -> (Judged<EventualInjectivity>, Judged<Classification>, Vec<Witness>) {
    let pl = t.prefix_len();
    match tail {
        None => {
            // a finite prefix never certifies a statement about all later
            // stages; report the observed flags only
            let ev = Judged::limited(EventualInjectivity::Unknown, horizon, "classification-finite-prefix");
            let class =
                Judged::limited(Classification::Unknown, horizon, "classification-finite-prefix");
            (ev, class, Vec::new())
        }
        Some(facts) => match facts.injective {
            Some(false) => {
                let rule = if facts.constant {
                    "strict-lifting-constant-tail"
                } else {
                    "strict-lifting-stationary-step"
                };
                let mut witnesses = vec![Witness::Stage(facts.noninj_stage)];
                if let Some(w) = &facts.noninj_witness {
                    witnesses.push(Witness::WordAt { stage: facts.noninj_stage, word: w.clone() });
                }
                (
                    Judged::certified(EventualInjectivity::NonInjectiveRecurring, rule),
                    Judged::certified(Classification::StrictLifting, rule),
                    witnesses,
                )
            }
            Some(true) => {
                // all tail pairs injective; find the last non-injective
                // explicit pair
                let explicit = pl.min(pair_injective.len());
                let mut n = 0;
                let mut decided = true;
                for i in 0..explicit {
                    match pair_injective[i] {
                        Some(false) => n = i + 1,
                        Some(true) => {}
                        None => decided = false,
                    }
                }
                if decided {
                    (
                        Judged::certified(
                            EventualInjectivity::InjectiveFrom(n),
                            "covering-constant-tail",
                        ),
                        Judged::certified(Classification::Covering(n), "covering-constant-tail"),
                        vec![Witness::Stage(n)],
                    )
                } else {
                    (
                        Judged::limited(EventualInjectivity::Unknown, horizon, "classification-horizon"),
                        Judged::limited(Classification::Unknown, horizon, "classification-horizon"),
                        Vec::new(),
                    )
                }
            }
            None => (
                Judged::limited(EventualInjectivity::Unknown, horizon, "classification-horizon"),
                Judged::limited(Classification::Unknown, horizon, "classification-horizon"),
                Vec::new(),
            ),
        },
    }
}

/// Observed image chains per stage plus certified stable coset images.
fn image_chains(
    t: &Tower,
    h: usize,
    tail: &Option<TailFacts>,
    tables: &mut StageTables,
) -> Result<(Vec<StageChain>, Vec<Option<StableImage>>), TowerError> {
    let mut chains = Vec::with_capacity(h + 1);
    let mut stable = Vec::with_capacity(h + 1);
    for i in 0..=h {
        let (chain, st) = stage_chain(t, i, h, tail, tables)?;
        chains.push(chain);
        stable.push(st);
    }
    Ok((chains, stable))
}

fn stage_chain(
    t: &Tower,
    i: usize,
    h: usize,
    tail: &Option<TailFacts>,
    tables: &mut StageTables,
) -> Result<(StageChain, Option<StableImage>), TowerError> {
    match t.thread_at(i)? {
        SubgroupHandle::Lattice(g) => {
            let rank = t.group_at(i).rank();
            let mut sizes = Vec::new();
            let mut m = IntMatrix::identity(rank);
            let mut lattices = Vec::new();
            for j in i..=h {
                let image = Lattice::full(m.cols()).image(&m).sum(&g);
                lattices.push(image.clone());
                sizes.push(image.relative_index(&g));
                if j < h {
                    m = m.mul(&hom_matrix(t.bonding_at(j)));
                }
            }
            let stable_at = observed_stable(&lattices).map(|d| i + d);
            // certified stable image for a stationary abelian tail: the group
            // chain reaches the divisible core, then the image freezes
            let st = match (t.abelian_tail(), tail) {
                (Some(ab), Some(facts)) => {
                    let pl = t.prefix_len();
                    let phi = if i >= pl {
                        IntMatrix::identity(ab.rank)
                    } else {
                        hom_matrix(&t.composed_bonding(i, pl))
                    };
                    if facts.ml_stable_at.is_some() {
                        let core = divisible_core(&ab.b, &Lattice::full(ab.rank));
                        Some(StableImage::Ab(core.image(&phi).sum(&g)))
                    } else {
                        // sandwich: the observed chain already sits on the
                        // lower bound given by the core
                        let core = divisible_core(&ab.b, &Lattice::full(ab.rank));
                        let bound = core.image(&phi).sum(&g);
                        lattices.last().filter(|l| **l == bound).map(|_| StableImage::Ab(bound))
                    }
                }
                _ => {
                    if t.finite_len().is_some() {
                        lattices.last().map(|l| StableImage::Ab(l.clone()))
                    } else {
                        None
                    }
                }
            };
            Ok((StageChain { stage: i, image_sizes: sizes, stable_at }, st))
        }
        SubgroupHandle::Words(_) => {
            let mut sizes = Vec::new();
            let mut sets: Vec<BTreeSet<usize>> = Vec::new();
            for j in i..=h {
                let hom = t.composed_bonding(i, j);
                let set = coset_image_set(t, i, j, &hom, tables)?;
                match set {
                    Some(s) => {
                        sizes.push(Some(BigUint::from(s.len())));
                        sets.push(s);
                    }
                    None => sizes.push(None),
                }
            }
            let stable_at = observed_stable(&sets).map(|d| i + d);
            let st = if t.finite_len().is_some() {
                sets.last().map(|s| StableImage::Set(s.clone()))
            } else if tail.as_ref().map(|f| f.constant) == Some(true) {
                // constant tail: the set chain is a forward iteration on a
                // finite set, an observed repeat freezes it
                match (sets.len() >= 2, sets.windows(2).any(|w| w[0] == w[1])) {
                    (true, true) => sets.last().map(|s| StableImage::Set(s.clone())),
                    _ => None,
                }
            } else {
                None
            };
            Ok((StageChain { stage: i, image_sizes: sizes, stable_at }, st))
        }
        SubgroupHandle::Graph(g) => {
            let mut sizes = Vec::new();
            let mut sets: Vec<BTreeSet<usize>> = Vec::new();
            let complete = g.index().is_some();
            for j in i..=h {
                if !complete {
                    sizes.push(None);
                    continue;
                }
                let hom = t.composed_bonding(i, j);
                match graph_image_set(t, i, j, &hom)? {
                    Some(s) => {
                        sizes.push(Some(BigUint::from(s.len())));
                        sets.push(s);
                    }
                    None => sizes.push(None),
                }
            }
            let stable_at = observed_stable(&sets).map(|d| i + d);
            let st = if t.finite_len().is_some() && complete {
                sets.last().map(|s| StableImage::Set(s.clone()))
            } else {
                None
            };
            Ok((StageChain { stage: i, image_sizes: sizes, stable_at }, st))
        }
    }
}

/// Generator images and their inverses, for orbit closures.
fn acting_images(upper: &Alphabet, hom: &GroupHom) -> Vec<Word> {
    let minus = -BigInt::one();
    let mut out = Vec::with_capacity(2 * upper.rank());
    for g in 0..upper.rank() {
        let w = hom.apply(&upper.generator(g));
        out.push(w.pow(&minus));
        out.push(w);
    }
    out
}

/// Cosets of the stage-`i` thread reachable from stage `j`: the orbit of the
/// base coset under the bonding images of the stage-`j` generators.
fn coset_image_set(
    t: &Tower,
    i: usize,
    j: usize,
    hom: &GroupHom,
    tables: &mut StageTables,
) -> Result<Option<BTreeSet<usize>>, TowerError> {
    if !matches!(t.group_at(j), StageGroup::Fp(_)) {
        return Ok(None);
    }
    let acting = acting_images(t.group_at(j).alphabet(), hom);
    let lo = tables.table(i)?;
    let mut set = BTreeSet::from([0]);
    let mut frontier = vec![0];
    while let Some(c) = frontier.pop() {
        for w in &acting {
            let next = lo.act_word(c, w);
            if set.insert(next) {
                frontier.push(next);
            }
        }
    }
    Ok(Some(set))
}

fn graph_image_set(
    t: &Tower,
    i: usize,
    j: usize,
    hom: &GroupHom,
) -> Result<Option<BTreeSet<usize>>, TowerError> {
    let SubgroupHandle::Graph(lo) = t.thread_at(i)? else {
        return Ok(None);
    };
    if lo.index().is_none() {
        return Ok(None);
    }
    let acting = acting_images(t.group_at(j).alphabet(), hom);
    let mut set = BTreeSet::from([0]);
    let mut frontier = vec![0];
    while let Some(c) = frontier.pop() {
        for w in &acting {
            let Some(next) = lo.act_word(c, w) else {
                return Ok(None);
            };
            if set.insert(next) {
                frontier.push(next);
            }
        }
    }
    Ok(Some(set))
}

/// First offset from which the sequence stays constant, if it does.
fn observed_stable<T: PartialEq>(xs: &[T]) -> Option<usize> {
    if xs.is_empty() {
        return None;
    }
    let last = xs.last().unwrap();
    let mut at = xs.len() - 1;
    while at > 0 && xs[at - 1] == *last {
        at -= 1;
    }
    if at == xs.len() - 1 && xs.len() > 1 && xs[at - 1] != *last {
        return None;
    }
    Some(at)
}

impl Tower {
    /// Stable image chains, the Mittag-Leffler verdict, eventual
    /// injectivity, and the covering classification.
    pub fn stability_analysis(
        &self,
        horizon: usize,
    ) -> Result<AnalysisReport<StabilityVerdict>, TowerError> {
        let a = analyze(self, horizon)?;
        let certainty = a.class.certainty;
        let provenance = a.class.rule.clone();
        let verdict = StabilityVerdict {
            chains: a.chains,
            mittag_leffler: a.ml,
            eventually_injective: a.ev,
            classification: a.class,
        };
        Ok(AnalysisReport::new(verdict, certainty, &provenance).with_witnesses(a.witnesses))
    }

    /// Coset counts per stage and the size class of the limit fiber.
    pub fn fiber_model(&self, horizon: usize) -> Result<AnalysisReport<FiberVerdict>, TowerError> {
        let a = analyze(self, horizon)?;
        let (limit, certainty, rule) = fiber_limit(self, &a);
        let verdict = FiberVerdict { counts: a.counts.clone(), limit };
        Ok(AnalysisReport::new(verdict, certainty, rule).with_witnesses(a.witnesses))
    }

    /// Component count of the limit over the base model image.
    pub fn pi0_report(
        &self,
        base: &BaseModel,
        horizon: usize,
    ) -> Result<AnalysisReport<Pi0Verdict>, TowerError> {
        let a = analyze(self, horizon)?;
        let mut tables = StageTables::new(self);
        if let (Classification::Covering(n), Certainty::Certified) =
            (&a.class.value, a.class.certainty)
        {
            let n = *n;
            if let Some(st) = &a.stable[n] {
                if let Some(k) = phi_coset_defect(self, base, n, st, &mut tables)? {
                    let verdict = if k == BigUint::from(1u32) {
                        Pi0Verdict::Trivial
                    } else {
                        Pi0Verdict::CosetCount(k)
                    };
                    return Ok(AnalysisReport::new(verdict, Certainty::Certified, "pi0-stable-index")
                        .with_witnesses(vec![Witness::Stage(n)]));
                }
            }
            return Ok(AnalysisReport::new(
                Pi0Verdict::Unknown,
                Certainty::HorizonLimited(horizon),
                "pi0-horizon",
            ));
        }
        if a.class.value == Classification::StrictLifting
            && a.class.certainty.is_certified()
            && a.counts_cert
            && a.surj_all_cert
            && stable_surjectivity(self, base, &a, &mut tables)? == Some(true)
        {
            return Ok(AnalysisReport::new(
                Pi0Verdict::Uncountable,
                Certainty::Certified,
                "pi0-uncountable-stationary",
            )
            .with_witnesses(a.witnesses));
        }
        Ok(AnalysisReport::new(
            Pi0Verdict::Unknown,
            Certainty::HorizonLimited(horizon),
            "pi0-horizon",
        ))
    }

    /// The tower of deck groups, or a normality violation.
    pub fn deck_tower(&self, horizon: usize) -> Result<DeckReport, TowerError> {
        let h = self.last_stage(horizon);
        let mut tables = StageTables::new(self);
        let mut certainty = Certainty::Certified;
        // normality stage by stage; a constant or abelian tail settles all
        // later stages at once
        let tail_auto = match self.tail() {
            None => true,
            Some(tail) => {
                matches!(tail.group(), StageGroup::Abelian(_))
                    || tail_facts(self, &mut tables)?.constant
            }
        };
        if !tail_auto {
            certainty = Certainty::HorizonLimited(horizon);
        }
        let mut stages = Vec::with_capacity(h + 1);
        for i in 0..=h {
            normality_check(self, i, &mut tables)?;
            stages.push(deck_stage(self, i, &mut tables)?);
        }
        let mut bonding_display = Vec::new();
        for i in 0..h {
            bonding_display.push(format!("{}", self.bonding_at(i)));
        }
        Ok(DeckReport {
            stages,
            bonding_display,
            certainty,
            provenance: "deck-stagewise-quotients".to_string(),
        })
    }

    /// Density of the base image in the limit: the stable-surjectivity
    /// criterion plus the named sufficient conditions.
    pub fn density(
        &self,
        base: &BaseModel,
        horizon: usize,
    ) -> Result<AnalysisReport<DensityVerdict>, TowerError> {
        let a = analyze(self, horizon)?;
        let mut tables = StageTables::new(self);

        // a certified stable image strictly exceeding the base image refutes
        // density outright
        for i in 0..=a.h {
            if let Some(st) = &a.stable[i] {
                if let Some(witness) = phi_misses(self, base, i, st, &mut tables)? {
                    return Ok(AnalysisReport::new(
                        DensityVerdict::NotDense { stage: i },
                        Certainty::Certified,
                        "not-dense-stage-witness",
                    )
                    .with_witnesses(vec![Witness::Stage(i), Witness::WordAt { stage: i, word: witness }]));
                }
            }
        }

        let gate = stable_surjectivity(self, base, &a, &mut tables)?;
        let mut fired = Vec::new();
        if gate == Some(true) {
            fired.push("thm-stable-surjectivity".to_string());
            if a.ml.value == Ml::Holds && a.ml.certainty.is_certified() {
                fired.push("cor-1-mittag-leffler".to_string());
            }
            if a.bondings_onto == Some(true) {
                fired.push("cor-2-surjective-bondings".to_string());
            }
            if let Some(tail) = self.tail() {
                let _ = tail;
                if tail_facts(self, &mut tables)?.constant {
                    fired.push("cor-3-stable-thread".to_string());
                }
            }
            if a.counts_cert && a.counts.iter().all(|c| c.is_some()) {
                fired.push("cor-4-finite-fibers".to_string());
            }
        }
        if !fired.is_empty() {
            let first = fired[0].clone();
            return Ok(AnalysisReport::new(DensityVerdict::Dense(fired), Certainty::Certified, &first));
        }
        Ok(AnalysisReport::new(
            DensityVerdict::Unknown,
            Certainty::HorizonLimited(horizon),
            "density-horizon",
        ))
    }
}

/// Certified "phi hits every stable coset at every stage", the theorem-side
/// criterion. `Some(false)` means a certified failure somewhere.
fn stable_surjectivity(
    t: &Tower,
    base: &BaseModel,
    a: &Analysis,
    tables: &mut StageTables,
) -> Result<Option<bool>, TowerError> {
    // explicit stages with certified stable images
    for i in 0..t.prefix_len().min(a.h + 1) {
        match &a.stable[i] {
            Some(st) => {
                if phi_misses(t, base, i, st, tables)?.is_some() {
                    return Ok(Some(false));
                }
            }
            None => return Ok(None),
        }
    }
    match t.tail() {
        None => Ok(Some(true)),
        Some(tail) => {
            // tail stages for all k at once
            let ab = match t.abelian_tail() {
                Some(ab) => ab,
                None => {
                    // constant non-abelian tail with a certified stable set
                    // at the first tail stage settles every tail stage
                    let facts = tail_facts(t, tables)?;
                    let pl = t.prefix_len();
                    if !facts.constant || pl > a.h {
                        return Ok(None);
                    }
                    return match &a.stable[pl] {
                        Some(st) => Ok(if phi_misses(t, base, pl, st, tables)?.is_some() {
                            Some(false)
                        } else {
                            Some(true)
                        }),
                        None => Ok(None),
                    };
                }
            };
            let phi = base.tail_map().expect("stationary tower has a tail map");
            let m_phi = hom_matrix(phi);
            let phi_image = Lattice::full(m_phi.cols()).image(&m_phi);
            if phi_image.is_full() {
                return Ok(Some(true));
            }
            // core(b) + G_k <= phi(P) + G_k for every k once the core lands
            // inside phi(P) + core(s-thread)
            let core = divisible_core(&ab.b, &Lattice::full(ab.rank));
            let thread_core = divisible_core(&ab.s, &ab.g0);
            if phi_image.sum(&thread_core).contains(&core) {
                return Ok(Some(true));
            }
            // constant thread: one inclusion settles all k
            let facts = tail_facts(t, tables)?;
            if facts.constant && facts.ml_stable_at.is_some() {
                let stable = core.sum(&ab.g0);
                return Ok(Some(phi_image.sum(&ab.g0).contains(&stable)));
            }
            let _ = tail;
            Ok(None)
        }
    }
}

/// A word generating a stable coset missed by the base image, if any.
fn phi_misses(
    t: &Tower,
    base: &BaseModel,
    i: usize,
    st: &StableImage,
    tables: &mut StageTables,
) -> Result<Option<Word>, TowerError> {
    let phi = base.map_at(i);
    match st {
        StableImage::Ab(v) => {
            let SubgroupHandle::Lattice(g) = t.thread_at(i)? else {
                return Err(TowerError::HandleBackend(i));
            };
            let m_phi = hom_matrix(phi);
            let f = Lattice::full(m_phi.cols()).image(&m_phi).sum(&g);
            if f.contains(v) {
                Ok(None)
            } else {
                Ok(v
                    .basis_vectors()
                    .into_iter()
                    .find(|x| !f.member(x))
                    .map(|x| word_from_vector(t.group_at(i).alphabet(), &x)))
            }
        }
        StableImage::Set(set) => {
            // reachable phi-image cosets: close coset 0 under the phi images
            // of the base generators
            let table = tables.table(i)?;
            let gens: Vec<Word> = (0..base.presentation().alphabet().rank())
                .map(|g| phi.apply(&base.presentation().alphabet().generator(g)))
                .collect();
            let mut reach = BTreeSet::from([0usize]);
            let mut frontier = vec![0usize];
            while let Some(c) = frontier.pop() {
                for w in &gens {
                    for word in [w.clone(), w.invert()] {
                        let d = table.act_word(c, &word);
                        if reach.insert(d) {
                            frontier.push(d);
                        }
                    }
                }
            }
            match set.iter().find(|c| !reach.contains(c)) {
                None => Ok(None),
                Some(&c) => Ok(Some(table.representatives()[c].clone())),
            }
        }
    }
}

/// Index of the base-image cosets inside the stable image at stage `n`,
/// when finite.
fn phi_coset_defect(
    t: &Tower,
    base: &BaseModel,
    n: usize,
    st: &StableImage,
    tables: &mut StageTables,
) -> Result<Option<BigUint>, TowerError> {
    match st {
        StableImage::Ab(v) => {
            let SubgroupHandle::Lattice(g) = t.thread_at(n)? else {
                return Err(TowerError::HandleBackend(n));
            };
            let m_phi = hom_matrix(base.map_at(n));
            let f = Lattice::full(m_phi.cols()).image(&m_phi).sum(&g);
            Ok(v.relative_index(&v.intersect(&f)))
        }
        StableImage::Set(set) => {
            // orbit count of the phi image acting on the stable coset set
            let table = tables.table(n)?.clone();
            let phi = base.map_at(n);
            let gens: Vec<Word> = (0..base.presentation().alphabet().rank())
                .map(|g| phi.apply(&base.presentation().alphabet().generator(g)))
                .collect();
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            let mut orbits = 0usize;
            for &start in set {
                if seen.contains(&start) {
                    continue;
                }
                orbits += 1;
                let mut frontier = vec![start];
                seen.insert(start);
                while let Some(c) = frontier.pop() {
                    for w in &gens {
                        for word in [w.clone(), w.invert()] {
                            let d = table.act_word(c, &word);
                            if set.contains(&d) && seen.insert(d) {
                                frontier.push(d);
                            }
                        }
                    }
                }
            }
            Ok(Some(BigUint::from(orbits)))
        }
    }
}

fn fiber_limit(t: &Tower, a: &Analysis) -> (LimitCardinality, Certainty, &'static str) {
    if let (Classification::Covering(n), Certainty::Certified) = (&a.class.value, a.class.certainty)
    {
        if let Some(st) = &a.stable[*n] {
            let size = match st {
                StableImage::Ab(v) => {
                    let g = match t.thread_at(*n) {
                        Ok(SubgroupHandle::Lattice(g)) => g,
                        _ => return (LimitCardinality::Unknown, Certainty::HorizonLimited(a.h), "fiber-horizon"),
                    };
                    v.relative_index(&g)
                }
                StableImage::Set(s) => Some(BigUint::from(s.len())),
            };
            if let Some(k) = size {
                return (LimitCardinality::Finite(k), Certainty::Certified, "fiber-eventually-injective");
            }
        }
        return (LimitCardinality::Unknown, Certainty::HorizonLimited(a.h), "fiber-horizon");
    }
    if a.class.value == Classification::StrictLifting
        && a.class.certainty.is_certified()
        && a.counts_cert
        && a.counts.iter().all(|c| c.is_some())
        && a.surj_all_cert
    {
        return (
            LimitCardinality::Uncountable,
            Certainty::Certified,
            "fiber-uncountable-stationary",
        );
    }
    (LimitCardinality::Unknown, Certainty::HorizonLimited(a.h), "fiber-horizon")
}

fn normality_check(t: &Tower, i: usize, tables: &mut StageTables) -> Result<(), TowerError> {
    match t.thread_at(i)? {
        SubgroupHandle::Lattice(_) => Ok(()),
        SubgroupHandle::Words(ws) => {
            let table = tables.table(i)?;
            let alphabet = t.group_at(i).alphabet().clone();
            for g in 0..alphabet.rank() {
                for sign in [1i8, -1] {
                    for w in &ws {
                        let conj = conjugate(&alphabet, g, sign, w);
                        if !table.member(&conj) {
                            return Err(TowerError::Normality { stage: i, witness: conj });
                        }
                    }
                }
            }
            Ok(())
        }
        SubgroupHandle::Graph(gr) => {
            let alphabet = t.group_at(i).alphabet().clone();
            for g in 0..alphabet.rank() {
                for sign in [1i8, -1] {
                    for w in gr.basis() {
                        let conj = conjugate(&alphabet, g, sign, &w);
                        if !gr.member(&conj) {
                            return Err(TowerError::Normality { stage: i, witness: conj });
                        }
                    }
                }
            }
            Ok(())
        }
    }
}

fn conjugate(alphabet: &Alphabet, g: usize, sign: i8, w: &Word) -> Word {
    let mut x = alphabet.empty_word();
    x.push_run(g, BigInt::from(sign));
    x.multiply(w).multiply(&x.invert())
}

fn deck_stage(t: &Tower, i: usize, tables: &mut StageTables) -> Result<DeckStage, TowerError> {
    match t.thread_at(i)? {
        SubgroupHandle::Lattice(l) => {
            let q = l.quotient_info();
            Ok(DeckStage::AbelianQuotient {
                stage: i,
                free_rank: q.free_rank,
                torsion: q.torsion,
            })
        }
        SubgroupHandle::Words(ws) => {
            if ws.is_empty() {
                let order = BigUint::from(tables.table(i)?.index());
                return Ok(DeckStage::FiniteQuotient { stage: i, order });
            }
            Ok(DeckStage::FiniteQuotient {
                stage: i,
                order: BigUint::from(tables.table(i)?.index()),
            })
        }
        SubgroupHandle::Graph(g) => {
            if g.is_trivial() {
                Ok(DeckStage::FullStage {
                    stage: i,
                    backend: "free",
                    rank: t.group_at(i).rank(),
                })
            } else {
                match g.index() {
                    Some(k) => Ok(DeckStage::FiniteQuotient { stage: i, order: BigUint::from(k) }),
                    None => Err(TowerError::Unsupported(
                        "deck description of an infinite-index free thread",
                    )),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset::Presentation;
    use crate::tower::tests::{solenoid_tower, z_alphabet};
    use crate::word::parse_word;

    /// Stage Z with the constant thread 2Z: an honest covering tower.
    fn covering_tower(horizon: usize) -> Tower {
        let a = z_alphabet();
        let stage = StageGroup::Abelian(a.clone());
        let two = Lattice::from_generators(1, &[vec![BigInt::from(2)]]);
        let tail = StationaryTail::new(
            stage,
            SubgroupHandle::Lattice(two),
            GroupHom::identity(&a),
            GroupHom::identity(&a),
        )
        .unwrap();
        Tower::stationary(tail, horizon)
    }

    fn identity_base(t: &Tower) -> BaseModel {
        let a = z_alphabet();
        BaseModel::new(t, Presentation::free(a.clone()), Vec::new(), Some(GroupHom::identity(&a)))
            .unwrap()
    }

    /// F_1 <- F_2 with trivial threads and the retraction killing the top
    /// generator.
    fn wedge_prefix_tower() -> Tower {
        let a1 = Alphabet::new(["a1"]).unwrap();
        let a2 = Alphabet::new(["a1", "a2"]).unwrap();
        let f1 = StageGroup::Free(a1.clone());
        let f2 = StageGroup::Free(a2.clone());
        let stages = vec![
            GroupStage::new(f1, SubgroupHandle::Graph(SubgroupGraph::trivial(&a1))).unwrap(),
            GroupStage::new(f2, SubgroupHandle::Graph(SubgroupGraph::trivial(&a2))).unwrap(),
        ];
        let r = GroupHom::new(
            a2.clone(),
            a1.clone(),
            vec![parse_word(&a1, "a1").unwrap(), a1.empty_word()],
        )
        .unwrap();
        Tower::finite(stages, vec![r], 8).unwrap()
    }

    #[test]
    fn dyadic_is_strict_lifting_with_certificate() {
        let t = solenoid_tower(2, 16);
        let report = t.stability_analysis(16).unwrap();
        let v = &report.verdict;
        assert_eq!(v.classification.value, Classification::StrictLifting);
        assert!(v.classification.certainty.is_certified());
        assert_eq!(v.classification.rule, "strict-lifting-stationary-step");
        assert_eq!(v.eventually_injective.value, EventualInjectivity::NonInjectiveRecurring);
        assert_eq!(v.mittag_leffler.value, Ml::Holds);
        assert_eq!(v.mittag_leffler.rule, "ml-surjective-bondings");
        assert!(report
            .witnesses
            .iter()
            .any(|w| matches!(w, Witness::WordAt { stage: 0, word } if format!("{word}") == "a")));
    }

    #[test]
    fn dyadic_image_chains_collapse() {
        let t = solenoid_tower(2, 16);
        let report = t.stability_analysis(4).unwrap();
        let chain0 = &report.verdict.chains[0];
        let sizes: Vec<u32> = chain0
            .image_sizes
            .iter()
            .map(|s| u32::try_from(s.as_ref().unwrap()).unwrap())
            .collect();
        // images of Z/1 <- Z/2 <- Z/4 ... inside stage 0: everything folds
        assert_eq!(sizes, vec![1, 1, 1, 1, 1]);
        let chain2 = &report.verdict.chains[2];
        let sizes: Vec<u32> = chain2
            .image_sizes
            .iter()
            .map(|s| u32::try_from(s.as_ref().unwrap()).unwrap())
            .collect();
        // stage 2 has 4 cosets; deeper stages still cover all of them
        assert_eq!(sizes, vec![4, 4, 4]);
    }

    #[test]
    fn dyadic_fiber_counts_double_and_limit_is_uncountable() {
        let t = solenoid_tower(2, 16);
        let report = t.fiber_model(5).unwrap();
        let counts: Vec<u64> = report
            .verdict
            .counts
            .iter()
            .map(|c| u64::try_from(c.as_ref().unwrap()).unwrap())
            .collect();
        assert_eq!(counts, vec![1, 2, 4, 8, 16, 32]);
        assert_eq!(report.verdict.limit, LimitCardinality::Uncountable);
        assert!(report.certainty.is_certified());
    }

    #[test]
    fn covering_tower_has_finite_fiber() {
        let t = covering_tower(16);
        let stab = t.stability_analysis(16).unwrap();
        assert_eq!(stab.verdict.classification.value, Classification::Covering(0));
        assert!(stab.verdict.classification.certainty.is_certified());
        let fiber = t.fiber_model(4).unwrap();
        assert_eq!(fiber.verdict.limit, LimitCardinality::Finite(BigUint::from(2u32)));
        assert!(fiber.certainty.is_certified());
    }

    #[test]
    fn covering_tower_pi0_depends_on_the_base_image() {
        let t = covering_tower(16);
        let base = identity_base(&t);
        let report = t.pi0_report(&base, 8).unwrap();
        assert_eq!(report.verdict, Pi0Verdict::Trivial);
        assert!(report.certainty.is_certified());

        // base mapping onto 2Z misses one of the two stable cosets
        let a = z_alphabet();
        let doubling =
            GroupHom::new(a.clone(), a.clone(), vec![parse_word(&a, "a^2").unwrap()]).unwrap();
        let sparse =
            BaseModel::new(&t, Presentation::free(a.clone()), Vec::new(), Some(doubling)).unwrap();
        let report = t.pi0_report(&sparse, 8).unwrap();
        assert_eq!(report.verdict, Pi0Verdict::CosetCount(BigUint::from(2u32)));
    }

    #[test]
    fn dyadic_pi0_is_uncountable_over_a_full_base() {
        let t = solenoid_tower(2, 16);
        let base = identity_base(&t);
        let report = t.pi0_report(&base, 8).unwrap();
        assert_eq!(report.verdict, Pi0Verdict::Uncountable);
        assert!(report.certainty.is_certified());
    }

    #[test]
    fn dyadic_density_fires_theorem_and_corollaries() {
        let t = solenoid_tower(2, 16);
        let base = identity_base(&t);
        let report = t.density(&base, 8).unwrap();
        let DensityVerdict::Dense(fired) = &report.verdict else {
            panic!("expected a dense verdict, got {:?}", report.verdict);
        };
        assert_eq!(
            fired,
            &vec![
                "thm-stable-surjectivity".to_string(),
                "cor-1-mittag-leffler".to_string(),
                "cor-2-surjective-bondings".to_string(),
                "cor-4-finite-fibers".to_string(),
            ]
        );
        assert!(report.certainty.is_certified());
        assert_eq!(report.provenance, "thm-stable-surjectivity");
    }

    #[test]
    fn sparse_base_is_not_dense_in_the_covering_tower() {
        let t = covering_tower(16);
        let a = z_alphabet();
        let doubling =
            GroupHom::new(a.clone(), a.clone(), vec![parse_word(&a, "a^2").unwrap()]).unwrap();
        let base =
            BaseModel::new(&t, Presentation::free(a.clone()), Vec::new(), Some(doubling)).unwrap();
        let report = t.density(&base, 8).unwrap();
        assert_eq!(report.verdict, DensityVerdict::NotDense { stage: 0 });
        assert!(report.certainty.is_certified());
        assert!(report
            .witnesses
            .iter()
            .any(|w| matches!(w, Witness::WordAt { stage: 0, word } if format!("{word}") == "a")));
    }

    #[test]
    fn dyadic_deck_stages_are_cyclic_of_doubling_order() {
        let t = solenoid_tower(2, 16);
        let report = t.deck_tower(4).unwrap();
        assert!(report.certainty.is_certified());
        assert_eq!(report.stages.len(), 5);
        assert_eq!(
            report.stages[0],
            DeckStage::AbelianQuotient { stage: 0, free_rank: 0, torsion: vec![] }
        );
        assert_eq!(
            report.stages[3],
            DeckStage::AbelianQuotient { stage: 3, free_rank: 0, torsion: vec![BigUint::from(8u32)] }
        );
        assert_eq!(report.stages[3].order(), Some(BigUint::from(8u32)));
    }

    #[test]
    fn non_normal_fp_thread_is_reported_with_a_conjugate() {
        // S3 with the order-2 subgroup <b>, which a conjugates out of itself
        let a = Alphabet::new(["a", "b"]).unwrap();
        let p = Presentation::new(
            a.clone(),
            vec![
                parse_word(&a, "a^3").unwrap(),
                parse_word(&a, "b^2").unwrap(),
                parse_word(&a, "a*b*a*b").unwrap(),
            ],
        )
        .unwrap();
        let stage = GroupStage::new(
            StageGroup::Fp(p),
            SubgroupHandle::Words(vec![parse_word(&a, "b").unwrap()]),
        )
        .unwrap();
        let t = Tower::finite(vec![stage], vec![], 4).unwrap();
        let err = t.deck_tower(4).unwrap_err();
        match err {
            TowerError::Normality { stage: 0, witness } => {
                assert_eq!(format!("{witness}"), "a*b*a^-1");
            }
            other => panic!("expected a normality violation, got {other:?}"),
        }
    }

    #[test]
    fn fp_quotient_tower_reports_orders() {
        // Z/4 <- Z/8 with trivial threads, bonding a |-> a
        let a = Alphabet::new(["a"]).unwrap();
        let z4 = Presentation::new(a.clone(), vec![parse_word(&a, "a^4").unwrap()]).unwrap();
        let z8 = Presentation::new(a.clone(), vec![parse_word(&a, "a^8").unwrap()]).unwrap();
        let stages = vec![
            GroupStage::new(StageGroup::Fp(z4), SubgroupHandle::Words(vec![])).unwrap(),
            GroupStage::new(StageGroup::Fp(z8), SubgroupHandle::Words(vec![])).unwrap(),
        ];
        let b = GroupHom::identity(&a);
        let t = Tower::finite(stages, vec![b], 4).unwrap();
        let report = t.deck_tower(4).unwrap();
        assert_eq!(
            report.stages,
            vec![
                DeckStage::FiniteQuotient { stage: 0, order: BigUint::from(4u32) },
                DeckStage::FiniteQuotient { stage: 1, order: BigUint::from(8u32) },
            ]
        );
        let fiber = t.fiber_model(4).unwrap();
        let counts: Vec<u64> = fiber
            .verdict
            .counts
            .iter()
            .map(|c| u64::try_from(c.as_ref().unwrap()).unwrap())
            .collect();
        assert_eq!(counts, vec![4, 8]);
    }

    #[test]
    fn free_prefix_tower_stays_unclassified_but_ml_holds() {
        let t = wedge_prefix_tower();
        let report = t.stability_analysis(8).unwrap();
        assert_eq!(report.verdict.classification.value, Classification::Unknown);
        assert!(!report.verdict.classification.certainty.is_certified());
        // retractions are onto, so the image chains are full at every stage
        assert_eq!(report.verdict.mittag_leffler.value, Ml::Holds);
        assert_eq!(report.verdict.mittag_leffler.rule, "ml-surjective-bondings");
        assert!(report.verdict.mittag_leffler.certainty.is_certified());
        // trivial threads over free stages have infinite coset spaces
        let fiber = t.fiber_model(8).unwrap();
        assert!(fiber.verdict.counts.iter().all(|c| c.is_none()));
        assert_eq!(fiber.verdict.limit, LimitCardinality::Unknown);
    }

    #[test]
    fn deck_of_free_stages_with_trivial_threads_is_the_full_group() {
        let t = wedge_prefix_tower();
        let report = t.deck_tower(8).unwrap();
        assert_eq!(
            report.stages,
            vec![
                DeckStage::FullStage { stage: 0, backend: "free", rank: 1 },
                DeckStage::FullStage { stage: 1, backend: "free", rank: 2 },
            ]
        );
    }

    #[test]
    fn triadic_and_dyadic_share_the_analysis_shape() {
        let t = solenoid_tower(3, 16);
        let report = t.stability_analysis(8).unwrap();
        assert_eq!(report.verdict.classification.value, Classification::StrictLifting);
        let fiber = t.fiber_model(3).unwrap();
        let counts: Vec<u64> = fiber
            .verdict
            .counts
            .iter()
            .map(|c| u64::try_from(c.as_ref().unwrap()).unwrap())
            .collect();
        assert_eq!(counts, vec![1, 3, 9, 27]);
    }
}
