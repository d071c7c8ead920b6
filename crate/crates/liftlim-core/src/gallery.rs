//! Ready-made towers for the classical examples, with their expected
//! verdicts attached. The same entries serve as the regression corpus: a
//! golden test re-runs every analysis and compares against the expectations
//! stored here.

use crate::coset::Presentation;
use crate::lattice::Lattice;
use crate::stallings::SubgroupGraph;
use crate::tower::{
    BaseModel, Classification, GroupStage, LimitCardinality, Ml, Pi0Verdict, StageGroup,
    StationaryTail, SubgroupHandle, Tower, TowerError, DEFAULT_HORIZON,
};
use crate::word::{parse_word, Alphabet, GroupHom};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("unknown gallery entry `{0}`")]
    UnknownEntry(String),
    #[error("parameter {name} = {value} is outside the documented range {range}")]
    ParamOutOfRange { name: &'static str, value: i64, range: &'static str },
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// Verdict fragments an entry is expected to reproduce under a fresh run.
/// `None` means the entry makes no promise for that analysis.
#[derive(Clone, Debug, Default)]
pub struct ExpectedFragments {
    pub classification: Option<Classification>,
    pub classification_certified: bool,
    pub mittag_leffler: Option<Ml>,
    pub fiber_limit: Option<LimitCardinality>,
    pub pi0: Option<Pi0Verdict>,
    pub dense: Option<bool>,
}

/// A named example tower with its base model and promised verdicts.
pub struct GalleryEntry {
    pub name: String,
    pub params: BTreeMap<String, i64>,
    pub tower: Tower,
    pub base: Option<BaseModel>,
    pub expected: ExpectedFragments,
}

/// Names accepted by [`make_gallery`].
pub fn entry_names() -> &'static [&'static str] {
    &["dyadic-solenoid", "p-solenoid", "warsawonoid", "hawaiian", "product-tower"]
}

/// Builds a gallery entry by name. Parameters: `p-solenoid` takes `p` (2 to
/// 1000000); `hawaiian` and `product-tower` take `n` (1 to 16, resp. 1 to 12);
/// the others take none.
pub fn make_gallery(
    name: &str,
    params: &BTreeMap<String, i64>,
) -> Result<GalleryEntry, GalleryError> {
    match name {
        "dyadic-solenoid" => solenoid(name, 2, params),
        "p-solenoid" => {
            let p = *params.get("p").unwrap_or(&2);
            if !(2..=1_000_000).contains(&p) {
                return Err(GalleryError::ParamOutOfRange {
                    name: "p",
                    value: p,
                    range: "2..=1000000",
                });
            }
            solenoid(name, p, params)
        }
        // the Warsaw-circle limit carries the same group data as the dyadic
        // solenoid; only the spaces differ
        "warsawonoid" => solenoid(name, 2, params),
        "hawaiian" => {
            let n = *params.get("n").unwrap_or(&4);
            if !(1..=16).contains(&n) {
                return Err(GalleryError::ParamOutOfRange { name: "n", value: n, range: "1..=16" });
            }
            hawaiian(n as usize, params)
        }
        "product-tower" => {
            let n = *params.get("n").unwrap_or(&3);
            if !(1..=12).contains(&n) {
                return Err(GalleryError::ParamOutOfRange { name: "n", value: n, range: "1..=12" });
            }
            product_tower(n as usize, params)
        }
        other => Err(GalleryError::UnknownEntry(other.to_string())),
    }
}

/// Stage Z, identity bondings, thread multiplied by `p` at each step. The
/// inverse limit of the `p^k`-fold circle coverings.
fn solenoid(
    name: &str,
    p: i64,
    params: &BTreeMap<String, i64>,
) -> Result<GalleryEntry, GalleryError> {
    let a = Alphabet::new(["a"]).unwrap();
    let step =
        GroupHom::new(a.clone(), a.clone(), vec![parse_word(&a, &format!("a^{p}")).unwrap()])
            .unwrap();
    let tail = StationaryTail::new(
        StageGroup::Abelian(a.clone()),
        SubgroupHandle::Lattice(Lattice::full(1)),
        GroupHom::identity(&a),
        step,
    )?;
    let tower = Tower::stationary(tail, DEFAULT_HORIZON);
    let base = BaseModel::new(
        &tower,
        Presentation::free(a.clone()),
        Vec::new(),
        Some(GroupHom::identity(&a)),
    )?;
    Ok(GalleryEntry {
        name: name.to_string(),
        params: params.clone(),
        tower,
        base: Some(base),
        expected: ExpectedFragments {
            classification: Some(Classification::StrictLifting),
            classification_certified: true,
            mittag_leffler: Some(Ml::Holds),
            fiber_limit: Some(LimitCardinality::Uncountable),
            pi0: Some(Pi0Verdict::Uncountable),
            dense: Some(true),
        },
    })
}

fn wedge_alphabet(rank: usize) -> Alphabet {
    Alphabet::new((1..=rank).map(|i| format!("a{i}"))).unwrap()
}

/// Free stages F_0 .. F_n with the retractions killing the top generator and
/// trivial threads: the group shadow of the Hawaiian earring as an inverse
/// limit of finite wedges.
fn hawaiian(n: usize, params: &BTreeMap<String, i64>) -> Result<GalleryEntry, GalleryError> {
    let mut stages = Vec::with_capacity(n + 1);
    let mut bondings = Vec::with_capacity(n);
    for i in 0..=n {
        let a = wedge_alphabet(i);
        stages.push(GroupStage::new(
            StageGroup::Free(a.clone()),
            SubgroupHandle::Graph(SubgroupGraph::trivial(&a)),
        )?);
    }
    for i in 0..n {
        let lo = wedge_alphabet(i);
        let hi = wedge_alphabet(i + 1);
        let mut images = Vec::with_capacity(i + 1);
        for g in 0..i {
            images.push(lo.generator(g));
        }
        images.push(lo.empty_word());
        bondings.push(GroupHom::new(hi, lo, images).unwrap());
    }
    let tower = Tower::finite(stages, bondings, DEFAULT_HORIZON)?;
    // base group F_n, mapping to stage i by killing the generators above i
    let top = wedge_alphabet(n);
    let mut maps = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let lo = wedge_alphabet(i);
        let mut images = Vec::with_capacity(n);
        for g in 0..n {
            if g < i {
                images.push(lo.generator(g));
            } else {
                images.push(lo.empty_word());
            }
        }
        maps.push(GroupHom::new(top.clone(), lo, images).unwrap());
    }
    let base = BaseModel::new(&tower, Presentation::free(top), maps, None)?;
    Ok(GalleryEntry {
        name: "hawaiian".to_string(),
        params: params.clone(),
        tower,
        base: Some(base),
        expected: ExpectedFragments {
            classification: Some(Classification::Unknown),
            classification_certified: false,
            mittag_leffler: Some(Ml::Holds),
            fiber_limit: None,
            pi0: None,
            dense: None,
        },
    })
}

fn coordinate_alphabet(rank: usize) -> Alphabet {
    Alphabet::new((1..=rank).map(|i| format!("x{i}"))).unwrap()
}

/// Stages Z^1 .. Z^n joined by the projections dropping the last coordinate,
/// trivial thread: the finite-stage shadow of the countable product of
/// circles.
fn product_tower(n: usize, params: &BTreeMap<String, i64>) -> Result<GalleryEntry, GalleryError> {
    let mut stages = Vec::with_capacity(n);
    let mut bondings = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..=n {
        let a = coordinate_alphabet(i);
        stages.push(GroupStage::new(
            StageGroup::Abelian(a.clone()),
            SubgroupHandle::Lattice(Lattice::zero(i)),
        )?);
    }
    for i in 1..n {
        let lo = coordinate_alphabet(i);
        let hi = coordinate_alphabet(i + 1);
        let mut images: Vec<_> = (0..i).map(|g| lo.generator(g)).collect();
        images.push(lo.empty_word());
        bondings.push(GroupHom::new(hi, lo, images).unwrap());
    }
    let tower = Tower::finite(stages, bondings, DEFAULT_HORIZON)?;
    let top = coordinate_alphabet(n);
    let mut maps = Vec::with_capacity(n);
    for i in 1..=n {
        let lo = coordinate_alphabet(i);
        let mut images = Vec::with_capacity(n);
        for g in 0..n {
            if g < i {
                images.push(lo.generator(g));
            } else {
                images.push(lo.empty_word());
            }
        }
        maps.push(GroupHom::new(top.clone(), lo, images).unwrap());
    }
    let base = BaseModel::new(&tower, Presentation::free(top), maps, None)?;
    Ok(GalleryEntry {
        name: "product-tower".to_string(),
        params: params.clone(),
        tower,
        base: Some(base),
        expected: ExpectedFragments {
            classification: Some(Classification::Unknown),
            classification_certified: false,
            mittag_leffler: Some(Ml::Holds),
            fiber_limit: None,
            pi0: None,
            dense: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{CofinalIndices, Pi1Verdict};
    use num_bigint::BigUint;

    fn build(name: &str, params: &[(&str, i64)]) -> GalleryEntry {
        let map: BTreeMap<String, i64> =
            params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        make_gallery(name, &map).unwrap()
    }

    #[test]
    fn every_entry_is_coherent_and_matches_its_promises() {
        for (name, params) in [
            ("dyadic-solenoid", vec![]),
            ("p-solenoid", vec![("p", 3)]),
            ("warsawonoid", vec![]),
            ("hawaiian", vec![("n", 4)]),
            ("product-tower", vec![("n", 3)]),
        ] {
            let entry = build(name, &params);
            let coherence = entry.tower.check_coherence().unwrap();
            assert!(coherence.verdict.is_ok(), "{name} must be coherent");

            let stab = entry.tower.stability_analysis(8).unwrap();
            if let Some(c) = &entry.expected.classification {
                assert_eq!(&stab.verdict.classification.value, c, "{name} classification");
                assert_eq!(
                    stab.verdict.classification.certainty.is_certified(),
                    entry.expected.classification_certified,
                    "{name} classification certainty"
                );
            }
            if let Some(ml) = &entry.expected.mittag_leffler {
                assert_eq!(&stab.verdict.mittag_leffler.value, ml, "{name} mittag-leffler");
                assert!(stab.verdict.mittag_leffler.certainty.is_certified());
            }
            if let Some(limit) = &entry.expected.fiber_limit {
                let fiber = entry.tower.fiber_model(6).unwrap();
                assert_eq!(&fiber.verdict.limit, limit, "{name} fiber limit");
            }
            if let Some(pi0) = &entry.expected.pi0 {
                let base = entry.base.as_ref().expect("pi0 promise needs a base model");
                let report = entry.tower.pi0_report(base, 6).unwrap();
                assert_eq!(&report.verdict, pi0, "{name} pi0");
            }
            if let Some(dense) = entry.expected.dense {
                let base = entry.base.as_ref().expect("density promise needs a base model");
                let report = entry.tower.density(base, 6).unwrap();
                assert_eq!(
                    matches!(report.verdict, crate::tower::DensityVerdict::Dense(_)),
                    dense,
                    "{name} density"
                );
            }
        }
    }

    #[test]
    fn unknown_names_and_bad_parameters_are_rejected() {
        assert!(matches!(
            make_gallery("borromean", &BTreeMap::new()),
            Err(GalleryError::UnknownEntry(_))
        ));
        let mut params = BTreeMap::new();
        params.insert("p".to_string(), 1);
        assert!(matches!(
            make_gallery("p-solenoid", &params),
            Err(GalleryError::ParamOutOfRange { name: "p", .. })
        ));
    }

    #[test]
    fn hawaiian_rejects_the_commutator_where_both_loops_live() {
        let entry = build("hawaiian", &[("n", 4)]);
        let base = entry.base.as_ref().unwrap();
        let a = base.presentation().alphabet().clone();
        let w = parse_word(&a, "a1*a2*a1^-1*a2^-1").unwrap();
        let report = entry.tower.pi1_membership(base, &w, 8).unwrap();
        // the commutator dies under every retraction to fewer than two
        // loops, and survives exactly from the rank-2 stage on
        assert_eq!(report.verdict, Pi1Verdict::RejectedAtStage(2));
        assert!(report.certainty.is_certified());
    }

    #[test]
    fn solenoid_verdicts_survive_even_index_restriction() {
        let entry = build("p-solenoid", &[("p", 2)]);
        let restricted = entry
            .tower
            .restrict_cofinal(&CofinalIndices::Arithmetic { start: 0, stride: 2 })
            .unwrap();
        let full = entry.tower.stability_analysis(8).unwrap();
        let thin = restricted.stability_analysis(8).unwrap();
        assert_eq!(full.verdict.classification.value, thin.verdict.classification.value);
        assert_eq!(full.verdict.mittag_leffler.value, thin.verdict.mittag_leffler.value);
        assert_eq!(full.certainty, thin.certainty);

        let fiber = restricted.fiber_model(3).unwrap();
        let counts: Vec<u64> = fiber
            .verdict
            .counts
            .iter()
            .map(|c| u64::try_from(c.as_ref().unwrap()).unwrap())
            .collect();
        // every second stage of the dyadic tower: indices 1, 4, 16, 64
        assert_eq!(counts, vec![1, 4, 16, 64]);
        assert_eq!(fiber.verdict.limit, LimitCardinality::Uncountable);
    }

    #[test]
    fn product_tower_deck_groups_are_the_stages() {
        let entry = build("product-tower", &[("n", 3)]);
        let report = entry.tower.deck_tower(8).unwrap();
        assert_eq!(report.stages.len(), 3);
        for (i, stage) in report.stages.iter().enumerate() {
            match stage {
                crate::tower::DeckStage::AbelianQuotient { free_rank, torsion, .. } => {
                    assert_eq!(*free_rank, i + 1);
                    assert!(torsion.is_empty());
                }
                other => panic!("expected an abelian quotient, got {other:?}"),
            }
        }
    }

    #[test]
    fn deck_orders_match_fiber_counts_where_both_are_finite() {
        let entry = build("dyadic-solenoid", &[]);
        let deck = entry.tower.deck_tower(5).unwrap();
        let fiber = entry.tower.fiber_model(5).unwrap();
        for (stage, count) in deck.stages.iter().zip(fiber.verdict.counts.iter()) {
            assert_eq!(stage.order(), count.clone());
        }
        assert_eq!(deck.stages[4].order(), Some(BigUint::from(16u32)));
    }
}
