//! Operations on towers: membership of base classes in the descriptor,
//! meets of threads, threads generated by a subgroup, lifting of maps
//! between towers, and restriction to cofinal index sets.

use super::*;
use crate::lattice::divisible_core;

/// Verdict payload of [`Tower::pi1_membership`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pi1Verdict {
    InDescriptor,
    RejectedAtStage(usize),
}

/// Maps driving a lift question, one per stage or one reused hom.
#[derive(Clone, Debug)]
pub enum LiftMaps {
    Uniform(GroupHom),
    PerStage(Vec<GroupHom>),
}

/// Verdict payload of [`Tower::lift_exists`]. Witnesses pair a target stage
/// with the smallest source stage whose image already lands in the target
/// thread.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftVerdict {
    Liftable { witnesses: Vec<(usize, usize)> },
    Obstructed { stage: usize },
    Unknown,
}

/// Index selection for [`Tower::restrict_cofinal`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CofinalIndices {
    Finite(Vec<usize>),
    Arithmetic { start: usize, stride: usize },
}

/// A tower whose threads are the base-map images of one subgroup, together
/// with a note on how to read it.
#[derive(Clone, Debug)]
pub struct DerivedThread {
    pub tower: Tower,
    pub note: String,
}

impl Tower {
    /// Does the base class of `w` survive into every stage thread?
    ///
    /// Rejection is exact and certified: the first stage whose thread misses
    /// the image of `w` is reported. Acceptance over a stationary abelian
    /// tail is certified through the divisible core of the thread step;
    /// otherwise acceptance within the horizon is reported as such.
    pub fn pi1_membership(
        &self,
        base: &BaseModel,
        w: &Word,
        horizon: usize,
    ) -> Result<AnalysisReport<Pi1Verdict>, TowerError> {
        if w.alphabet() != base.presentation().alphabet() {
            return Err(TowerError::Alphabet("word is not over the base alphabet"));
        }
        let mut tables = StageTables::new(self);
        if w.is_empty() {
            return Ok(AnalysisReport::new(
                Pi1Verdict::InDescriptor,
                Certainty::Certified,
                "pi1-identity",
            ));
        }

        let explicit = match self.finite_len() {
            Some(n) => n,
            None => self.prefix_len(),
        };
        for i in 0..explicit {
            let v = base.map_at(i).apply(w);
            let handle = self.thread_at(i)?;
            if !thread_member(i, &handle, &v, &mut tables)? {
                return Ok(AnalysisReport::new(
                    Pi1Verdict::RejectedAtStage(i),
                    Certainty::Certified,
                    "pi1-stage-witness",
                )
                .with_witnesses(vec![Witness::WordAt { stage: i, word: v }]));
            }
        }
        let Some(_tail) = self.tail() else {
            return Ok(AnalysisReport::new(
                Pi1Verdict::InDescriptor,
                Certainty::Certified,
                "pi1-finite-tower",
            ));
        };

        let pl = self.prefix_len();
        let phi = base.tail_map().expect("stationary tower has a tail map");
        let v = phi.apply(w);

        if let Some(ab) = self.abelian_tail() {
            let x = v.abelianize();
            let core = divisible_core(&ab.s, &ab.g0);
            if core.member(&x) {
                return Ok(AnalysisReport::new(
                    Pi1Verdict::InDescriptor,
                    Certainty::Certified,
                    "pi1-divisible-core-tail",
                ));
            }
            // outside the core the chain s^k(G0) must shed x at some k
            let mut g = ab.g0.clone();
            for k in 0..4096usize {
                if !g.member(&x) {
                    return Ok(AnalysisReport::new(
                        Pi1Verdict::RejectedAtStage(pl + k),
                        Certainty::Certified,
                        "pi1-stage-witness",
                    )
                    .with_witnesses(vec![Witness::WordAt { stage: pl + k, word: v }]));
                }
                g = g.image(&ab.s);
            }
            return Ok(AnalysisReport::new(
                Pi1Verdict::InDescriptor,
                Certainty::HorizonLimited(4096),
                "pi1-horizon",
            ));
        }

        // word-based tails: a constant thread is settled by one test
        let constant = {
            let t0 = self.thread_at(pl)?;
            let t1 = self.thread_at(pl + 1)?;
            t0 == t1
        };
        if constant {
            let handle = self.thread_at(pl)?;
            let ok = thread_member(pl, &handle, &v, &mut tables)?;
            return Ok(if ok {
                AnalysisReport::new(Pi1Verdict::InDescriptor, Certainty::Certified, "pi1-constant-tail")
            } else {
                AnalysisReport::new(
                    Pi1Verdict::RejectedAtStage(pl),
                    Certainty::Certified,
                    "pi1-stage-witness",
                )
                .with_witnesses(vec![Witness::WordAt { stage: pl, word: v }])
            });
        }
        for k in 0..=horizon.saturating_sub(pl) {
            let handle = self.thread_at(pl + k)?;
            if !thread_member(pl + k, &handle, &v, &mut tables)? {
                return Ok(AnalysisReport::new(
                    Pi1Verdict::RejectedAtStage(pl + k),
                    Certainty::Certified,
                    "pi1-stage-witness",
                )
                .with_witnesses(vec![Witness::WordAt { stage: pl + k, word: v }]));
            }
        }
        Ok(AnalysisReport::new(
            Pi1Verdict::InDescriptor,
            Certainty::HorizonLimited(horizon),
            "pi1-horizon",
        ))
    }

    /// Stagewise intersection of two threads over the same stages and
    /// bondings.
    pub fn thread_meet(&self, other: &Tower) -> Result<Tower, TowerError> {
        if self.prefix_len() != other.prefix_len()
            || self.finite_len() != other.finite_len()
            || self.is_stationary() != other.is_stationary()
        {
            return Err(TowerError::Mismatch);
        }
        for i in 0..self.prefix_len() {
            if self.group_at(i) != other.group_at(i) {
                return Err(TowerError::Mismatch);
            }
        }
        if self.bondings != other.bondings {
            return Err(TowerError::Mismatch);
        }

        let mut prefix = Vec::with_capacity(self.prefix_len());
        for i in 0..self.prefix_len() {
            let handle = meet_handles(self.prefix()[i].thread(), other.prefix()[i].thread())?;
            prefix.push(GroupStage::new(self.group_at(i).clone(), handle)?);
        }

        let tail = match (self.tail(), other.tail()) {
            (None, None) => None,
            (Some(a), Some(b)) => {
                if a.group() != b.group() || a.bonding() != b.bonding() {
                    return Err(TowerError::Mismatch);
                }
                Some(meet_tails(a, b)?)
            }
            _ => return Err(TowerError::Mismatch),
        };

        match tail {
            None => Tower::finite(prefix, self.bondings.clone(), self.horizon()),
            Some(tail) => Tower::new(prefix, self.bondings.clone(), Some(tail), self.horizon()),
        }
    }

    /// The thread carried by the images of one finitely generated subgroup
    /// of the base group. Stage `i` holds the image of the subgroup under
    /// the stage map; classes killed by deeper stage maps fold in there.
    pub fn thread_from_subgroup(
        &self,
        base: &BaseModel,
        gens: &[Word],
    ) -> Result<DerivedThread, TowerError> {
        for w in gens {
            if w.alphabet() != base.presentation().alphabet() {
                return Err(TowerError::Alphabet("generator is not over the base alphabet"));
            }
        }
        let explicit = match self.finite_len() {
            Some(n) => n,
            None => self.prefix_len(),
        };
        let mut prefix = Vec::with_capacity(explicit);
        for i in 0..explicit {
            let images: Vec<Word> = gens.iter().map(|w| base.map_at(i).apply(w)).collect();
            let handle = SubgroupHandle::from_words(self.group_at(i), &images)?;
            prefix.push(GroupStage::new(self.group_at(i).clone(), handle)?);
        }
        let tail = match self.tail() {
            None => None,
            Some(tail) => {
                let phi = base.tail_map().expect("stationary tower has a tail map");
                let images: Vec<Word> = gens.iter().map(|w| phi.apply(w)).collect();
                let handle = SubgroupHandle::from_words(tail.group(), &images)?;
                // the stage map is constant on the tail, so the image
                // subgroup repeats and the step is the identity
                Some(StationaryTail::new(
                    tail.group().clone(),
                    handle,
                    tail.bonding().clone(),
                    GroupHom::identity(tail.group().alphabet()),
                )?)
            }
        };
        let tower = match tail {
            None => Tower::finite(prefix, self.bondings.clone(), self.horizon())?,
            Some(tail) => Tower::new(prefix, self.bondings.clone(), Some(tail), self.horizon())?,
        };
        Ok(DerivedThread {
            tower,
            note: "stage i carries the image of the subgroup under the stage map; \
                   base classes merged by deeper maps fold into earlier stages"
                .to_string(),
        })
    }

    /// Does a map of limits exist over the given stage maps?
    ///
    /// Target stage `i` needs some source stage `j >= i` whose pushed-down
    /// thread lands in the target thread; coherence makes the test monotone
    /// in `j`, so the smallest such `j` is reported as a witness.
    pub fn lift_exists(
        &self,
        dst: &Tower,
        maps: &LiftMaps,
        horizon: usize,
    ) -> Result<AnalysisReport<LiftVerdict>, TowerError> {
        match (self.finite_len(), dst.finite_len()) {
            (Some(n), Some(m)) => {
                if n != m {
                    return Err(TowerError::Mismatch);
                }
                return lift_finite(self, dst, maps, n);
            }
            (None, None) => {}
            _ => return Err(TowerError::Mismatch),
        }
        let (Some(src_ab), Some(dst_ab)) = (self.abelian_tail(), dst.abelian_tail()) else {
            return Err(TowerError::Unsupported(
                "lifting over infinite towers needs abelian stationary tails",
            ));
        };
        if self.prefix_len() != 0 || dst.prefix_len() != 0 {
            return Err(TowerError::Unsupported(
                "lifting over infinite towers needs pure stationary shape",
            ));
        }
        let LiftMaps::Uniform(f) = maps else {
            return Err(TowerError::Unsupported(
                "per-stage maps over an infinite tower cannot be checked past the horizon",
            ));
        };
        if f.source() != self.tail().unwrap().group().alphabet()
            || f.target() != dst.tail().unwrap().group().alphabet()
        {
            return Err(TowerError::Alphabet("lift map does not match the stage groups"));
        }
        let mf = hom_matrix(f);

        // intertwining lets a stage-0 witness push forward to all stages
        let intertwined = mf.mul(&src_ab.s) == dst_ab.s.mul(&mf)
            && mf.mul(&src_ab.b) == dst_ab.b.mul(&mf);

        let window = horizon.min(8);
        let mut witnesses = Vec::new();
        for i in 0..=window {
            match lift_stage_abelian(&src_ab, &dst_ab, &mf, i)? {
                StageLift::At(j) => witnesses.push((i, j)),
                StageLift::Never => {
                    return Ok(AnalysisReport::new(
                        LiftVerdict::Obstructed { stage: i },
                        Certainty::Certified,
                        "lift-obstruction-cycle",
                    )
                    .with_witnesses(vec![Witness::Stage(i)]));
                }
                StageLift::Undecided => {
                    return Ok(AnalysisReport::new(
                        LiftVerdict::Unknown,
                        Certainty::HorizonLimited(horizon),
                        "lift-horizon",
                    ));
                }
            }
        }
        if intertwined {
            return Ok(AnalysisReport::new(
                LiftVerdict::Liftable { witnesses },
                Certainty::Certified,
                "lift-intertwined-stages",
            ));
        }
        Ok(AnalysisReport::new(
            LiftVerdict::Unknown,
            Certainty::HorizonLimited(window),
            "lift-horizon",
        ))
    }

    /// The tower seen along a cofinal set of stage indices.
    pub fn restrict_cofinal(&self, indices: &CofinalIndices) -> Result<Tower, TowerError> {
        match indices {
            CofinalIndices::Finite(picks) => {
                let Some(n) = self.finite_len() else {
                    return Err(TowerError::NonCofinal);
                };
                if picks.is_empty()
                    || picks.windows(2).any(|w| w[0] >= w[1])
                    || *picks.last().unwrap() != n - 1
                {
                    return Err(TowerError::NonCofinal);
                }
                self.restrict_finite(picks)
            }
            CofinalIndices::Arithmetic { start, stride } => {
                if *stride == 0 {
                    return Err(TowerError::NonCofinal);
                }
                match self.finite_len() {
                    Some(n) => {
                        if *start >= n || (n - 1 - start) % stride != 0 {
                            return Err(TowerError::NonCofinal);
                        }
                        let picks: Vec<usize> = (*start..n).step_by(*stride).collect();
                        self.restrict_finite(&picks)
                    }
                    None => self.restrict_arithmetic(*start, *stride),
                }
            }
        }
    }

    fn restrict_finite(&self, picks: &[usize]) -> Result<Tower, TowerError> {
        let mut prefix = Vec::with_capacity(picks.len());
        for &i in picks {
            prefix.push(GroupStage::new(self.group_at(i).clone(), self.thread_at(i)?)?);
        }
        let mut bondings = Vec::with_capacity(picks.len().saturating_sub(1));
        for w in picks.windows(2) {
            bondings.push(self.composed_bonding(w[0], w[1]));
        }
        Tower::finite(prefix, bondings, self.horizon())
    }

    fn restrict_arithmetic(&self, start: usize, stride: usize) -> Result<Tower, TowerError> {
        let pl = self.prefix_len();
        let tail = self.tail().expect("infinite tower has a tail");
        let prefix_picks: Vec<usize> = (start..pl).step_by(stride).collect();
        // first generated index that lands in the tail
        let t0 = if prefix_picks.is_empty() {
            if start >= pl {
                start
            } else {
                unreachable!("start below the prefix always yields a prefix pick")
            }
        } else {
            prefix_picks.last().unwrap() + stride
        };

        let mut prefix = Vec::with_capacity(prefix_picks.len());
        for &i in &prefix_picks {
            prefix.push(GroupStage::new(self.group_at(i).clone(), self.thread_at(i)?)?);
        }
        let mut bondings = Vec::with_capacity(prefix.len());
        for w in prefix_picks.windows(2) {
            bondings.push(self.composed_bonding(w[0], w[1]));
        }
        if let Some(&last) = prefix_picks.last() {
            bondings.push(self.composed_bonding(last, t0));
        }

        let mut step = GroupHom::identity(tail.group().alphabet());
        let mut bonding = GroupHom::identity(tail.group().alphabet());
        for _ in 0..stride {
            step = step.compose(tail.step());
            bonding = bonding.compose(tail.bonding());
        }
        let new_tail = StationaryTail::new(
            tail.group().clone(),
            self.thread_at(t0)?,
            bonding,
            step,
        )?;
        let mut out = Tower::new(prefix, bondings, Some(new_tail), self.horizon())?;
        out.set_budget(self.budget());
        Ok(out)
    }
}

fn meet_handles(a: &SubgroupHandle, b: &SubgroupHandle) -> Result<SubgroupHandle, TowerError> {
    match (a, b) {
        (SubgroupHandle::Lattice(x), SubgroupHandle::Lattice(y)) => {
            Ok(SubgroupHandle::Lattice(x.intersect(y)))
        }
        (SubgroupHandle::Graph(x), SubgroupHandle::Graph(y)) => {
            Ok(SubgroupHandle::Graph(x.intersect(y)))
        }
        _ => Err(TowerError::Unsupported("meet of fp threads")),
    }
}

fn meet_tails(a: &StationaryTail, b: &StationaryTail) -> Result<StationaryTail, TowerError> {
    let thread0 = meet_handles(a.thread0(), b.thread0())?;
    if a.step() == b.step() {
        // equal injective steps distribute over the intersection
        let injective = match a.group() {
            StageGroup::Abelian(_) => !hom_matrix(a.step()).determinant().is_zero(),
            _ => is_identity_hom(a.step()),
        };
        if !injective {
            return Err(TowerError::Unsupported(
                "meet of tails with a non-injective shared step",
            ));
        }
        return StationaryTail::new(
            a.group().clone(),
            thread0,
            a.bonding().clone(),
            a.step().clone(),
        );
    }
    // distinct steps: the composite step works when the two commute, both
    // are injective, and the composite chain tracks the pairwise meets on
    // an initial segment
    let StageGroup::Abelian(_) = a.group() else {
        return Err(TowerError::Unsupported("meet of word tails with distinct steps"));
    };
    let (sa, sb) = (hom_matrix(a.step()), hom_matrix(b.step()));
    if sa.mul(&sb) != sb.mul(&sa)
        || sa.determinant().is_zero()
        || sb.determinant().is_zero()
    {
        return Err(TowerError::Unsupported("meet of tails with incompatible steps"));
    }
    let (SubgroupHandle::Lattice(la), SubgroupHandle::Lattice(lb)) = (a.thread0(), b.thread0())
    else {
        return Err(TowerError::HandleBackend(0));
    };
    let SubgroupHandle::Lattice(l0) = &thread0 else {
        return Err(TowerError::HandleBackend(0));
    };
    let m = sa.mul(&sb);
    for k in 1..=4usize {
        let lhs = l0.image(&m.pow(k));
        let rhs = la.image(&sa.pow(k)).intersect(&lb.image(&sb.pow(k)));
        if lhs != rhs {
            return Err(TowerError::Unsupported(
                "meet of these tails is not stationary over the composite step",
            ));
        }
    }
    StationaryTail::new(
        a.group().clone(),
        thread0,
        a.bonding().clone(),
        a.step().compose(b.step()),
    )
}

fn is_identity_hom(h: &GroupHom) -> bool {
    h.source() == h.target()
        && (0..h.source().rank()).all(|g| {
            let w = h.source().generator(g);
            h.apply(&w) == w
        })
}

enum StageLift {
    At(usize),
    Never,
    Undecided,
}

/// Decide `exists k: m^k(G0) <= P` for the stage-`i` target condition of an
/// abelian stationary lift, by iterating `T <- m(T) + Phat` against the
/// largest forward-invariant part `Phat` of `P`.
fn lift_stage_abelian(
    src: &AbelianTail,
    dst: &AbelianTail,
    mf: &IntMatrix,
    i: usize,
) -> Result<StageLift, TowerError> {
    let h_i = dst.thread(i);
    let reach = mf.mul(&src.s.pow(i));
    let p = h_i.preimage(&reach);
    let m = src.b.mul(&src.s);

    // forward-invariant part: Z <- P /\ m^{-1}(Z), frozen by one repeat
    let mut z = p.clone();
    let mut phat = None;
    for _ in 0..256 {
        let next = p.intersect(&z.preimage(&m));
        if next == z {
            phat = Some(z);
            break;
        }
        z = next;
    }
    let Some(phat) = phat else {
        return Ok(StageLift::Undecided);
    };

    // m^k(G0) <= P for some k iff the chain T_k = m^k(G0) + Phat reaches
    // Phat; T is a forward iteration, so a repeat closes a cycle and the
    // answer on the cycle is the answer forever
    let mut t = src.g0.sum(&phat);
    let mut seen: Vec<Lattice> = Vec::new();
    for k in 0..128usize {
        if t == phat {
            return Ok(StageLift::At(i + k));
        }
        if seen.contains(&t) {
            return Ok(StageLift::Never);
        }
        seen.push(t.clone());
        t = t.image(&m).sum(&phat);
    }
    Ok(StageLift::Undecided)
}

/// Exhaustive lift check over a finite tower: both index sets end, so the
/// stage scans are complete and every verdict is certified.
fn lift_finite(
    src: &Tower,
    dst: &Tower,
    maps: &LiftMaps,
    n: usize,
) -> Result<AnalysisReport<LiftVerdict>, TowerError> {
    let map_at = |i: usize| -> Result<&GroupHom, TowerError> {
        match maps {
            LiftMaps::Uniform(f) => Ok(f),
            LiftMaps::PerStage(fs) => {
                if fs.len() != n {
                    return Err(TowerError::BondingCount { expected: n, found: fs.len() });
                }
                Ok(&fs[i])
            }
        }
    };
    let mut tables = StageTables::new(dst);
    let mut witnesses = Vec::new();
    for i in 0..n {
        let f = map_at(i)?;
        if f.source() != src.group_at(i).alphabet() || f.target() != dst.group_at(i).alphabet() {
            return Err(TowerError::Alphabet("lift map does not match the stage groups"));
        }
        let mut found = None;
        let dst_handle = dst.thread_at(i)?;
        for j in i..n {
            let push = src.composed_bonding(i, j);
            let gens = src.thread_at(j)?.generator_words(src.group_at(j).alphabet());
            let ok = gens.iter().all(|w| {
                let image = f.apply(&push.apply(w));
                thread_member(i, &dst_handle, &image, &mut tables).unwrap_or(false)
            });
            if ok {
                found = Some(j);
                break;
            }
        }
        match found {
            Some(j) => witnesses.push((i, j)),
            None => {
                return Ok(AnalysisReport::new(
                    LiftVerdict::Obstructed { stage: i },
                    Certainty::Certified,
                    "lift-finite-exhausted",
                )
                .with_witnesses(vec![Witness::Stage(i)]));
            }
        }
    }
    Ok(AnalysisReport::new(
        LiftVerdict::Liftable { witnesses },
        Certainty::Certified,
        "lift-finite-exhausted",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset::Presentation;
    use crate::tower::tests::{solenoid_tower, z_alphabet};
    use crate::word::parse_word;
    use num_bigint::BigInt;

    fn identity_base(t: &Tower) -> BaseModel {
        let a = z_alphabet();
        BaseModel::new(t, Presentation::free(a.clone()), Vec::new(), Some(GroupHom::identity(&a)))
            .unwrap()
    }

    fn word(s: &str) -> Word {
        parse_word(&z_alphabet(), s).unwrap()
    }

    #[test]
    fn dyadic_rejects_powers_at_the_two_adic_valuation() {
        let t = solenoid_tower(2, 16);
        let base = identity_base(&t);
        for (input, stage) in [("a", 1), ("a^2", 2), ("a^4", 3), ("a^6", 2), ("a^-8", 4)] {
            let report = t.pi1_membership(&base, &word(input), 16).unwrap();
            assert_eq!(report.verdict, Pi1Verdict::RejectedAtStage(stage), "word {input}");
            assert!(report.certainty.is_certified());
        }
        let report = t.pi1_membership(&base, &z_alphabet().empty_word(), 16).unwrap();
        assert_eq!(report.verdict, Pi1Verdict::InDescriptor);
        assert!(report.certainty.is_certified());
    }

    #[test]
    fn meet_of_dyadic_and_triadic_runs_on_sixth_powers() {
        let dyadic = solenoid_tower(2, 16);
        let triadic = solenoid_tower(3, 16);
        let meet = dyadic.thread_meet(&triadic).unwrap();
        let SubgroupHandle::Lattice(g2) = meet.thread_at(2).unwrap() else {
            panic!("abelian meet thread expected");
        };
        assert!(g2.member(&[BigInt::from(36)]));
        assert!(!g2.member(&[BigInt::from(18)]));
        let report = meet.stability_analysis(8).unwrap();
        assert_eq!(report.verdict.classification.value, Classification::StrictLifting);
        assert!(report.certainty.is_certified());
    }

    #[test]
    fn meet_refuses_a_non_stationary_combination() {
        // threads 3*2^k and 3^k do not meet along any single composite step
        let a = z_alphabet();
        let stage = StageGroup::Abelian(a.clone());
        let three = Lattice::from_generators(1, &[vec![BigInt::from(3)]]);
        let doubling =
            GroupHom::new(a.clone(), a.clone(), vec![word("a^2")]).unwrap();
        let ta = Tower::stationary(
            StationaryTail::new(
                stage.clone(),
                SubgroupHandle::Lattice(three),
                GroupHom::identity(&a),
                doubling,
            )
            .unwrap(),
            16,
        );
        let tb = solenoid_tower(3, 16);
        let err = ta.thread_meet(&tb).unwrap_err();
        assert!(matches!(err, TowerError::Unsupported(_)));
    }

    #[test]
    fn lift_obstruction_between_dyadic_and_triadic() {
        let dyadic = solenoid_tower(2, 16);
        let triadic = solenoid_tower(3, 16);
        let f = LiftMaps::Uniform(GroupHom::identity(&z_alphabet()));
        let report = dyadic.lift_exists(&triadic, &f, 8).unwrap();
        assert_eq!(report.verdict, LiftVerdict::Obstructed { stage: 1 });
        assert!(report.certainty.is_certified());
    }

    #[test]
    fn tripling_lifts_through_the_dyadic_tower() {
        let dyadic = solenoid_tower(2, 16);
        let a = z_alphabet();
        let tripling = GroupHom::new(a.clone(), a.clone(), vec![word("a^3")]).unwrap();
        let report = dyadic.lift_exists(&dyadic, &LiftMaps::Uniform(tripling), 8).unwrap();
        let LiftVerdict::Liftable { witnesses } = &report.verdict else {
            panic!("expected a liftable verdict, got {:?}", report.verdict);
        };
        assert!(report.certainty.is_certified());
        // an odd multiplier preserves two-adic depth, so stage i is already
        // reached from stage i
        assert!(witnesses.iter().all(|(i, j)| i == j));

        let id = LiftMaps::Uniform(GroupHom::identity(&a));
        let report = dyadic.lift_exists(&dyadic, &id, 8).unwrap();
        assert!(matches!(report.verdict, LiftVerdict::Liftable { .. }));
    }

    #[test]
    fn even_restriction_of_the_dyadic_tower_quadruples() {
        let t = solenoid_tower(2, 16);
        let r = t.restrict_cofinal(&CofinalIndices::Arithmetic { start: 0, stride: 2 }).unwrap();
        let tail = r.tail().unwrap();
        assert_eq!(format!("{}", tail.step()), "a -> a^4");
        let SubgroupHandle::Lattice(g1) = r.thread_at(1).unwrap() else {
            panic!("abelian thread expected");
        };
        assert!(g1.member(&[BigInt::from(4)]));
        assert!(!g1.member(&[BigInt::from(2)]));
    }

    #[test]
    fn unit_stride_restriction_is_the_identity() {
        let t = solenoid_tower(2, 16);
        let r = t.restrict_cofinal(&CofinalIndices::Arithmetic { start: 0, stride: 1 }).unwrap();
        assert_eq!(r, t);
    }

    #[test]
    fn finite_index_lists_must_be_cofinal() {
        let t = solenoid_tower(2, 16);
        assert!(matches!(
            t.restrict_cofinal(&CofinalIndices::Finite(vec![0, 1, 2])),
            Err(TowerError::NonCofinal)
        ));
        assert!(matches!(
            t.restrict_cofinal(&CofinalIndices::Arithmetic { start: 0, stride: 0 }),
            Err(TowerError::NonCofinal)
        ));
    }

    #[test]
    fn subgroup_thread_runs_the_image_at_every_stage() {
        let t = solenoid_tower(2, 16);
        let base = identity_base(&t);
        let derived = t.thread_from_subgroup(&base, &[word("a^3")]).unwrap();
        let tower = &derived.tower;
        assert!(tower.check_coherence().unwrap().verdict.is_ok());
        let SubgroupHandle::Lattice(g5) = tower.thread_at(5).unwrap() else {
            panic!("abelian thread expected");
        };
        // constant image thread: 3Z at every stage
        assert!(g5.member(&[BigInt::from(3)]));
        let report = tower.stability_analysis(8).unwrap();
        assert_eq!(report.verdict.classification.value, Classification::Covering(0));
    }
}
