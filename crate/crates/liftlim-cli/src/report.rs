//! Rendering of analysis outcomes as text or as the stable structured
//! document. The structured schema is version-stamped: a single JSON object
//! with fields `schema`, `command`, `verdict`, `certainty`, `witnesses`,
//! `stages`, `provenance`. Big integers are decimal strings.

use liftlim_core::tower::{
    Certainty, DeckStage, EventualInjectivity, Judged, Ml, StageChain, Tower, Witness,
};
use num_bigint::BigUint;
use serde::Serialize;

pub const SCHEMA: &str = "liftlim.report/1";

/// One analysis result, normalized across commands.
pub struct Outcome {
    pub verdict: VerdictOut,
    pub certainty: Certainty,
    pub witnesses: Vec<Witness>,
    pub stages: Vec<StageOut>,
    pub provenance: String,
}

impl Outcome {
    pub fn new(verdict: VerdictOut, certainty: Certainty, provenance: &str) -> Self {
        Outcome {
            verdict,
            certainty,
            witnesses: Vec::new(),
            stages: Vec::new(),
            provenance: provenance.to_string(),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VerdictOut {
    Coherent,
    Incoherent { violations: usize },
    Covering { stage: usize, mittag_leffler: JudgedOut, eventually_injective: JudgedOut },
    StrictLifting { mittag_leffler: JudgedOut, eventually_injective: JudgedOut },
    UnknownClassification { mittag_leffler: JudgedOut, eventually_injective: JudgedOut },
    FiniteFiber { cardinality: String },
    UncountableFiber,
    UnknownFiber,
    InDescriptor,
    RejectedAtStage { stage: usize },
    TrivialPi0,
    CosetCount { count: String },
    UncountablePi0,
    UnknownPi0,
    Dense { criteria: Vec<String> },
    NotDense { stage: usize },
    UnknownDensity,
    DeckTower { stages: usize },
    Liftable { pairs: Vec<(usize, usize)> },
    Obstructed { stage: usize },
    UnknownLift,
    TowerResult { stages: usize, tail: Option<TailOut> },
}

#[derive(Serialize)]
pub struct JudgedOut {
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    pub certainty: CertaintyOut,
    pub rule: String,
}

impl JudgedOut {
    pub fn ml(j: &Judged<Ml>) -> Self {
        let (value, stage) = match &j.value {
            Ml::Holds => ("holds", None),
            Ml::Fails { stage } => ("fails", Some(*stage)),
            Ml::Unknown => ("unknown", None),
        };
        JudgedOut {
            value: value.to_string(),
            stage,
            certainty: CertaintyOut::from(j.certainty),
            rule: j.rule.clone(),
        }
    }

    pub fn injectivity(j: &Judged<EventualInjectivity>) -> Self {
        let (value, stage) = match &j.value {
            EventualInjectivity::InjectiveFrom(s) => ("injective-from", Some(*s)),
            EventualInjectivity::NonInjectiveRecurring => ("non-injective-recurring", None),
            EventualInjectivity::Unknown => ("unknown", None),
        };
        JudgedOut {
            value: value.to_string(),
            stage,
            certainty: CertaintyOut::from(j.certainty),
            rule: j.rule.clone(),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertaintyOut {
    Certified,
    HorizonLimited { horizon: usize },
}

impl From<Certainty> for CertaintyOut {
    fn from(c: Certainty) -> Self {
        match c {
            Certainty::Certified => CertaintyOut::Certified,
            Certainty::HorizonLimited(h) => CertaintyOut::HorizonLimited { horizon: h },
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessOut {
    Stage { stage: usize },
    WordAt { stage: usize, word: String },
    CosetPair { stage: usize, first: usize, second: usize },
}

impl From<&Witness> for WitnessOut {
    fn from(w: &Witness) -> Self {
        match w {
            Witness::Stage(s) => WitnessOut::Stage { stage: *s },
            Witness::WordAt { stage, word } => {
                WitnessOut::WordAt { stage: *stage, word: word.to_string() }
            }
            Witness::CosetPair { stage, first, second } => {
                WitnessOut::CosetPair { stage: *stage, first: *first, second: *second }
            }
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum StageOut {
    Chain { stage: usize, images: Vec<Option<String>>, stable_at: Option<usize> },
    Count { stage: usize, count: Option<String> },
    Deck { stage: usize, deck: DeckOut, bonding: Option<String> },
    Stage { stage: usize, group: String, thread: Vec<String> },
    Violation { lower: usize, upper: usize, word: String },
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeckOut {
    AbelianQuotient { free_rank: usize, torsion: Vec<String> },
    FiniteQuotient { order: String },
    FullStage { backend: String, rank: usize },
}

impl From<&DeckStage> for DeckOut {
    fn from(d: &DeckStage) -> Self {
        match d {
            DeckStage::AbelianQuotient { free_rank, torsion, .. } => DeckOut::AbelianQuotient {
                free_rank: *free_rank,
                torsion: torsion.iter().map(BigUint::to_string).collect(),
            },
            DeckStage::FiniteQuotient { order, .. } => {
                DeckOut::FiniteQuotient { order: order.to_string() }
            }
            DeckStage::FullStage { backend, rank, .. } => {
                DeckOut::FullStage { backend: backend.to_string(), rank: *rank }
            }
        }
    }
}

#[derive(Serialize)]
pub struct TailOut {
    pub group: String,
    pub thread0: Vec<String>,
    pub bonding: String,
    pub step: String,
}

#[derive(Serialize)]
struct Document<'a> {
    schema: &'static str,
    command: &'a str,
    verdict: &'a VerdictOut,
    certainty: CertaintyOut,
    witnesses: Vec<WitnessOut>,
    stages: &'a [StageOut],
    provenance: &'a str,
}

pub fn structured(command: &str, outcome: &Outcome) -> String {
    let doc = Document {
        schema: SCHEMA,
        command,
        verdict: &outcome.verdict,
        certainty: CertaintyOut::from(outcome.certainty),
        witnesses: outcome.witnesses.iter().map(WitnessOut::from).collect(),
        stages: &outcome.stages,
        provenance: &outcome.provenance,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization is infallible");
    s.push('\n');
    s
}

pub fn text(command: &str, outcome: &Outcome) -> String {
    let mut out = String::new();
    out.push_str(&format!("{command}: {}\n", sentence(&outcome.verdict)));
    match outcome.certainty {
        Certainty::Certified => out.push_str("certainty: certified\n"),
        Certainty::HorizonLimited(h) => {
            out.push_str(&format!("certainty: horizon-limited at {h}\n"))
        }
    }
    out.push_str(&format!("rule: {}\n", outcome.provenance));
    for w in &outcome.witnesses {
        match w {
            Witness::Stage(s) => out.push_str(&format!("witness: stage {s}\n")),
            Witness::WordAt { stage, word } => {
                out.push_str(&format!("witness: stage {stage}, word {word}\n"))
            }
            Witness::CosetPair { stage, first, second } => {
                out.push_str(&format!("witness: stage {stage}, cosets {first} and {second}\n"))
            }
        }
    }
    for s in &outcome.stages {
        out.push_str(&stage_line(s));
    }
    if let VerdictOut::TowerResult { tail: Some(t), .. } = &outcome.verdict {
        let thread = if t.thread0.is_empty() {
            "trivial thread".to_string()
        } else {
            format!("thread {}", t.thread0.join(", "))
        };
        out.push_str(&format!(
            "tail: {}, {thread}, bonding {}, step {}\n",
            t.group, t.bonding, t.step
        ));
    }
    out
}

fn sentence(v: &VerdictOut) -> String {
    match v {
        VerdictOut::Coherent => "coherent".to_string(),
        VerdictOut::Incoherent { violations } => {
            format!("{violations} coherence violation(s)")
        }
        VerdictOut::Covering { stage, mittag_leffler, eventually_injective } => format!(
            "covering from stage {stage} ({}, {})",
            judged_phrase("mittag-leffler", mittag_leffler),
            judged_phrase("eventual injectivity", eventually_injective),
        ),
        VerdictOut::StrictLifting { mittag_leffler, eventually_injective } => format!(
            "strict lifting space ({}, {})",
            judged_phrase("mittag-leffler", mittag_leffler),
            judged_phrase("eventual injectivity", eventually_injective),
        ),
        VerdictOut::UnknownClassification { mittag_leffler, eventually_injective } => format!(
            "classification open ({}, {})",
            judged_phrase("mittag-leffler", mittag_leffler),
            judged_phrase("eventual injectivity", eventually_injective),
        ),
        VerdictOut::FiniteFiber { cardinality } => format!("fiber has {cardinality} points"),
        VerdictOut::UncountableFiber => "fiber is uncountable".to_string(),
        VerdictOut::UnknownFiber => "fiber cardinality open".to_string(),
        VerdictOut::InDescriptor => "word survives to the limit descriptor".to_string(),
        VerdictOut::RejectedAtStage { stage } => format!("word leaves the thread at stage {stage}"),
        VerdictOut::TrivialPi0 => "limit is path connected over the base".to_string(),
        VerdictOut::CosetCount { count } => format!("{count} path components over the base"),
        VerdictOut::UncountablePi0 => "uncountably many path components".to_string(),
        VerdictOut::UnknownPi0 => "component count open".to_string(),
        VerdictOut::Dense { criteria } => {
            format!("base image is dense (criteria: {})", criteria.join(", "))
        }
        VerdictOut::NotDense { stage } => {
            format!("base image misses the thread at stage {stage}")
        }
        VerdictOut::UnknownDensity => "density open".to_string(),
        VerdictOut::DeckTower { stages } => format!("deck groups computed for {stages} stage(s)"),
        VerdictOut::Liftable { pairs } => format!(
            "lift exists (stage pairs {})",
            pairs.iter().map(|(i, j)| format!("{i}<-{j}")).collect::<Vec<_>>().join(", ")
        ),
        VerdictOut::Obstructed { stage } => format!("no lift: obstructed at stage {stage}"),
        VerdictOut::UnknownLift => "lift question open".to_string(),
        VerdictOut::TowerResult { stages, tail } => match tail {
            Some(_) => format!("tower with {stages} explicit stage(s) and a stationary tail"),
            None => format!("tower with {stages} explicit stage(s)"),
        },
    }
}

fn judged_phrase(label: &str, j: &JudgedOut) -> String {
    match j.stage {
        Some(s) => format!("{label} {} at {s}", j.value),
        None => format!("{label} {}", j.value),
    }
}

fn stage_line(s: &StageOut) -> String {
    match s {
        StageOut::Chain { stage, images, stable_at } => {
            let shown: Vec<String> = images
                .iter()
                .map(|i| i.clone().unwrap_or_else(|| "inf".to_string()))
                .collect();
            match stable_at {
                Some(k) => format!("chain {stage}: {} (stable at {k})\n", shown.join(" ")),
                None => format!("chain {stage}: {}\n", shown.join(" ")),
            }
        }
        StageOut::Count { stage, count } => match count {
            Some(c) => format!("stage {stage}: {c}\n"),
            None => format!("stage {stage}: infinite\n"),
        },
        StageOut::Deck { stage, deck, bonding } => {
            let body = match deck {
                DeckOut::AbelianQuotient { free_rank, torsion } => {
                    let mut parts = Vec::new();
                    if *free_rank > 0 {
                        parts.push(format!("Z^{free_rank}"));
                    }
                    for t in torsion {
                        parts.push(format!("Z/{t}"));
                    }
                    if parts.is_empty() {
                        "trivial".to_string()
                    } else {
                        parts.join(" x ")
                    }
                }
                DeckOut::FiniteQuotient { order } => format!("finite of order {order}"),
                DeckOut::FullStage { backend, rank } => {
                    format!("full {backend} stage of rank {rank}")
                }
            };
            match bonding {
                Some(b) => format!("deck {stage}: {body}, covered via {b}\n"),
                None => format!("deck {stage}: {body}\n"),
            }
        }
        StageOut::Stage { stage, group, thread } => {
            if thread.is_empty() {
                format!("stage {stage}: {group}, trivial thread\n")
            } else {
                format!("stage {stage}: {group}, thread {}\n", thread.join(", "))
            }
        }
        StageOut::Violation { lower, upper, word } => {
            format!("violation: {word} from stage {upper} leaves the thread at stage {lower}\n")
        }
    }
}

pub fn group_display(g: &liftlim_core::tower::StageGroup) -> String {
    let names = g.alphabet().names().join(", ");
    if names.is_empty() {
        format!("{} of rank 0", g.backend_name())
    } else {
        format!("{} on {names}", g.backend_name())
    }
}

pub fn chain_out(c: &StageChain) -> StageOut {
    StageOut::Chain {
        stage: c.stage,
        images: c.image_sizes.iter().map(|s| s.as_ref().map(BigUint::to_string)).collect(),
        stable_at: c.stable_at,
    }
}

/// Renders a tower produced by meet, restrict or thread-from.
pub fn tower_outcome(t: &Tower, provenance: &str) -> Outcome {
    let mut stages = Vec::new();
    for (i, stage) in t.prefix().iter().enumerate() {
        let thread = stage
            .thread()
            .generator_words(stage.group().alphabet())
            .iter()
            .map(|w| w.to_string())
            .collect();
        stages.push(StageOut::Stage {
            stage: i,
            group: group_display(stage.group()),
            thread,
        });
    }
    let tail = t.tail().map(|tail| TailOut {
        group: group_display(tail.group()),
        thread0: tail
            .thread0()
            .generator_words(tail.group().alphabet())
            .iter()
            .map(|w| w.to_string())
            .collect(),
        bonding: tail.bonding().to_string(),
        step: tail.step().to_string(),
    });
    let mut out = Outcome::new(
        VerdictOut::TowerResult { stages: t.prefix_len(), tail },
        Certainty::Certified,
        provenance,
    );
    out.stages = stages;
    out
}
