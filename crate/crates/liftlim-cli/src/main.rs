//! Command-line front end: parse a tower spec file, run one analysis, and
//! report the verdict. Exit codes: 0 a verdict was produced (horizon-limited
//! counts), 2 parse or reference errors, 3 coherence violations, 4 an
//! enumeration budget ran out, 5 a certified verdict was demanded but only a
//! horizon-limited one is available, 1 anything else.

mod report;
mod spec;

use clap::{Parser, ValueEnum};
use liftlim_core::coset::{CosetError, EnumerationBudget};
use liftlim_core::tower::{
    BaseModel, Classification, CofinalIndices, CoherenceVerdict, DensityVerdict, LiftMaps,
    LiftVerdict, LimitCardinality, Pi0Verdict, Pi1Verdict, TowerError, Witness,
    DEFAULT_HORIZON,
};
use liftlim_core::word::{parse_word, Word};
use report::{DeckOut, JudgedOut, Outcome, StageOut, VerdictOut};
use spec::{parse_spec, SpecDocument, SpecError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "liftlim", version, about = "Invariants of inverse limits of covering spaces")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Tower spec file
    spec: PathBuf,
    /// Stage horizon for tail analyses (flag > spec file > LIFTLIM_DEFAULT_HORIZON > 16)
    #[arg(long)]
    horizon: Option<usize>,
    /// Word argument for pi1, or comma-separated generators for thread-from
    #[arg(long)]
    word: Option<String>,
    /// Second spec file for meet and lift
    #[arg(long)]
    target: Option<PathBuf>,
    /// Stage picks for restrict: `0,2,5` or `start::stride`
    #[arg(long)]
    indices: Option<String>,
    /// Hom name (from the source file) mapping source tail stage to target tail stage, for lift
    #[arg(long)]
    map: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    report: Format,
    /// Exit 5 unless the verdict is certified for the infinite tower
    #[arg(long)]
    require_certified: bool,
    /// Coset enumeration budget
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Check,
    Classify,
    Fiber,
    Pi1,
    Pi0,
    Deck,
    Density,
    Meet,
    ThreadFrom,
    Lift,
    Restrict,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("liftlim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let horizon_env = env_horizon()?;
    let mut doc = load_spec(&cli.spec)?;
    let horizon = cli.horizon.or(doc.horizon).or(horizon_env).unwrap_or(DEFAULT_HORIZON);
    doc.tower.set_horizon(horizon);
    if let Some(b) = cli.budget {
        doc.tower.set_budget(EnumerationBudget::with_max_cosets(b));
    }

    let coherence = doc.tower.check_coherence().map_err(run_failure)?;
    if cli.command != Command::Check {
        if let CoherenceVerdict::Violations(vs) = &coherence.verdict {
            let first = &vs[0];
            return Err(fail(
                3,
                format!(
                    "tower is incoherent: {} from stage {} leaves the thread at stage {}",
                    first.witness, first.upper, first.lower
                ),
            ));
        }
    }

    let outcome = match cli.command {
        Command::Check => {
            let mut witnesses = Vec::new();
            let mut stages = Vec::new();
            let verdict = match &coherence.verdict {
                CoherenceVerdict::Ok => VerdictOut::Coherent,
                CoherenceVerdict::Violations(vs) => {
                    for v in vs {
                        witnesses.push(Witness::WordAt {
                            stage: v.upper,
                            word: v.witness.clone(),
                        });
                        stages.push(StageOut::Violation {
                            lower: v.lower,
                            upper: v.upper,
                            word: v.witness.to_string(),
                        });
                    }
                    VerdictOut::Incoherent { violations: vs.len() }
                }
            };
            let mut out = Outcome::new(verdict, coherence.certainty, &coherence.provenance);
            out.witnesses = witnesses;
            out.stages = stages;
            out
        }
        Command::Classify => classify(&doc, horizon)?,
        Command::Fiber => fiber(&doc, horizon)?,
        Command::Pi1 => pi1(cli, &doc, horizon)?,
        Command::Pi0 => pi0(&doc, horizon)?,
        Command::Deck => deck(&doc, horizon)?,
        Command::Density => density(&doc, horizon)?,
        Command::Meet => meet(cli, &doc)?,
        Command::ThreadFrom => thread_from(cli, &doc)?,
        Command::Lift => lift(cli, &doc, horizon)?,
        Command::Restrict => restrict(cli, &doc)?,
    };

    let name = command_name(cli.command);
    match cli.report {
        Format::Text => print!("{}", report::text(name, &outcome)),
        Format::Structured => print!("{}", report::structured(name, &outcome)),
    }
    if matches!(outcome.verdict, VerdictOut::Incoherent { .. }) {
        return Ok(3);
    }
    if cli.require_certified && !outcome.certainty.is_certified() {
        return Ok(5);
    }
    Ok(0)
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Check => "check",
        Command::Classify => "classify",
        Command::Fiber => "fiber",
        Command::Pi1 => "pi1",
        Command::Pi0 => "pi0",
        Command::Deck => "deck",
        Command::Density => "density",
        Command::Meet => "meet",
        Command::ThreadFrom => "thread-from",
        Command::Lift => "lift",
        Command::Restrict => "restrict",
    }
}

fn env_horizon() -> Result<Option<usize>, Failure> {
    match std::env::var("LIFTLIM_DEFAULT_HORIZON") {
        Err(_) => Ok(None),
        Ok(v) => match v.parse::<usize>() {
            Ok(h) if h > 0 => Ok(Some(h)),
            _ => Err(fail(1, format!("LIFTLIM_DEFAULT_HORIZON must be a positive integer, found `{v}`"))),
        },
    }
}

fn load_spec(path: &Path) -> Result<SpecDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(1, format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| spec_failure(path, e))
}

fn spec_failure(path: &Path, e: SpecError) -> Failure {
    let code = match &e {
        SpecError::Tower(t) if budget_blown(t) => 4,
        _ => 2,
    };
    fail(code, format!("{}: {e}", path.display()))
}

fn run_failure(e: TowerError) -> Failure {
    let code = if budget_blown(&e) { 4 } else { 1 };
    fail(code, format!("analysis failed: {e}"))
}

fn budget_blown(e: &TowerError) -> bool {
    matches!(e, TowerError::Enumeration { source: CosetError::BudgetExceeded { .. }, .. })
}

fn need_base<'d>(doc: &'d SpecDocument, command: &str) -> Result<&'d BaseModel, Failure> {
    doc.base
        .as_ref()
        .ok_or_else(|| fail(2, format!("{command} needs a [base] section in the spec file")))
}

fn need_word<'c>(cli: &'c Cli, command: &str) -> Result<&'c str, Failure> {
    cli.word
        .as_deref()
        .ok_or_else(|| fail(2, format!("{command} needs --word")))
}

fn classify(doc: &SpecDocument, horizon: usize) -> Result<Outcome, Failure> {
    let rep = doc.tower.stability_analysis(horizon).map_err(run_failure)?;
    let ml = JudgedOut::ml(&rep.verdict.mittag_leffler);
    let ev = JudgedOut::injectivity(&rep.verdict.eventually_injective);
    let verdict = match rep.verdict.classification.value {
        Classification::Covering(stage) => {
            VerdictOut::Covering { stage, mittag_leffler: ml, eventually_injective: ev }
        }
        Classification::StrictLifting => {
            VerdictOut::StrictLifting { mittag_leffler: ml, eventually_injective: ev }
        }
        Classification::Unknown => {
            VerdictOut::UnknownClassification { mittag_leffler: ml, eventually_injective: ev }
        }
    };
    let mut out = Outcome::new(verdict, rep.certainty, &rep.provenance);
    out.witnesses = rep.witnesses;
    out.stages = rep.verdict.chains.iter().map(report::chain_out).collect();
    Ok(out)
}

fn fiber(doc: &SpecDocument, horizon: usize) -> Result<Outcome, Failure> {
    let rep = doc.tower.fiber_model(horizon).map_err(run_failure)?;
    let verdict = match &rep.verdict.limit {
        LimitCardinality::Finite(n) => VerdictOut::FiniteFiber { cardinality: n.to_string() },
        LimitCardinality::Uncountable => VerdictOut::UncountableFiber,
        LimitCardinality::Unknown => VerdictOut::UnknownFiber,
    };
    let mut out = Outcome::new(verdict, rep.certainty, &rep.provenance);
    out.witnesses = rep.witnesses;
    out.stages = rep
        .verdict
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| StageOut::Count { stage: i, count: c.as_ref().map(|n| n.to_string()) })
        .collect();
    Ok(out)
}

fn pi1(cli: &Cli, doc: &SpecDocument, horizon: usize) -> Result<Outcome, Failure> {
    let base = need_base(doc, "pi1")?;
    let src = need_word(cli, "pi1")?;
    let w = parse_base_word(base, src)?;
    let rep = doc.tower.pi1_membership(base, &w, horizon).map_err(run_failure)?;
    let verdict = match rep.verdict {
        Pi1Verdict::InDescriptor => VerdictOut::InDescriptor,
        Pi1Verdict::RejectedAtStage(stage) => VerdictOut::RejectedAtStage { stage },
    };
    let mut out = Outcome::new(verdict, rep.certainty, &rep.provenance);
    out.witnesses = rep.witnesses;
    Ok(out)
}

fn pi0(doc: &SpecDocument, horizon: usize) -> Result<Outcome, Failure> {
    let base = need_base(doc, "pi0")?;
    let rep = doc.tower.pi0_report(base, horizon).map_err(run_failure)?;
    let verdict = match &rep.verdict {
        Pi0Verdict::Trivial => VerdictOut::TrivialPi0,
        Pi0Verdict::CosetCount(n) => VerdictOut::CosetCount { count: n.to_string() },
        Pi0Verdict::Uncountable => VerdictOut::UncountablePi0,
        Pi0Verdict::Unknown => VerdictOut::UnknownPi0,
    };
    let mut out = Outcome::new(verdict, rep.certainty, &rep.provenance);
    out.witnesses = rep.witnesses;
    Ok(out)
}

fn deck(doc: &SpecDocument, horizon: usize) -> Result<Outcome, Failure> {
    let rep = doc.tower.deck_tower(horizon).map_err(run_failure)?;
    let mut out = Outcome::new(
        VerdictOut::DeckTower { stages: rep.stages.len() },
        rep.certainty,
        &rep.provenance,
    );
    out.stages = rep
        .stages
        .iter()
        .enumerate()
        .map(|(i, d)| StageOut::Deck {
            stage: i,
            deck: DeckOut::from(d),
            bonding: rep.bonding_display.get(i).cloned(),
        })
        .collect();
    Ok(out)
}

fn density(doc: &SpecDocument, horizon: usize) -> Result<Outcome, Failure> {
    let base = need_base(doc, "density")?;
    let rep = doc.tower.density(base, horizon).map_err(run_failure)?;
    let verdict = match &rep.verdict {
        DensityVerdict::Dense(criteria) => VerdictOut::Dense { criteria: criteria.clone() },
        DensityVerdict::NotDense { stage } => VerdictOut::NotDense { stage: *stage },
        DensityVerdict::Unknown => VerdictOut::UnknownDensity,
    };
    let mut out = Outcome::new(verdict, rep.certainty, &rep.provenance);
    out.witnesses = rep.witnesses;
    Ok(out)
}

fn meet(cli: &Cli, doc: &SpecDocument) -> Result<Outcome, Failure> {
    let target = need_target(cli, "meet")?;
    let other = load_spec(target)?;
    let met = doc.tower.thread_meet(&other.tower).map_err(run_failure)?;
    Ok(report::tower_outcome(&met, "meet-stagewise-intersection"))
}

fn thread_from(cli: &Cli, doc: &SpecDocument) -> Result<Outcome, Failure> {
    let base = need_base(doc, "thread-from")?;
    let src = need_word(cli, "thread-from")?;
    let mut gens = Vec::new();
    for part in src.split(',') {
        let trimmed = part.trim();
        if !trimmed.is_empty() {
            gens.push(parse_base_word(base, trimmed)?);
        }
    }
    let derived = doc.tower.thread_from_subgroup(base, &gens).map_err(run_failure)?;
    Ok(report::tower_outcome(&derived.tower, &derived.note))
}

fn lift(cli: &Cli, doc: &SpecDocument, horizon: usize) -> Result<Outcome, Failure> {
    let target = need_target(cli, "lift")?;
    let other = load_spec(target)?;
    let name = cli
        .map
        .as_deref()
        .ok_or_else(|| fail(2, "lift needs --map naming a hom from the source spec file"))?;
    let hom = doc
        .homs
        .get(name)
        .ok_or_else(|| fail(2, format!("hom `{name}` is not defined in the source spec file")))?;
    let maps = LiftMaps::Uniform(hom.clone());
    let rep = doc.tower.lift_exists(&other.tower, &maps, horizon).map_err(run_failure)?;
    let verdict = match &rep.verdict {
        LiftVerdict::Liftable { witnesses } => VerdictOut::Liftable { pairs: witnesses.clone() },
        LiftVerdict::Obstructed { stage } => VerdictOut::Obstructed { stage: *stage },
        LiftVerdict::Unknown => VerdictOut::UnknownLift,
    };
    let mut out = Outcome::new(verdict, rep.certainty, &rep.provenance);
    out.witnesses = rep.witnesses;
    Ok(out)
}

fn restrict(cli: &Cli, doc: &SpecDocument) -> Result<Outcome, Failure> {
    let src = cli
        .indices
        .as_deref()
        .ok_or_else(|| fail(2, "restrict needs --indices (`0,2,5` or `start::stride`)"))?;
    let indices = parse_indices(src)?;
    let restricted = doc.tower.restrict_cofinal(&indices).map_err(run_failure)?;
    Ok(report::tower_outcome(&restricted, "restrict-cofinal"))
}

fn need_target<'c>(cli: &'c Cli, command: &str) -> Result<&'c Path, Failure> {
    cli.target
        .as_deref()
        .ok_or_else(|| fail(2, format!("{command} needs --target with a second spec file")))
}

fn parse_base_word(base: &BaseModel, src: &str) -> Result<Word, Failure> {
    parse_word(base.presentation().alphabet(), src)
        .map_err(|e| fail(2, format!("bad --word `{src}`: {e}")))
}

fn parse_indices(src: &str) -> Result<CofinalIndices, Failure> {
    if let Some((start, stride)) = src.split_once("::") {
        let start: usize = start
            .trim()
            .parse()
            .map_err(|_| fail(2, format!("bad start index `{}`", start.trim())))?;
        let stride: usize = stride
            .trim()
            .parse()
            .map_err(|_| fail(2, format!("bad stride `{}`", stride.trim())))?;
        if stride == 0 {
            return Err(fail(2, "stride must be positive"));
        }
        return Ok(CofinalIndices::Arithmetic { start, stride });
    }
    let mut picks = Vec::new();
    for part in src.split(',') {
        let trimmed = part.trim();
        if trimmed.is_empty() {
            continue;
        }
        picks.push(
            trimmed.parse().map_err(|_| fail(2, format!("bad stage index `{trimmed}`")))?,
        );
    }
    if picks.is_empty() {
        return Err(fail(2, "no stage indices given"));
    }
    Ok(CofinalIndices::Finite(picks))
}
