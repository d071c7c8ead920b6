//! Line-oriented spec files describing a tower and its base model.
//!
//! A file is a sequence of sections. `[group <name>]` declares a group from
//! `generators = a, b`, optional `relators = a^2, b^3` and an optional
//! `abelian = true` marker. `[hom <name>: <src> -> <dst>]` declares a
//! homomorphism from lines `a -> b^2`, one per source generator. `[tower]`
//! holds `stage <i>: group=<g> thread=<words|full|trivial>` entries,
//! `bonding <i>: <hom>` entries, an optional
//! `tail: group=<g> bonding=<hom> thread_step=<hom> thread0=<...>` rule and
//! optional `horizon = <n>` and `budget = <n>` defaults. `[base]` names the
//! base group and its maps into the stages: `group = <g>`, `map <i>: <hom>`,
//! `tail_map: <hom>`. Names must be declared before they are referenced.
//! `#` starts a comment.

use liftlim_core::coset::{EnumerationBudget, Presentation};
use liftlim_core::tower::{
    BaseModel, GroupStage, StageGroup, StationaryTail, SubgroupHandle, Tower, TowerError,
    DEFAULT_HORIZON,
};
use liftlim_core::word::{parse_word, Alphabet, GroupHom, Word, WordError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}: `{name}` is not defined")]
    Reference { line: usize, name: String },
    #[error("tower assembly: {0}")]
    Tower(#[from] TowerError),
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> SpecError {
    SpecError::Parse { line, column, message: message.into() }
}

/// A fully resolved document: the tower, the optional base model, and the
/// named pieces it was assembled from.
pub struct SpecDocument {
    pub tower: Tower,
    pub base: Option<BaseModel>,
    pub horizon: Option<usize>,
    pub homs: BTreeMap<String, GroupHom>,
}

pub fn parse_spec(text: &str) -> Result<SpecDocument, SpecError> {
    Parser::new().run(text)
}

struct GroupBuild {
    name: String,
    line: usize,
    generators: Option<(usize, Vec<String>)>,
    relators: Option<(usize, String)>,
    abelian: bool,
}

struct HomBuild {
    name: String,
    line: usize,
    source: Alphabet,
    target: Alphabet,
    images: Vec<Option<Word>>,
}

#[derive(Default)]
struct TowerBuild {
    stages: Vec<(usize, usize, GroupStage)>,
    bondings: Vec<(usize, usize, GroupHom)>,
    tail: Option<StationaryTail>,
    horizon: Option<usize>,
    budget: Option<usize>,
}

#[derive(Default)]
struct BaseBuild {
    group: Option<(usize, String)>,
    maps: Vec<(usize, usize, GroupHom)>,
    tail_map: Option<GroupHom>,
    last_line: usize,
}

enum Section {
    None,
    Group(GroupBuild),
    Hom(HomBuild),
    Tower,
    Base,
}

struct Parser {
    groups: BTreeMap<String, StageGroup>,
    homs: BTreeMap<String, GroupHom>,
    tower: Option<TowerBuild>,
    base: Option<BaseBuild>,
    section: Section,
}

impl Parser {
    fn new() -> Self {
        Parser {
            groups: BTreeMap::new(),
            homs: BTreeMap::new(),
            tower: None,
            base: None,
            section: Section::None,
        }
    }

    fn run(mut self, text: &str) -> Result<SpecDocument, SpecError> {
        let mut last = 0;
        for (idx, raw) in text.lines().enumerate() {
            let no = idx + 1;
            last = no;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            if line.trim_start().starts_with('[') {
                self.finish_section()?;
                self.open_section(no, line.trim())?;
            } else {
                self.body_line(no, line)?;
            }
        }
        self.finish_section()?;
        self.assemble(last)
    }

    fn open_section(&mut self, no: usize, line: &str) -> Result<(), SpecError> {
        let inner = line
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| parse_err(no, 1, "section header must be enclosed in brackets"))?
            .trim();
        if inner == "tower" {
            if self.tower.is_some() {
                return Err(parse_err(no, 1, "duplicate [tower] section"));
            }
            self.tower = Some(TowerBuild::default());
            self.section = Section::Tower;
        } else if inner == "base" {
            if self.base.is_some() {
                return Err(parse_err(no, 1, "duplicate [base] section"));
            }
            self.base = Some(BaseBuild::default());
            self.section = Section::Base;
        } else if let Some(rest) = inner.strip_prefix("group ") {
            let name = rest.trim().to_string();
            if name.is_empty() {
                return Err(parse_err(no, 1, "group section needs a name"));
            }
            if self.groups.contains_key(&name) {
                return Err(parse_err(no, 1, format!("group `{name}` is already defined")));
            }
            self.section = Section::Group(GroupBuild {
                name,
                line: no,
                generators: None,
                relators: None,
                abelian: false,
            });
        } else if let Some(rest) = inner.strip_prefix("hom ") {
            let (name, arrow) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(no, 1, "hom header must read `hom name: src -> dst`"))?;
            let name = name.trim().to_string();
            let (src, dst) = arrow
                .split_once("->")
                .ok_or_else(|| parse_err(no, 1, "hom header must read `hom name: src -> dst`"))?;
            if self.homs.contains_key(&name) {
                return Err(parse_err(no, 1, format!("hom `{name}` is already defined")));
            }
            let source = self.group_alphabet(no, src.trim())?.clone();
            let target = self.group_alphabet(no, dst.trim())?.clone();
            let rank = source.rank();
            self.section =
                Section::Hom(HomBuild { name, line: no, source, target, images: vec![None; rank] });
        } else {
            return Err(parse_err(no, 1, format!("unknown section `[{inner}]`")));
        }
        Ok(())
    }

    fn group_alphabet(&self, no: usize, name: &str) -> Result<&Alphabet, SpecError> {
        self.groups
            .get(name)
            .map(|g| g.alphabet())
            .ok_or_else(|| SpecError::Reference { line: no, name: name.to_string() })
    }

    fn group(&self, no: usize, name: &str) -> Result<&StageGroup, SpecError> {
        self.groups
            .get(name)
            .ok_or_else(|| SpecError::Reference { line: no, name: name.to_string() })
    }

    fn hom(&self, no: usize, name: &str) -> Result<&GroupHom, SpecError> {
        self.homs
            .get(name)
            .ok_or_else(|| SpecError::Reference { line: no, name: name.to_string() })
    }

    fn body_line(&mut self, no: usize, line: &str) -> Result<(), SpecError> {
        match std::mem::replace(&mut self.section, Section::None) {
            Section::None => Err(parse_err(no, 1, "content before the first section header")),
            Section::Group(mut g) => {
                group_line(&mut g, no, line)?;
                self.section = Section::Group(g);
                Ok(())
            }
            Section::Hom(mut h) => {
                hom_line(&mut h, no, line)?;
                self.section = Section::Hom(h);
                Ok(())
            }
            Section::Tower => {
                self.tower_line(no, line)?;
                self.section = Section::Tower;
                Ok(())
            }
            Section::Base => {
                self.base_line(no, line)?;
                self.section = Section::Base;
                Ok(())
            }
        }
    }

    fn finish_section(&mut self) -> Result<(), SpecError> {
        match std::mem::replace(&mut self.section, Section::None) {
            Section::None | Section::Tower | Section::Base => Ok(()),
            Section::Group(g) => {
                let (name, group) = finish_group(g)?;
                self.groups.insert(name, group);
                Ok(())
            }
            Section::Hom(h) => {
                let (name, hom) = finish_hom(h)?;
                self.homs.insert(name, hom);
                Ok(())
            }
        }
    }

    fn tower_line(&mut self, no: usize, line: &str) -> Result<(), SpecError> {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("stage ") {
            let (idx, body) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(no, 1, "stage line must read `stage <i>: ...`"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| parse_err(no, 1, format!("bad stage index `{}`", idx.trim())))?;
            let (gname, thread_src) = split_stage_body(no, body)?;
            let group = self.group(no, &gname)?.clone();
            let offset = line.find("thread=").map(|p| p + "thread=".len() + 1).unwrap_or(1);
            let thread = parse_thread(&group, &thread_src, no, offset)?;
            let stage = GroupStage::new(group, thread)?;
            self.tower_mut().stages.push((no, idx, stage));
        } else if let Some(rest) = trimmed.strip_prefix("bonding ") {
            let (idx, name) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(no, 1, "bonding line must read `bonding <i>: <hom>`"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| parse_err(no, 1, format!("bad bonding index `{}`", idx.trim())))?;
            let hom = self.hom(no, name.trim())?.clone();
            self.tower_mut().bondings.push((no, idx, hom));
        } else if let Some(rest) = trimmed.strip_prefix("tail:") {
            if self.tower_mut().tail.is_some() {
                return Err(parse_err(no, 1, "duplicate tail rule"));
            }
            let tail = self.parse_tail(no, rest, line)?;
            self.tower_mut().tail = Some(tail);
        } else if let Some(value) = key_value(trimmed, "horizon") {
            let h: usize = value
                .trim()
                .parse()
                .map_err(|_| parse_err(no, 1, format!("bad horizon `{}`", value.trim())))?;
            self.tower_mut().horizon = Some(h);
        } else if let Some(value) = key_value(trimmed, "budget") {
            let b: usize = value
                .trim()
                .parse()
                .map_err(|_| parse_err(no, 1, format!("bad budget `{}`", value.trim())))?;
            self.tower_mut().budget = Some(b);
        } else {
            return Err(parse_err(no, 1, format!("unrecognized tower line `{trimmed}`")));
        }
        Ok(())
    }

    fn parse_tail(&self, no: usize, rest: &str, line: &str) -> Result<StationaryTail, SpecError> {
        let fields = tail_fields(no, rest)?;
        let group = self.group(no, &fields.group)?.clone();
        let bonding = self.hom(no, &fields.bonding)?.clone();
        let step = self.hom(no, &fields.step)?.clone();
        let offset = line.find("thread0=").map(|p| p + "thread0=".len() + 1).unwrap_or(1);
        let thread0 = parse_thread(&group, &fields.thread0, no, offset)?;
        Ok(StationaryTail::new(group, thread0, bonding, step)?)
    }

    fn base_line(&mut self, no: usize, line: &str) -> Result<(), SpecError> {
        let trimmed = line.trim();
        if let Some(value) = key_value(trimmed, "group") {
            let b = self.base_mut();
            if b.group.is_some() {
                return Err(parse_err(no, 1, "duplicate base group line"));
            }
            b.last_line = no;
            b.group = Some((no, value.trim().to_string()));
        } else if let Some(rest) = trimmed.strip_prefix("map ") {
            let (idx, name) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(no, 1, "map line must read `map <i>: <hom>`"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| parse_err(no, 1, format!("bad map index `{}`", idx.trim())))?;
            let hom = self.hom(no, name.trim())?.clone();
            let b = self.base_mut();
            b.last_line = no;
            b.maps.push((no, idx, hom));
        } else if let Some(rest) = trimmed.strip_prefix("tail_map:") {
            let hom = self.hom(no, rest.trim())?.clone();
            let b = self.base_mut();
            if b.tail_map.is_some() {
                return Err(parse_err(no, 1, "duplicate tail_map line"));
            }
            b.last_line = no;
            b.tail_map = Some(hom);
        } else {
            return Err(parse_err(no, 1, format!("unrecognized base line `{trimmed}`")));
        }
        Ok(())
    }

    fn tower_mut(&mut self) -> &mut TowerBuild {
        self.tower.as_mut().expect("tower section is open")
    }

    fn base_mut(&mut self) -> &mut BaseBuild {
        self.base.as_mut().expect("base section is open")
    }

    fn assemble(self, last: usize) -> Result<SpecDocument, SpecError> {
        let build = self
            .tower
            .ok_or_else(|| parse_err(last.max(1), 1, "missing [tower] section"))?;
        let mut stages = Vec::with_capacity(build.stages.len());
        for (pos, (no, idx, stage)) in build.stages.into_iter().enumerate() {
            if idx != pos {
                return Err(parse_err(
                    no,
                    1,
                    format!("stage indices must run 0, 1, ... in order; expected {pos}, found {idx}"),
                ));
            }
            stages.push(stage);
        }
        let mut bondings = Vec::with_capacity(build.bondings.len());
        for (pos, (no, idx, hom)) in build.bondings.into_iter().enumerate() {
            if idx != pos {
                return Err(parse_err(
                    no,
                    1,
                    format!(
                        "bonding indices must run 0, 1, ... in order; expected {pos}, found {idx}"
                    ),
                ));
            }
            bondings.push(hom);
        }
        let horizon = build.horizon;
        let mut tower =
            Tower::new(stages, bondings, build.tail, horizon.unwrap_or(DEFAULT_HORIZON))?;
        if let Some(b) = build.budget {
            tower.set_budget(EnumerationBudget::with_max_cosets(b));
        }

        let base = match self.base {
            None => None,
            Some(b) => {
                let (gline, gname) = b
                    .group
                    .ok_or_else(|| parse_err(b.last_line.max(1), 1, "base section needs a `group = <g>` line"))?;
                let presentation = match self.groups.get(&gname) {
                    Some(StageGroup::Fp(p)) => p.clone(),
                    Some(g) => Presentation::free(g.alphabet().clone()),
                    None => return Err(SpecError::Reference { line: gline, name: gname }),
                };
                let mut maps = Vec::with_capacity(b.maps.len());
                for (pos, (no, idx, hom)) in b.maps.into_iter().enumerate() {
                    if idx != pos {
                        return Err(parse_err(
                            no,
                            1,
                            format!(
                                "map indices must run 0, 1, ... in order; expected {pos}, found {idx}"
                            ),
                        ));
                    }
                    maps.push(hom);
                }
                Some(BaseModel::new(&tower, presentation, maps, b.tail_map)?)
            }
        };

        Ok(SpecDocument { tower, base, horizon, homs: self.homs })
    }
}

fn key_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?;
    let rest = rest.trim_start();
    rest.strip_prefix('=')
}

fn group_line(g: &mut GroupBuild, no: usize, line: &str) -> Result<(), SpecError> {
    let trimmed = line.trim();
    if let Some(value) = key_value(trimmed, "generators") {
        if g.generators.is_some() {
            return Err(parse_err(no, 1, "duplicate generators line"));
        }
        let names: Vec<String> = value
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        g.generators = Some((no, names));
    } else if let Some(value) = key_value(trimmed, "relators") {
        if g.relators.is_some() {
            return Err(parse_err(no, 1, "duplicate relators line"));
        }
        g.relators = Some((no, value.trim().to_string()));
    } else if let Some(value) = key_value(trimmed, "abelian") {
        match value.trim() {
            "true" => g.abelian = true,
            "false" => g.abelian = false,
            other => return Err(parse_err(no, 1, format!("abelian must be true or false, found `{other}`"))),
        }
    } else {
        return Err(parse_err(no, 1, format!("unrecognized group line `{trimmed}`")));
    }
    Ok(())
}

fn finish_group(g: GroupBuild) -> Result<(String, StageGroup), SpecError> {
    let (gline, names) = g
        .generators
        .ok_or_else(|| parse_err(g.line, 1, format!("group `{}` needs a generators line", g.name)))?;
    let alphabet = Alphabet::new(names).map_err(|e| parse_err(gline, 1, e.to_string()))?;
    let relator_words = match &g.relators {
        None => Vec::new(),
        Some((rline, src)) => split_words(&alphabet, src, *rline, 1)?,
    };
    let group = if g.abelian {
        if !relator_words.is_empty() {
            return Err(parse_err(
                g.relators.unwrap().0,
                1,
                "abelian groups take no relators; drop the relators line",
            ));
        }
        StageGroup::Abelian(alphabet)
    } else if relator_words.is_empty() {
        StageGroup::Free(alphabet)
    } else {
        StageGroup::Fp(
            Presentation::new(alphabet, relator_words)
                .map_err(|e| parse_err(g.relators.unwrap().0, 1, e.to_string()))?,
        )
    };
    Ok((g.name, group))
}

fn hom_line(h: &mut HomBuild, no: usize, line: &str) -> Result<(), SpecError> {
    let trimmed = line.trim();
    let (lhs, rhs) = trimmed
        .split_once("->")
        .ok_or_else(|| parse_err(no, 1, "hom line must read `<generator> -> <word>`"))?;
    let gen = lhs.trim();
    let slot = h
        .source
        .names()
        .iter()
        .position(|n| n == gen)
        .ok_or_else(|| parse_err(no, 1, format!("`{gen}` is not a generator of the source group")))?;
    if h.images[slot].is_some() {
        return Err(parse_err(no, 1, format!("generator `{gen}` already has an image")));
    }
    let offset = line.find("->").map(|p| p + 3).unwrap_or(1);
    h.images[slot] = Some(parse_word_at(&h.target, rhs.trim(), no, offset)?);
    Ok(())
}

fn finish_hom(h: HomBuild) -> Result<(String, GroupHom), SpecError> {
    let mut images = Vec::with_capacity(h.images.len());
    for (i, img) in h.images.into_iter().enumerate() {
        match img {
            Some(w) => images.push(w),
            None => {
                return Err(parse_err(
                    h.line,
                    1,
                    format!("hom `{}` gives no image for generator `{}`", h.name, h.source.name(i)),
                ))
            }
        }
    }
    let hom = GroupHom::new(h.source, h.target, images)
        .map_err(|e| parse_err(h.line, 1, e.to_string()))?;
    Ok((h.name, hom))
}

struct TailFields {
    group: String,
    bonding: String,
    step: String,
    thread0: String,
}

fn tail_fields(no: usize, rest: &str) -> Result<TailFields, SpecError> {
    let need = |text: &str, key: &str| -> Result<usize, SpecError> {
        text.find(key)
            .ok_or_else(|| parse_err(no, 1, format!("tail rule is missing `{key}<...>`")))
    };
    let g = need(rest, "group=")?;
    let b = need(rest, "bonding=")?;
    let s = need(rest, "thread_step=")?;
    let t = need(rest, "thread0=")?;
    if !(g < b && b < s && s < t) {
        return Err(parse_err(
            no,
            1,
            "tail fields must appear in the order group, bonding, thread_step, thread0",
        ));
    }
    Ok(TailFields {
        group: rest[g + "group=".len()..b].trim().to_string(),
        bonding: rest[b + "bonding=".len()..s].trim().to_string(),
        step: rest[s + "thread_step=".len()..t].trim().to_string(),
        thread0: rest[t + "thread0=".len()..].trim().to_string(),
    })
}

fn split_stage_body(no: usize, body: &str) -> Result<(String, String), SpecError> {
    let g = body
        .find("group=")
        .ok_or_else(|| parse_err(no, 1, "stage line is missing `group=<g>`"))?;
    let t = body
        .find("thread=")
        .ok_or_else(|| parse_err(no, 1, "stage line is missing `thread=<...>`"))?;
    if t < g {
        return Err(parse_err(no, 1, "stage fields must appear in the order group, thread"));
    }
    let gname = body[g + "group=".len()..t].trim().to_string();
    let thread = body[t + "thread=".len()..].trim().to_string();
    Ok((gname, thread))
}

fn parse_thread(
    group: &StageGroup,
    src: &str,
    no: usize,
    col: usize,
) -> Result<SubgroupHandle, SpecError> {
    match src {
        "full" => Ok(SubgroupHandle::full(group)),
        "trivial" => Ok(SubgroupHandle::trivial(group)),
        words => {
            let ws = split_words(group.alphabet(), words, no, col)?;
            Ok(SubgroupHandle::from_words(group, &ws)?)
        }
    }
}

fn split_words(
    alphabet: &Alphabet,
    src: &str,
    no: usize,
    col: usize,
) -> Result<Vec<Word>, SpecError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in src.split(',') {
        let lead = part.len() - part.trim_start().len();
        let trimmed = part.trim();
        if !trimmed.is_empty() {
            out.push(parse_word_at(alphabet, trimmed, no, col + offset + lead)?);
        }
        offset += part.len() + 1;
    }
    Ok(out)
}

fn parse_word_at(
    alphabet: &Alphabet,
    src: &str,
    no: usize,
    col: usize,
) -> Result<Word, SpecError> {
    parse_word(alphabet, src).map_err(|e| match e {
        WordError::Parse { column, message } => parse_err(no, col + column - 1, message),
        other => parse_err(no, col, other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DYADIC: &str = "\
# the 2-adic rule over a circle
[group Z]
abelian = true
generators = a

[group P]
generators = a

[hom id: Z -> Z]
a -> a

[hom double: Z -> Z]
a -> a^2

[hom incl: P -> Z]
a -> a

[tower]
tail: group=Z bonding=id thread_step=double thread0=full

[base]
group = P
tail_map: incl
";

    #[test]
    fn dyadic_round_trip() {
        let doc = parse_spec(DYADIC).unwrap();
        assert_eq!(doc.tower.prefix_len(), 0);
        assert!(doc.tower.tail().is_some());
        assert!(doc.base.is_some());
        assert_eq!(doc.homs["double"].to_string(), "a -> a^2");
    }

    #[test]
    fn undefined_hom_is_a_reference_error() {
        let bad = DYADIC.replace("thread_step=double", "thread_step=u");
        match parse_spec(&bad) {
            Err(SpecError::Reference { name, .. }) => assert_eq!(name, "u"),
            Err(other) => panic!("expected a reference error, got {other}"),
            Ok(_) => panic!("expected a reference error"),
        }
    }

    #[test]
    fn duplicate_tower_section_is_rejected() {
        let bad = format!("{DYADIC}\n[tower]\n");
        match parse_spec(&bad) {
            Err(SpecError::Parse { message, .. }) => {
                assert!(message.contains("duplicate [tower]"), "{message}")
            }
            Err(other) => panic!("expected a parse error, got {other}"),
            Ok(_) => panic!("expected a parse error"),
        }
    }

    #[test]
    fn word_errors_carry_line_and_column() {
        let bad = DYADIC.replace("a -> a^2", "a -> a^^2");
        match parse_spec(&bad) {
            Err(SpecError::Parse { line, column, .. }) => {
                assert_eq!(line, 13);
                assert!(column > 6, "column {column} should point into the word");
            }
            Err(other) => panic!("expected a parse error, got {other}"),
            Ok(_) => panic!("expected a parse error"),
        }
    }

    #[test]
    fn prefix_stages_threads_and_bondings_assemble() {
        let text = "\
[group F2]
generators = a, b

[hom drop: F2 -> F2]
a -> a
b -> 1

[tower]
stage 0: group=F2 thread=a, b^2
stage 1: group=F2 thread=full
bonding 0: drop
horizon = 9
";
        let doc = parse_spec(text).unwrap();
        assert_eq!(doc.tower.prefix_len(), 2);
        assert_eq!(doc.horizon, Some(9));
        assert_eq!(doc.tower.horizon(), 9);
    }

    #[test]
    fn out_of_order_stage_indices_are_rejected() {
        let text = "\
[group F]
generators = a

[tower]
stage 1: group=F thread=full
";
        assert!(matches!(parse_spec(text), Err(SpecError::Parse { line: 5, .. })));
    }

    #[test]
    fn fp_groups_take_relators() {
        let text = "\
[group S3]
generators = a, b
relators = a^3, b^2, a*b*a*b

[tower]
stage 0: group=S3 thread=b
";
        let doc = parse_spec(text).unwrap();
        assert!(matches!(doc.tower.group_at(0), StageGroup::Fp(_)));
    }

    #[test]
    fn missing_tower_section_is_reported() {
        let text = "[group F]\ngenerators = a\n";
        match parse_spec(text) {
            Err(SpecError::Parse { message, .. }) => {
                assert!(message.contains("missing [tower]"), "{message}")
            }
            Err(other) => panic!("expected a parse error, got {other}"),
            Ok(_) => panic!("expected a parse error"),
        }
    }
}
