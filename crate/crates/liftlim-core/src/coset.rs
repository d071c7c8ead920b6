//! Finite-index subgroups of finitely presented groups, via Todd-Coxeter
//! coset enumeration (HLT strategy with lookahead on budget pressure).
//!
//! Enumeration is deterministic: the same presentation, subgroup generators
//! and budget always produce the identical table. After the table closes it
//! is renumbered breadth-first from the subgroup coset, so any two runs that
//! describe the same subgroup yield byte-identical tables even when the
//! intermediate coset counts differ.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::word::{Alphabet, GroupHom, Word};

/// Relator words over a fixed alphabet. The group is the quotient of the
/// free group on the alphabet by the normal closure of the relators.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    alphabet: Alphabet,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self, CosetError> {
        for r in &relators {
            if *r.alphabet() != alphabet {
                return Err(CosetError::AlphabetMismatch);
            }
        }
        Ok(Presentation { alphabet, relators })
    }

    pub fn free(alphabet: Alphabet) -> Self {
        Presentation { alphabet, relators: Vec::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }
}

/// Caps on the enumeration. `max_cosets` bounds how many cosets may be alive
/// at once; `max_transitions` bounds the total number of table entries ever
/// written. Hitting either cap aborts with [`CosetError::BudgetExceeded`]
/// after a lookahead pass fails to free space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_cosets: usize,
    pub max_transitions: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_cosets: 20_000, max_transitions: 2_000_000 }
    }
}

impl EnumerationBudget {
    /// Budget dominated by the coset cap, with a proportional transition cap.
    pub fn with_max_cosets(max_cosets: usize) -> Self {
        EnumerationBudget { max_cosets, max_transitions: max_cosets.saturating_mul(100).max(10_000) }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CosetError {
    #[error("enumeration budget exceeded with {cosets} live cosets")]
    BudgetExceeded { cosets: usize },
    #[error("word over a different alphabet")]
    AlphabetMismatch,
    #[error("word of length {length} is too long to trace")]
    WordTooLong { length: BigUint },
}

/// Witness that a homomorphism fails to induce a map of coset spaces.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InducedMapError {
    #[error("homomorphism endpoints do not match the coset tables")]
    AlphabetMismatch,
    #[error("subgroup word {witness} maps to {image}, which is outside the target subgroup")]
    NotWellDefined { witness: Word, image: Word },
}

const UNDEF: usize = usize::MAX;

/// Closed coset table of a finite-index subgroup. Coset 0 is the subgroup
/// itself; the action is on the right.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetTable {
    alphabet: Alphabet,
    subgroup: Vec<Word>,
    /// `table[c][2g]` is `c * g`, `table[c][2g + 1]` is `c * g^-1`.
    table: Vec<Vec<usize>>,
}

impl CosetTable {
    /// Number of cosets, the index of the subgroup.
    pub fn index(&self) -> usize {
        self.table.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn subgroup_generators(&self) -> &[Word] {
        &self.subgroup
    }

    pub fn act_letter(&self, coset: usize, gen: usize, positive: bool) -> usize {
        self.table[coset][2 * gen + usize::from(!positive)]
    }

    /// Right action of a word, jumping along generator cycles so that huge
    /// exponents cost one modular reduction instead of one step each.
    pub fn act_word(&self, coset: usize, w: &Word) -> usize {
        assert!(*w.alphabet() == self.alphabet, "word over a different alphabet");
        let mut c = coset;
        for run in w.runs() {
            let positive = !run.exp.is_negative();
            // cycle of the generator through c
            let col = 2 * run.gen + usize::from(!positive);
            let mut cycle = vec![c];
            let mut cur = self.table[c][col];
            while cur != c {
                cycle.push(cur);
                cur = self.table[cur][col];
            }
            let len = BigUint::from(cycle.len());
            let step = (run.exp.magnitude() % &len)
                .to_usize()
                .expect("cycle length fits a machine word");
            c = cycle[step];
        }
        c
    }

    /// Whether the word lies in the subgroup.
    pub fn member(&self, w: &Word) -> bool {
        self.act_word(0, w) == 0
    }

    /// Transversal words, one per coset, from the breadth-first spanning
    /// tree. `representatives()[0]` is the empty word.
    pub fn representatives(&self) -> Vec<Word> {
        let n = self.index();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n]; // (coset, col)
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(c) = queue.pop_front() {
            for col in 0..2 * self.alphabet.rank() {
                let d = self.table[c][col];
                if !seen[d] {
                    seen[d] = true;
                    parent[d] = Some((c, col));
                    queue.push_back(d);
                }
            }
        }
        (0..n)
            .map(|mut c| {
                let mut letters = Vec::new();
                while let Some((p, col)) = parent[c] {
                    letters.push((col / 2, col % 2 == 0));
                    c = p;
                }
                letters.reverse();
                let mut w = self.alphabet.empty_word();
                for (gen, positive) in letters {
                    w.push_run(gen, BigInt::from(if positive { 1 } else { -1 }));
                }
                w
            })
            .collect()
    }

    /// The subgroup is normal iff it is fixed by conjugation with every
    /// generator; with a closed table this reduces to membership checks on
    /// conjugated subgroup generators.
    pub fn is_normal(&self) -> bool {
        for gen in 0..self.alphabet.rank() {
            for sign in [1i8, -1] {
                for h in &self.subgroup {
                    let mut conj = self.alphabet.empty_word();
                    conj.push_run(gen, BigInt::from(sign));
                    let mut back = self.alphabet.empty_word();
                    back.push_run(gen, BigInt::from(-sign));
                    if !self.member(&conj.multiply(h).multiply(&back)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Number of orbits of the subgroup generated by `acting` on the cosets.
pub fn orbit_count(table: &CosetTable, acting: &[Word]) -> usize {
    let n = table.index();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for w in acting {
        for c in 0..n {
            let d = table.act_word(c, w);
            let (rc, rd) = (find(&mut parent, c), find(&mut parent, d));
            if rc != rd {
                parent[rc.max(rd)] = rc.min(rd);
            }
        }
    }
    (0..n).filter(|&c| find(&mut parent.clone(), c) == c).count()
}

/// The map of coset spaces induced by `hom`, as `map[src coset] = dst
/// coset`, verified edge by edge. On failure the witness is a Schreier
/// generator of the source subgroup whose image leaves the target subgroup.
pub fn induced_map(
    src: &CosetTable,
    dst: &CosetTable,
    hom: &GroupHom,
) -> Result<Vec<usize>, InducedMapError> {
    if *hom.source() != src.alphabet || *hom.target() != dst.alphabet {
        return Err(InducedMapError::AlphabetMismatch);
    }
    let reps = src.representatives();
    let map: Vec<usize> = reps.iter().map(|w| dst.act_word(0, &hom.apply(w))).collect();
    for c in 0..src.index() {
        for gen in 0..src.alphabet.rank() {
            for positive in [true, false] {
                let d = src.act_letter(c, gen, positive);
                let mut letter = src.alphabet.empty_word();
                letter.push_run(gen, BigInt::from(if positive { 1 } else { -1 }));
                let expect = dst.act_word(map[c], &hom.apply(&letter));
                if map[d] != expect {
                    let witness = reps[c].multiply(&letter).multiply(&reps[d].invert());
                    let image = hom.apply(&witness);
                    return Err(InducedMapError::NotWellDefined { witness, image });
                }
            }
        }
    }
    Ok(map)
}

/// Enumerates the cosets of the subgroup generated by `subgroup` in the
/// presented group.
pub fn enumerate(
    pres: &Presentation,
    subgroup: &[Word],
    budget: &EnumerationBudget,
) -> Result<CosetTable, CosetError> {
    for w in subgroup {
        if *w.alphabet() != pres.alphabet {
            return Err(CosetError::AlphabetMismatch);
        }
    }
    let rank = pres.alphabet.rank();
    let flatten = |w: &Word| -> Result<Vec<usize>, CosetError> {
        let len = w.len();
        if len > BigUint::from(1_000_000u32) {
            return Err(CosetError::WordTooLong { length: len });
        }
        Ok(w.letters().map(|(gen, sign)| 2 * gen + usize::from(sign < 0)).collect())
    };
    let relators: Vec<Vec<usize>> =
        pres.relators.iter().map(|r| flatten(r)).collect::<Result<_, _>>()?;
    let subgroup_cols: Vec<Vec<usize>> =
        subgroup.iter().map(|w| flatten(w)).collect::<Result<_, _>>()?;

    let mut e = Machine {
        ncols: 2 * rank,
        table: vec![vec![UNDEF; 2 * rank]],
        parent: vec![0],
        live: 1,
        transitions: 0,
        budget: *budget,
    };

    // the subgroup generators close up at coset 0
    for w in &subgroup_cols {
        loop {
            match e.scan_and_fill(0, w, true) {
                Ok(()) => break,
                Err(Interrupt::CosetCap) => {
                    if !e.lookahead(&relators) {
                        return Err(CosetError::BudgetExceeded { cosets: e.live });
                    }
                }
                Err(Interrupt::TransitionCap) => {
                    return Err(CosetError::BudgetExceeded { cosets: e.live });
                }
            }
        }
    }

    // HLT main loop: trace every relator at every live coset and fill the
    // remaining gaps of each row by definitions
    let mut ptr = 0usize;
    while ptr < e.table.len() {
        if e.find(ptr) != ptr {
            ptr += 1;
            continue;
        }
        let mut restart = false;
        'work: loop {
            for r in &relators {
                if e.find(ptr) != ptr {
                    break; // this coset died in a coincidence
                }
                let root = e.find(ptr);
                match e.scan_and_fill(root, r, true) {
                    Ok(()) => {}
                    Err(Interrupt::CosetCap) => {
                        if !e.lookahead(&relators) {
                            return Err(CosetError::BudgetExceeded { cosets: e.live });
                        }
                        restart = true;
                        break 'work;
                    }
                    Err(Interrupt::TransitionCap) => {
                        return Err(CosetError::BudgetExceeded { cosets: e.live });
                    }
                }
            }
            if e.find(ptr) == ptr {
                for col in 0..e.ncols {
                    if e.lookup(ptr, col) == UNDEF {
                        match e.define(ptr, col) {
                            Ok(_) => {}
                            Err(Interrupt::CosetCap) => {
                                if !e.lookahead(&relators) {
                                    return Err(CosetError::BudgetExceeded { cosets: e.live });
                                }
                                restart = true;
                                break 'work;
                            }
                            Err(Interrupt::TransitionCap) => {
                                return Err(CosetError::BudgetExceeded { cosets: e.live });
                            }
                        }
                    }
                }
            }
            break;
        }
        if !restart {
            ptr += 1;
        }
    }

    Ok(e.into_table(pres.alphabet.clone(), subgroup.to_vec()))
}

enum Interrupt {
    CosetCap,
    TransitionCap,
}

struct Machine {
    ncols: usize,
    table: Vec<Vec<usize>>,
    parent: Vec<usize>,
    live: usize,
    transitions: usize,
    budget: EnumerationBudget,
}

impl Machine {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn lookup(&mut self, c: usize, col: usize) -> usize {
        let d = self.table[c][col];
        if d == UNDEF { UNDEF } else { self.find(d) }
    }

    fn write(&mut self, c: usize, col: usize, d: usize) -> Result<(), Interrupt> {
        self.transitions += 1;
        if self.transitions > self.budget.max_transitions {
            return Err(Interrupt::TransitionCap);
        }
        self.table[c][col] = d;
        Ok(())
    }

    /// Introduces a fresh coset across the undefined edge `(c, col)`.
    fn define(&mut self, c: usize, col: usize) -> Result<usize, Interrupt> {
        if self.live >= self.budget.max_cosets {
            return Err(Interrupt::CosetCap);
        }
        let n = self.table.len();
        self.table.push(vec![UNDEF; self.ncols]);
        self.parent.push(n);
        self.live += 1;
        self.write(c, col, n)?;
        self.write(n, col ^ 1, c)?;
        Ok(n)
    }

    /// Traces `w` from `a` back to `a`. With `fill` set, gaps are closed by
    /// defining new cosets; without it only forced deductions are applied.
    fn scan_and_fill(&mut self, a: usize, w: &[usize], fill: bool) -> Result<(), Interrupt> {
        if w.is_empty() {
            return Ok(());
        }
        let mut f = a;
        let mut i = 0usize;
        let mut b = a;
        let mut j = w.len();
        loop {
            while i < j {
                let next = self.lookup(f, w[i]);
                if next == UNDEF {
                    break;
                }
                f = next;
                i += 1;
            }
            if i == j {
                if f != b {
                    self.coincidence(f, b)?;
                }
                return Ok(());
            }
            while j > i {
                let prev = self.lookup(b, w[j - 1] ^ 1);
                if prev == UNDEF {
                    break;
                }
                b = prev;
                j -= 1;
            }
            if j == i {
                // scans met across a single undefined edge from both sides:
                // the backward scan consumed it, so f and b coincide
                if f != b {
                    self.coincidence(f, b)?;
                }
                return Ok(());
            }
            if j == i + 1 {
                // deduction closing the last gap
                self.write(f, w[i], b)?;
                self.write(b, w[i] ^ 1, f)?;
                return Ok(());
            }
            if !fill {
                return Ok(());
            }
            let n = self.define(f, w[i])?;
            f = n;
            i += 1;
        }
    }

    fn join(&mut self, x: usize, y: usize, queue: &mut VecDeque<usize>) {
        let (x, y) = (self.find(x), self.find(y));
        if x == y {
            return;
        }
        let (keep, kill) = if x < y { (x, y) } else { (y, x) };
        self.parent[kill] = keep;
        self.live -= 1;
        queue.push_back(kill);
    }

    fn coincidence(&mut self, a: usize, b: usize) -> Result<(), Interrupt> {
        let mut queue = VecDeque::new();
        self.join(a, b, &mut queue);
        while let Some(dead) = queue.pop_front() {
            let row = std::mem::take(&mut self.table[dead]);
            self.table[dead] = vec![UNDEF; self.ncols];
            for (col, &d) in row.iter().enumerate() {
                if d == UNDEF {
                    continue;
                }
                let u = self.find(dead);
                let v = self.find(d);
                let existing = self.lookup(u, col);
                if existing != UNDEF {
                    self.join(existing, v, &mut queue);
                } else {
                    self.write(u, col, v)?;
                    let back = self.lookup(v, col ^ 1);
                    if back != UNDEF {
                        self.join(back, u, &mut queue);
                    } else {
                        self.write(v, col ^ 1, u)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Deduction-only pass over the whole table, run when the coset cap is
    /// hit. Returns whether any coset was recovered.
    fn lookahead(&mut self, relators: &[Vec<usize>]) -> bool {
        let before = self.live;
        for c in 0..self.table.len() {
            if self.find(c) != c {
                continue;
            }
            for r in relators {
                if self.find(c) != c {
                    break;
                }
                let root = self.find(c);
                if self.scan_and_fill(root, r, false).is_err() {
                    return false;
                }
            }
        }
        self.live < before
    }

    /// Compacts dead cosets away and renumbers breadth-first from coset 0,
    /// producing the canonical table.
    fn into_table(mut self, alphabet: Alphabet, subgroup: Vec<Word>) -> CosetTable {
        let n_raw = self.table.len();
        let root = self.find(0);
        let mut order: Vec<usize> = Vec::with_capacity(self.live);
        let mut number = vec![UNDEF; n_raw];
        number[root] = 0;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for col in 0..self.ncols {
                let d = self.lookup(c, col);
                debug_assert_ne!(d, UNDEF, "finished table must be complete");
                if number[d] == UNDEF {
                    number[d] = order.len();
                    order.push(d);
                }
            }
        }
        let mut table = vec![vec![UNDEF; self.ncols]; order.len()];
        for (new_c, &old_c) in order.iter().enumerate() {
            for col in 0..self.ncols {
                let d = self.lookup(old_c, col);
                table[new_c][col] = number[d];
            }
        }
        CosetTable { alphabet, subgroup, table }
    }
}
