//! Free-group words over named alphabets, and homomorphisms given by
//! generator images.
//!
//! Words are kept freely reduced at all times, stored as runs
//! `(generator, exponent)` with nonzero arbitrary-precision exponents and
//! distinct adjacent generators. Run storage matters: thread evolution maps
//! like "multiply by 2 per stage" produce exponents of size `2^i`, which must
//! not be expanded letter by letter.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// Ordered list of distinct generator names.
///
/// Cheap to clone; equality compares the name lists, not the allocation.
#[derive(Clone, Debug)]
pub struct Alphabet(Arc<Vec<String>>);

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for Alphabet {}

impl Alphabet {
    /// Builds an alphabet from generator names.
    ///
    /// Names must be distinct, nonempty, start with an ASCII letter or `_`,
    /// and continue with ASCII alphanumerics or `_`. The name `1` is reserved
    /// for the empty word.
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(names: I) -> Result<Self, WordError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(WordError::BadGeneratorName(n.clone()));
            }
            if names[..i].contains(n) {
                return Err(WordError::DuplicateGenerator(n.clone()));
            }
        }
        Ok(Alphabet(Arc::new(names)))
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// The word consisting of the single generator `index`.
    pub fn generator(&self, index: usize) -> Word {
        assert!(index < self.rank(), "generator index out of range");
        Word {
            alphabet: self.clone(),
            runs: vec![Run { gen: index, exp: BigInt::one() }],
        }
    }

    pub fn empty_word(&self) -> Word {
        Word { alphabet: self.clone(), runs: Vec::new() }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// One maximal run `gen^exp` of a reduced word; `exp` is never zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub gen: usize,
    pub exp: BigInt,
}

/// A freely reduced word over an [`Alphabet`].
///
/// Invariants: every run has a valid generator index and nonzero exponent,
/// and adjacent runs use distinct generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    alphabet: Alphabet,
    runs: Vec<Run>,
}

/// Errors from word construction, parsing and homomorphism application.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("invalid generator name {0:?}")]
    BadGeneratorName(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("words use different alphabets")]
    AlphabetMismatch,
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}

impl Word {
    /// Builds a word from signed letters `(generator, sign)`, reducing freely.
    pub fn from_letters(
        alphabet: &Alphabet,
        letters: impl IntoIterator<Item = (usize, i8)>,
    ) -> Word {
        let mut w = alphabet.empty_word();
        for (gen, sign) in letters {
            assert!(gen < alphabet.rank(), "generator index out of range");
            assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
            w.push_run(gen, BigInt::from(sign));
        }
        w
    }

    /// Builds a word from `(generator, exponent)` runs, reducing freely.
    pub fn from_runs(
        alphabet: &Alphabet,
        runs: impl IntoIterator<Item = (usize, BigInt)>,
    ) -> Word {
        let mut w = alphabet.empty_word();
        for (gen, exp) in runs {
            assert!(gen < alphabet.rank(), "generator index out of range");
            w.push_run(gen, exp);
        }
        w
    }

    /// Appends `gen^exp`, merging with the last run and dropping
    /// cancellations.
    pub fn push_run(&mut self, gen: usize, exp: BigInt) {
        assert!(gen < self.alphabet.rank(), "generator index out of range");
        self.push_run_unchecked(gen, exp);
    }

    fn push_run_unchecked(&mut self, gen: usize, exp: BigInt) {
        if exp.is_zero() {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            if last.gen == gen {
                last.exp += exp;
                if last.exp.is_zero() {
                    self.runs.pop();
                }
                return;
            }
        }
        self.runs.push(Run { gen, exp });
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Letter count `|w|` (sum of absolute exponents).
    pub fn len(&self) -> BigUint {
        let mut n = BigUint::zero();
        for r in &self.runs {
            n += r.exp.magnitude();
        }
        n
    }

    /// Reduced product `self * rhs`. Both factors must share an alphabet.
    pub fn multiply(&self, rhs: &Word) -> Word {
        assert!(self.alphabet == rhs.alphabet, "words use different alphabets");
        let mut out = self.clone();
        for r in &rhs.runs {
            out.push_run(r.gen, r.exp.clone());
        }
        out
    }

    /// The inverse word (runs reversed, exponents negated).
    pub fn invert(&self) -> Word {
        Word {
            alphabet: self.alphabet.clone(),
            runs: self
                .runs
                .iter()
                .rev()
                .map(|r| Run { gen: r.gen, exp: -r.exp.clone() })
                .collect(),
        }
    }

    /// `self^e`. Single-run words exponentiate in closed form; longer words
    /// use conjugate extraction around the cyclically reduced core, so the
    /// run count of the result stays proportional to `|e|` times the core
    /// length only when the core genuinely repeats.
    pub fn pow(&self, e: &BigInt) -> Word {
        if e.is_zero() || self.runs.is_empty() {
            return self.alphabet.empty_word();
        }
        if e.is_one() {
            return self.clone();
        }
        let base = if e.is_negative() { self.invert() } else { self.clone() };
        let mag = e.magnitude().clone();
        if base.runs.len() == 1 {
            let r = &base.runs[0];
            return Word {
                alphabet: base.alphabet.clone(),
                runs: vec![Run { gen: r.gen, exp: r.exp.clone() * BigInt::from(mag) }],
            };
        }
        // prefix * core^e * prefix^-1 with core cyclically reduced
        let (prefix, core) = base.cyclic_decompose();
        let reps: usize = usize::try_from(&mag).unwrap_or_else(|_| {
            panic!("word power too large to materialize: core repeats {} times", mag)
        });
        let mut mid = core.alphabet.empty_word();
        for _ in 0..reps {
            mid = mid.multiply(&core);
        }
        prefix.multiply(&mid).multiply(&prefix.invert())
    }

    /// Splits `self` as `p * c * p^-1` with `c` cyclically reduced.
    fn cyclic_decompose(&self) -> (Word, Word) {
        let mut core = self.clone();
        let mut prefix = self.alphabet.empty_word();
        loop {
            let n = core.runs.len();
            if n < 2 {
                break;
            }
            let first = core.runs[0].clone();
            let last = core.runs[n - 1].clone();
            if first.gen != last.gen || first.exp.sign() == last.exp.sign() {
                break;
            }
            // peel the smaller end; conjugation moves it into the prefix
            let peel = first.exp.magnitude().min(last.exp.magnitude()).clone();
            let peel = BigInt::from(peel) * first.exp.signum();
            let mut w = core.alphabet.empty_word();
            w.push_run(first.gen, peel.clone());
            prefix = prefix.multiply(&w);
            let mut inner = core.alphabet.empty_word();
            inner.push_run(first.gen, -peel);
            let mut tail = core.alphabet.empty_word();
            tail.push_run(first.gen, w.runs[0].exp.clone());
            // the inner conjugate cancels against both ends of the old core
            core = inner.multiply(&core).multiply(&tail);
        }
        (prefix, core)
    }

    /// Exponent-sum vector in `Z^rank` (the image in the abelianization).
    pub fn abelianize(&self) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.alphabet.rank()];
        for r in &self.runs {
            v[r.gen] += &r.exp;
        }
        v
    }

    /// Iterates the word as signed letters. Panics if any exponent magnitude
    /// exceeds `usize`; intended for short words (tests, relator scans).
    pub fn letters(&self) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.runs.iter().flat_map(|r| {
            let n = usize::try_from(r.exp.magnitude()).expect("letter expansion overflow");
            let sign: i8 = if r.exp.is_negative() { -1 } else { 1 };
            std::iter::repeat((r.gen, sign)).take(n)
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return write!(f, "1");
        }
        for (i, r) in self.runs.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{}", self.alphabet.name(r.gen))?;
            if !r.exp.is_one() {
                write!(f, "^{}", r.exp)?;
            }
        }
        Ok(())
    }
}

/// Parses a word over `alphabet`.
///
/// Grammar: products need an explicit `*`, `^` takes a (possibly negative)
/// decimal integer and binds tighter than `*`, parentheses group, and the
/// literal `1` denotes the empty word. Whitespace is ignored.
///
/// ```
/// # use liftlim_core::word::{Alphabet, parse_word};
/// let ab = Alphabet::new(["a", "b"]).unwrap();
/// let w = parse_word(&ab, "(a*b^-2)^2").unwrap();
/// assert_eq!(w.to_string(), "a*b^-2*a*b^-2");
/// assert!(parse_word(&ab, "a**b").is_err());
/// ```
pub fn parse_word(alphabet: &Alphabet, input: &str) -> Result<Word, WordError> {
    let mut p = Parser { alphabet, input: input.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty input"));
    }
    let w = p.product()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("trailing input"));
    }
    Ok(w)
}

struct Parser<'a> {
    alphabet: &'a Alphabet,
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> WordError {
        WordError::Parse { column: self.pos + 1, message: message.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.input.len()
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn product(&mut self) -> Result<Word, WordError> {
        let mut w = self.factor()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                self.skip_ws();
                let f = self.factor()?;
                w = w.multiply(&f);
            } else {
                return Ok(w);
            }
        }
    }

    fn factor(&mut self) -> Result<Word, WordError> {
        let atom = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            Ok(atom.pow(&e))
        } else {
            Ok(atom)
        }
    }

    fn atom(&mut self) -> Result<Word, WordError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let w = self.product()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(w)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(self.alphabet.empty_word())
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
                match self.alphabet.index_of(name) {
                    Some(i) => Ok(self.alphabet.generator(i)),
                    None => {
                        self.pos = start;
                        Err(self.error(&format!("unknown generator {name:?}")))
                    }
                }
            }
            _ => Err(self.error("expected generator, '(' or '1'")),
        }
    }

    fn integer(&mut self) -> Result<BigInt, WordError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.error("expected integer exponent"));
        }
        let s = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        Ok(s.parse().expect("validated digits"))
    }
}

/// A homomorphism between free monoid presentations of groups, given by a
/// word image for each source generator. Whether it respects relations is
/// the caller's concern (validated downstream where decidable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    source: Alphabet,
    target: Alphabet,
    images: Vec<Word>,
}

impl GroupHom {
    pub fn new(source: Alphabet, target: Alphabet, images: Vec<Word>) -> Result<Self, WordError> {
        assert_eq!(source.rank(), images.len(), "one image per source generator");
        for im in &images {
            if im.alphabet() != &target {
                return Err(WordError::AlphabetMismatch);
            }
        }
        Ok(GroupHom { source, target, images })
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        let images = (0..alphabet.rank()).map(|i| alphabet.generator(i)).collect();
        GroupHom { source: alphabet.clone(), target: alphabet.clone(), images }
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// Applies the homomorphism, substituting generator images run by run.
    pub fn apply(&self, w: &Word) -> Word {
        assert!(w.alphabet() == &self.source, "word over a different alphabet");
        let mut out = self.target.empty_word();
        for r in w.runs() {
            let im = self.images[r.gen].pow(&r.exp);
            out = out.multiply(&im);
        }
        out
    }

    /// `self . rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &GroupHom) -> GroupHom {
        assert!(rhs.target == self.source, "homomorphisms do not compose");
        let images = rhs.images.iter().map(|im| self.apply(im)).collect();
        GroupHom { source: rhs.source.clone(), target: self.target.clone(), images }
    }

    /// True if source and target alphabets coincide and every generator maps
    /// to itself.
    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self
                .images
                .iter()
                .enumerate()
                .all(|(i, im)| im.runs().len() == 1 && {
                    let r = &im.runs()[0];
                    r.gen == i && r.exp.is_one()
                })
    }
}

impl fmt::Display for GroupHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, im) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -> {}", self.source.name(i), im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    #[test]
    fn reduction_cancels() {
        let al = ab();
        let w = Word::from_letters(&al, [(0, 1), (1, 1), (1, -1), (0, 1)]);
        assert_eq!(w.to_string(), "a^2");
        let v = Word::from_letters(&al, [(0, 1), (0, -1)]);
        assert!(v.is_empty());
        assert_eq!(v.to_string(), "1");
    }

    #[test]
    fn parse_examples() {
        let al = ab();
        assert_eq!(parse_word(&al, "a*b^-2").unwrap().to_string(), "a*b^-2");
        assert_eq!(parse_word(&al, "(a*b)^2").unwrap().to_string(), "a*b*a*b");
        assert_eq!(parse_word(&al, "1").unwrap().to_string(), "1");
        assert_eq!(parse_word(&al, "a^3*a^-3").unwrap().to_string(), "1");
        assert_eq!(parse_word(&al, "a ^ 2 * b").unwrap().to_string(), "a^2*b");
    }

    #[test]
    fn parse_error_positions() {
        let al = ab();
        match parse_word(&al, "a**b") {
            Err(WordError::Parse { column, .. }) => assert_eq!(column, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_word(&al, "c") {
            Err(WordError::Parse { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_word(&al, "").is_err());
        assert!(parse_word(&al, "(a").is_err());
        assert!(parse_word(&al, "a^").is_err());
    }

    #[test]
    fn display_parse_roundtrip() {
        let al = ab();
        for s in ["a", "a^-1", "a*b*a^-1", "a^5*b^-3", "1"] {
            let w = parse_word(&al, s).unwrap();
            let again = parse_word(&al, &w.to_string()).unwrap();
            assert_eq!(w, again);
        }
    }

    #[test]
    fn big_exponents_stay_compact() {
        let al = ab();
        let big: BigInt = BigInt::from(2).pow(200);
        let w = al.generator(0).pow(&big);
        assert_eq!(w.runs().len(), 1);
        assert_eq!(w.len(), big.magnitude().clone());
    }

    #[test]
    fn pow_conjugate_core() {
        let al = ab();
        // (a b a^-1)^3 = a b^3 a^-1
        let w = parse_word(&al, "a*b*a^-1").unwrap();
        let cubed = w.pow(&BigInt::from(3));
        assert_eq!(cubed.to_string(), "a*b^3*a^-1");
        let w = parse_word(&al, "(a^2*b*a^-2)^-4").unwrap();
        assert_eq!(w.to_string(), "a^2*b^-4*a^-2");
    }

    #[test]
    fn hom_apply_and_compose() {
        let al = ab();
        let z = Alphabet::new(["t"]).unwrap();
        // a -> t^2, b -> 1
        let h = GroupHom::new(
            al.clone(),
            z.clone(),
            vec![z.generator(0).pow(&BigInt::from(2)), z.empty_word()],
        )
        .unwrap();
        let w = parse_word(&al, "a^3*b*a^-1").unwrap();
        assert_eq!(h.apply(&w).to_string(), "t^4");
        let dbl = GroupHom::new(z.clone(), z.clone(), vec![z.generator(0).pow(&BigInt::from(2))])
            .unwrap();
        let comp = dbl.compose(&h);
        assert_eq!(comp.apply(&w).to_string(), "t^8");
        assert!(GroupHom::identity(&al).is_identity());
        assert!(!h.is_identity());
    }

    #[test]
    fn abelianize_vector() {
        let al = ab();
        let w = parse_word(&al, "a*b^2*a^-3*b").unwrap();
        assert_eq!(w.abelianize(), vec![BigInt::from(-2), BigInt::from(3)]);
    }
}
