//! Finitely generated subgroups of free groups as folded core graphs.
//!
//! A subgroup is stored as a labelled graph with a base vertex: membership
//! is a trace from the base back to the base, intersection is the product
//! graph, finite index means the graph is a full cover of the bouquet. The
//! graph is folded, trimmed to its core and renumbered breadth-first, so
//! equal subgroups always have identical graphs and equality is plain
//! structural comparison.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::word::{Alphabet, Word};

const UNDEF: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StallingsError {
    #[error("word over a different alphabet")]
    AlphabetMismatch,
    #[error("generator word of length {length} is too long to build a graph from")]
    WordTooLong { length: BigUint },
}

/// Folded core graph of a finitely generated subgroup of the free group on
/// `alphabet`. Vertex 0 is the base; `edges[v][2g]` follows generator `g`
/// forward, `edges[v][2g + 1]` backward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupGraph {
    alphabet: Alphabet,
    edges: Vec<Vec<usize>>,
}

impl SubgroupGraph {
    /// Subgroup generated by the given words: a bouquet of word loops at the
    /// base vertex, folded and trimmed.
    pub fn from_words(alphabet: &Alphabet, words: &[Word]) -> Result<Self, StallingsError> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for w in words {
            if w.alphabet() != alphabet {
                return Err(StallingsError::AlphabetMismatch);
            }
            let len = w.len();
            if len > BigUint::from(1_000_000u32) {
                return Err(StallingsError::WordTooLong { length: len });
            }
            if len.is_zero() {
                continue;
            }
            let letters: Vec<(usize, i8)> = w.letters().collect();
            let mut cur = 0usize;
            for (i, (gen, sign)) in letters.iter().enumerate() {
                let next = if i + 1 == letters.len() {
                    0
                } else {
                    adj.push(Vec::new());
                    adj.len() - 1
                };
                let col = 2 * gen + usize::from(*sign < 0);
                adj[cur].push((col, next));
                adj[next].push((col ^ 1, cur));
                cur = next;
            }
        }
        Ok(Self::finish(alphabet.clone(), adj, true))
    }

    /// The whole group: one vertex carrying every loop.
    pub fn full(alphabet: &Alphabet) -> Self {
        let ncols = 2 * alphabet.rank();
        SubgroupGraph { alphabet: alphabet.clone(), edges: vec![vec![0; ncols]] }
    }

    /// The trivial subgroup: a bare base vertex.
    pub fn trivial(alphabet: &Alphabet) -> Self {
        let ncols = 2 * alphabet.rank();
        SubgroupGraph { alphabet: alphabet.clone(), edges: vec![vec![UNDEF; ncols]] }
    }

    /// Folds, trims hairs, and renumbers breadth-first from the base.
    fn finish(alphabet: Alphabet, mut adj: Vec<Vec<(usize, usize)>>, fold: bool) -> Self {
        let ncols = 2 * alphabet.rank();
        let n = adj.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        if fold {
            // repeat passes until no vertex carries two same-labelled edges
            // to different targets
            loop {
                let mut changed = false;
                for v in 0..n {
                    if find(&mut parent, v) != v {
                        continue;
                    }
                    let mut slot: Vec<usize> = vec![UNDEF; ncols];
                    let list = adj[v].clone();
                    for (col, t) in list {
                        let t = find(&mut parent, t);
                        if slot[col] == UNDEF {
                            slot[col] = t;
                        } else {
                            let s = find(&mut parent, slot[col]);
                            if s != t {
                                // merge t into s (keep the smaller label)
                                let (keep, kill) = if s < t { (s, t) } else { (t, s) };
                                parent[kill] = keep;
                                let moved = std::mem::take(&mut adj[kill]);
                                adj[keep].extend(moved);
                                changed = true;
                            }
                        }
                    }
                    if changed {
                        break;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        // single edge table on representatives
        let mut edges: Vec<Vec<usize>> = vec![vec![UNDEF; ncols]; n];
        let mut occupied = vec![false; n];
        for v in 0..n {
            if find(&mut parent, v) != v {
                continue;
            }
            occupied[v] = true;
            let list = adj[v].clone();
            for (col, t) in list {
                let t = find(&mut parent, t);
                debug_assert!(
                    edges[v][col] == UNDEF || edges[v][col] == t,
                    "folding left a conflict"
                );
                edges[v][col] = t;
            }
        }
        // trim hairs: repeatedly delete non-base vertices of degree one
        loop {
            let mut removed = false;
            for v in 1..n {
                if !occupied[v] {
                    continue;
                }
                let degree = (0..ncols).filter(|&c| edges[v][c] != UNDEF).count();
                if degree <= 1 {
                    for c in 0..ncols {
                        let t = edges[v][c];
                        if t != UNDEF {
                            edges[t][c ^ 1] = UNDEF;
                        }
                        edges[v][c] = UNDEF;
                    }
                    occupied[v] = false;
                    removed = true;
                }
            }
            if !removed {
                break;
            }
        }
        // canonical renumbering
        let base = find(&mut parent, 0);
        let mut number = vec![UNDEF; n];
        let mut order = vec![base];
        number[base] = 0;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for c in 0..ncols {
                let t = edges[v][c];
                if t != UNDEF && number[t] == UNDEF {
                    number[t] = order.len();
                    order.push(t);
                }
            }
        }
        let mut out = vec![vec![UNDEF; ncols]; order.len()];
        for (new_v, &old_v) in order.iter().enumerate() {
            for c in 0..ncols {
                let t = edges[old_v][c];
                out[new_v][c] = if t == UNDEF { UNDEF } else { number[t] };
            }
        }
        SubgroupGraph { alphabet, edges: out }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.len() == 1 && self.edges[0].iter().all(|&t| t == UNDEF)
    }

    /// The index in the ambient free group when finite: the graph must be a
    /// full cover of the bouquet (every slot of every vertex filled).
    pub fn index(&self) -> Option<usize> {
        if self.edges.iter().all(|row| row.iter().all(|&t| t != UNDEF)) {
            Some(self.edges.len())
        } else {
            None
        }
    }

    /// Follows one run `gen^exp` from `v`. Walks the visited chain and jumps
    /// along the cycle if one closes, so huge exponents stay cheap.
    fn trace_run(&self, v: usize, gen: usize, exp: &BigInt) -> Option<usize> {
        let col = 2 * gen + usize::from(exp.is_negative());
        let steps = exp.magnitude();
        let mut path = vec![v];
        let mut seen_at = vec![UNDEF; self.edges.len()];
        seen_at[v] = 0;
        let mut cur = v;
        loop {
            // done if the target distance is within the explored path
            if BigUint::from(path.len() - 1) >= *steps {
                let idx = steps.to_usize().expect("fits by comparison");
                return Some(path[idx]);
            }
            let next = self.edges[cur][col];
            if next == UNDEF {
                return None;
            }
            if seen_at[next] != UNDEF {
                let entry = seen_at[next];
                let cycle = path.len() - entry;
                let rem = (steps - BigUint::from(entry)) % BigUint::from(cycle);
                let idx = entry + rem.to_usize().expect("cycle length fits");
                return Some(path[idx]);
            }
            seen_at[next] = path.len();
            path.push(next);
            cur = next;
        }
    }

    fn trace_word(&self, start: usize, w: &Word) -> Option<usize> {
        let mut cur = start;
        for r in w.runs() {
            cur = self.trace_run(cur, r.gen, &r.exp)?;
        }
        Some(cur)
    }

    /// Whether the word lies in the subgroup.
    pub fn member(&self, w: &Word) -> bool {
        assert!(w.alphabet() == &self.alphabet, "word over a different alphabet");
        self.trace_word(0, w) == Some(0)
    }

    /// Partial action on vertices: the endpoint of `w` read from `v`, or None
    /// when the path leaves the graph.
    pub fn act_word(&self, v: usize, w: &Word) -> Option<usize> {
        assert!(w.alphabet() == &self.alphabet, "word over a different alphabet");
        self.trace_word(v, w)
    }

    /// One word per vertex reading from the base along a breadth-first tree.
    /// On a complete graph these are coset representatives.
    pub fn representatives(&self) -> Vec<Word> {
        let n = self.edges.len();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for c in 0..2 * self.alphabet.rank() {
                let t = self.edges[v][c];
                if t != UNDEF && !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((v, c));
                    queue.push_back(t);
                }
            }
        }
        (0..n)
            .map(|mut v| {
                let mut letters = Vec::new();
                while let Some((p, c)) = parent[v] {
                    letters.push((c / 2, if c % 2 == 0 { 1i8 } else { -1 }));
                    v = p;
                }
                letters.reverse();
                Word::from_letters(&self.alphabet, letters)
            })
            .collect()
    }

    /// Free basis from a breadth-first spanning tree: one word per
    /// non-tree edge.
    pub fn basis(&self) -> Vec<Word> {
        let n = self.edges.len();
        let ncols = 2 * self.alphabet.rank();
        let mut tree_parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut tree_edge = vec![vec![false; ncols]; n];
        while let Some(v) = queue.pop_front() {
            for c in 0..ncols {
                let t = self.edges[v][c];
                if t != UNDEF && !seen[t] {
                    seen[t] = true;
                    tree_parent[t] = Some((v, c));
                    tree_edge[v][c] = true;
                    tree_edge[t][c ^ 1] = true;
                    queue.push_back(t);
                }
            }
        }
        let rep = |mut v: usize| -> Word {
            let mut letters = Vec::new();
            while let Some((p, c)) = tree_parent[v] {
                letters.push((c / 2, if c % 2 == 0 { 1i8 } else { -1 }));
                v = p;
            }
            letters.reverse();
            Word::from_letters(&self.alphabet, letters)
        };
        let mut out = Vec::new();
        for v in 0..n {
            for gen in 0..self.alphabet.rank() {
                let c = 2 * gen;
                let t = self.edges[v][c];
                if t != UNDEF && !tree_edge[v][c] {
                    let mut mid = self.alphabet.empty_word();
                    mid.push_run(gen, BigInt::one());
                    out.push(rep(v).multiply(&mid).multiply(&rep(t).invert()));
                }
            }
        }
        out
    }

    /// Rank of the subgroup (size of any free basis).
    pub fn rank(&self) -> usize {
        let edge_count: usize = self
            .edges
            .iter()
            .map(|row| row.iter().step_by(2).filter(|&&t| t != UNDEF).count())
            .sum();
        edge_count + 1 - self.edges.len()
    }

    pub fn contains(&self, other: &SubgroupGraph) -> bool {
        assert!(self.alphabet == other.alphabet, "alphabet mismatch");
        other.basis().iter().all(|w| self.member(w))
    }

    /// Intersection via the product graph rooted at the pair of bases.
    pub fn intersect(&self, other: &SubgroupGraph) -> SubgroupGraph {
        assert!(self.alphabet == other.alphabet, "alphabet mismatch");
        let ncols = 2 * self.alphabet.rank();
        let n2 = other.edges.len();
        let mut id = vec![UNDEF; self.edges.len() * n2];
        let mut states = vec![(0usize, 0usize)];
        id[0] = 0;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        let mut head = 0;
        while head < states.len() {
            let (a, b) = states[head];
            for c in 0..ncols {
                let (ta, tb) = (self.edges[a][c], other.edges[b][c]);
                if ta == UNDEF || tb == UNDEF {
                    continue;
                }
                let key = ta * n2 + tb;
                if id[key] == UNDEF {
                    id[key] = states.len();
                    states.push((ta, tb));
                    adj.push(Vec::new());
                }
                adj[head].push((c, id[key]));
            }
            head += 1;
        }
        // product of folded graphs is folded; trimming and renumbering
        // still apply
        SubgroupGraph::finish(self.alphabet.clone(), adj, false)
    }

    /// The conjugate subgroup `w * self * w^-1`.
    pub fn conjugate_by(&self, w: &Word) -> Result<SubgroupGraph, StallingsError> {
        let gens: Vec<Word> =
            self.basis().iter().map(|b| w.multiply(b).multiply(&w.invert())).collect();
        SubgroupGraph::from_words(&self.alphabet, &gens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn graph(gens: &[&str]) -> SubgroupGraph {
        let al = ab();
        let ws: Vec<Word> = gens.iter().map(|g| parse_word(&al, g).unwrap()).collect();
        SubgroupGraph::from_words(&al, &ws).unwrap()
    }

    #[test]
    fn membership_basics() {
        let h = graph(&["a^2", "b"]);
        let al = ab();
        for (w, expect) in [
            ("a^2", true),
            ("a", false),
            ("b", true),
            ("a^2*b", true),
            ("a*b*a^-1", false),
            ("a^-2*b^3*a^4", true),
            ("1", true),
        ] {
            assert_eq!(h.member(&parse_word(&al, w).unwrap()), expect, "word {w}");
        }
    }

    #[test]
    fn canonical_under_generating_set_changes() {
        let h1 = graph(&["a^2", "b"]);
        let h2 = graph(&["b", "a^2*b", "a^2"]);
        assert_eq!(h1, h2);
        let h3 = graph(&["a^2", "b^2"]);
        assert_ne!(h1, h3);
    }

    #[test]
    fn index_of_even_subgroup() {
        let h = graph(&["a^2", "b", "a*b*a^-1"]);
        assert_eq!(h.index(), Some(2));
        assert!(graph(&["a^2", "b"]).index().is_none());
        assert_eq!(SubgroupGraph::full(&ab()).index(), Some(1));
        assert!(SubgroupGraph::trivial(&ab()).index().is_none());
    }

    #[test]
    fn intersections() {
        let al = ab();
        let a = graph(&["a"]);
        let b = graph(&["b"]);
        assert!(a.intersect(&b).is_trivial());
        let h2 = graph(&["a^2"]);
        let h3 = graph(&["a^3"]);
        let h6 = h2.intersect(&h3);
        assert_eq!(h6, graph(&["a^6"]));
        assert!(h6.member(&parse_word(&al, "a^6").unwrap()));
        assert!(!h6.member(&parse_word(&al, "a^3").unwrap()));
        // intersecting with the whole group changes nothing
        let h = graph(&["a^2", "b*a*b^-1"]);
        assert_eq!(SubgroupGraph::full(&al).intersect(&h), h);
        // commutativity on a handful of pairs
        let pairs = [
            (graph(&["a^2", "b"]), graph(&["a^3"])),
            (graph(&["a*b"]), graph(&["b*a"])),
            (graph(&["a^2", "b^2"]), graph(&["a^2", "b", "a*b*a^-1"])),
        ];
        for (x, y) in pairs {
            assert_eq!(x.intersect(&y), y.intersect(&x));
        }
    }

    #[test]
    fn basis_regenerates_the_subgroup() {
        for gens in [
            vec!["a^2", "b"],
            vec!["a^2", "b", "a*b*a^-1"],
            vec!["a*b*a^-1*b^-1"],
            vec!["a^3", "b*a*b"],
        ] {
            let h = graph(&gens);
            let basis = h.basis();
            assert_eq!(basis.len(), h.rank());
            for w in &basis {
                assert!(h.member(w), "basis word {w} must be a member");
            }
            let again = SubgroupGraph::from_words(&ab(), &basis).unwrap();
            assert_eq!(h, again, "basis must regenerate the same graph");
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(graph(&["a^2", "b"]).rank(), 2);
        // index two subgroup of a rank two free group has rank three
        assert_eq!(graph(&["a^2", "b", "a*b*a^-1"]).rank(), 3);
        assert_eq!(SubgroupGraph::trivial(&ab()).rank(), 0);
        assert_eq!(SubgroupGraph::full(&ab()).rank(), 2);
    }

    #[test]
    fn containment() {
        let h = graph(&["a^2", "b"]);
        let k = graph(&["a^4", "b"]);
        assert!(h.contains(&k));
        assert!(!k.contains(&h));
        assert!(SubgroupGraph::full(&ab()).contains(&h));
        assert!(h.contains(&SubgroupGraph::trivial(&ab())));
    }

    #[test]
    fn conjugates() {
        let al = ab();
        let h = graph(&["a^2", "b"]);
        let c = h.conjugate_by(&parse_word(&al, "a").unwrap()).unwrap();
        assert_eq!(c, graph(&["a^2", "a*b*a^-1"]));
        // conjugating by a member fixes the subgroup
        let fixed = h.conjugate_by(&parse_word(&al, "a^2*b").unwrap()).unwrap();
        assert_eq!(fixed, h);
    }

    #[test]
    fn huge_exponents_jump_cycles() {
        let al = ab();
        let h = graph(&["a^2"]);
        let even = parse_word(&al, "a^1000000000000000000000000000000").unwrap();
        let odd = parse_word(&al, "a^1000000000000000000000000000001").unwrap();
        assert!(h.member(&even));
        assert!(!h.member(&odd));
        // partial chain with no cycle: walks off the graph immediately
        let huge_b = parse_word(&al, "b^1000000000000000000000000000000").unwrap();
        assert!(!h.member(&huge_b));
    }

    #[test]
    fn membership_against_brute_force() {
        // oracle: all freely reduced products of up to three generator
        // powers with small exponents
        let al = ab();
        let cases = [vec!["a^2", "b"], vec!["a*b*a^-1"], vec!["a^2", "b^2", "a*b"]];
        for gens in cases {
            let h = graph(&gens);
            let gen_words: Vec<Word> = gens.iter().map(|g| parse_word(&al, g).unwrap()).collect();
            let mut elements = vec![al.empty_word()];
            for _ in 0..3 {
                let mut next = elements.clone();
                for e in &elements {
                    for g in &gen_words {
                        next.push(e.multiply(g));
                        next.push(e.multiply(&g.invert()));
                    }
                }
                next.sort_by_key(|w| w.to_string());
                next.dedup();
                elements = next;
            }
            for e in &elements {
                assert!(h.member(e), "oracle element {e} rejected");
            }
        }
    }
}
