//! Trace monoids, Cartier–Foata normal forms and heap queries.
//!
//! Letters are dense indices into the monoid's alphabet and cliques are
//! bitmasks over those indices, so alphabets are limited to 64 letters.
//! A [`Trace`] is always kept in Cartier–Foata normal form: a sequence of
//! nonempty cliques where every letter of a clique depends on some letter
//! of the clique right below it. Equality of traces is equality of these
//! sequences.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{input, Error, Result};

/// Largest alphabet a monoid may have.
pub const MAX_LETTERS: usize = 64;

/// Default number of normalized words an enumeration may produce.
pub const DEFAULT_WORK_BUDGET: u64 = 10_000_000;

/// Index of a letter in its monoid's alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub usize);

impl Letter {
    pub fn id(self) -> usize {
        self.0
    }

    fn bit(self) -> u64 {
        1u64 << self.0
    }
}

/// A set of pairwise independent letters, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clique(u64);

impl Clique {
    pub const EMPTY: Clique = Clique(0);

    pub fn from_bits(bits: u64) -> Self {
        Clique(bits)
    }

    pub fn singleton(a: Letter) -> Self {
        Clique(a.bit())
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, a: Letter) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn with(self, a: Letter) -> Self {
        Clique(self.0 | a.bit())
    }

    pub fn is_subset(self, other: Clique) -> bool {
        self.0 & !other.0 == 0
    }

    /// Letters of the clique in increasing id order.
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        BitIter(self.0).map(Letter)
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// A trace in Cartier–Foata normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Trace {
    cliques: Vec<Clique>,
}

impl Trace {
    /// The empty trace.
    pub fn empty() -> Self {
        Trace::default()
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    /// Number of pieces `|x|`.
    pub fn len(&self) -> usize {
        self.cliques.iter().map(|c| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Number of cliques in the normal form.
    pub fn height(&self) -> usize {
        self.cliques.len()
    }

    /// Number of occurrences `|x|_a` of a letter.
    pub fn count(&self, a: Letter) -> usize {
        self.cliques.iter().filter(|c| c.contains(a)).count()
    }

    /// Reads the normal form bottom-up, each clique in id order.
    pub fn to_word(&self) -> Vec<Letter> {
        self.cliques.iter().flat_map(|c| c.letters()).collect()
    }

    /// Per-letter occurrence counts, indexed by letter id.
    pub fn letter_counts(&self, alphabet_len: usize) -> Vec<usize> {
        let mut counts = vec![0; alphabet_len];
        for c in &self.cliques {
            for a in c.letters() {
                counts[a.0] += 1;
            }
        }
        counts
    }
}

/// A trace monoid `M(Σ, I)` given by named letters and an independence
/// relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMonoid {
    names: Vec<String>,
    independent: Vec<u64>,
    index: HashMap<String, Letter>,
}

impl TraceMonoid {
    /// Builds a monoid from letter names and independent pairs.
    pub fn new<S: AsRef<str>>(names: &[S], pairs: &[(Letter, Letter)]) -> Result<Self> {
        if names.len() > MAX_LETTERS {
            return input(format!(
                "alphabet has {} letters, at most {MAX_LETTERS} are supported",
                names.len()
            ));
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            let n = n.as_ref();
            if n.is_empty() || n.contains(char::is_whitespace) {
                return input(format!("invalid letter name {n:?}"));
            }
            if index.insert(n.to_string(), Letter(i)).is_some() {
                return input(format!("duplicate letter name {n:?}"));
            }
        }
        let mut independent = vec![0u64; names.len()];
        for &(a, b) in pairs {
            if a.0 >= names.len() || b.0 >= names.len() {
                return input("independence pair refers to an unknown letter");
            }
            if a == b {
                return input(format!(
                    "independence must be irreflexive, got ({0}, {0})",
                    names[a.0].as_ref()
                ));
            }
            independent[a.0] |= b.bit();
            independent[b.0] |= a.bit();
        }
        Ok(TraceMonoid {
            names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            independent,
            index,
        })
    }

    /// Same as [`TraceMonoid::new`] with pairs given by name.
    pub fn from_named_pairs<S: AsRef<str>>(names: &[S], pairs: &[(&str, &str)]) -> Result<Self> {
        let tmp = TraceMonoid::new(names, &[])?;
        let pairs = pairs
            .iter()
            .map(|(a, b)| Ok((tmp.letter_or_err(a)?, tmp.letter_or_err(b)?)))
            .collect::<Result<Vec<_>>>()?;
        TraceMonoid::new(names, &pairs)
    }

    /// Free monoid (no commutations) on `a0 .. a{n-1}`.
    pub fn free(n: usize) -> Result<Self> {
        TraceMonoid::new(&indexed_names(n), &[])
    }

    /// Path model on `n` generators: `a_i` and `a_j` commute iff `|i-j| > 1`.
    pub fn path(n: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 2..n {
                pairs.push((Letter(i), Letter(j)));
            }
        }
        TraceMonoid::new(&indexed_names(n), &pairs)
    }

    /// Ring model on `n` generators: `a_i` and `a_j` commute iff they are not
    /// neighbours on the cycle.
    pub fn ring(n: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = j - i;
                if d >= 2 && n - d >= 2 {
                    pairs.push((Letter(i), Letter(j)));
                }
            }
        }
        TraceMonoid::new(&indexed_names(n), &pairs)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.names.len()).map(Letter)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: Letter) -> &str {
        &self.names[a.0]
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.index.get(name).copied()
    }

    pub fn letter_or_err(&self, name: &str) -> Result<Letter> {
        self.letter(name)
            .ok_or_else(|| Error::Input(format!("unknown letter {name:?}")))
    }

    /// Mask of every letter.
    pub fn full_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    pub fn independent(&self, a: Letter, b: Letter) -> bool {
        self.independent[a.0] & b.bit() != 0
    }

    /// Letters independent of `a`.
    pub fn independent_mask(&self, a: Letter) -> u64 {
        self.independent[a.0]
    }

    /// Letters dependent on `a`, including `a` itself.
    pub fn dependent_mask(&self, a: Letter) -> u64 {
        self.full_mask() & !self.independent[a.0]
    }

    /// Independent pairs `(a, b)` with `a < b`.
    pub fn independent_pairs(&self) -> Vec<(Letter, Letter)> {
        let mut out = Vec::new();
        for a in self.letters() {
            for b in BitIter(self.independent[a.0]).filter(|&b| b > a.0) {
                out.push((a, Letter(b)));
            }
        }
        out
    }

    /// True if the letters of `mask` are pairwise independent.
    pub fn is_clique(&self, mask: u64) -> bool {
        BitIter(mask).all(|a| mask & !(1u64 << a) & !self.independent[a] == 0)
    }

    /// Letters parallel to every letter of `c` (all letters when `c` is empty).
    pub fn parallel_mask(&self, c: Clique) -> u64 {
        c.letters()
            .fold(self.full_mask(), |m, a| m & self.independent[a.0])
    }

    /// Sub-monoid generated by `keep`, with letters renumbered in increasing
    /// id order and names preserved.
    pub fn induced(&self, keep: &[Letter]) -> Result<TraceMonoid> {
        let mut keep: Vec<Letter> = keep.to_vec();
        keep.sort();
        keep.dedup();
        if let Some(a) = keep.iter().find(|a| a.0 >= self.len()) {
            return input(format!("unknown letter id {}", a.0));
        }
        let names: Vec<&str> = keep.iter().map(|&a| self.name(a)).collect();
        let mut pairs = Vec::new();
        for (i, &a) in keep.iter().enumerate() {
            for (j, &b) in keep.iter().enumerate().skip(i + 1) {
                if self.independent(a, b) {
                    pairs.push((Letter(i), Letter(j)));
                }
            }
        }
        TraceMonoid::new(&names, &pairs)
    }

    /// Sub-monoid generated by `Σ \ {a}`.
    pub fn without(&self, a: Letter) -> Result<TraceMonoid> {
        let keep: Vec<Letter> = self.letters().filter(|&b| b != a).collect();
        self.induced(&keep)
    }

    /// Connected components of the dependence graph `(Σ, D)`, each sorted.
    pub fn dependence_components(&self) -> Vec<Vec<Letter>> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for start in self.letters() {
            if seen & start.bit() != 0 {
                continue;
            }
            let mut comp = start.bit();
            let mut frontier = start.bit();
            while frontier != 0 {
                let mut next = 0;
                for a in BitIter(frontier) {
                    next |= self.dependent_mask(Letter(a));
                }
                frontier = next & !comp;
                comp |= next;
            }
            seen |= comp;
            out.push(BitIter(comp).map(Letter).collect());
        }
        out
    }

    /// True iff `(Σ, D)` is connected.
    pub fn is_irreducible(&self) -> bool {
        self.dependence_components().len() <= 1
    }

    fn check_letter(&self, a: Letter) -> Result<()> {
        if a.0 >= self.len() {
            return input(format!("letter id {} is not in the monoid", a.0));
        }
        Ok(())
    }

    /// Checks that `x` is a well-formed normal form over this monoid.
    pub fn validate(&self, x: &Trace) -> Result<()> {
        for (i, c) in x.cliques.iter().enumerate() {
            if c.is_empty() {
                return input(format!("clique {i} is empty"));
            }
            if c.0 & !self.full_mask() != 0 {
                return input(format!("clique {i} contains an unknown letter"));
            }
            if !self.is_clique(c.0) {
                return input(format!("clique {i} contains dependent letters"));
            }
            if i > 0 {
                let below = x.cliques[i - 1];
                if let Some(b) = c.letters().find(|&b| self.dependent_mask(b) & below.0 == 0) {
                    return input(format!(
                        "normal form violated: {} in clique {i} depends on nothing below",
                        self.name(b)
                    ));
                }
            }
        }
        Ok(())
    }

    /// Builds a validated trace from an explicit clique sequence.
    pub fn trace_from_cliques(&self, cliques: Vec<Clique>) -> Result<Trace> {
        let t = Trace { cliques };
        self.validate(&t)?;
        Ok(t)
    }

    /// Cartier–Foata normal form of the class of `word`.
    pub fn normalize(&self, word: &[Letter]) -> Result<Trace> {
        let mut b = HeapBuilder::new(self);
        for &a in word {
            self.check_letter(a)?;
            b.push(a);
        }
        Ok(b.finish())
    }

    /// Normalizes a word given by letter names.
    pub fn normalize_names<S: AsRef<str>>(&self, word: &[S]) -> Result<Trace> {
        let letters = word
            .iter()
            .map(|n| self.letter_or_err(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.normalize(&letters)
    }

    /// Normal form of `x · y`.
    pub fn concat(&self, x: &Trace, y: &Trace) -> Trace {
        let mut b = HeapBuilder::from_trace(self, x);
        b.push_trace(y);
        b.finish()
    }

    /// Returns `z` with `x · z = y` when `x ≤ y`.
    pub fn left_divides(&self, x: &Trace, y: &Trace) -> Option<Trace> {
        let mut rest: Vec<Option<Letter>> = y.to_word().into_iter().map(Some).collect();
        for a in x.to_word() {
            match self.first_available(&rest, a) {
                Lookup::Minimal(j) => rest[j] = None,
                Lookup::Blocked | Lookup::Missing => return None,
            }
        }
        let word: Vec<Letter> = rest.into_iter().flatten().collect();
        Some(self.normalize(&word).expect("letters come from a valid trace"))
    }

    /// Decides `x ≤ ξ` for an unknown extension `ξ` of `prefix`.
    ///
    /// Returns `Some(true)` when `x ≤ prefix`, `Some(false)` when no
    /// extension of the prefix can dominate `x`, and `None` otherwise.
    pub fn prefix_dominates(&self, prefix: &Trace, x: &Trace) -> Option<bool> {
        let mut rest: Vec<Option<Letter>> = prefix.to_word().into_iter().map(Some).collect();
        for a in x.to_word() {
            match self.first_available(&rest, a) {
                Lookup::Minimal(j) => rest[j] = None,
                Lookup::Blocked => return Some(false),
                Lookup::Missing => return None,
            }
        }
        Some(true)
    }

    fn first_available(&self, rest: &[Option<Letter>], a: Letter) -> Lookup {
        let dep = self.dependent_mask(a);
        for (j, slot) in rest.iter().enumerate() {
            if let Some(b) = *slot {
                if b == a {
                    return Lookup::Minimal(j);
                }
                if dep & b.bit() != 0 {
                    return Lookup::Blocked;
                }
            }
        }
        Lookup::Missing
    }

    /// Maximal pieces of the heap of `x`, as `(clique index, letter)`.
    ///
    /// An occurrence is maximal iff no clique above it holds a letter
    /// dependent on it.
    pub fn maximal_pieces(&self, x: &Trace) -> Vec<(usize, Letter)> {
        let mut above = 0u64;
        let mut out = Vec::new();
        for (k, c) in x.cliques.iter().enumerate().rev() {
            for a in c.letters() {
                if self.dependent_mask(a) & above == 0 {
                    out.push((k, a));
                }
            }
            above |= c.0;
        }
        out.sort();
        out
    }

    /// True iff the heap of `x` has a unique maximal piece.
    pub fn is_pyramidal(&self, x: &Trace) -> Result<bool> {
        if x.is_empty() {
            return input("pyramidality is undefined for the empty trace");
        }
        Ok(self.is_pyramidal_nonempty(x))
    }

    fn is_pyramidal_nonempty(&self, x: &Trace) -> bool {
        // The top clique only holds maximal pieces, so a pyramid has a
        // singleton top clique and everything below depends on something
        // above it.
        let Some(top) = x.cliques.last() else {
            return false;
        };
        if top.len() != 1 {
            return false;
        }
        let mut above = top.0;
        for c in x.cliques.iter().rev().skip(1) {
            if c.letters().any(|b| self.dependent_mask(b) & above == 0) {
                return false;
            }
            above |= c.0;
        }
        true
    }

    /// Membership in `V_a`: pyramidal with its single occurrence of `a` on top.
    pub fn in_hitting_set(&self, x: &Trace, a: Letter) -> bool {
        match x.cliques.last() {
            Some(&top) if top == Clique::singleton(a) => {
                x.count(a) == 1 && self.is_pyramidal_nonempty(x)
            }
            _ => false,
        }
    }

    /// Removes the top piece `a` of `v ∈ V_a`.
    pub fn remove_top(&self, v: &Trace, a: Letter) -> Result<Trace> {
        if !self.in_hitting_set(v, a) {
            return input(format!("trace is not in V_{}", self.name(a)));
        }
        let mut cliques = v.cliques.clone();
        cliques.pop();
        Ok(Trace { cliques })
    }

    /// First hitting time of `a` in an (extension of) `prefix`: the downward
    /// closure of the lowest occurrence of `a`.
    pub fn first_hitting(&self, prefix: &Trace, a: Letter) -> Option<Trace> {
        let k = prefix.cliques.iter().position(|c| c.contains(a))?;
        let mut kept = vec![Clique::EMPTY; k + 1];
        kept[k] = Clique::singleton(a);
        let mut above = a.bit();
        for j in (0..k).rev() {
            let mut level = 0u64;
            for b in prefix.cliques[j].letters() {
                if self.dependent_mask(b) & above != 0 {
                    level |= b.bit();
                }
            }
            kept[j] = Clique(level);
            above |= level;
        }
        let word: Vec<Letter> = kept.iter().flat_map(|c| c.letters()).collect();
        Some(self.normalize(&word).expect("letters come from a valid trace"))
    }

    /// All cliques including the empty one, ordered by size then bitmask.
    pub fn enumerate_cliques(&self, budget: u64) -> Result<Vec<Clique>> {
        let mut out = Vec::new();
        self.collect_cliques(0, self.full_mask(), &mut out, budget)?;
        out.sort_by_key(|c| (c.len(), c.0));
        Ok(out)
    }

    fn collect_cliques(
        &self,
        current: u64,
        candidates: u64,
        out: &mut Vec<Clique>,
        budget: u64,
    ) -> Result<()> {
        if out.len() as u64 >= budget {
            return Err(Error::Resource(format!(
                "clique enumeration exceeded the budget of {budget}"
            )));
        }
        out.push(Clique(current));
        for a in BitIter(candidates) {
            // Only extend with letters above `a` to list each clique once.
            let higher = candidates & !((1u64 << a) | ((1u64 << a) - 1));
            self.collect_cliques(
                current | (1u64 << a),
                higher & self.independent[a],
                out,
                budget,
            )?;
        }
        Ok(())
    }

    /// All distinct traces of length at most `n`, shortest first.
    ///
    /// Each length is obtained by normalizing every extension `w·a` of the
    /// previous level and deduplicating on the normal form. `budget` bounds
    /// the number of normalized words.
    pub fn enumerate_traces(&self, n: usize, budget: u64) -> Result<Vec<Trace>> {
        let mut all = vec![Trace::empty()];
        let mut level = vec![Trace::empty()];
        let mut work = 0u64;
        for _ in 0..n {
            work += (level.len() as u64) * (self.len() as u64);
            if work > budget {
                return Err(Error::Resource(format!(
                    "trace enumeration exceeded the budget of {budget} words"
                )));
            }
            let mut next = HashSet::new();
            for x in &level {
                let base = HeapBuilder::from_trace(self, x);
                for a in self.letters() {
                    let mut b = base.clone();
                    b.push(a);
                    next.insert(b.finish());
                }
            }
            let mut next: Vec<Trace> = next.into_iter().collect();
            next.sort();
            all.extend(next.iter().cloned());
            level = next;
        }
        Ok(all)
    }
}

enum Lookup {
    Minimal(usize),
    Blocked,
    Missing,
}

fn indexed_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}

/// Incremental Cartier–Foata construction: appends letters on top of a heap.
///
/// Each letter lands one level above the highest piece it depends on.
#[derive(Debug, Clone)]
pub struct HeapBuilder<'m> {
    monoid: &'m TraceMonoid,
    cliques: Vec<Clique>,
    tops: Vec<usize>,
    len: usize,
}

impl<'m> HeapBuilder<'m> {
    pub fn new(monoid: &'m TraceMonoid) -> Self {
        HeapBuilder {
            monoid,
            cliques: Vec::new(),
            tops: vec![0; monoid.len()],
            len: 0,
        }
    }

    pub fn from_trace(monoid: &'m TraceMonoid, x: &Trace) -> Self {
        let mut tops = vec![0; monoid.len()];
        for (i, c) in x.cliques.iter().enumerate() {
            for a in c.letters() {
                tops[a.0] = i + 1;
            }
        }
        HeapBuilder {
            monoid,
            cliques: x.cliques.clone(),
            tops,
            len: x.len(),
        }
    }

    pub fn push(&mut self, a: Letter) {
        let level = BitIter(self.monoid.dependent_mask(a))
            .map(|b| self.tops[b])
            .max()
            .unwrap_or(0);
        if level == self.cliques.len() {
            self.cliques.push(Clique::EMPTY);
        }
        self.cliques[level] = self.cliques[level].with(a);
        self.tops[a.0] = level + 1;
        self.len += 1;
    }

    pub fn push_trace(&mut self, y: &Trace) {
        for c in &y.cliques {
            for a in c.letters() {
                self.push(a);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    /// Snapshot of the current heap.
    pub fn trace(&self) -> Trace {
        Trace {
            cliques: self.cliques.clone(),
        }
    }

    pub fn finish(self) -> Trace {
        Trace {
            cliques: self.cliques,
        }
    }
}

/// Formats a trace as `a0.a2|a1` (cliques bottom-up, `e` for the empty trace).
pub struct DisplayTrace<'a>(pub &'a TraceMonoid, pub &'a Trace);

impl fmt::Display for DisplayTrace<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1.is_empty() {
            return f.write_str("e");
        }
        for (i, c) in self.1.cliques.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, a) in c.letters().enumerate() {
                if j > 0 {
                    f.write_str(".")?;
                }
                f.write_str(self.0.name(a))?;
            }
        }
        Ok(())
    }
}
