//! Networks of alphabets and the synchronization of local words into a trace.
//!
//! Each component `i` of a network owns an alphabet `Σ_i`; a letter shared by
//! several alphabets acts as a rendezvous between those components. Given a
//! vector of local words, the synchronization trace is the largest trace whose
//! projections are prefixes of every local word.

use std::fmt;

use crate::error::{input, Error, Result};
use crate::trace::{HeapBuilder, Letter, Trace, TraceMonoid};

/// Terminal tag of a local word: more letters may follow, or none will.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamTag {
    Wfi,
    Eof,
}

/// Why synchronization stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyncTag {
    /// Deadlock: no letter can ever become minimal.
    Dl,
    /// Waiting for input on some component.
    Wfi,
    /// Every component is exhausted and closed.
    Eof,
}

impl fmt::Display for StreamTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamTag::Wfi => "WFI",
            StreamTag::Eof => "EOF",
        })
    }
}

impl fmt::Display for SyncTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyncTag::Dl => "DL",
            SyncTag::Wfi => "WFI",
            SyncTag::Eof => "EOF",
        })
    }
}

/// Outcome of a minimal-piece query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinPiece {
    Letter(Letter),
    Tag(SyncTag),
}

/// A network `(Σ_1, …, Σ_N)` of alphabets over a common set of letters.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphabetNetwork {
    monoid: TraceMonoid,
    alphabets: Vec<Vec<Letter>>,
    alphabet_masks: Vec<u64>,
    resources: Vec<Vec<usize>>,
}

impl AlphabetNetwork {
    /// Builds a network from letter names and alphabets of letter ids.
    ///
    /// Letters are independent iff they share no alphabet.
    pub fn new<S: AsRef<str>>(names: &[S], alphabets: Vec<Vec<Letter>>) -> Result<Self> {
        if alphabets.is_empty() {
            return input("a network needs at least one alphabet");
        }
        if names.is_empty() {
            return input("a network needs at least one letter");
        }
        let base = TraceMonoid::new(names, &[])?;
        let mut resources = vec![Vec::new(); names.len()];
        let mut alphabet_masks = Vec::with_capacity(alphabets.len());
        let mut sorted = Vec::with_capacity(alphabets.len());
        for (i, alph) in alphabets.into_iter().enumerate() {
            let mut alph = alph;
            alph.sort();
            alph.dedup();
            if alph.is_empty() {
                return input(format!("alphabet {i} is empty"));
            }
            let mut mask = 0u64;
            for &a in &alph {
                if a.0 >= names.len() {
                    return input(format!("alphabet {i} refers to unknown letter id {}", a.0));
                }
                mask |= 1u64 << a.0;
                resources[a.0].push(i);
            }
            alphabet_masks.push(mask);
            sorted.push(alph);
        }
        if let Some(a) = base.letters().find(|a| resources[a.0].is_empty()) {
            return input(format!("letter {} belongs to no alphabet", base.name(a)));
        }
        let mut pairs = Vec::new();
        for a in base.letters() {
            for b in base.letters().filter(|b| b.0 > a.0) {
                if !resources[a.0].iter().any(|i| resources[b.0].contains(i)) {
                    pairs.push((a, b));
                }
            }
        }
        let monoid = TraceMonoid::new(names, &pairs)?;
        Ok(AlphabetNetwork {
            monoid,
            alphabets: sorted,
            alphabet_masks,
            resources,
        })
    }

    /// Builds a network from alphabets of letter names.
    pub fn from_names<S: AsRef<str>, T: AsRef<str>>(
        names: &[S],
        alphabets: &[Vec<T>],
    ) -> Result<Self> {
        let base = TraceMonoid::new(names, &[])?;
        let alphabets = alphabets
            .iter()
            .map(|alph| {
                alph.iter()
                    .map(|n| base.letter_or_err(n.as_ref()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        AlphabetNetwork::new(names, alphabets)
    }

    /// Path network on `a0 .. a{n-1}`: alphabets `{a_{i-1}, a_i}` for
    /// `i = 1 .. n-1`, or the single alphabet `{a0}` when `n = 1`.
    pub fn path(n: usize) -> Result<Self> {
        let names = indexed_names(n);
        if n == 1 {
            return AlphabetNetwork::new(&names, vec![vec![Letter(0)]]);
        }
        let alphabets = (1..n).map(|i| vec![Letter(i - 1), Letter(i)]).collect();
        AlphabetNetwork::new(&names, alphabets)
    }

    /// Ring network on `a0 .. a{n-1}`: alphabet 0 is `{a_{n-1}, a_0}` and
    /// alphabet `i` is `{a_{i-1}, a_i}`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return input(format!("a ring network needs at least 3 letters, got {n}"));
        }
        let names = indexed_names(n);
        let alphabets = (0..n)
            .map(|i| vec![Letter((i + n - 1) % n), Letter(i)])
            .collect();
        AlphabetNetwork::new(&names, alphabets)
    }

    /// The synchronization monoid of the network.
    pub fn monoid(&self) -> &TraceMonoid {
        &self.monoid
    }

    /// Number of components `N`.
    pub fn len(&self) -> usize {
        self.alphabets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabets.is_empty()
    }

    pub fn alphabet(&self, i: usize) -> &[Letter] {
        &self.alphabets[i]
    }

    pub fn alphabets(&self) -> &[Vec<Letter>] {
        &self.alphabets
    }

    pub fn contains(&self, i: usize, a: Letter) -> bool {
        self.alphabet_masks[i] & (1u64 << a.0) != 0
    }

    /// Resources `R(a)`: the components whose alphabet contains `a`.
    pub fn resources(&self, a: Letter) -> &[usize] {
        &self.resources[a.0]
    }

    /// Checks that every component of `v` draws from its alphabet.
    pub fn validate(&self, v: &WordVector) -> Result<()> {
        if v.components.len() != self.len() {
            return input(format!(
                "word vector has {} components, network has {}",
                v.components.len(),
                self.len()
            ));
        }
        for (i, w) in v.components.iter().enumerate() {
            if let Some(&a) = w.letters.iter().find(|&&a| a.0 >= self.monoid.len() || !self.contains(i, a)) {
                let name = if a.0 < self.monoid.len() {
                    self.monoid.name(a).to_string()
                } else {
                    format!("#{}", a.0)
                };
                return input(format!("letter {name} is not in alphabet {i}"));
            }
        }
        Ok(())
    }

    /// Minimal piece of the synchronization trace, or the reason there is none.
    pub fn min_piece(&self, v: &WordVector) -> Result<MinPiece> {
        self.validate(v)?;
        let heads: Vec<Head> = v
            .components
            .iter()
            .map(|w| match (w.letters.first(), w.tag) {
                (Some(&a), _) => Head::Letter(a),
                (None, StreamTag::Wfi) => Head::Wfi,
                (None, StreamTag::Eof) => Head::Eof,
            })
            .collect();
        Ok(self.min_piece_of_heads(&heads))
    }

    fn min_piece_of_heads(&self, heads: &[Head]) -> MinPiece {
        if heads.iter().all(|h| *h == Head::Eof) {
            return MinPiece::Tag(SyncTag::Eof);
        }
        if !heads.iter().any(|h| matches!(h, Head::Letter(_))) {
            return MinPiece::Tag(SyncTag::Wfi);
        }
        let mut best: Option<Letter> = None;
        let mut waiting = false;
        for h in heads {
            let Head::Letter(a) = *h else { continue };
            match self.letter_status(heads, a) {
                Status::Ready => best = Some(best.map_or(a, |b| b.min(a))),
                Status::Waiting => waiting = true,
                Status::Blocked => {}
            }
        }
        if let Some(a) = best {
            return MinPiece::Letter(a);
        }
        if waiting {
            return MinPiece::Tag(SyncTag::Wfi);
        }
        // Every visible letter is blocked; a letter not yet received on an
        // open empty component may still synchronize.
        for (i, h) in heads.iter().enumerate() {
            if *h == Head::Wfi
                && self.alphabets[i]
                    .iter()
                    .any(|&b| self.letter_status(heads, b) != Status::Blocked)
            {
                return MinPiece::Tag(SyncTag::Wfi);
            }
        }
        MinPiece::Tag(SyncTag::Dl)
    }

    fn letter_status(&self, heads: &[Head], a: Letter) -> Status {
        let mut ready = true;
        for &j in &self.resources[a.0] {
            match heads[j] {
                Head::Letter(b) if b == a => {}
                Head::Wfi => ready = false,
                _ => return Status::Blocked,
            }
        }
        if ready {
            Status::Ready
        } else {
            Status::Waiting
        }
    }

    /// Synchronization trace of `v` and the tag explaining why it stops.
    pub fn synchronize(&self, v: &WordVector) -> Result<(Trace, SyncTag)> {
        let mut state = SyncState::new(self);
        state.feed(v)?;
        Ok((state.trace(), state.tag()))
    }

    pub fn names(&self) -> &[String] {
        self.monoid.names()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Head {
    Letter(Letter),
    Wfi,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ready,
    Waiting,
    Blocked,
}

fn indexed_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}

/// A local word together with its terminal tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedWord {
    pub letters: Vec<Letter>,
    pub tag: StreamTag,
}

impl TaggedWord {
    pub fn new(letters: Vec<Letter>, tag: StreamTag) -> Self {
        TaggedWord { letters, tag }
    }

    pub fn open(letters: Vec<Letter>) -> Self {
        TaggedWord::new(letters, StreamTag::Wfi)
    }

    pub fn closed(letters: Vec<Letter>) -> Self {
        TaggedWord::new(letters, StreamTag::Eof)
    }
}

/// One tagged word per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordVector {
    pub components: Vec<TaggedWord>,
}

impl WordVector {
    pub fn new(components: Vec<TaggedWord>) -> Self {
        WordVector { components }
    }

    /// `n` empty components with the same tag.
    pub fn empty(n: usize, tag: StreamTag) -> Self {
        WordVector {
            components: vec![TaggedWord::new(Vec::new(), tag); n],
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Incremental synchronization over a stream of chunks.
///
/// Residual input is kept as per-component buffers with read cursors; the
/// trace grows as minimal pieces are found.
#[derive(Debug, Clone)]
pub struct SyncState<'n> {
    network: &'n AlphabetNetwork,
    buffers: Vec<Vec<Letter>>,
    cursors: Vec<usize>,
    consumed: Vec<usize>,
    closed: Vec<bool>,
    heap: HeapBuilder<'n>,
    tag: SyncTag,
    limit: Option<usize>,
}

impl<'n> SyncState<'n> {
    pub fn new(network: &'n AlphabetNetwork) -> Self {
        SyncState {
            network,
            buffers: vec![Vec::new(); network.len()],
            cursors: vec![0; network.len()],
            consumed: vec![0; network.len()],
            closed: vec![false; network.len()],
            heap: HeapBuilder::new(network.monoid()),
            tag: SyncTag::Wfi,
            limit: None,
        }
    }

    /// Stops producing pieces once the trace reaches `limit` pieces.
    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = Some(limit);
        self
    }

    /// Last tag; `DL` and `EOF` are terminal.
    pub fn tag(&self) -> SyncTag {
        self.tag
    }

    pub fn is_terminal(&self) -> bool {
        self.tag != SyncTag::Wfi
    }

    /// True once the length limit has been reached.
    pub fn limit_reached(&self) -> bool {
        self.limit.is_some_and(|l| self.heap.len() >= l)
    }

    pub fn trace(&self) -> Trace {
        self.heap.trace()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn heap(&self) -> &HeapBuilder<'n> {
        &self.heap
    }

    /// Whether component `i` has been closed by an `EOF` chunk.
    pub fn is_closed(&self, i: usize) -> bool {
        self.closed[i]
    }

    /// Unconsumed letters of component `i`.
    pub fn pending(&self, i: usize) -> &[Letter] {
        &self.buffers[i][self.cursors[i]..]
    }

    /// Number of letters of component `i` already placed in the trace.
    pub fn consumed(&self, i: usize) -> usize {
        self.consumed[i]
    }

    /// Height up to which the trace is final.
    ///
    /// Letters of one component are pairwise dependent, so the `k`-th letter
    /// of component `i` lies at height at least `k`. Every letter placed later
    /// therefore lands above the smallest `consumed(i)` over the components
    /// that may still deliver letters.
    pub fn settled_height(&self) -> usize {
        if self.is_terminal() {
            return usize::MAX;
        }
        (0..self.buffers.len())
            .filter(|&i| !(self.closed[i] && self.pending(i).is_empty()))
            .map(|i| self.consumed[i])
            .min()
            .unwrap_or(usize::MAX)
    }

    /// Residual input as a word vector.
    pub fn residual(&self) -> WordVector {
        WordVector::new(
            (0..self.buffers.len())
                .map(|i| {
                    let tag = if self.closed[i] {
                        StreamTag::Eof
                    } else {
                        StreamTag::Wfi
                    };
                    TaggedWord::new(self.pending(i).to_vec(), tag)
                })
                .collect(),
        )
    }

    /// Appends a chunk to the residual input and synchronizes as far as
    /// possible.
    pub fn feed(&mut self, chunk: &WordVector) -> Result<SyncTag> {
        if self.is_terminal() {
            return Err(Error::State(format!(
                "synchronization already ended with {}",
                self.tag
            )));
        }
        self.network.validate(chunk)?;
        for (i, w) in chunk.components.iter().enumerate() {
            if self.closed[i] && (w.tag == StreamTag::Wfi || !w.letters.is_empty()) {
                return input(format!("component {i} was closed and cannot receive more input"));
            }
        }
        for (i, w) in chunk.components.iter().enumerate() {
            self.buffers[i].extend_from_slice(&w.letters);
            if w.tag == StreamTag::Eof {
                self.closed[i] = true;
            }
        }
        Ok(self.run())
    }

    fn head(&self, i: usize) -> Head {
        match self.buffers[i].get(self.cursors[i]) {
            Some(&a) => Head::Letter(a),
            None if self.closed[i] => Head::Eof,
            None => Head::Wfi,
        }
    }

    fn run(&mut self) -> SyncTag {
        let n = self.buffers.len();
        let mut heads: Vec<Head> = (0..n).map(|i| self.head(i)).collect();
        loop {
            if self.limit_reached() {
                self.tag = SyncTag::Wfi;
                break;
            }
            match self.network.min_piece_of_heads(&heads) {
                MinPiece::Letter(a) => {
                    self.heap.push(a);
                    for &j in self.network.resources(a) {
                        self.cursors[j] += 1;
                        self.consumed[j] += 1;
                        heads[j] = self.head(j);
                    }
                }
                MinPiece::Tag(t) => {
                    self.tag = t;
                    break;
                }
            }
        }
        self.compact();
        self.tag
    }

    fn compact(&mut self) {
        for (buf, cur) in self.buffers.iter_mut().zip(self.cursors.iter_mut()) {
            if *cur > 4096 && *cur * 2 > buf.len() {
                buf.drain(..*cur);
                *cur = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(net: &AlphabetNetwork, s: &str) -> Vec<Letter> {
        s.split_whitespace()
            .map(|n| net.monoid().letter(n).unwrap())
            .collect()
    }

    fn ring4_vector(net: &AlphabetNetwork) -> WordVector {
        // alphabets: 0 = {a3, a0}, 1 = {a0, a1}, 2 = {a1, a2}, 3 = {a2, a3}
        WordVector::new(vec![
            TaggedWord::open(word(net, "a0 a3 a0 a3")),
            TaggedWord::open(word(net, "a0 a1 a1 a0")),
            TaggedWord::open(word(net, "a1 a2 a2 a1")),
            TaggedWord::open(word(net, "a3 a2 a3 a2")),
        ])
    }

    #[test]
    fn network_monoids() {
        let p = AlphabetNetwork::path(5).unwrap();
        assert_eq!(p.monoid(), &TraceMonoid::path(5).unwrap());
        let r = AlphabetNetwork::ring(4).unwrap();
        let pairs = r.monoid().independent_pairs();
        assert_eq!(pairs, vec![(Letter(0), Letter(2)), (Letter(1), Letter(3))]);
        let single = AlphabetNetwork::from_names(&["x", "y", "z"], &[vec!["x", "y", "z"]]).unwrap();
        assert!(single.monoid().independent_pairs().is_empty());
        assert!(AlphabetNetwork::new(&["x", "y"], vec![vec![Letter(0)]]).is_err());
        assert!(AlphabetNetwork::new::<&str>(&[], vec![]).is_err());
    }

    #[test]
    fn ring4_min_piece_and_deadlock() {
        let net = AlphabetNetwork::ring(4).unwrap();
        let v = ring4_vector(&net);
        assert_eq!(net.min_piece(&v).unwrap(), MinPiece::Letter(Letter(0)));
        let (x, tag) = net.synchronize(&v).unwrap();
        assert_eq!(x, net.monoid().normalize(&word(&net, "a0 a1 a3 a2")).unwrap());
        assert_eq!(tag, SyncTag::Dl);

        let residual = WordVector::new(vec![
            TaggedWord::open(word(&net, "a0 a3")),
            TaggedWord::open(word(&net, "a1 a0")),
            TaggedWord::open(word(&net, "a2 a1")),
            TaggedWord::open(word(&net, "a3 a2")),
        ]);
        assert_eq!(net.min_piece(&residual).unwrap(), MinPiece::Tag(SyncTag::Dl));
    }

    #[test]
    fn trivial_tags() {
        let net = AlphabetNetwork::path(5).unwrap();
        let eof = WordVector::empty(4, StreamTag::Eof);
        assert_eq!(net.min_piece(&eof).unwrap(), MinPiece::Tag(SyncTag::Eof));
        assert_eq!(net.synchronize(&eof).unwrap(), (Trace::empty(), SyncTag::Eof));
        let wfi = WordVector::empty(4, StreamTag::Wfi);
        assert_eq!(net.min_piece(&wfi).unwrap(), MinPiece::Tag(SyncTag::Wfi));
    }

    #[test]
    fn path_waits_for_partner() {
        let net = AlphabetNetwork::path(5).unwrap();
        let v = WordVector::new(vec![
            TaggedWord::open(word(&net, "a0")),
            TaggedWord::open(word(&net, "a1")),
            TaggedWord::open(vec![]),
            TaggedWord::open(vec![]),
        ]);
        // alphabet 0 = {a0, a1}: a1 is not yet in component 0
        let (x, tag) = net.synchronize(&v).unwrap();
        assert_eq!(x, net.monoid().normalize(&word(&net, "a0")).unwrap());
        assert_eq!(tag, SyncTag::Wfi);
    }

    #[test]
    fn closed_partner_deadlocks() {
        let net = AlphabetNetwork::path(3).unwrap();
        let v = WordVector::new(vec![
            TaggedWord::closed(word(&net, "a1")),
            TaggedWord::closed(vec![]),
        ]);
        assert_eq!(net.synchronize(&v).unwrap(), (Trace::empty(), SyncTag::Dl));
    }

    #[test]
    fn empty_open_component_keeps_waiting() {
        // components 0 and 1 deadlock on x/y while component 2 may still act
        let net = AlphabetNetwork::from_names(
            &["x", "y", "z"],
            &[vec!["x", "y"], vec!["x", "y"], vec!["z"]],
        )
        .unwrap();
        let v = WordVector::new(vec![
            TaggedWord::open(word(&net, "x")),
            TaggedWord::open(word(&net, "y")),
            TaggedWord::open(vec![]),
        ]);
        assert_eq!(net.min_piece(&v).unwrap(), MinPiece::Tag(SyncTag::Wfi));
        let v = WordVector::new(vec![
            TaggedWord::open(word(&net, "x")),
            TaggedWord::open(word(&net, "y")),
            TaggedWord::closed(vec![]),
        ]);
        assert_eq!(net.min_piece(&v).unwrap(), MinPiece::Tag(SyncTag::Dl));
    }

    #[test]
    fn streaming_matches_one_shot() {
        let net = AlphabetNetwork::ring(4).unwrap();
        let v = ring4_vector(&net);
        let mut st = SyncState::new(&net);
        let longest = v.components.iter().map(|w| w.letters.len()).max().unwrap();
        for k in 0..longest {
            let chunk = WordVector::new(
                v.components
                    .iter()
                    .map(|w| TaggedWord::open(w.letters.get(k).copied().into_iter().collect()))
                    .collect(),
            );
            if st.is_terminal() {
                break;
            }
            st.feed(&chunk).unwrap();
        }
        assert_eq!((st.trace(), st.tag()), net.synchronize(&v).unwrap());
    }

    #[test]
    fn streaming_errors() {
        let net = AlphabetNetwork::path(3).unwrap();
        let mut st = SyncState::new(&net);
        assert_eq!(st.feed(&WordVector::empty(2, StreamTag::Wfi)).unwrap(), SyncTag::Wfi);
        assert!(st.trace().is_empty());
        st.feed(&WordVector::new(vec![
            TaggedWord::closed(vec![]),
            TaggedWord::open(vec![]),
        ]))
        .unwrap();
        assert!(matches!(
            st.feed(&WordVector::empty(2, StreamTag::Wfi)),
            Err(Error::Input(_))
        ));
        st.feed(&WordVector::new(vec![
            TaggedWord::closed(vec![]),
            TaggedWord::closed(vec![]),
        ]))
        .unwrap();
        assert_eq!(st.tag(), SyncTag::Eof);
        assert!(matches!(
            st.feed(&WordVector::empty(2, StreamTag::Eof)),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn rejects_foreign_letters() {
        let net = AlphabetNetwork::path(3).unwrap();
        let v = WordVector::new(vec![
            TaggedWord::open(word(&net, "a2")),
            TaggedWord::open(vec![]),
        ]);
        assert!(net.synchronize(&v).is_err());
        assert!(net.synchronize(&WordVector::empty(3, StreamTag::Eof)).is_err());
    }

    #[test]
    fn alternating_path_stream_grows() {
        let net = AlphabetNetwork::path(5).unwrap();
        let mut st = SyncState::new(&net);
        for round in 0..200 {
            let chunk = WordVector::new(
                (0..4)
                    .map(|i| TaggedWord::open(vec![Letter(i + (round % 2))]))
                    .collect(),
            );
            st.feed(&chunk).unwrap();
        }
        assert!(st.len() >= 400);
        assert_eq!(st.tag(), SyncTag::Wfi);
    }

    #[test]
    fn limit_truncates() {
        let net = AlphabetNetwork::path(3).unwrap();
        let mut st = SyncState::new(&net).with_limit(3);
        let v = WordVector::new(vec![
            TaggedWord::open(word(&net, "a0 a0 a0 a0 a0")),
            TaggedWord::open(word(&net, "a2 a2")),
        ]);
        st.feed(&v).unwrap();
        assert_eq!(st.len(), 3);
        assert!(st.limit_reached());
    }
}
