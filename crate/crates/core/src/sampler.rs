//! Seeded letter streams, finite Bernoulli words and the probabilistic
//! synchronization of a network of local Bernoulli sources.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Error, Result};
use crate::moebius::{
    diagnose_valuation, smallest_root, moebius_polynomial, Valuation, ValuationClass,
};
use crate::sync::{AlphabetNetwork, StreamTag, SyncState, SyncTag, TaggedWord, WordVector};
use crate::trace::{Letter, Trace, TraceMonoid};

/// Tolerance on `Σ p = 1` for probability distributions.
pub const SUM_TOL: f64 = 1e-12;

/// Default number of letters drawn per component per round.
pub const DEFAULT_CHUNK: usize = 64;

/// Default maximal output length.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Largest total number of unconsumed letters a run may buffer.
pub const MAX_BACKLOG: usize = 10_000_000;

/// A run may hold up to `SETTLE_FACTOR · budget + SETTLE_SLACK` pieces while
/// waiting for the lowest levels to settle.
const SETTLE_FACTOR: usize = 64;
const SETTLE_SLACK: usize = 1 << 16;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A master seed from which independent per-alphabet generators are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed of the generator for alphabet `i`.
    pub fn alphabet_seed(&self, i: usize) -> u64 {
        mix64(self.seed ^ (i as u64 + 1).wrapping_mul(GOLDEN))
    }

    pub fn alphabet_rng(&self, i: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.alphabet_seed(i))
    }

    /// An independent child stream, e.g. one per repeated run.
    pub fn derive(&self, k: u64) -> RandomStream {
        RandomStream::new(mix64(mix64(self.seed) ^ k.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03)))
    }

    /// A general purpose generator attached to this seed.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix64(self.seed ^ 0xA076_1D64_78BD_642F))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    Probability,
    SubProbability,
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistKind::Probability => "prob",
            DistKind::SubProbability => "sub",
        })
    }
}

/// Positive weights on the letters of one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDistribution {
    entries: Vec<(Letter, f64)>,
    kind: DistKind,
}

impl LocalDistribution {
    /// Kind is inferred from the total mass.
    pub fn new(entries: Vec<(Letter, f64)>) -> Result<Self> {
        let sum = Self::check(&entries)?;
        let kind = if (sum - 1.0).abs() <= SUM_TOL {
            DistKind::Probability
        } else {
            DistKind::SubProbability
        };
        Ok(LocalDistribution { entries, kind })
    }

    /// Builds a distribution and checks it has the declared kind.
    pub fn with_kind(entries: Vec<(Letter, f64)>, kind: DistKind) -> Result<Self> {
        let d = LocalDistribution::new(entries)?;
        if d.kind != kind {
            return input(format!(
                "distribution declared {kind} but its weights sum to {}",
                d.total()
            ));
        }
        Ok(d)
    }

    fn check(entries: &[(Letter, f64)]) -> Result<f64> {
        if entries.is_empty() {
            return input("a distribution needs at least one letter");
        }
        for (i, &(a, w)) in entries.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return input(format!("weight {w} of letter #{} is not positive", a.0));
            }
            if entries[..i].iter().any(|&(b, _)| b == a) {
                return input(format!("letter #{} appears twice", a.0));
            }
        }
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        if sum > 1.0 + SUM_TOL {
            return input(format!("weights sum to {sum} > 1"));
        }
        Ok(sum)
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn entries(&self) -> &[(Letter, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Stopping probability `1 − Σ p`, zero for probability distributions.
    pub fn stop_probability(&self) -> f64 {
        match self.kind {
            DistKind::Probability => 0.0,
            DistKind::SubProbability => 1.0 - self.total(),
        }
    }

    pub fn weight(&self, a: Letter) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == a).map(|e| e.1)
    }

    fn sampler(&self) -> LetterSampler {
        let mut letters: Vec<Option<Letter>> = self.entries.iter().map(|e| Some(e.0)).collect();
        let mut weights: Vec<f64> = self.entries.iter().map(|e| e.1).collect();
        if self.kind == DistKind::SubProbability {
            letters.push(None);
            weights.push(self.stop_probability());
        }
        let index = WeightedIndex::new(&weights).expect("weights were validated");
        LetterSampler { letters, index }
    }
}

#[derive(Debug, Clone)]
struct LetterSampler {
    letters: Vec<Option<Letter>>,
    index: WeightedIndex<f64>,
}

impl LetterSampler {
    /// A letter, or `None` for the stopping symbol.
    fn draw<R: Rng>(&self, rng: &mut R) -> Option<Letter> {
        self.letters[self.index.sample(rng)]
    }
}

/// Draws letters i.i.d. until the stopping symbol and returns the word
/// before it.
pub fn finite_bernoulli_word<R: Rng>(
    dist: &LocalDistribution,
    rng: &mut R,
    max_len: usize,
) -> Result<Vec<Letter>> {
    if dist.kind() != DistKind::SubProbability {
        return input("a probability distribution never draws the stopping symbol");
    }
    let s = dist.sampler();
    let mut word = Vec::new();
    while let Some(a) = s.draw(rng) {
        if word.len() >= max_len {
            return Err(Error::Resource(format!(
                "finite word exceeded {max_len} letters"
            )));
        }
        word.push(a);
    }
    Ok(word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsaStatus {
    /// The synchronization stopped on its own.
    Terminated(SyncTag),
    /// The output reached the length budget; only a prefix is returned.
    BudgetExhausted,
}

impl fmt::Display for PsaStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsaStatus::Terminated(t) => write!(f, "terminated({t})"),
            PsaStatus::BudgetExhausted => f.write_str("budget-exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsaOutcome {
    pub trace: Trace,
    pub status: PsaStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PsaOptions {
    pub budget: usize,
    pub chunk: usize,
}

impl Default for PsaOptions {
    fn default() -> Self {
        PsaOptions {
            budget: DEFAULT_BUDGET,
            chunk: DEFAULT_CHUNK,
        }
    }
}

/// Checks that `dists` has one distribution per alphabet supported exactly
/// on it.
pub fn validate_dists(network: &AlphabetNetwork, dists: &[LocalDistribution]) -> Result<()> {
    if dists.len() != network.len() {
        return input(format!(
            "{} distributions for {} alphabets",
            dists.len(),
            network.len()
        ));
    }
    for (i, d) in dists.iter().enumerate() {
        let alph = network.alphabet(i);
        let mut support: Vec<Letter> = d.entries().iter().map(|e| e.0).collect();
        support.sort();
        if support != alph {
            return input(format!(
                "distribution {i} is not supported exactly on alphabet {i}"
            ));
        }
    }
    Ok(())
}

/// A network equipped with local distributions, ready to be sampled.
#[derive(Debug, Clone)]
pub struct Psa<'n> {
    network: &'n AlphabetNetwork,
    dists: Vec<LocalDistribution>,
    samplers: Vec<LetterSampler>,
}

impl<'n> Psa<'n> {
    pub fn new(network: &'n AlphabetNetwork, dists: &[LocalDistribution]) -> Result<Self> {
        validate_dists(network, dists)?;
        Ok(Psa {
            network,
            dists: dists.to_vec(),
            samplers: dists.iter().map(|d| d.sampler()).collect(),
        })
    }

    pub fn network(&self) -> &AlphabetNetwork {
        self.network
    }

    pub fn dists(&self) -> &[LocalDistribution] {
        &self.dists
    }

    /// One run: local Bernoulli streams are drawn chunk by chunk and
    /// synchronized until the synchronization stops or the output reaches
    /// the budget.
    ///
    /// A budget-limited output is cut at whole Cartier–Foata levels: it is
    /// the shortest run of bottom levels holding at least `budget` pieces.
    /// Levels are only cut once they are settled, so the output depends on
    /// the seed and not on the chunk size.
    pub fn run(&self, rng: &RandomStream, opts: &PsaOptions) -> Result<PsaOutcome> {
        if opts.budget == 0 {
            return input("the output budget must be positive");
        }
        if opts.chunk == 0 {
            return input("the chunk size must be positive");
        }
        let n = self.network.len();
        let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|i| rng.alphabet_rng(i)).collect();
        let limit = opts.budget.saturating_mul(SETTLE_FACTOR).saturating_add(SETTLE_SLACK);
        let mut state = SyncState::new(self.network).with_limit(limit);
        let mut chunk = WordVector::empty(n, StreamTag::Wfi);
        // settled levels scanned so far and the pieces they hold
        let mut scanned = 0;
        let mut count = 0;
        loop {
            let mut backlog = 0;
            for i in 0..n {
                let w = &mut chunk.components[i];
                w.letters.clear();
                w.tag = if state.is_closed(i) {
                    StreamTag::Eof
                } else {
                    StreamTag::Wfi
                };
                let pending = state.pending(i).len();
                backlog += pending;
                // Components with enough pending input are skipped this
                // round; closed ones receive nothing more.
                if state.is_closed(i) || pending >= opts.chunk {
                    continue;
                }
                fill_chunk(&self.samplers[i], &mut rngs[i], opts.chunk, w);
            }
            if backlog > MAX_BACKLOG {
                return Err(Error::Resource(format!(
                    "more than {MAX_BACKLOG} letters are waiting for synchronization"
                )));
            }
            let tag = state.feed(&chunk)?;
            let levels = state.heap().cliques();
            let settled = state.settled_height().min(levels.len());
            while scanned < settled {
                count += levels[scanned].len();
                scanned += 1;
                if count >= opts.budget {
                    return Ok(PsaOutcome {
                        trace: self.network.monoid().trace_from_cliques(levels[..scanned].to_vec())?,
                        status: PsaStatus::BudgetExhausted,
                    });
                }
            }
            if tag != SyncTag::Wfi {
                return Ok(PsaOutcome {
                    trace: state.trace(),
                    status: PsaStatus::Terminated(tag),
                });
            }
            if state.limit_reached() {
                return Err(Error::Resource(format!(
                    "the output did not settle within {limit} pieces"
                )));
            }
        }
    }
}

fn fill_chunk(s: &LetterSampler, rng: &mut ChaCha8Rng, chunk: usize, w: &mut TaggedWord) {
    for _ in 0..chunk {
        match s.draw(rng) {
            Some(a) => w.letters.push(a),
            None => {
                w.tag = StreamTag::Eof;
                break;
            }
        }
    }
}

/// One PSA run with the given budget and the default chunk size.
pub fn psa_run(
    network: &AlphabetNetwork,
    dists: &[LocalDistribution],
    rng: &RandomStream,
    budget: usize,
) -> Result<PsaOutcome> {
    Psa::new(network, dists)?.run(
        rng,
        &PsaOptions {
            budget,
            ..PsaOptions::default()
        },
    )
}

/// Valuation of the output measure: `f(a) = Π_{i ∈ R(a)} p_i(a)`.
pub fn psa_valuation(network: &AlphabetNetwork, dists: &[LocalDistribution]) -> Result<Valuation> {
    validate_dists(network, dists)?;
    let weights = network
        .monoid()
        .letters()
        .map(|a| {
            network
                .resources(a)
                .iter()
                .map(|&i| dists[i].weight(a).expect("support was validated"))
                .product()
        })
        .collect();
    Valuation::new(network.monoid(), weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsaClass {
    Finite,
    Infinite,
}

impl fmt::Display for PsaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsaClass::Finite => "finite",
            PsaClass::Infinite => "infinite",
        })
    }
}

/// Whether PSA outputs are finite or infinite with probability 1.
///
/// Each dependence component is classified from its valuation: Möbius
/// means infinite output, sub-Möbius finite. The output is infinite iff
/// some component is. When every distribution is a probability, the answer
/// is checked against [`structural_class`].
pub fn classify_psa(network: &AlphabetNetwork, dists: &[LocalDistribution]) -> Result<PsaClass> {
    let f = psa_valuation(network, dists)?;
    let monoid = network.monoid();
    let mut class = PsaClass::Finite;
    for comp in monoid.dependence_components() {
        let sub = monoid.induced(&comp)?;
        let fc = Valuation::new(&sub, comp.iter().map(|&a| f.weight(a)).collect())?;
        let report = diagnose_valuation(&sub, &fc)?;
        match report.class {
            ValuationClass::Moebius => class = PsaClass::Infinite,
            ValuationClass::SubMoebius => {}
            ValuationClass::Neither => {
                return Err(Error::Internal(format!(
                    "PSA valuation is neither Möbius nor sub-Möbius (h(e) = {:.3e})",
                    report.epsilon
                )))
            }
        }
    }
    if dists.iter().all(|d| d.kind() == DistKind::Probability) {
        let s = structural_class(network);
        if s != class {
            return Err(Error::Internal(format!(
                "valuation says {class} but the network structure says {s}"
            )));
        }
    }
    Ok(class)
}

/// Structural classification for probability distributions only.
///
/// Consider the bipartite graph linking each alphabet to its shared letters
/// (letters with at least two resources). The output is infinite iff some
/// connected part of this graph is a tree.
pub fn structural_class(network: &AlphabetNetwork) -> PsaClass {
    let n = network.len();
    let shared: Vec<Letter> = network
        .monoid()
        .letters()
        .filter(|&a| network.resources(a).len() >= 2)
        .collect();
    let vertices = n + shared.len();
    let mut parent: Vec<usize> = (0..vertices).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    // Count edges and vertices per connected part; a part is a tree iff
    // edges = vertices − 1.
    let mut cyclic = vec![false; vertices];
    for (k, &a) in shared.iter().enumerate() {
        for &i in network.resources(a) {
            let (ra, rb) = (find(&mut parent, n + k), find(&mut parent, i));
            if ra == rb {
                cyclic[ra] = true;
            } else {
                parent[ra] = rb;
                cyclic[rb] |= cyclic[ra];
            }
        }
    }
    let has_tree = (0..vertices).any(|v| find(&mut parent, v) == v && !cyclic[v]);
    if has_tree {
        PsaClass::Infinite
    } else {
        PsaClass::Finite
    }
}

/// Mean length `−p μ′(p)/μ(p)` of the uniform Bernoulli trace of parameter
/// `p < p₀`.
pub fn expected_length_uniform(monoid: &TraceMonoid, p: f64) -> Result<f64> {
    let p0 = smallest_root(monoid)?;
    if !(p > 0.0 && p < p0) {
        return input(format!("parameter {p} must lie in (0, {p0})"));
    }
    let mu = moebius_polynomial(monoid)?;
    Ok(-p * mu.derivative().eval(p) / mu.eval(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform_dists(net: &AlphabetNetwork) -> Vec<LocalDistribution> {
        net.alphabets()
            .iter()
            .map(|alph| {
                let w = 1.0 / alph.len() as f64;
                LocalDistribution::new(alph.iter().map(|&a| (a, w)).collect()).unwrap()
            })
            .collect()
    }

    fn path5_q0_dists(net: &AlphabetNetwork) -> Vec<LocalDistribution> {
        // products along the diagonals all equal q0
        let q0 = smallest_root(net.monoid()).unwrap();
        let mu = |k: i32| -> f64 {
            let mut m = [1.0, 1.0 - q0];
            for _ in 0..k {
                m = [m[1], m[1] - q0 * m[0]];
            }
            m[1]
        };
        let p1 = vec![q0, 1.0 - q0];
        let p2 = vec![q0 / (1.0 - q0), mu(1) / mu(0)];
        let p3 = vec![q0 * mu(0) / mu(1), mu(2) / mu(1)];
        let p4 = vec![q0 / p3[1], 1.0 - q0 / p3[1]];
        [p1, p2, p3, p4]
            .iter()
            .enumerate()
            .map(|(i, p)| {
                LocalDistribution::new(vec![(Letter(i), p[0]), (Letter(i + 1), p[1])]).unwrap()
            })
            .collect()
    }

    #[test]
    fn mix64_reference_values() {
        // SplitMix64 outputs for state increments from 0
        assert_eq!(mix64(GOLDEN), 0xe220a8397b1dcdaf);
        assert_eq!(mix64(GOLDEN.wrapping_mul(2)), 0x6e789e6aa1b965f4);
        assert_eq!(mix64(0), 0);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = RandomStream::new(42);
        let a: Vec<u64> = (0..4).map(|_| s.alphabet_rng(0).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = s.alphabet_rng(0).random();
        let y: u64 = s.alphabet_rng(1).random();
        assert_ne!(x, y);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(3), RandomStream::new(42).derive(3));
    }

    #[test]
    fn distribution_kinds() {
        let d = LocalDistribution::new(vec![(Letter(0), 0.5), (Letter(1), 0.5)]).unwrap();
        assert_eq!(d.kind(), DistKind::Probability);
        let d = LocalDistribution::new(vec![(Letter(0), 0.2), (Letter(1), 0.3)]).unwrap();
        assert_eq!(d.kind(), DistKind::SubProbability);
        assert_abs_diff_eq!(d.stop_probability(), 0.5, epsilon = 1e-15);
        assert!(LocalDistribution::new(vec![(Letter(0), 0.7), (Letter(1), 0.5)]).is_err());
        assert!(LocalDistribution::new(vec![(Letter(0), 0.0)]).is_err());
        assert!(LocalDistribution::new(vec![]).is_err());
        assert!(LocalDistribution::with_kind(vec![(Letter(0), 0.5)], DistKind::Probability).is_err());
    }

    #[test]
    fn finite_words() {
        let d = LocalDistribution::new(vec![(Letter(0), 0.5)]).unwrap();
        let mut rng = RandomStream::new(1).rng();
        let n = 200_000;
        let total: usize = (0..n)
            .map(|_| finite_bernoulli_word(&d, &mut rng, 1000).unwrap().len())
            .sum();
        // geometric with mean 1 and standard deviation sqrt(2)
        assert!((total as f64 / n as f64 - 1.0).abs() < 5.0 * 2f64.sqrt() / (n as f64).sqrt());

        let d = LocalDistribution::new(vec![(Letter(0), 0.2), (Letter(1), 0.3)]).unwrap();
        let empty = (0..n)
            .filter(|_| finite_bernoulli_word(&d, &mut rng, 1000).unwrap().is_empty())
            .count();
        assert!((empty as f64 / n as f64 - 0.5).abs() < 0.005);

        let nearly = LocalDistribution::new(vec![(Letter(0), 0.999_999)]).unwrap();
        assert!(matches!(
            finite_bernoulli_word(&nearly, &mut rng, 10),
            Err(Error::Resource(_))
        ));
        let prob = LocalDistribution::new(vec![(Letter(0), 1.0)]).unwrap();
        assert!(finite_bernoulli_word(&prob, &mut rng, 10).is_err());
    }

    #[test]
    fn valuations_of_psa() {
        let ring = AlphabetNetwork::ring(4).unwrap();
        let f = psa_valuation(&ring, &uniform_dists(&ring)).unwrap();
        assert!(f.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
        let path = AlphabetNetwork::path(5).unwrap();
        let f = psa_valuation(&path, &path5_q0_dists(&path)).unwrap();
        let q0 = smallest_root(path.monoid()).unwrap();
        for &w in f.weights() {
            assert_abs_diff_eq!(w, q0, epsilon = 1e-12);
        }
        let single = AlphabetNetwork::path(1).unwrap();
        let d = vec![LocalDistribution::new(vec![(Letter(0), 0.4)]).unwrap()];
        assert_abs_diff_eq!(psa_valuation(&single, &d).unwrap().weight(Letter(0)), 0.4);
    }

    #[test]
    fn classification() {
        let ring = AlphabetNetwork::ring(4).unwrap();
        assert_eq!(classify_psa(&ring, &uniform_dists(&ring)).unwrap(), PsaClass::Finite);
        let path = AlphabetNetwork::path(5).unwrap();
        assert_eq!(classify_psa(&path, &uniform_dists(&path)).unwrap(), PsaClass::Infinite);
        assert_eq!(classify_psa(&path, &path5_q0_dists(&path)).unwrap(), PsaClass::Infinite);
        let double = AlphabetNetwork::from_names(&["x", "y", "z"], &[vec!["x", "y"], vec!["x", "y", "z"]])
            .unwrap();
        assert_eq!(structural_class(&double), PsaClass::Finite);
        assert_eq!(classify_psa(&double, &uniform_dists(&double)).unwrap(), PsaClass::Finite);
        // three-letter alphabets along a path: acyclic incidence graph
        let fat = AlphabetNetwork::from_names(
            &["x", "y", "z", "u", "v"],
            &[vec!["x", "y", "z"], vec!["z", "u", "v"]],
        )
        .unwrap();
        assert_eq!(classify_psa(&fat, &uniform_dists(&fat)).unwrap(), PsaClass::Infinite);
    }

    #[test]
    fn expected_lengths() {
        let r4 = TraceMonoid::ring(4).unwrap();
        assert_abs_diff_eq!(expected_length_uniform(&r4, 0.25).unwrap(), 6.0, epsilon = 1e-12);
        assert!(expected_length_uniform(&r4, 1e-9).unwrap() < 1e-7);
        let free = TraceMonoid::free(2).unwrap();
        assert_abs_diff_eq!(expected_length_uniform(&free, 0.25).unwrap(), 1.0, epsilon = 1e-12);
        assert!(expected_length_uniform(&r4, 0.3).is_err());
    }

    #[test]
    fn ring4_runs_terminate_in_deadlock() {
        let ring = AlphabetNetwork::ring(4).unwrap();
        let psa = Psa::new(&ring, &uniform_dists(&ring)).unwrap();
        let master = RandomStream::new(7);
        for k in 0..200 {
            let out = psa.run(&master.derive(k), &PsaOptions::default()).unwrap();
            assert_eq!(out.status, PsaStatus::Terminated(SyncTag::Dl));
        }
    }

    #[test]
    fn path5_runs_hit_the_budget() {
        let path = AlphabetNetwork::path(5).unwrap();
        let out = psa_run(&path, &path5_q0_dists(&path), &RandomStream::new(3), 1000).unwrap();
        assert_eq!(out.status, PsaStatus::BudgetExhausted);
        // cut after the first level reaching the budget
        let top = out.trace.cliques().last().unwrap().len();
        assert!(out.trace.len() >= 1000 && out.trace.len() - top < 1000);
        let again = psa_run(&path, &path5_q0_dists(&path), &RandomStream::new(3), 1000).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn tiny_sub_probabilities_give_short_traces() {
        let path = AlphabetNetwork::path(5).unwrap();
        let dists: Vec<LocalDistribution> = (0..4)
            .map(|i| LocalDistribution::new(vec![(Letter(i), 1e-6), (Letter(i + 1), 1e-6)]).unwrap())
            .collect();
        let out = psa_run(&path, &dists, &RandomStream::new(11), 100).unwrap();
        assert_eq!(out.status, PsaStatus::Terminated(SyncTag::Eof));
        assert!(out.trace.is_empty());
    }

    #[test]
    fn output_does_not_depend_on_chunk_size() {
        let ring = AlphabetNetwork::ring(5).unwrap();
        let psa = Psa::new(&ring, &uniform_dists(&ring)).unwrap();
        for k in 0..50 {
            let rng = RandomStream::new(99).derive(k);
            let base = psa.run(&rng, &PsaOptions::default()).unwrap();
            for chunk in [1, 3, 17] {
                let other = psa.run(&rng, &PsaOptions { chunk, ..PsaOptions::default() }).unwrap();
                assert_eq!(base, other);
            }
        }
    }

    #[test]
    fn run_input_errors() {
        let ring = AlphabetNetwork::ring(4).unwrap();
        let dists = uniform_dists(&ring);
        assert!(psa_run(&ring, &dists, &RandomStream::new(0), 0).is_err());
        assert!(psa_run(&ring, &dists[..3], &RandomStream::new(0), 10).is_err());
        let mut wrong = dists.clone();
        wrong[0] = LocalDistribution::new(vec![(Letter(1), 0.5), (Letter(2), 0.5)]).unwrap();
        assert!(psa_run(&ring, &wrong, &RandomStream::new(0), 10).is_err());
    }
}
