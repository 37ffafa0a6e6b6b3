//! Random walks built from synchronized samples.
//!
//! The full synchronization walk realizes a Bernoulli measure on infinite
//! traces by concatenating pyramidal increments: a finite trace `X` is drawn
//! on the monoid without letter `a`, `V = X·a` is kept when `a` is its only
//! maximal piece, and accepted increments are concatenated. The naive walk
//! concatenates raw finite samples instead and does not produce a Bernoulli
//! measure.

use std::collections::HashMap;

use crate::error::{input, Error, Result};
use crate::sampler::{
    classify_psa, LocalDistribution, Psa, PsaClass, PsaOptions, PsaStatus, RandomStream,
};
use crate::sync::AlphabetNetwork;
use crate::trace::{HeapBuilder, Letter, Trace, TraceMonoid};

/// Default number of rejected attempts allowed per increment.
pub const DEFAULT_REJECTION_BUDGET: u64 = 1_000_000;

/// Chunk size used for the inner synchronizations; outputs do not depend
/// on it.
const INNER_CHUNK: usize = 16;

/// Everything needed to run the full synchronization walk.
#[derive(Debug, Clone)]
pub struct PfsaConfig {
    network: AlphabetNetwork,
    letter: Letter,
    reduced: AlphabetNetwork,
    dists: Vec<LocalDistribution>,
    seed: u64,
    rejection_budget: u64,
    to_full: Vec<Letter>,
}

impl PfsaConfig {
    /// `reduced` is a network over `Σ \ {a}` inducing the same independence
    /// as the full network, with `dists` one distribution per alphabet.
    pub fn new(
        network: AlphabetNetwork,
        letter: Letter,
        reduced: AlphabetNetwork,
        dists: Vec<LocalDistribution>,
        seed: u64,
    ) -> Result<Self> {
        let full = network.monoid();
        if letter.0 >= full.len() {
            return input(format!("letter id {} is not in the network", letter.0));
        }
        if !full.is_irreducible() {
            return input("the full monoid must be irreducible");
        }
        let sub = reduced.monoid();
        if sub.len() + 1 != full.len() {
            return input("the reduced network must have every letter but the distinguished one");
        }
        let mut to_full = Vec::with_capacity(sub.len());
        for b in sub.letters() {
            match full.letter(sub.name(b)) {
                Some(c) if c != letter => to_full.push(c),
                _ => {
                    return input(format!(
                        "letter {} of the reduced network is not in Σ \\ {{{}}}",
                        sub.name(b),
                        full.name(letter)
                    ))
                }
            }
        }
        for b in sub.letters() {
            for c in sub.letters() {
                if sub.independent(b, c) != full.independent(to_full[b.0], to_full[c.0]) {
                    return input(format!(
                        "letters {} and {} commute in only one of the two networks",
                        sub.name(b),
                        sub.name(c)
                    ));
                }
            }
        }
        if classify_psa(&reduced, &dists)? != PsaClass::Finite {
            return input("the reduced distributions must produce finite traces");
        }
        Ok(PfsaConfig {
            network,
            letter,
            reduced,
            dists,
            seed,
            rejection_budget: DEFAULT_REJECTION_BUDGET,
            to_full,
        })
    }

    pub fn with_rejection_budget(mut self, budget: u64) -> Self {
        self.rejection_budget = budget;
        self
    }

    pub fn network(&self) -> &AlphabetNetwork {
        &self.network
    }

    pub fn monoid(&self) -> &TraceMonoid {
        self.network.monoid()
    }

    pub fn letter(&self) -> Letter {
        self.letter
    }

    pub fn reduced(&self) -> &AlphabetNetwork {
        &self.reduced
    }

    pub fn dists(&self) -> &[LocalDistribution] {
        &self.dists
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rejection_budget(&self) -> u64 {
        self.rejection_budget
    }

    pub fn sampler(&self) -> Result<PfsaSampler<'_>> {
        Ok(PfsaSampler {
            config: self,
            psa: Psa::new(&self.reduced, &self.dists)?,
        })
    }
}

/// An accepted increment with the number of attempts rejected before it.
#[derive(Debug, Clone, PartialEq)]
pub struct Increment {
    pub trace: Trace,
    pub rejected: u64,
}

/// State of a walk: the prefix built so far and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub trace: Trace,
    pub iterations: u64,
    pub rejections: u64,
    /// Accepted increments, kept only when requested.
    pub increments: Vec<Increment>,
}

/// Draws pyramidal increments for a [`PfsaConfig`].
#[derive(Debug, Clone)]
pub struct PfsaSampler<'c> {
    config: &'c PfsaConfig,
    psa: Psa<'c>,
}

impl<'c> PfsaSampler<'c> {
    pub fn config(&self) -> &PfsaConfig {
        self.config
    }

    fn lift(&self, x: &Trace) -> HeapBuilder<'c> {
        let mut b = HeapBuilder::new(self.config.monoid());
        for c in x.cliques() {
            for l in c.letters() {
                b.push(self.config.to_full[l.0]);
            }
        }
        b
    }

    /// Rejection sampling of a trace of `V_a`: attempt `k` runs the reduced
    /// synchronization with stream `rng.derive(k)`.
    pub fn sample_pyramidal(&self, rng: &RandomStream) -> Result<Increment> {
        let a = self.config.letter;
        let monoid = self.config.monoid();
        let opts = PsaOptions {
            chunk: INNER_CHUNK,
            ..PsaOptions::default()
        };
        for k in 0..=self.config.rejection_budget {
            let out = self.psa.run(&rng.derive(k), &opts)?;
            if out.status == PsaStatus::BudgetExhausted {
                return Err(Error::Resource(format!(
                    "reduced synchronization exceeded {} pieces",
                    opts.budget
                )));
            }
            let mut b = self.lift(&out.trace);
            b.push(a);
            let v = b.finish();
            if monoid.in_hitting_set(&v, a) {
                return Ok(Increment {
                    trace: v,
                    rejected: k,
                });
            }
        }
        Err(Error::Resource(format!(
            "no pyramidal trace after {} rejections",
            self.config.rejection_budget + 1
        )))
    }

    /// Concatenates increments until the prefix has at least `target_length`
    /// pieces or `stop` holds; increment `j` uses stream `rng.derive(j)`.
    pub fn walk_until(
        &self,
        rng: &RandomStream,
        target_length: usize,
        keep_increments: bool,
        stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> Result<WalkState> {
        match self.walk_inner(rng, target_length, keep_increments, stop) {
            (state, None) => Ok(state),
            (_, Some(e)) => Err(e),
        }
    }

    /// Like [`walk`](Self::walk) but keeps the prefix built before an error.
    pub fn walk_partial(
        &self,
        rng: &RandomStream,
        target_length: usize,
        keep_increments: bool,
    ) -> (WalkState, Option<Error>) {
        self.walk_inner(rng, target_length, keep_increments, &mut |_| false)
    }

    fn walk_inner(
        &self,
        rng: &RandomStream,
        target_length: usize,
        keep_increments: bool,
        stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> (WalkState, Option<Error>) {
        let mut heap = HeapBuilder::new(self.config.monoid());
        let mut state = WalkState {
            trace: Trace::empty(),
            iterations: 0,
            rejections: 0,
            increments: Vec::new(),
        };
        let mut error = None;
        while heap.len() < target_length && !stop(&heap) {
            let inc = match self.sample_pyramidal(&rng.derive(state.iterations)) {
                Ok(inc) => inc,
                Err(e) => {
                    error = Some(e);
                    break;
                }
            };
            heap.push_trace(&inc.trace);
            state.iterations += 1;
            state.rejections += inc.rejected;
            if keep_increments {
                state.increments.push(inc);
            }
        }
        state.trace = heap.finish();
        (state, error)
    }

    pub fn walk(&self, rng: &RandomStream, target_length: usize, keep_increments: bool) -> Result<WalkState> {
        self.walk_until(rng, target_length, keep_increments, &mut |_| false)
    }
}

/// One pyramidal increment drawn with the configuration's seed.
pub fn sample_pyramidal(config: &PfsaConfig, rng: &RandomStream) -> Result<Trace> {
    Ok(config.sampler()?.sample_pyramidal(rng)?.trace)
}

/// Full synchronization walk up to at least `target_length` pieces, seeded
/// by the configuration.
pub fn pfsa_generate(config: &PfsaConfig, target_length: usize) -> Result<WalkState> {
    config
        .sampler()?
        .walk(&RandomStream::new(config.seed), target_length, false)
}

/// First hitting time of `a` in an extension of `prefix`.
pub fn first_hitting(monoid: &TraceMonoid, prefix: &Trace, a: Letter) -> Option<Trace> {
    monoid.first_hitting(prefix, a)
}

/// Concatenation of independent finite synchronization outputs.
#[derive(Debug, Clone)]
pub struct NaiveWalk<'n> {
    psa: Psa<'n>,
}

impl<'n> NaiveWalk<'n> {
    pub fn new(network: &'n AlphabetNetwork, dists: &[LocalDistribution]) -> Result<Self> {
        if classify_psa(network, dists)? != PsaClass::Finite {
            return input("the naive walk needs distributions producing finite traces");
        }
        Ok(NaiveWalk {
            psa: Psa::new(network, dists)?,
        })
    }

    pub fn monoid(&self) -> &TraceMonoid {
        self.psa.network().monoid()
    }

    /// Run `j` uses stream `rng.derive(j)`.
    pub fn walk_until(
        &self,
        rng: &RandomStream,
        target_length: usize,
        stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> Result<WalkState> {
        match self.walk_inner(rng, target_length, stop) {
            (state, None) => Ok(state),
            (_, Some(e)) => Err(e),
        }
    }

    /// Walk that keeps the prefix built before an error.
    pub fn walk_partial(&self, rng: &RandomStream, target_length: usize) -> (WalkState, Option<Error>) {
        self.walk_inner(rng, target_length, &mut |_| false)
    }

    fn walk_inner(
        &self,
        rng: &RandomStream,
        target_length: usize,
        stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> (WalkState, Option<Error>) {
        let mut heap = HeapBuilder::new(self.monoid());
        let opts = PsaOptions {
            chunk: INNER_CHUNK,
            ..PsaOptions::default()
        };
        let mut iterations = 0;
        let mut error = None;
        while heap.len() < target_length && !stop(&heap) {
            match self.psa.run(&rng.derive(iterations), &opts) {
                Ok(out) if out.status == PsaStatus::BudgetExhausted => {
                    error = Some(Error::Resource("a finite sample exceeded the budget".into()));
                    break;
                }
                Ok(out) => heap.push_trace(&out.trace),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
            iterations += 1;
        }
        let state = WalkState {
            trace: heap.finish(),
            iterations,
            rejections: 0,
            increments: Vec::new(),
        };
        (state, error)
    }
}

/// Naive walk up to at least `target_length` pieces.
pub fn naive_walk(
    network: &AlphabetNetwork,
    dists: &[LocalDistribution],
    rng: &RandomStream,
    target_length: usize,
) -> Result<WalkState> {
    NaiveWalk::new(network, dists)?.walk_until(rng, target_length, &mut |_| false)
}

/// Histogram of traces, most frequent first, ties by trace order.
pub fn histogram<'a>(traces: impl IntoIterator<Item = &'a Trace>) -> Vec<(Trace, u64)> {
    let mut counts: HashMap<&Trace, u64> = HashMap::new();
    for t in traces {
        *counts.entry(t).or_default() += 1;
    }
    let mut out: Vec<(Trace, u64)> = counts.into_iter().map(|(t, c)| (t.clone(), c)).collect();
    out.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_ring_removing;

    fn q1() -> f64 {
        1.0 - 2f64.sqrt() / 2.0
    }

    fn ring4_config(seed: u64) -> PfsaConfig {
        let sol = solve_ring_removing(&[q1(); 4], Letter(3)).unwrap();
        PfsaConfig::new(
            AlphabetNetwork::ring(4).unwrap(),
            Letter(3),
            sol.params.network,
            sol.params.dists,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn increments_are_pyramidal() {
        let cfg = ring4_config(5);
        let s = cfg.sampler().unwrap();
        let master = RandomStream::new(5);
        for k in 0..2000 {
            let inc = s.sample_pyramidal(&master.derive(k)).unwrap();
            assert!(cfg.monoid().in_hitting_set(&inc.trace, Letter(3)));
        }
    }

    #[test]
    fn singleton_increment_frequency() {
        let cfg = ring4_config(8);
        let s = cfg.sampler().unwrap();
        let master = RandomStream::new(8);
        let single = cfg.monoid().normalize(&[Letter(3)]).unwrap();
        let n = 20_000;
        let hits = (0..n)
            .filter(|&k| s.sample_pyramidal(&master.derive(k)).unwrap().trace == single)
            .count();
        // standard error is about 0.0032
        assert!((hits as f64 / n as f64 - q1()).abs() < 0.02);
    }

    #[test]
    fn rejected_shape_is_not_in_hitting_set() {
        let m = TraceMonoid::ring(4).unwrap();
        let v = m.normalize(&[Letter(1), Letter(3)]).unwrap();
        assert!(!m.in_hitting_set(&v, Letter(3)));
        let v = m.normalize(&[Letter(3)]).unwrap();
        assert!(m.in_hitting_set(&v, Letter(3)));
    }

    #[test]
    fn walk_is_reproducible() {
        let cfg = ring4_config(1);
        let a = pfsa_generate(&cfg, 100).unwrap();
        let b = pfsa_generate(&cfg, 100).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.len() >= 100);
        assert_eq!(a.trace.count(Letter(3)) as u64, a.iterations);
        assert_eq!(pfsa_generate(&cfg, 0).unwrap().trace, Trace::empty());
    }

    #[test]
    fn config_validation() {
        let ring = AlphabetNetwork::ring(4).unwrap();
        let sol = solve_ring_removing(&[q1(); 4], Letter(3)).unwrap();
        // wrong distinguished letter for this reduced network
        assert!(PfsaConfig::new(
            ring.clone(),
            Letter(0),
            sol.params.network.clone(),
            sol.params.dists.clone(),
            0
        )
        .is_err());
        // reduced network with different commutations
        let bad = AlphabetNetwork::from_names(&["a0", "a1", "a2"], &[vec!["a0", "a1", "a2"]]).unwrap();
        let d = vec![LocalDistribution::new(vec![(Letter(0), 0.1), (Letter(1), 0.1), (Letter(2), 0.1)])
            .unwrap()];
        assert!(PfsaConfig::new(ring.clone(), Letter(3), bad, d, 0).is_err());
        // reduced distributions producing infinite traces
        let path = AlphabetNetwork::from_names(&["a0", "a1", "a2"], &[vec!["a0", "a1"], vec!["a1", "a2"]])
            .unwrap();
        let d: Vec<LocalDistribution> = (0..2)
            .map(|i| LocalDistribution::new(vec![(Letter(i), 0.5), (Letter(i + 1), 0.5)]).unwrap())
            .collect();
        assert!(PfsaConfig::new(ring, Letter(3), path, d, 0).is_err());
    }

    #[test]
    fn rejection_budget_is_enforced() {
        let cfg = ring4_config(2).with_rejection_budget(0);
        let s = cfg.sampler().unwrap();
        let master = RandomStream::new(2);
        let failures = (0..200)
            .filter(|&k| matches!(s.sample_pyramidal(&master.derive(k)), Err(Error::Resource(_))))
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn naive_walk_basics() {
        let ring = AlphabetNetwork::ring(4).unwrap();
        let dists: Vec<LocalDistribution> = ring
            .alphabets()
            .iter()
            .map(|alph| LocalDistribution::new(alph.iter().map(|&a| (a, 0.5)).collect()).unwrap())
            .collect();
        let rng = RandomStream::new(4);
        assert_eq!(naive_walk(&ring, &dists, &rng, 0).unwrap().trace, Trace::empty());
        let w = naive_walk(&ring, &dists, &rng, 60_000).unwrap();
        assert!(w.trace.len() >= 60_000);
        // increments have mean length 6
        let per_run = w.trace.len() as f64 / w.iterations as f64;
        assert!((per_run - 6.0).abs() < 0.3, "{per_run}");
        let path = AlphabetNetwork::path(3).unwrap();
        let d: Vec<LocalDistribution> = (0..2)
            .map(|i| LocalDistribution::new(vec![(Letter(i), 0.5), (Letter(i + 1), 0.5)]).unwrap())
            .collect();
        assert!(naive_walk(&path, &d, &rng, 10).is_err());
    }

    #[test]
    fn histogram_orders_by_count() {
        let m = TraceMonoid::free(2).unwrap();
        let a = m.normalize(&[Letter(0)]).unwrap();
        let b = m.normalize(&[Letter(1)]).unwrap();
        let h = histogram([&a, &b, &b]);
        assert_eq!(h, vec![(b, 2), (a, 1)]);
    }
}
