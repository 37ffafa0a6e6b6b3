//! Python bindings.
//!
//! Traces cross the boundary as lists of cliques, each a sorted list of
//! letter names. Local distributions are lists of `{letter: weight}` dicts,
//! one per alphabet.

use std::collections::HashMap;

use heapsync::moebius::{
    classify_valuation, growth_coefficients, moebius_polynomial, Valuation,
};
use heapsync::pfsa::PfsaConfig;
use heapsync::sampler::{
    classify_psa, psa_valuation, structural_class, LocalDistribution, Psa, PsaOptions, RandomStream,
};
use heapsync::solver::{solve_path_bernoulli, solve_path_sub_bernoulli, solve_ring_removing, SolvedParams};
use heapsync::stats::{mean_report, sample_lengths};
use heapsync::sync::{AlphabetNetwork, StreamTag, TaggedWord, WordVector};
use heapsync::trace::{Letter, Trace, TraceMonoid, DEFAULT_WORK_BUDGET};
use heapsync::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Input(_) | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for heapsync::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

type Cliques = Vec<Vec<String>>;
type Dists = Vec<HashMap<String, f64>>;

fn cliques_of(m: &TraceMonoid, x: &Trace) -> Cliques {
    x.cliques()
        .iter()
        .map(|c| c.letters().map(|a| m.name(a).to_string()).collect())
        .collect()
}

fn letters_of(m: &TraceMonoid, word: &[String]) -> PyResult<Vec<Letter>> {
    word.iter().map(|s| m.letter_or_err(s).py()).collect()
}

fn trace_of(m: &TraceMonoid, cliques: &Cliques) -> PyResult<Trace> {
    let word: Vec<String> = cliques.iter().flatten().cloned().collect();
    let x = m.normalize(&letters_of(m, &word)?).py()?;
    if x.height() != cliques.len() {
        return Err(PyValueError::new_err("cliques are not in normal form"));
    }
    Ok(x)
}

fn dists_of(net: &AlphabetNetwork, dists: &Dists) -> PyResult<Vec<LocalDistribution>> {
    let m = net.monoid();
    dists
        .iter()
        .map(|d| {
            let mut entries: Vec<(Letter, f64)> =
                d.iter().map(|(k, &w)| Ok((m.letter_or_err(k).py()?, w))).collect::<PyResult<_>>()?;
            entries.sort_by_key(|e| e.0);
            LocalDistribution::new(entries).py()
        })
        .collect()
}

fn dicts_of(net: &AlphabetNetwork, dists: &[LocalDistribution]) -> Dists {
    let m = net.monoid();
    dists
        .iter()
        .map(|d| d.entries().iter().map(|&(a, w)| (m.name(a).to_string(), w)).collect())
        .collect()
}

fn valuation_of(m: &TraceMonoid, weights: &HashMap<String, f64>) -> PyResult<Valuation> {
    let mut w = vec![f64::NAN; m.len()];
    for (k, &v) in weights {
        w[m.letter_or_err(k).py()?.0] = v;
    }
    if w.iter().any(|v| v.is_nan()) {
        return Err(PyValueError::new_err("valuation must give a weight to every letter"));
    }
    Valuation::new(m, w).py()
}

fn weights_of(m: &TraceMonoid, f: &Valuation) -> HashMap<String, f64> {
    m.letters().map(|a| (m.name(a).to_string(), f.weight(a))).collect()
}

/// A trace monoid on named letters.
#[pyclass(name = "Monoid", module = "heapsync", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMonoid {
    inner: TraceMonoid,
}

#[pymethods]
impl PyMonoid {
    /// Letters `names`, with the listed pairs commuting.
    #[new]
    fn new(names: Vec<String>, commuting: Vec<(String, String)>) -> PyResult<Self> {
        let pairs: Vec<(&str, &str)> = commuting.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Ok(PyMonoid {
            inner: TraceMonoid::from_named_pairs(&names, &pairs).py()?,
        })
    }

    #[staticmethod]
    fn free(n: usize) -> PyResult<Self> {
        Ok(PyMonoid { inner: TraceMonoid::free(n).py()? })
    }

    #[staticmethod]
    fn path(n: usize) -> PyResult<Self> {
        Ok(PyMonoid { inner: TraceMonoid::path(n).py()? })
    }

    #[staticmethod]
    fn ring(n: usize) -> PyResult<Self> {
        Ok(PyMonoid { inner: TraceMonoid::ring(n).py()? })
    }

    #[getter]
    fn letters(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn commuting_pairs(&self) -> Vec<(String, String)> {
        let m = &self.inner;
        m.independent_pairs()
            .into_iter()
            .map(|(a, b)| (m.name(a).to_string(), m.name(b).to_string()))
            .collect()
    }

    fn is_irreducible(&self) -> bool {
        self.inner.is_irreducible()
    }

    /// Normal form of a word as a list of cliques.
    fn normalize(&self, word: Vec<String>) -> PyResult<Cliques> {
        let x = self.inner.normalize(&letters_of(&self.inner, &word)?).py()?;
        Ok(cliques_of(&self.inner, &x))
    }

    fn concat(&self, x: Cliques, y: Cliques) -> PyResult<Cliques> {
        let m = &self.inner;
        Ok(cliques_of(m, &m.concat(&trace_of(m, &x)?, &trace_of(m, &y)?)))
    }

    /// `y` with the prefix `x` removed, or None when `x` is not a prefix.
    fn left_divide(&self, x: Cliques, y: Cliques) -> PyResult<Option<Cliques>> {
        let m = &self.inner;
        Ok(m.left_divides(&trace_of(m, &x)?, &trace_of(m, &y)?).map(|z| cliques_of(m, &z)))
    }

    /// Coefficients of the Möbius polynomial, constant term first.
    fn moebius_polynomial(&self) -> PyResult<Vec<f64>> {
        Ok(moebius_polynomial(&self.inner).py()?.coefficients().to_vec())
    }

    fn smallest_root(&self) -> PyResult<f64> {
        heapsync::moebius::smallest_root(&self.inner).py()
    }

    /// Number of traces of each length `0..=n`.
    fn growth(&self, n: usize) -> PyResult<Vec<u128>> {
        growth_coefficients(&self.inner, n).py()
    }

    /// All traces of length at most `n`.
    fn traces(&self, n: usize) -> PyResult<Vec<Cliques>> {
        let m = &self.inner;
        Ok(m.enumerate_traces(n, DEFAULT_WORK_BUDGET)
            .py()?
            .iter()
            .map(|x| cliques_of(m, x))
            .collect())
    }

    /// "Moebius", "SubMoebius" or "Neither" for the given letter weights.
    fn classify(&self, weights: HashMap<String, f64>) -> PyResult<String> {
        let f = valuation_of(&self.inner, &weights)?;
        Ok(classify_valuation(&self.inner, &f).py()?.to_string())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Monoid({:?}, {} commuting pairs)", self.inner.names(), self.inner.independent_pairs().len())
    }
}

/// Alphabets over shared letters, synchronized into traces.
#[pyclass(name = "Network", module = "heapsync", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    inner: AlphabetNetwork,
}

#[pymethods]
impl PyNetwork {
    #[new]
    fn new(names: Vec<String>, alphabets: Vec<Vec<String>>) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: AlphabetNetwork::from_names(&names, &alphabets).py()?,
        })
    }

    #[staticmethod]
    fn path(n: usize) -> PyResult<Self> {
        Ok(PyNetwork { inner: AlphabetNetwork::path(n).py()? })
    }

    #[staticmethod]
    fn ring(n: usize) -> PyResult<Self> {
        Ok(PyNetwork { inner: AlphabetNetwork::ring(n).py()? })
    }

    /// Parses the network section of a configuration file.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: heapsync::text::parse_config(text).py()?.network,
        })
    }

    fn monoid(&self) -> PyMonoid {
        PyMonoid {
            inner: self.inner.monoid().clone(),
        }
    }

    #[getter]
    fn alphabets(&self) -> Vec<Vec<String>> {
        let m = self.inner.monoid();
        self.inner
            .alphabets()
            .iter()
            .map(|a| a.iter().map(|&x| m.name(x).to_string()).collect())
            .collect()
    }

    /// Synchronizes one word per alphabet. `closed[i]` marks word `i` as
    /// complete; open words may still grow. Returns the trace and the tag.
    #[pyo3(signature = (words, closed=None))]
    fn synchronize(&self, words: Vec<Vec<String>>, closed: Option<Vec<bool>>) -> PyResult<(Cliques, String)> {
        let m = self.inner.monoid();
        let closed = closed.unwrap_or_else(|| vec![true; words.len()]);
        if closed.len() != words.len() {
            return Err(PyValueError::new_err("one closed flag per word"));
        }
        let components = words
            .iter()
            .zip(&closed)
            .map(|(w, &c)| {
                let tag = if c { StreamTag::Eof } else { StreamTag::Wfi };
                Ok(TaggedWord::new(letters_of(m, w)?, tag))
            })
            .collect::<PyResult<Vec<_>>>()?;
        let (x, tag) = self.inner.synchronize(&WordVector::new(components)).py()?;
        Ok((cliques_of(m, &x), tag.to_string()))
    }

    /// One run of the synchronization sampler: the trace and its status.
    #[pyo3(signature = (dists, seed=0, budget=1_000_000))]
    fn sample(&self, dists: Dists, seed: u64, budget: usize) -> PyResult<(Cliques, String)> {
        let psa = Psa::new(&self.inner, &dists_of(&self.inner, &dists)?).py()?;
        let opts = PsaOptions {
            budget,
            ..PsaOptions::default()
        };
        let r = psa.run(&RandomStream::new(seed), &opts).py()?;
        Ok((cliques_of(self.inner.monoid(), &r.trace), r.status.to_string()))
    }

    /// Letter weights `P(a ≤ output)` of the synchronization sampler.
    fn valuation(&self, dists: Dists) -> PyResult<HashMap<String, f64>> {
        let f = psa_valuation(&self.inner, &dists_of(&self.inner, &dists)?).py()?;
        Ok(weights_of(self.inner.monoid(), &f))
    }

    /// "finite" or "infinite" outputs for the given distributions, or from
    /// the alphabet structure alone when none are given.
    #[pyo3(signature = (dists=None))]
    fn classify(&self, dists: Option<Dists>) -> PyResult<String> {
        let class = match dists {
            Some(d) => classify_psa(&self.inner, &dists_of(&self.inner, &d)?).py()?,
            None => structural_class(&self.inner),
        };
        Ok(class.to_string())
    }

    /// Mean output length and its standard error over `samples` runs.
    #[pyo3(signature = (dists, samples, seed=0))]
    fn mean_length(&self, dists: Dists, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
        let psa = Psa::new(&self.inner, &dists_of(&self.inner, &dists)?).py()?;
        let r = mean_report(&sample_lengths(&psa, samples, &RandomStream::new(seed)).py()?);
        Ok((r.estimate, r.stderr))
    }

    /// A prefix of at least `length` pieces of the full synchronization walk
    /// built from pyramidal increments ending in `letter`. `reduced` and
    /// `dists` drive the sampler on the network without `letter`.
    #[pyo3(signature = (letter, reduced, dists, length, seed=0))]
    fn walk(&self, letter: &str, reduced: &PyNetwork, dists: Dists, length: usize, seed: u64) -> PyResult<Cliques> {
        let m = self.inner.monoid();
        let a = m.letter_or_err(letter).py()?;
        let d = dists_of(&reduced.inner, &dists)?;
        let cfg = PfsaConfig::new(self.inner.clone(), a, reduced.inner.clone(), d, seed).py()?;
        let w = cfg.sampler().py()?.walk(&RandomStream::new(seed), length, false).py()?;
        Ok(cliques_of(m, &w.trace))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Network({:?})", self.alphabets())
    }
}

fn solved(p: SolvedParams) -> (PyNetwork, Dists) {
    let d = dicts_of(&p.network, &p.dists);
    (PyNetwork { inner: p.network }, d)
}

/// Distributions on the path `a0 .. aM` realizing letter weights `targets`.
/// With `finite=True` the outputs are finite and the last alphabet carries
/// a sub-probability.
#[pyfunction]
#[pyo3(signature = (targets, finite=false))]
fn solve_path(targets: Vec<f64>, finite: bool) -> PyResult<(PyNetwork, Dists)> {
    let p = if finite {
        solve_path_sub_bernoulli(&targets)
    } else {
        solve_path_bernoulli(&targets)
    };
    Ok(solved(p.py()?))
}

/// Reduced network and distributions for the full walk on the ring
/// `a0 .. a{N-1}` with letter `removed` taken out.
#[pyfunction]
#[pyo3(signature = (targets, removed=0))]
fn solve_ring(targets: Vec<f64>, removed: usize) -> PyResult<(PyNetwork, Dists)> {
    Ok(solved(solve_ring_removing(&targets, Letter(removed)).py()?.params))
}

#[pymodule]
#[pyo3(name = "heapsync")]
fn heapsync_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMonoid>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(solve_path, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ring, m)?)?;
    Ok(())
}
