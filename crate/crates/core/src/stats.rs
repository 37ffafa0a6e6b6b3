//! Estimators and goodness-of-fit tests comparing generated traces with
//! their theoretical valuations.

use std::collections::HashMap;
use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{input, Error, Result};
use crate::moebius::Valuation;
use crate::pfsa::{NaiveWalk, PfsaSampler};
use crate::sampler::{classify_psa, Psa, PsaClass, PsaOptions, PsaStatus, RandomStream};
use crate::trace::{HeapBuilder, Letter, Trace, TraceMonoid, DEFAULT_WORK_BUDGET};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;

/// Default number of pieces generated beyond `|x|` when deciding `x ≤ ξ`.
pub const DEFAULT_SLACK: usize = 64;

/// Largest fraction of undecided samples an estimate tolerates.
pub const MAX_UNDECIDED: f64 = 0.01;

/// Smallest expected count of a separate bucket in a fit.
pub const MIN_EXPECTED: f64 = 5.0;

/// A point estimate with its standard error and 99% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub undecided: u64,
}

impl EstimateReport {
    pub fn new(estimate: f64, stderr: f64, samples: u64, undecided: u64) -> Self {
        EstimateReport {
            estimate,
            stderr,
            samples,
            undecided,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (
            self.estimate - Z99 * self.stderr,
            self.estimate + Z99 * self.stderr,
        )
    }

    pub fn contains(&self, v: f64) -> bool {
        let (lo, hi) = self.interval();
        lo <= v && v <= hi
    }

    /// Distance to `v` in standard errors.
    pub fn z_score(&self, v: f64) -> f64 {
        (self.estimate - v) / self.stderr
    }

    pub fn key_values(&self) -> String {
        let (lo, hi) = self.interval();
        format!(
            "estimate={}\nstderr={}\nsamples={}\nundecided={}\nci_low={}\nci_high={}\n",
            self.estimate, self.stderr, self.samples, self.undecided, lo, hi
        )
    }
}

impl fmt::Display for EstimateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.interval();
        write!(
            f,
            "{:.6} ± {:.6} (99% CI [{:.6}, {:.6}], n = {})",
            self.estimate, self.stderr, lo, hi, self.samples
        )
    }
}

/// A generated trace: `complete` means nothing would follow it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub trace: Trace,
    pub complete: bool,
}

/// A seeded generator of (prefixes of) random traces.
pub trait TraceSource {
    fn monoid(&self) -> &TraceMonoid;

    /// Generates with stream `rng` until `max_len` pieces, the end of the
    /// trace, or `stop` holds on the prefix.
    fn sample(
        &self,
        rng: &RandomStream,
        max_len: usize,
        stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> Result<Sample>;
}

/// Synchronization runs as a trace source.
#[derive(Debug, Clone)]
pub struct PsaSource<'n> {
    pub psa: Psa<'n>,
    pub chunk: usize,
}

impl<'n> PsaSource<'n> {
    pub fn new(psa: Psa<'n>) -> Self {
        PsaSource { psa, chunk: 16 }
    }
}

impl TraceSource for PsaSource<'_> {
    fn monoid(&self) -> &TraceMonoid {
        self.psa.network().monoid()
    }

    fn sample(
        &self,
        rng: &RandomStream,
        max_len: usize,
        _stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> Result<Sample> {
        let out = self.psa.run(
            rng,
            &PsaOptions {
                budget: max_len.max(1),
                chunk: self.chunk,
            },
        )?;
        Ok(Sample {
            complete: matches!(out.status, PsaStatus::Terminated(_)),
            trace: out.trace,
        })
    }
}

impl TraceSource for PfsaSampler<'_> {
    fn monoid(&self) -> &TraceMonoid {
        self.config().monoid()
    }

    fn sample(
        &self,
        rng: &RandomStream,
        max_len: usize,
        stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> Result<Sample> {
        Ok(Sample {
            trace: self.walk_until(rng, max_len, false, stop)?.trace,
            complete: false,
        })
    }
}

impl TraceSource for NaiveWalk<'_> {
    fn monoid(&self) -> &TraceMonoid {
        NaiveWalk::monoid(self)
    }

    fn sample(
        &self,
        rng: &RandomStream,
        max_len: usize,
        stop: &mut dyn FnMut(&HeapBuilder<'_>) -> bool,
    ) -> Result<Sample> {
        Ok(Sample {
            trace: self.walk_until(rng, max_len, stop)?.trace,
            complete: false,
        })
    }
}

/// Fraction of samples dominating `x`, sample `k` drawn with
/// `master.derive(k)`.
///
/// Each sample is generated until `x ≤ ξ` is decided or `|x| + slack` pieces
/// exist; more than 1% undecided samples make the estimate inconclusive.
pub fn estimate_cylinder(
    source: &dyn TraceSource,
    x: &Trace,
    samples: u64,
    master: &RandomStream,
    slack: usize,
) -> Result<EstimateReport> {
    if samples == 0 {
        return input("at least one sample is required");
    }
    let monoid = source.monoid();
    monoid.validate(x)?;
    if x.is_empty() {
        return Ok(EstimateReport::new(1.0, 0.0, samples, 0));
    }
    let max_len = x.len() + slack;
    let mut hits = 0u64;
    let mut undecided = 0u64;
    for k in 0..samples {
        let mut stop = |h: &HeapBuilder<'_>| monoid.prefix_dominates(&h.trace(), x).is_some();
        let s = source.sample(&master.derive(k), max_len, &mut stop)?;
        match monoid.prefix_dominates(&s.trace, x) {
            Some(true) => hits += 1,
            Some(false) => {}
            None if s.complete => {}
            None => undecided += 1,
        }
    }
    if undecided as f64 > MAX_UNDECIDED * samples as f64 {
        return Err(Error::Inconclusive(format!(
            "{undecided} of {samples} samples could not be decided within {max_len} pieces"
        )));
    }
    let n = samples - undecided;
    let p = hits as f64 / n as f64;
    Ok(EstimateReport::new(
        p,
        (p * (1.0 - p) / n as f64).sqrt(),
        samples,
        undecided,
    ))
}

/// Mean output length of a synchronization producing finite traces.
pub fn estimate_mean_length(
    psa: &Psa<'_>,
    samples: u64,
    master: &RandomStream,
) -> Result<EstimateReport> {
    if classify_psa(psa.network(), psa.dists())? != PsaClass::Finite {
        return input("mean length is only defined for finite outputs");
    }
    let lengths = sample_lengths(psa, samples, master)?;
    Ok(mean_report(&lengths))
}

/// Output lengths of `samples` runs, run `k` seeded with `master.derive(k)`.
pub fn sample_lengths(psa: &Psa<'_>, samples: u64, master: &RandomStream) -> Result<Vec<f64>> {
    let opts = PsaOptions {
        chunk: 16,
        ..PsaOptions::default()
    };
    (0..samples)
        .map(|k| {
            let out = psa.run(&master.derive(k), &opts)?;
            if out.status == PsaStatus::BudgetExhausted {
                return Err(Error::Resource("a finite sample exceeded the budget".into()));
            }
            Ok(out.trace.len() as f64)
        })
        .collect()
}

/// Sample mean with its standard error.
pub fn mean_report(values: &[f64]) -> EstimateReport {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    EstimateReport::new(mean, (var / n).sqrt(), values.len() as u64, 0)
}

/// Proportion with its binomial standard error.
pub fn proportion_report(hits: u64, n: u64) -> EstimateReport {
    let p = hits as f64 / n as f64;
    EstimateReport::new(p, (p * (1.0 - p) / n as f64).sqrt(), n, 0)
}

/// Relative letter frequencies of a trace, indexed by letter id.
pub fn letter_frequencies(x: &Trace, alphabet_len: usize) -> Vec<f64> {
    let total = x.len().max(1) as f64;
    x.letter_counts(alphabet_len)
        .into_iter()
        .map(|c| c as f64 / total)
        .collect()
}

/// One cell of a fit: a single trace, or the merged tail when `trace` is
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bucket {
    pub trace: Option<Trace>,
    pub observed: f64,
    pub expected: f64,
}

/// Outcome of a chi-square test.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub buckets: Vec<Bucket>,
}

impl FitReport {
    fn from_buckets(buckets: Vec<Bucket>, statistic: f64, dof: usize) -> Self {
        let p_value = if dof == 0 {
            if statistic > 1e-12 {
                0.0
            } else {
                1.0
            }
        } else if statistic.is_infinite() {
            0.0
        } else {
            ChiSquared::new(dof as f64)
                .expect("positive degrees of freedom")
                .sf(statistic)
        };
        FitReport {
            statistic,
            dof,
            p_value,
            buckets,
        }
    }

    pub fn key_values(&self) -> String {
        format!(
            "chi2={}\ndof={}\np_value={}\nbuckets={}\n",
            self.statistic,
            self.dof,
            self.p_value,
            self.buckets.len()
        )
    }

    /// Aligned table of the buckets.
    pub fn table(&self, monoid: &TraceMonoid) -> String {
        let labels: Vec<String> = self
            .buckets
            .iter()
            .map(|b| match &b.trace {
                Some(t) => crate::trace::DisplayTrace(monoid, t).to_string(),
                None => "(tail)".to_string(),
            })
            .collect();
        let width = labels.iter().map(|l| l.chars().count()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:>10}  {:>12}\n", "trace", "observed", "expected");
        for (l, b) in labels.iter().zip(&self.buckets) {
            out.push_str(&format!(
                "{:<width$}  {:>10}  {:>12.3}\n",
                l, b.observed, b.expected
            ));
        }
        out
    }
}

/// Chi-square fit of first hitting samples of `a` against `P(V = v) = f(v)`.
///
/// Every trace of `V_a` up to `horizon` pieces gets its own bucket when its
/// expected count reaches 5; the rest, together with the mass beyond the
/// horizon, forms a tail bucket. The test is meaningful for Möbius `f`.
pub fn fit_first_hitting(
    monoid: &TraceMonoid,
    samples: &[Trace],
    f: &Valuation,
    a: Letter,
    horizon: usize,
) -> Result<FitReport> {
    if samples.is_empty() {
        return input("no samples to fit");
    }
    if f.weights().len() != monoid.len() {
        return input("valuation does not match the monoid");
    }
    if let Some(bad) = samples.iter().position(|v| !monoid.in_hitting_set(v, a)) {
        return input(format!("sample {bad} is not a first hitting trace"));
    }
    let n = samples.len() as f64;
    let mut observed: HashMap<&Trace, f64> = HashMap::new();
    for v in samples {
        *observed.entry(v).or_default() += 1.0;
    }
    let candidates: Vec<Trace> = monoid
        .enumerate_traces(horizon, DEFAULT_WORK_BUDGET)?
        .into_iter()
        .filter(|v| monoid.in_hitting_set(v, a))
        .collect();
    let mut buckets = Vec::new();
    let mut tail = Bucket {
        trace: None,
        observed: n,
        expected: n,
    };
    for v in candidates {
        let e = n * v.to_word().iter().map(|&l| f.weight(l)).product::<f64>();
        let o = observed.get(&v).copied().unwrap_or(0.0);
        tail.expected -= e;
        tail.observed -= o;
        if e >= MIN_EXPECTED {
            buckets.push(Bucket {
                trace: Some(v),
                observed: o,
                expected: e,
            });
        } else {
            tail.expected += e;
            tail.observed += o;
        }
    }
    tail.expected = tail.expected.max(0.0);
    buckets.sort_by(|x, y| y.expected.total_cmp(&x.expected));
    while tail.expected < MIN_EXPECTED && !buckets.is_empty() && tail.observed + tail.expected > 0.0 {
        let b = buckets.pop().unwrap();
        tail.expected += b.expected;
        tail.observed += b.observed;
    }
    if tail.expected > 0.0 || tail.observed > 0.0 {
        buckets.push(tail);
    }
    let statistic = buckets
        .iter()
        .map(|b| {
            if b.expected > 0.0 {
                (b.observed - b.expected).powi(2) / b.expected
            } else if b.observed > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = buckets.len().saturating_sub(1);
    Ok(FitReport::from_buckets(buckets, statistic, dof))
}

/// Two-sample chi-square test that two trace samples share a distribution.
///
/// Traces seen fewer than 10 times over both samples are pooled.
pub fn compare_samples(first: &[Trace], second: &[Trace]) -> Result<FitReport> {
    if first.is_empty() || second.is_empty() {
        return input("both samples must be nonempty");
    }
    let mut counts: HashMap<&Trace, (f64, f64)> = HashMap::new();
    for t in first {
        counts.entry(t).or_default().0 += 1.0;
    }
    for t in second {
        counts.entry(t).or_default().1 += 1.0;
    }
    let mut cells: Vec<(Option<Trace>, f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    let mut keys: Vec<(&Trace, (f64, f64))> = counts.into_iter().collect();
    keys.sort_by(|x, y| x.0.cmp(y.0));
    for (t, (x, y)) in keys {
        if x + y >= 10.0 {
            cells.push((Some(t.clone()), x, y));
        } else {
            pooled.0 += x;
            pooled.1 += y;
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        cells.push((None, pooled.0, pooled.1));
    }
    let (n1, n2) = (first.len() as f64, second.len() as f64);
    let (k1, k2) = ((n2 / n1).sqrt(), (n1 / n2).sqrt());
    let statistic = cells
        .iter()
        .map(|(_, x, y)| (k1 * x - k2 * y).powi(2) / (x + y))
        .sum();
    let buckets = cells
        .into_iter()
        .map(|(t, x, y)| Bucket {
            trace: t,
            observed: x,
            expected: (x + y) * n1 / (n1 + n2),
        })
        .collect::<Vec<_>>();
    let dof = buckets.len().saturating_sub(1);
    Ok(FitReport::from_buckets(buckets, statistic, dof))
}
