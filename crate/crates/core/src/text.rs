//! Plain-text formats for traces, monoids, networks, word vectors,
//! valuations, distributions and run configurations.
//!
//! Lines starting with `#` are comments everywhere. Component and alphabet
//! indices are 0-based.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::moebius::Valuation;
use crate::sampler::{DistKind, LocalDistribution};
use crate::sync::{AlphabetNetwork, StreamTag, TaggedWord, WordVector};
use crate::trace::{Letter, Trace, TraceMonoid};

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::Parse { line, msg },
        other => other,
    }
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// One clique per line, bottom-up, terminated by a `%` line.
pub fn format_trace(monoid: &TraceMonoid, x: &Trace) -> String {
    let mut out = String::new();
    for c in x.cliques() {
        let names: Vec<&str> = c.letters().map(|a| monoid.name(a)).collect();
        out.push_str(&names.join(" "));
        out.push('\n');
    }
    out.push_str("%\n");
    out
}

/// One increment of the full walk: a `# rejected: k` line, then the trace.
pub fn format_increment(monoid: &TraceMonoid, inc: &crate::pfsa::Increment) -> String {
    format!("# rejected: {}\n{}", inc.rejected, format_trace(monoid, &inc.trace))
}

/// Parses every `%`-terminated trace of `text`.
pub fn parse_traces(monoid: &TraceMonoid, text: &str) -> Result<Vec<Trace>> {
    let mut out = Vec::new();
    let mut word = Vec::new();
    let mut open = false;
    let mut last = 0;
    for (no, line) in content_lines(text) {
        last = no;
        if line == "%" {
            // a clique sequence is accepted as any word; its normal form
            // must reproduce the lines for the trace to be well formed
            out.push(monoid.normalize(&word).map_err(|e| at_line(no, e))?);
            word.clear();
            open = false;
            continue;
        }
        open = true;
        for name in line.split_whitespace() {
            word.push(monoid.letter(name).ok_or_else(|| Error::Parse {
                line: no,
                msg: format!("unknown letter {name:?}"),
            })?);
        }
    }
    if open {
        return perr(last, "trace is not terminated by a % line");
    }
    Ok(out)
}

/// Parses exactly one trace.
pub fn parse_trace(monoid: &TraceMonoid, text: &str) -> Result<Trace> {
    let mut v = parse_traces(monoid, text)?;
    if v.len() != 1 {
        return perr(1, format!("expected one trace, found {}", v.len()));
    }
    Ok(v.pop().unwrap())
}

/// `letters: a0 a1 …` followed by one independent pair per line.
pub fn format_monoid(monoid: &TraceMonoid) -> String {
    let mut out = format!("letters: {}\n", monoid.names().join(" "));
    for (a, b) in monoid.independent_pairs() {
        let _ = writeln!(out, "{} {}", monoid.name(a), monoid.name(b));
    }
    out
}

fn parse_letters_line(no: usize, line: &str) -> Result<Vec<String>> {
    match line.strip_prefix("letters:") {
        Some(rest) => {
            let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            if names.is_empty() {
                return perr(no, "no letters declared");
            }
            Ok(names)
        }
        None => perr(no, "expected a \"letters:\" line"),
    }
}

pub fn parse_monoid(text: &str) -> Result<TraceMonoid> {
    let mut lines = content_lines(text);
    let Some((no, first)) = lines.next() else {
        return perr(1, "empty monoid description");
    };
    let names = parse_letters_line(no, first)?;
    let base = TraceMonoid::new(&names, &[]).map_err(|e| at_line(no, e))?;
    let mut pairs = Vec::new();
    for (no, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return perr(no, "an independence line holds exactly two letters");
        }
        let a = base.letter_or_err(parts[0]).map_err(|e| at_line(no, e))?;
        let b = base.letter_or_err(parts[1]).map_err(|e| at_line(no, e))?;
        if a == b {
            return perr(no, "a letter cannot be independent of itself");
        }
        pairs.push((a, b));
    }
    TraceMonoid::new(&names, &pairs)
}

/// `letters:` line and `alphabet i: …` lines.
pub fn format_network(net: &AlphabetNetwork) -> String {
    let m = net.monoid();
    let mut out = format!("letters: {}\n", m.names().join(" "));
    for (i, alph) in net.alphabets().iter().enumerate() {
        let names: Vec<&str> = alph.iter().map(|&a| m.name(a)).collect();
        let _ = writeln!(out, "alphabet {i}: {}", names.join(" "));
    }
    out
}

fn parse_index(no: usize, s: &str, what: &str) -> Result<usize> {
    s.trim().parse().or_else(|_| perr(no, format!("invalid {what} index {s:?}")))
}

/// Parses a network from numbered lines; also accepts `model: path N` or
/// `model: ring N`.
fn parse_network_lines<'a>(lines: impl IntoIterator<Item = (usize, &'a str)>) -> Result<AlphabetNetwork> {
    let mut names: Option<Vec<String>> = None;
    let mut alphabets: Vec<(usize, usize, Vec<String>)> = Vec::new();
    let mut model: Option<(usize, AlphabetNetwork)> = None;
    let mut first_line = 1;
    for (no, line) in lines {
        if first_line == 1 {
            first_line = no;
        }
        if let Some(rest) = line.strip_prefix("model:") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let net = match parts.as_slice() {
                ["path", n] => AlphabetNetwork::path(parse_index(no, n, "size")?),
                ["ring", n] => AlphabetNetwork::ring(parse_index(no, n, "size")?),
                _ => return perr(no, "model must be \"path N\" or \"ring N\""),
            };
            model = Some((no, net.map_err(|e| at_line(no, e))?));
        } else if line.starts_with("letters:") {
            if names.is_some() {
                return perr(no, "letters declared twice");
            }
            names = Some(parse_letters_line(no, line)?);
        } else if let Some(rest) = line.strip_prefix("alphabet") {
            let Some((idx, letters)) = rest.split_once(':') else {
                return perr(no, "expected \"alphabet i: letters\"");
            };
            let i = parse_index(no, idx, "alphabet")?;
            alphabets.push((no, i, letters.split_whitespace().map(str::to_string).collect()));
        } else {
            return perr(no, format!("unexpected line {line:?}"));
        }
    }
    if let Some((no, net)) = model {
        if names.is_some() || !alphabets.is_empty() {
            return perr(no, "a model line cannot be combined with explicit alphabets");
        }
        return Ok(net);
    }
    let Some(names) = names else {
        return perr(first_line, "missing \"letters:\" line");
    };
    let base = TraceMonoid::new(&names, &[]).map_err(|e| at_line(first_line, e))?;
    let mut ordered = Vec::with_capacity(alphabets.len());
    for (k, (no, i, letters)) in alphabets.into_iter().enumerate() {
        if i != k {
            return perr(no, format!("alphabet {i} out of order, expected {k}"));
        }
        let ids = letters
            .iter()
            .map(|n| base.letter_or_err(n))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| at_line(no, e))?;
        ordered.push(ids);
    }
    AlphabetNetwork::new(&names, ordered).map_err(|e| at_line(first_line, e))
}

pub fn parse_network(text: &str) -> Result<AlphabetNetwork> {
    parse_network_lines(content_lines(text))
}

/// One line per component: `i: a0 a1 | WFI` or `| EOF`.
pub fn format_word_vector(net: &AlphabetNetwork, v: &WordVector) -> String {
    let m = net.monoid();
    let mut out = String::new();
    for (i, w) in v.components.iter().enumerate() {
        let names: Vec<&str> = w.letters.iter().map(|&a| m.name(a)).collect();
        let sep = if names.is_empty() { "" } else { " " };
        let _ = writeln!(out, "{i}: {}{sep}| {}", names.join(" "), w.tag);
    }
    out
}

pub fn parse_word_vector(net: &AlphabetNetwork, text: &str) -> Result<WordVector> {
    let m = net.monoid();
    let mut comps = Vec::new();
    for (no, line) in content_lines(text) {
        let Some((idx, rest)) = line.split_once(':') else {
            return perr(no, "expected \"i: letters | TAG\"");
        };
        let i = parse_index(no, idx, "component")?;
        if i != comps.len() {
            return perr(no, format!("component {i} out of order, expected {}", comps.len()));
        }
        let Some((letters, tag)) = rest.rsplit_once('|') else {
            return perr(no, "missing \"| WFI\" or \"| EOF\"");
        };
        let tag = match tag.trim() {
            "WFI" => StreamTag::Wfi,
            "EOF" => StreamTag::Eof,
            t => return perr(no, format!("unknown tag {t:?}")),
        };
        let letters = letters
            .split_whitespace()
            .map(|n| m.letter_or_err(n))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| at_line(no, e))?;
        comps.push(TaggedWord::new(letters, tag));
    }
    let v = WordVector::new(comps);
    net.validate(&v)?;
    Ok(v)
}

/// One `name=weight` line per letter.
pub fn format_valuation(monoid: &TraceMonoid, f: &Valuation) -> String {
    let mut out = String::new();
    for a in monoid.letters() {
        let _ = writeln!(out, "{}={}", monoid.name(a), f.weight(a));
    }
    out
}

fn parse_assignment(no: usize, tok: &str) -> Result<(&str, f64)> {
    let Some((name, val)) = tok.split_once('=') else {
        return perr(no, format!("expected name=value, got {tok:?}"));
    };
    let v: f64 = val
        .trim()
        .parse()
        .or_else(|_| perr(no, format!("invalid number {val:?}")))?;
    Ok((name.trim(), v))
}

pub fn parse_valuation(monoid: &TraceMonoid, text: &str) -> Result<Valuation> {
    let mut weights: Vec<Option<f64>> = vec![None; monoid.len()];
    let mut last = 1;
    for (no, line) in content_lines(text) {
        last = no;
        for tok in line.split_whitespace() {
            let (name, v) = parse_assignment(no, tok)?;
            let a = monoid.letter_or_err(name).map_err(|e| at_line(no, e))?;
            if weights[a.0].replace(v).is_some() {
                return perr(no, format!("weight of {name} given twice"));
            }
        }
    }
    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| Error::Parse {
            line: last,
            msg: format!("missing weight for {}", monoid.name(Letter(i))),
        }))
        .collect::<Result<Vec<_>>>()?;
    Valuation::new(monoid, weights).map_err(|e| at_line(last, e))
}

/// `[dists]` section with `i: name=w … prob|sub` lines.
pub fn format_dists(net: &AlphabetNetwork, dists: &[LocalDistribution]) -> String {
    let m = net.monoid();
    let mut out = String::from("[dists]\n");
    for (i, d) in dists.iter().enumerate() {
        let entries: Vec<String> = d
            .entries()
            .iter()
            .map(|&(a, w)| format!("{}={}", m.name(a), w))
            .collect();
        let _ = writeln!(out, "{i}: {} {}", entries.join(" "), d.kind());
    }
    out
}

fn parse_dists_lines<'a>(
    monoid: &TraceMonoid,
    lines: impl IntoIterator<Item = (usize, &'a str)>,
) -> Result<Vec<(usize, LocalDistribution)>> {
    let mut out: Vec<(usize, LocalDistribution)> = Vec::new();
    for (no, line) in lines {
        let Some((idx, rest)) = line.split_once(':') else {
            return perr(no, "expected \"i: name=weight … [prob|sub]\"");
        };
        let i = parse_index(no, idx, "alphabet")?;
        if i != out.len() {
            return perr(no, format!("distribution {i} out of order, expected {}", out.len()));
        }
        let mut entries = Vec::new();
        let mut kind = None;
        for tok in rest.split_whitespace() {
            match tok {
                "prob" => kind = Some(DistKind::Probability),
                "sub" => kind = Some(DistKind::SubProbability),
                _ => {
                    let (name, v) = parse_assignment(no, tok)?;
                    let a = monoid.letter_or_err(name).map_err(|e| at_line(no, e))?;
                    entries.push((a, v));
                }
            }
        }
        let d = match kind {
            Some(k) => LocalDistribution::with_kind(entries, k),
            None => LocalDistribution::new(entries),
        }
        .map_err(|e| at_line(no, e))?;
        out.push((no, d));
    }
    Ok(out)
}

/// Parses a `[dists]` body (without the header) for `net`.
pub fn parse_dists(net: &AlphabetNetwork, text: &str) -> Result<Vec<LocalDistribution>> {
    let body = content_lines(text).filter(|(_, l)| *l != "[dists]");
    let parsed = parse_dists_lines(net.monoid(), body)?;
    let last = parsed.last().map_or(1, |p| p.0);
    let dists: Vec<LocalDistribution> = parsed.into_iter().map(|p| p.1).collect();
    crate::sampler::validate_dists(net, &dists).map_err(|e| at_line(last, e))?;
    Ok(dists)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Psa,
    Pfsa,
    Naive,
}

/// Targets for the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `f ≡ p₀` for the network's monoid.
    Uniform,
    Explicit(Valuation),
}

/// The `[run]` section.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSection {
    pub algorithm: Option<Algorithm>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub length: Option<usize>,
    pub letter: Option<String>,
    pub samples: Option<u64>,
    pub scenario: Option<String>,
}

/// A parsed and validated configuration file.
///
/// Sections: `[network]`, `[dists]`, `[reduced]`, `[targets]` and `[run]`.
/// For the full synchronization walk the distributions belong to the reduced
/// network over `Σ \ {a}`; otherwise they belong to the main network.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub network: AlphabetNetwork,
    pub dists: Option<Vec<LocalDistribution>>,
    pub reduced: Option<AlphabetNetwork>,
    pub targets: Option<Targets>,
    pub run: RunSection,
}

impl RunConfig {
    /// Network the distributions refer to.
    pub fn dists_network(&self) -> &AlphabetNetwork {
        match (&self.run.algorithm, &self.reduced) {
            (Some(Algorithm::Pfsa), Some(r)) => r,
            _ => &self.network,
        }
    }
}

/// `Σ_i \ {a}` for every alphabet, dropping those contained in another.
pub fn default_reduced_network(net: &AlphabetNetwork, a: Letter) -> Result<AlphabetNetwork> {
    let m = net.monoid();
    let names: Vec<&str> = m.letters().filter(|&b| b != a).map(|b| m.name(b)).collect();
    let sub = TraceMonoid::new(&names, &[])?;
    let mut alphabets = Vec::new();
    for alph in net.alphabets() {
        let rest: Vec<Letter> = alph
            .iter()
            .filter(|&&b| b != a)
            .map(|&b| sub.letter(m.name(b)).expect("letter kept"))
            .collect();
        alphabets.push(rest);
    }
    let subsumed = |i: usize| {
        let s = &alphabets[i];
        s.is_empty()
            || alphabets.iter().enumerate().any(|(j, t)| {
                j != i && s.iter().all(|b| t.contains(b)) && (t.len() > s.len() || j < i)
            })
    };
    let keep: Vec<Vec<Letter>> = (0..alphabets.len())
        .filter(|&i| !subsumed(i))
        .map(|i| alphabets[i].clone())
        .collect();
    AlphabetNetwork::new(&names, keep)
}

type Section<'a> = (usize, Vec<(usize, &'a str)>);

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut sections: Vec<(&str, Section<'_>)> = Vec::new();
    for (no, line) in content_lines(text) {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !["network", "dists", "reduced", "targets", "run"].contains(&name) {
                return perr(no, format!("unknown section [{name}]"));
            }
            if sections.iter().any(|s| s.0 == name) {
                return perr(no, format!("section [{name}] appears twice"));
            }
            sections.push((name, (no, Vec::new())));
        } else {
            match sections.last_mut() {
                Some(s) => s.1 .1.push((no, line)),
                None => return perr(no, "content before the first section"),
            }
        }
    }
    let get = |name: &str| sections.iter().find(|s| s.0 == name).map(|s| &s.1);

    let Some((_, net_lines)) = get("network") else {
        return perr(1, "missing [network] section");
    };
    let network = parse_network_lines(net_lines.iter().copied())?;

    let mut run = RunSection::default();
    if let Some((_, lines)) = get("run") {
        for &(no, line) in lines {
            let Some((key, val)) = line.split_once('=') else {
                return perr(no, "expected key = value");
            };
            let (key, val) = (key.trim(), val.trim());
            let num = |what: &str| -> Result<u64> {
                val.parse().or_else(|_| perr(no, format!("invalid {what} {val:?}")))
            };
            match key {
                "algorithm" => {
                    run.algorithm = Some(match val {
                        "psa" => Algorithm::Psa,
                        "pfsa" => Algorithm::Pfsa,
                        "naive" => Algorithm::Naive,
                        _ => return perr(no, format!("unknown algorithm {val:?}")),
                    })
                }
                "seed" => run.seed = Some(num("seed")?),
                "budget" => run.budget = Some(num("budget")? as usize),
                "length" => run.length = Some(num("length")? as usize),
                "samples" => run.samples = Some(num("samples")?),
                "letter" => {
                    network.monoid().letter_or_err(val).map_err(|e| at_line(no, e))?;
                    run.letter = Some(val.to_string());
                }
                "scenario" => run.scenario = Some(val.to_string()),
                _ => return perr(no, format!("unknown key {key:?}")),
            }
        }
    }

    let reduced = match get("reduced") {
        Some((_, lines)) => Some(parse_network_lines(lines.iter().copied())?),
        None => None,
    };
    let reduced = if run.algorithm == Some(Algorithm::Pfsa) {
        let Some(letter) = &run.letter else {
            return perr(get("run").map_or(1, |s| s.0), "the pfsa algorithm needs a letter");
        };
        let a = network.monoid().letter(letter).expect("checked above");
        Some(match reduced {
            Some(r) => r,
            None => default_reduced_network(&network, a)?,
        })
    } else {
        reduced
    };

    let mut config = RunConfig {
        network,
        dists: None,
        reduced,
        targets: None,
        run,
    };

    if let Some((header, lines)) = get("dists") {
        let net = config.dists_network();
        let parsed = parse_dists_lines(net.monoid(), lines.iter().copied())?;
        let last = parsed.last().map_or(*header, |p| p.0);
        let dists: Vec<LocalDistribution> = parsed.into_iter().map(|p| p.1).collect();
        crate::sampler::validate_dists(net, &dists).map_err(|e| at_line(last, e))?;
        config.dists = Some(dists);
    }

    if let Some((header, lines)) = get("targets") {
        let m = config.network.monoid();
        config.targets = Some(match lines.as_slice() {
            [(_, "uniform")] => Targets::Uniform,
            [] => return perr(*header, "empty [targets] section"),
            _ => {
                let body: String = lines.iter().map(|(_, l)| format!("{l}\n")).collect();
                let first = lines[0].0;
                let f = parse_valuation(m, &body).map_err(|e| match e {
                    Error::Parse { line, msg } => Error::Parse {
                        line: line + first - 1,
                        msg,
                    },
                    other => other,
                })?;
                Targets::Explicit(f)
            }
        });
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip() {
        let m = TraceMonoid::from_named_pairs(&["a", "b", "c", "d"], &[("a", "c"), ("a", "d"), ("b", "d")])
            .unwrap();
        let x = m.normalize_names(&["a", "c", "b", "d", "c"]).unwrap();
        let s = format_trace(&m, &x);
        assert_eq!(s, "a c\nb d\nc\n%\n");
        assert_eq!(parse_trace(&m, &s).unwrap(), x);
        assert_eq!(format_trace(&m, &Trace::empty()), "%\n");
        let both = format!("# rejected: 3\n{s}%\n");
        assert_eq!(parse_traces(&m, &both).unwrap(), vec![x, Trace::empty()]);
        assert!(parse_traces(&m, "a\n").is_err());
        assert!(matches!(parse_traces(&m, "a\nz\n%\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn monoid_round_trip() {
        let m = TraceMonoid::ring(5).unwrap();
        let s = format_monoid(&m);
        assert!(s.starts_with("letters: a0 a1 a2 a3 a4\n"));
        assert_eq!(parse_monoid(&s).unwrap(), m);
        assert!(matches!(parse_monoid("letters: x y\nx x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn network_round_trip() {
        let n = AlphabetNetwork::ring(4).unwrap();
        let s = format_network(&n);
        assert!(s.contains("alphabet 0: a0 a3\n"));
        assert_eq!(parse_network(&s).unwrap(), n);
        assert_eq!(parse_network("model: path 5\n").unwrap(), AlphabetNetwork::path(5).unwrap());
        assert!(matches!(
            parse_network("letters: x\nalphabet 0: y\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn word_vector_round_trip() {
        let n = AlphabetNetwork::path(3).unwrap();
        let text = "0: a0 a1 | WFI\n1: | EOF\n";
        let v = parse_word_vector(&n, text).unwrap();
        assert_eq!(v.components[1].tag, StreamTag::Eof);
        assert_eq!(format_word_vector(&n, &v), text);
        assert!(parse_word_vector(&n, "0: a2 | WFI\n1: | EOF\n").is_err());
    }

    #[test]
    fn valuation_round_trip() {
        let m = TraceMonoid::path(3).unwrap();
        let f = Valuation::new(&m, vec![0.308, 0.1, 0.25]).unwrap();
        let s = format_valuation(&m, &f);
        assert_eq!(s, "a0=0.308\na1=0.1\na2=0.25\n");
        assert_eq!(parse_valuation(&m, &s).unwrap(), f);
        assert!(parse_valuation(&m, "a0=0.3\n").is_err());
    }

    #[test]
    fn dists_round_trip() {
        let n = AlphabetNetwork::path(3).unwrap();
        let d = vec![
            LocalDistribution::new(vec![(Letter(0), 0.25), (Letter(1), 0.75)]).unwrap(),
            LocalDistribution::new(vec![(Letter(1), 0.5), (Letter(2), 0.25)]).unwrap(),
        ];
        let s = format_dists(&n, &d);
        assert_eq!(s, "[dists]\n0: a0=0.25 a1=0.75 prob\n1: a1=0.5 a2=0.25 sub\n");
        assert_eq!(parse_dists(&n, &s).unwrap(), d);
        assert!(parse_dists(&n, "0: a0=0.25 a1=0.75 sub\n1: a1=0.5 a2=0.25\n").is_err());
    }

    #[test]
    fn full_config() {
        let text = "\
# ring with a distinguished letter
[network]
model: ring 4
[dists]
0: a0=0.2928932188134524 a1=0.7071067811865476 prob
1: a1=0.41421356237309503 a2=0.2928932188134524 sub
[run]
algorithm = pfsa
letter = a3
seed = 1
length = 100
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.run.algorithm, Some(Algorithm::Pfsa));
        let r = c.reduced.as_ref().unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(c.dists.as_ref().unwrap().len(), 2);
        assert_eq!(c.run.length, Some(100));
    }

    #[test]
    fn config_errors_have_lines() {
        let e = parse_config("[network]\nmodel: ring 4\n[run]\nalgorithm = fast\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
        let e = parse_config("[network]\nmodel: ring 4\n[dists]\n0: a0=0.5 a1=0.5\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
        let e = parse_config("[bogus]\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_config("[network]\nmodel: ring 4\n[targets]\na0=0.3\na9=0.2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 5, .. }), "{e}");
        let c = parse_config("[network]\nmodel: path 5\n[targets]\nuniform\n").unwrap();
        assert_eq!(c.targets, Some(Targets::Uniform));
    }
}
