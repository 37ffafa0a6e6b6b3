use std::fmt::Write as _;
use std::time::Instant;

use heapsync::moebius::{
    classify_valuation, diagnose_valuation, extend_valuation, growth_coefficients, moebius_polynomial,
    moebius_transform, moebius_transform_factored, smallest_root, Valuation, ValuationClass,
};
use heapsync::pfsa::{NaiveWalk, PfsaConfig, WalkState};
use heapsync::sampler::{
    classify_psa, psa_valuation, structural_class, LocalDistribution, Psa, PsaClass, PsaOptions,
    RandomStream, DEFAULT_BUDGET,
};
use heapsync::solver::{solve_path_bernoulli, solve_path_sub_bernoulli, solve_ring, uniform_targets, SolvedParams};
use heapsync::sync::AlphabetNetwork;
use heapsync::text::{
    format_dists, format_increment, format_network, format_trace, format_valuation, Algorithm, RunConfig,
    Targets,
};
use heapsync::trace::{Letter, TraceMonoid, DEFAULT_WORK_BUDGET};

use crate::topology::{detect, Topology};
use crate::{emit, CmdResult, Failure, Options};

/// Default walk length for the full and naive walks.
const DEFAULT_LENGTH: usize = 100;

fn structural_text(net: &AlphabetNetwork) -> &'static str {
    match structural_class(net) {
        PsaClass::Finite => "finite (the alphabet incidence graph has a cycle)",
        PsaClass::Infinite => "infinite (some part of the alphabet incidence graph is a tree)",
    }
}

pub fn analyze(cfg: &RunConfig, opts: &Options) -> CmdResult {
    let net = &cfg.network;
    let m = net.monoid();
    let mut out = String::new();
    let _ = writeln!(out, "letters: {}", m.names().join(" "));
    let _ = writeln!(out, "alphabets: {}", net.len());
    let pairs = m.independent_pairs();
    if pairs.is_empty() {
        let _ = writeln!(out, "monoid: free on {} letters (no commuting pairs)", m.len());
    } else {
        let list: Vec<String> = pairs.iter().map(|&(a, b)| format!("{}{}", m.name(a), m.name(b))).collect();
        let _ = writeln!(out, "commuting pairs: {}", list.join(" "));
    }
    let cliques = m.enumerate_cliques(opts.work_budget.unwrap_or(DEFAULT_WORK_BUDGET))?;
    let _ = writeln!(out, "cliques: {}", cliques.len());
    let _ = writeln!(out, "moebius polynomial: {}", moebius_polynomial(m)?);
    let _ = writeln!(out, "smallest root p0: {:.12}", smallest_root(m)?);
    let irreducible = if m.is_irreducible() { "yes" } else { "no" };
    let _ = writeln!(out, "irreducible: {irreducible}");
    let _ = writeln!(out, "structural criterion: {}", structural_text(net));
    if let Some(dists) = cfg.dists.as_ref().filter(|_| cfg.dists_network() == net) {
        let f = psa_valuation(net, dists)?;
        let report = diagnose_valuation(m, &f)?;
        let weights: Vec<String> = m.letters().map(|a| format!("{}={:.6}", m.name(a), f.weight(a))).collect();
        let _ = writeln!(out, "valuation: {}", weights.join(" "));
        let _ = writeln!(out, "valuation class: {} (h(e) = {:.3e})", report.class, report.epsilon);
        let _ = writeln!(out, "synchronization outputs: {}", classify_psa(net, dists)?);
    }
    emit(&opts.out, &out)?;
    Ok(())
}

fn targets_of(cfg: &RunConfig) -> Result<Valuation, Failure> {
    match &cfg.targets {
        Some(Targets::Uniform) => Ok(uniform_targets(cfg.network.monoid())?),
        Some(Targets::Explicit(f)) => Ok(f.clone()),
        None => Err(Failure::Usage("solve needs a [targets] section".into())),
    }
}

/// Original alphabet of `net` holding exactly `x` and `y`.
fn alphabet_of(net: &AlphabetNetwork, x: Letter, y: Letter) -> usize {
    (0..net.len())
        .find(|&i| net.contains(i, x) && net.contains(i, y))
        .expect("detected topology has this alphabet")
}

/// Moves a canonical path solution onto the path `order` of `net`.
fn relabel_path(net: &AlphabetNetwork, order: &[Letter], s: &SolvedParams) -> Result<Vec<LocalDistribution>, Failure> {
    let mut dists: Vec<Option<LocalDistribution>> = vec![None; net.len()];
    for (j, d) in s.dists.iter().enumerate() {
        let entries = d.entries().iter().map(|&(a, w)| (order[a.0], w)).collect();
        let i = if order.len() == 1 { 0 } else { alphabet_of(net, order[j], order[j + 1]) };
        dists[i] = Some(LocalDistribution::with_kind(entries, d.kind())?);
    }
    Ok(dists.into_iter().map(|d| d.expect("every alphabet solved")).collect())
}

fn max_error(m: &TraceMonoid, got: &Valuation, want: &Valuation) -> f64 {
    m.letters().map(|a| (got.weight(a) - want.weight(a)).abs()).fold(0.0, f64::max)
}

pub fn solve(cfg: &RunConfig, opts: &Options) -> CmdResult {
    let net = &cfg.network;
    let m = net.monoid();
    let f = targets_of(cfg)?;
    let Some(topology) = detect(net) else {
        return Err(Failure::Usage(
            "general topology unsolved: only path and ring networks can be solved".into(),
        ));
    };
    let mut out = String::new();
    match topology {
        Topology::Path(order) => {
            let t: Vec<f64> = order.iter().map(|&a| f.weight(a)).collect();
            let class = classify_valuation(m, &f)?;
            let s = match class {
                ValuationClass::Moebius => solve_path_bernoulli(&t)?,
                ValuationClass::SubMoebius => solve_path_sub_bernoulli(&t)?,
                ValuationClass::Neither => {
                    return Err(Failure::Usage("targets are neither Möbius nor sub-Möbius".into()))
                }
            };
            let dists = relabel_path(net, &order, &s)?;
            let err = max_error(m, &psa_valuation(net, &dists)?, &f);
            let _ = writeln!(out, "# path network, {class} targets");
            let _ = writeln!(out, "# psa valuation matches targets: max error {err:.3e}");
            let _ = writeln!(out, "[network]\n{}", format_network(net));
            let _ = writeln!(out, "{}", format_dists(net, &dists));
            let _ = writeln!(out, "[run]\nalgorithm = psa");
        }
        Topology::Ring(order) => {
            let t: Vec<f64> = order.iter().map(|&a| f.weight(a)).collect();
            let sol = solve_ring(&t)?;
            let removed = order[sol.removed.0];
            // reduced network named as the original, letters in original order
            let keep: Vec<Letter> = m.letters().filter(|&a| a != removed).collect();
            let names: Vec<&str> = keep.iter().map(|&a| m.name(a)).collect();
            let reduced_id = |a: Letter| Letter(keep.iter().position(|&b| b == a).expect("kept"));
            let solved_net = &sol.params.network;
            let to_orig = |a: Letter| -> Letter {
                let ring_index: usize = solved_net.monoid().name(a)[1..].parse().expect("canonical name");
                order[ring_index]
            };
            let mut alphabets = Vec::new();
            let mut dists = Vec::new();
            for (j, d) in sol.params.dists.iter().enumerate() {
                alphabets.push(solved_net.alphabet(j).iter().map(|&a| reduced_id(to_orig(a))).collect());
                let entries = d.entries().iter().map(|&(a, w)| (reduced_id(to_orig(a)), w)).collect();
                dists.push(LocalDistribution::with_kind(entries, d.kind())?);
            }
            let reduced = AlphabetNetwork::new(&names, alphabets)?;
            let fr = psa_valuation(&reduced, &dists)?;
            let mut err = keep
                .iter()
                .enumerate()
                .map(|(j, &a)| (fr.weight(Letter(j)) - f.weight(a)).abs())
                .fold(0.0, f64::max);
            let extended = extend_valuation(m, removed, fr.weights())?;
            err = err.max(max_error(m, &extended, &f));
            let _ = writeln!(out, "# ring network, {} removed", m.name(removed));
            let _ = writeln!(out, "# psa valuation and its extension match targets: max error {err:.3e}");
            let _ = writeln!(out, "[network]\n{}", format_network(net));
            let _ = writeln!(out, "[reduced]\n{}", format_network(&reduced));
            let _ = writeln!(out, "{}", format_dists(&reduced, &dists));
            let _ = writeln!(out, "[run]\nalgorithm = pfsa\nletter = {}", m.name(removed));
        }
    }
    emit(&opts.out, &out)?;
    if opts.out.is_some() {
        for line in out.lines().take_while(|l| l.starts_with('#')) {
            println!("{}", &line[2..]);
        }
    }
    Ok(())
}

pub fn pfsa_config(cfg: &RunConfig, seed: u64) -> Result<PfsaConfig, Failure> {
    let m = cfg.network.monoid();
    let letter = cfg.run.letter.as_deref().ok_or_else(|| Failure::Usage("[run] letter is required".into()))?;
    let a = m.letter_or_err(letter)?;
    let reduced = cfg.reduced.clone().ok_or_else(|| Failure::Usage("missing reduced network".into()))?;
    let dists = cfg.dists.clone().ok_or_else(|| Failure::Usage("missing [dists]".into()))?;
    Ok(PfsaConfig::new(cfg.network.clone(), a, reduced, dists, seed)?)
}

pub fn dists_of(cfg: &RunConfig) -> Result<&[LocalDistribution], Failure> {
    cfg.dists.as_deref().ok_or_else(|| Failure::Usage("missing [dists]".into()))
}

fn walk_footer(out: &mut String, w: &WalkState, started: Instant) {
    let _ = writeln!(
        out,
        "# length={} height={} increments={} rejections={} wall_ms={:.3}",
        w.trace.len(),
        w.trace.height(),
        w.iterations,
        w.rejections,
        started.elapsed().as_secs_f64() * 1e3
    );
}

pub fn generate(cfg: &RunConfig, opts: &Options, increments: bool) -> CmdResult {
    let started = Instant::now();
    let net = &cfg.network;
    let m = net.monoid();
    let length = cfg.run.length.unwrap_or(DEFAULT_LENGTH);
    let mut out = String::new();
    let error = match cfg.run.algorithm.unwrap_or(Algorithm::Psa) {
        Algorithm::Psa => {
            let psa = Psa::new(net, dists_of(cfg)?)?;
            let master = RandomStream::new(opts.seed);
            let po = PsaOptions {
                budget: opts.budget.unwrap_or(DEFAULT_BUDGET),
                ..PsaOptions::default()
            };
            let runs = opts.samples.unwrap_or(1);
            let mut total = 0;
            let mut error = None;
            for k in 0..runs {
                match psa.run(&master.derive(k), &po) {
                    Ok(r) => {
                        let _ = writeln!(out, "# run {k}: {} length={}", r.status, r.trace.len());
                        out.push_str(&format_trace(m, &r.trace));
                        total += r.trace.len();
                    }
                    Err(e) => {
                        error = Some(e);
                        break;
                    }
                }
            }
            let _ = writeln!(
                out,
                "# runs={runs} length={total} increments=0 rejections=0 wall_ms={:.3}",
                started.elapsed().as_secs_f64() * 1e3
            );
            error
        }
        Algorithm::Pfsa => {
            let mut pc = pfsa_config(cfg, opts.seed)?;
            if let Some(b) = opts.budget {
                pc = pc.with_rejection_budget(b as u64);
            }
            let sampler = pc.sampler()?;
            let (w, error) = sampler.walk_partial(&RandomStream::new(opts.seed), length, increments);
            if increments {
                for inc in &w.increments {
                    out.push_str(&format_increment(m, inc));
                }
            } else {
                out.push_str(&format_trace(m, &w.trace));
            }
            walk_footer(&mut out, &w, started);
            error
        }
        Algorithm::Naive => {
            let walk = NaiveWalk::new(net, dists_of(cfg)?)?;
            let (w, error) = walk.walk_partial(&RandomStream::new(opts.seed), length);
            out.push_str(&format_trace(m, &w.trace));
            walk_footer(&mut out, &w, started);
            error
        }
    };
    if let Some(e) = &error {
        let _ = writeln!(out, "# error: {e}");
    }
    emit(&opts.out, &out)?;
    match error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// Forward iteration of the path equations, independent of the closed forms:
/// line `j` gives `t_j / (previous weight of b_j)` to `b_j` and the
/// complement to `b_{j+1}`, except the last line which gives `t_M` to `b_M`.
fn forward_path(t: &[f64]) -> Vec<(f64, f64)> {
    let lines = t.len() - 1;
    let mut out = Vec::with_capacity(lines);
    let mut prev = 1.0;
    for j in 0..lines {
        let first = t[j] / prev;
        let second = if j + 1 == lines { t[j + 1] } else { 1.0 - first };
        out.push((first, second));
        prev = second;
    }
    out
}

fn transform_gap(m: &TraceMonoid, f: &Valuation) -> Result<f64, Failure> {
    let direct = moebius_transform(m, f)?;
    let factored = moebius_transform_factored(m, f)?;
    let mut gap: f64 = 0.0;
    for &(c, h) in direct.values() {
        let g = factored.get(c).ok_or_else(|| Failure::Fail("clique missing from a transform".into()))?;
        gap = gap.max((h - g).abs());
    }
    Ok(gap)
}

pub fn oracle(cfg: &RunConfig, opts: &Options, horizon: usize) -> CmdResult {
    let net = &cfg.network;
    let m = net.monoid();
    let budget = opts.work_budget.unwrap_or(DEFAULT_WORK_BUDGET);
    let mut rows: Vec<(String, bool, String)> = Vec::new();

    let growth = growth_coefficients(m, horizon)?;
    let traces = m.enumerate_traces(horizon, budget)?;
    for (n, &g) in growth.iter().enumerate() {
        let count = traces.iter().filter(|x| x.len() == n).count() as u128;
        rows.push((format!("traces of length {n}"), count == g, format!("enumerated {count}, series {g}")));
    }

    let p0 = smallest_root(m)?;
    let mut valuations = vec![("uniform p0".to_string(), Valuation::uniform(m, p0)?)];
    if let Some(dists) = cfg.dists.as_ref().filter(|_| cfg.dists_network() == net) {
        valuations.push(("configured".into(), psa_valuation(net, dists)?));
    }
    if let Some(Targets::Explicit(f)) = &cfg.targets {
        valuations.push(("targets".into(), f.clone()));
    }
    for (name, f) in &valuations {
        let gap = transform_gap(m, f)?;
        rows.push((format!("transforms, {name}"), gap <= 1e-10, format!("max difference {gap:.3e}")));
    }

    if let Some(Topology::Path(order)) = detect(net).filter(|_| m.len() >= 2) {
        let f = match &cfg.targets {
            Some(Targets::Explicit(f)) => f.clone(),
            _ => uniform_targets(m)?,
        };
        let t: Vec<f64> = order.iter().map(|&a| f.weight(a)).collect();
        let solved = match classify_valuation(m, &f)? {
            ValuationClass::Moebius => Some(solve_path_bernoulli(&t)?),
            ValuationClass::SubMoebius => Some(solve_path_sub_bernoulli(&t)?),
            ValuationClass::Neither => None,
        };
        if let Some(s) = solved {
            let gap = s
                .dists
                .iter()
                .zip(forward_path(&t))
                .map(|(d, (x, y))| (d.entries()[0].1 - x).abs().max((d.entries()[1].1 - y).abs()))
                .fold(0.0, f64::max);
            rows.push(("solver, recurrence vs closed form".into(), gap <= 1e-10, format!("max difference {gap:.3e}")));
        }
    }

    let mut out = String::new();
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (name, ok, detail) in &rows {
        let _ = writeln!(out, "{name:<width$}  {}  {detail}", if *ok { "agree" } else { "DIFFER" });
    }
    let failed = rows.iter().filter(|r| !r.1).count();
    let _ = writeln!(out, "checks={} failed={failed}", rows.len());
    emit(&opts.out, &out)?;
    if failed > 0 {
        return Err(Failure::Fail(format!("{failed} oracle checks disagree")));
    }
    Ok(())
}

pub fn valuation_line(m: &TraceMonoid, f: &Valuation) -> String {
    format_valuation(m, f).trim_end().replace('\n', " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_ring4_reduced_path() {
        let q1 = 1.0 - 2f64.sqrt() / 2.0;
        let lines = forward_path(&[q1; 3]);
        assert!((lines[0].1 - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((lines[1].0 - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(lines[1].1, q1);
    }
}
